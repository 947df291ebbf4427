"""Benchmark Dirichlet problems for det D^2 u = f on the unit square."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class Problem:
    """Source `f >= 0`, boundary data `g`, and optionally the exact solution.

    All callables take coordinate arrays ``(x, y)`` and are applied
    elementwise; `exact_grad_u` returns a pair ``(u_x, u_y)``.
    """

    f: Callable
    g: Callable
    exact_u: Optional[Callable] = None
    exact_grad_u: Optional[Callable] = None
    name: str = "custom"

    @property
    def has_exact(self) -> bool:
        return self.exact_u is not None and self.exact_grad_u is not None


def _smooth_u(x, y):
    return np.exp(0.5 * (x * x + y * y))


def _smooth_grad(x, y):
    u = _smooth_u(x, y)
    return x * u, y * u


def _smooth_f(x, y):
    r2 = x * x + y * y
    return np.exp(r2) * (1.0 + r2)


def _sphere_u(x, y):
    return -np.sqrt(2.0 - x * x - y * y)


def _sphere_grad(x, y):
    s = np.sqrt(2.0 - x * x - y * y)
    return x / s, y / s


def _sphere_f(x, y):
    return 2.0 / (2.0 - x * x - y * y) ** 2


def _quadratic_u(x, y):
    return 0.5 * (x * x + y * y)


def _ones(x, y):
    return np.ones_like(np.asarray(x + y, dtype=float))


def _zeros(x, y):
    return np.zeros_like(np.asarray(x + y, dtype=float))


TEST1 = Problem(_smooth_f, _smooth_u, _smooth_u, _smooth_grad, name="test1")
"""Smooth solution u = exp((x^2 + y^2)/2)."""

TEST2 = Problem(_sphere_f, _sphere_u, _sphere_u, _sphere_grad, name="test2")
"""u = -sqrt(2 - x^2 - y^2): gradient blows up at the corner (1, 1), so u is not in H^2."""

TEST3 = Problem(_ones, _zeros, name="test3")
"""f = 1 with homogeneous boundary data; no closed-form solution."""

QUADRATIC = Problem(_ones, _quadratic_u, _quadratic_u, lambda x, y: (x, y), name="quadratic")
"""u = (x^2 + y^2)/2 lies in every V_h with d >= 2 and solves the f = 1 problem exactly."""

REGISTRY = {
    "1": TEST1,
    "2": TEST2,
    "3": TEST3,
    "test1": TEST1,
    "test2": TEST2,
    "test3": TEST3,
    "quadratic": QUADRATIC,
}


def get_problem(key) -> Problem:
    try:
        return REGISTRY[str(key).lower()]
    except KeyError:
        raise KeyError(f"unknown problem {key!r}; choose from {sorted(set(REGISTRY))}") from None
