"""Symmetric quadrature rules on the reference triangle {(0,0), (1,0), (0,1)}.

Weights are normalized to sum to one, so ``area * sum(w * f(p))``
approximates the integral over any triangle.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import ceil

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    points: np.ndarray  # (nq, 3) barycentric
    weights: np.ndarray  # (nq,)
    exactness_degree: int

    @property
    def ref_points(self) -> np.ndarray:
        """Points in reference (xhat, yhat) coordinates."""
        return self.points[:, 1:3]

    def __len__(self) -> int:
        return len(self.weights)


def _orbit(bary):
    return sorted(set(itertools.permutations(bary)))


def _from_orbits(orbits, degree):
    pts, wts = [], []
    for bary, w in orbits:
        perms = _orbit(bary)
        pts.extend(perms)
        wts.extend([w] * len(perms))
    return QuadratureRule(np.array(pts, dtype=float), np.array(wts, dtype=float), degree)


def _s21(a):
    return (a, a, 1.0 - 2.0 * a)


def _s111(a, b):
    return (a, b, 1.0 - a - b)


_THIRD = 1.0 / 3.0

# Dunavant's positive-weight interior rules, written as symmetry orbits.
_TABLE = {
    1: [((_THIRD, _THIRD, _THIRD), 1.0)],
    2: [(_s21(1.0 / 6.0), 1.0 / 3.0)],
    4: [
        (_s21(0.445948490915965), 0.223381589678011),
        (_s21(0.091576213509771), 0.109951743655322),
    ],
    5: [
        ((_THIRD, _THIRD, _THIRD), 0.225),
        (_s21(0.470142064105115), 0.132394152788506),
        (_s21(0.101286507323456), 0.125939180544827),
    ],
    6: [
        (_s21(0.249286745170910), 0.116786275726379),
        (_s21(0.063089014491502), 0.050844906370207),
        (_s111(0.053145049844817, 0.310352451033784), 0.082851075618374),
    ],
}


def _polish(rule: QuadratureRule) -> QuadratureRule:
    """Rescale weights so they sum to one exactly (tables carry 15 digits)."""
    return QuadratureRule(rule.points, rule.weights / rule.weights.sum(), rule.exactness_degree)


@lru_cache(maxsize=None)
def collapsed_rule(q: int) -> QuadratureRule:
    """Symmetrized Gauss-Jacobi x Gauss-Legendre rule of any degree.

    The Duffy-collapsed tensor rule is exact for P_q with n = ceil((q+1)/2)
    points per direction; averaging it over the six vertex permutations keeps
    exactness and positivity and makes it fully symmetric.
    """
    if q < 1:
        raise ValueError(f"degree must be >= 1, got {q}")
    n = ceil((q + 1) / 2)
    xj, wj = roots_jacobi(n, 1.0, 0.0)
    xl, wl = roots_legendre(n)
    u = 0.5 * (1.0 + xj)
    v = 0.5 * (1.0 + xl)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ww = np.outer(wj / 4.0, wl / 2.0) * 2.0
    x = uu.ravel()
    y = (vv * (1.0 - uu)).ravel()
    bary = np.column_stack([1.0 - x - y, x, y])
    w = ww.ravel()
    perms = list(itertools.permutations(range(3)))
    pts = np.concatenate([bary[:, p] for p in perms])
    wts = np.concatenate([w] * len(perms)) / len(perms)
    return QuadratureRule(pts, wts, 2 * n - 1)


@lru_cache(maxsize=None)
def rule_for_degree(q: int) -> QuadratureRule:
    """Smallest available rule with exactness degree >= q, for 1 <= q <= 10."""
    if not isinstance(q, (int, np.integer)) or not 1 <= q <= 10:
        raise ValueError(f"quadrature degree must be an integer in [1, 10], got {q!r}")
    for degree in sorted(_TABLE):
        if degree >= q:
            return _polish(_from_orbits(_TABLE[degree], degree))
    return collapsed_rule(int(q))


def monomial_integral(a: int, b: int) -> float:
    """Exact integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!."""
    from math import factorial

    return factorial(a) * factorial(b) / factorial(a + b + 2)


def integrate_reference(rule: QuadratureRule, func) -> float:
    """Integrate ``func(x, y)`` over the reference triangle (area 1/2)."""
    x, y = rule.ref_points.T
    return 0.5 * float(np.dot(rule.weights, func(x, y)))
