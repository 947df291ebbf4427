"""Error norms, convergence rates and convexity diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fe_space import FeFunction, element_derivatives
from .linalg import Sym2, eig2
from .quadrature import QuadratureRule, rule_for_degree


@dataclass(frozen=True)
class ErrorReport:
    l2_error: float
    h1_error: float
    broken_h1_error: float
    h: float
    min_lambda1: float
    max_lambda2: float


def error_rule(degree: int) -> QuadratureRule:
    """Rule of degree 2d + 2 used for error integrals."""
    return rule_for_degree(min(2 * degree + 2, 10))


def error_norms(u_h: FeFunction, exact_u, exact_grad_u, rule: QuadratureRule | None = None) -> ErrorReport:
    """L^2, H^1 and broken H^1 norms of ``exact - u_h``.

    The H^1 norm includes the L^2 part.  The broken norm sums full H^1
    norms element by element; for a continuous ``u_h`` it coincides with
    the global one.
    """
    space = u_h.space
    rule = rule if rule is not None else error_rule(space.degree)
    val, grad, hess = element_derivatives(u_h, rule.points)
    pts = space.physical_points(rule.points)
    x, y = pts[..., 0], pts[..., 1]
    ev = np.asarray(exact_u(x, y), dtype=float) - val
    gx, gy = exact_grad_u(x, y)
    egx = np.asarray(gx, dtype=float) - grad[..., 0]
    egy = np.asarray(gy, dtype=float) - grad[..., 1]
    wa = space.areas[:, None] * rule.weights[None, :]
    l2_k = (wa * ev * ev).sum(axis=1)
    semi_k = (wa * (egx * egx + egy * egy)).sum(axis=1)
    l2 = math.sqrt(l2_k.sum())
    h1 = math.sqrt(l2_k.sum() + semi_k.sum())
    broken = math.sqrt(np.sum(np.sqrt(l2_k + semi_k) ** 2))
    lam1, lam2 = eig2(Sym2.from_matrix(hess))
    return ErrorReport(
        l2_error=l2,
        h1_error=h1,
        broken_h1_error=broken,
        h=space.mesh.h,
        min_lambda1=float(np.min(lam1)),
        max_lambda2=float(np.max(lam2)),
    )


def convergence_rates(errors, floor: float = 0.0):
    """Observed orders log(e_{k-1}/e_k) / log(h_{k-1}/h_k) for a list of (h, e) pairs.

    The first entry has no predecessor and, like any pair with an error
    that is non-finite or not above `floor`, gets ``nan`` (undefined rate).
    """
    if not errors:
        return []
    rates = [math.nan]
    for (h0, e0), (h1, e1) in zip(errors[:-1], errors[1:]):
        try:
            h0, e0, h1, e1 = (float(v) for v in (h0, e0, h1, e1))
        except (TypeError, ValueError):
            rates.append(math.nan)
            continue
        ok = all(np.isfinite([h0, e0, h1, e1])) and e0 > floor and e1 > floor and h0 > 0 and h1 > 0 and h0 != h1
        rates.append(math.log(e0 / e1) / math.log(h0 / h1) if ok else math.nan)
    return rates


def convexity_report(u_h: FeFunction, rule: QuadratureRule):
    """(min lambda1, max lambda2, number of elements with lambda1 <= 0 somewhere)."""
    _, _, hess = element_derivatives(u_h, rule.points)
    lam1, lam2 = eig2(Sym2.from_matrix(hess))
    flagged = int(np.count_nonzero(np.any(lam1 <= 0, axis=1)))
    return float(np.min(lam1)), float(np.max(lam2)), flagged
