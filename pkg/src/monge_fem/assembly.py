"""Global assembly: stiffness, mass, loads, the Monge-Ampere functional, Dirichlet elimination."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fe_space import FeFunction, FeSpace, element_derivatives, tabulate
from .linalg import Sym2, det2
from .quadrature import QuadratureRule


def _scatter_matrix(space: FeSpace, blocks: np.ndarray) -> sp.csr_matrix:
    dofs = space.cell_dofs
    nb = dofs.shape[1]
    rows = np.repeat(dofs, nb, axis=1).ravel()
    cols = np.tile(dofs, (1, nb)).ravel()
    n = space.n_dof
    # duplicate (i, j) pairs are summed on conversion
    return sp.coo_matrix((blocks.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def _scatter_vector(space: FeSpace, local: np.ndarray) -> np.ndarray:
    return np.bincount(space.cell_dofs.ravel(), weights=local.ravel(), minlength=space.n_dof)


def _physical_gradients(space: FeSpace, rule: QuadratureRule) -> np.ndarray:
    _, grads, _ = tabulate(space.degree, rule.points)
    return np.einsum("tji,qbj->tqbi", space.Binv, grads)


def assemble_stiffness(space: FeSpace, rule: QuadratureRule) -> sp.csr_matrix:
    """Matrix of the Laplacian form: A_ij = sum_K int_K grad phi_j . grad phi_i."""
    if rule.exactness_degree < 2 * (space.degree - 1):
        raise ValueError(
            f"rule of degree {rule.exactness_degree} is not exact for degree-{space.degree} stiffness"
        )
    g = _physical_gradients(space, rule)
    wa = space.areas[:, None] * rule.weights[None, :]
    blocks = np.einsum("tq,tqai,tqbi->tab", wa, g, g, optimize=True)
    return _scatter_matrix(space, blocks)


def assemble_mass(space: FeSpace, rule: QuadratureRule) -> sp.csr_matrix:
    vals, _, _ = tabulate(space.degree, rule.points)
    local = np.einsum("q,qa,qb->ab", rule.weights, vals, vals)
    blocks = space.areas[:, None, None] * local[None]
    return _scatter_matrix(space, blocks)


def quadrature_values(space: FeSpace, rule: QuadratureRule, f) -> np.ndarray:
    pts = space.physical_points(rule.points)
    vals = np.broadcast_to(np.asarray(f(pts[..., 0], pts[..., 1]), dtype=float), pts.shape[:2])
    bad = ~np.isfinite(vals)
    if bad.any():
        t, q = np.argwhere(bad)[0]
        raise ValueError(f"non-finite data value {vals[t, q]!r} at point {tuple(pts[t, q])}")
    return vals


def integrate_against_basis(space: FeSpace, rule: QuadratureRule, integrand) -> np.ndarray:
    """Vector of sum_K int_K q phi_i for `integrand` q given at quadrature points, shape (T, nq)."""
    vals, _, _ = tabulate(space.degree, rule.points)
    wa = space.areas[:, None] * rule.weights[None, :]
    return _scatter_vector(space, (wa * integrand) @ vals)


def assemble_load(space: FeSpace, rule: QuadratureRule, f) -> np.ndarray:
    """b_i = sum_K int_K f phi_i; `f(x, y)` is evaluated on arrays of quadrature points."""
    return integrate_against_basis(space, rule, quadrature_values(space, rule, f))


def hessian_at_quadrature(u: FeFunction, rule: QuadratureRule) -> Sym2:
    _, _, h = element_derivatives(u, rule.points)
    return Sym2.from_matrix(h)


def assemble_ma_functional(space: FeSpace, rule: QuadratureRule, u: FeFunction) -> np.ndarray:
    """N(u)_i = sum_K int_K det(D^2 u|_K) phi_i."""
    return integrate_against_basis(space, rule, det2(hessian_at_quadrature(u, rule)))


def truncate(x, m: float):
    """Clamp to [-m, m]."""
    return np.clip(x, -m, m)


def assemble_ma_truncated(space: FeSpace, rule: QuadratureRule, u: FeFunction, f, m: float) -> np.ndarray:
    """Entry i = sum_K int_K chi_m(det D^2 u - f) phi_i, clamped pointwise."""
    if not m > 0:
        raise ValueError(f"truncation level must be positive, got {m!r}")
    residual = det2(hessian_at_quadrature(u, rule)) - quadrature_values(space, rule, f)
    return integrate_against_basis(space, rule, truncate(residual, m))


@dataclass(eq=False)
class DirichletSystem:
    """Interior block of a system after symmetric elimination of boundary DOFs."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    interior: np.ndarray
    boundary: np.ndarray
    boundary_values: np.ndarray
    n_dof: int

    def expand(self, interior_values) -> np.ndarray:
        full = np.empty(self.n_dof)
        full[self.interior] = interior_values
        full[self.boundary] = self.boundary_values
        return full


def apply_dirichlet(A, rhs, space: FeSpace, g_h) -> DirichletSystem:
    """Eliminate boundary DOFs: rhs_I - A_IB g_h against the SPD block A_II.

    `g_h` is either a full-length vector (boundary entries are used) or a
    vector over `space.boundary_dofs`.
    """
    A = sp.csr_matrix(A)
    interior, boundary = space.interior_dofs, space.boundary_dofs
    g_h = np.asarray(g_h, dtype=float)
    gb = g_h[boundary] if g_h.shape == (space.n_dof,) else g_h
    if gb.shape != boundary.shape:
        raise ValueError(f"boundary data has shape {g_h.shape}, expected {boundary.shape}")
    A_ii = A[interior][:, interior]
    A_ib = A[interior][:, boundary]
    reduced = np.asarray(rhs, dtype=float)[interior] - A_ib @ gb
    return DirichletSystem(A_ii.tocsr(), reduced, interior, boundary, gb.copy(), space.n_dof)
