"""Lagrange elements of degree 2 and 3 on triangles.

Local node order: the three vertices, then the edge nodes of local edges
(0,1), (1,2), (2,0) walked from the first vertex to the second, then
interior nodes.  Every basis function is a product of affine factors in the
barycentric coordinates, which keeps first and second derivatives exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import Sym2
from .mesh import Mesh, affine_maps

SUPPORTED_DEGREES = (2, 3)

# d lambda / d(xhat, yhat) for lambda = (1 - xhat - yhat, xhat, yhat)
_DLAMBDA = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])

_LOCAL_EDGES = ((0, 1), (1, 2), (2, 0))


def _factors(d: int):
    """Basis functions as (constant, [(bary index, slope, offset), ...]).

    Each factor is ``slope * lambda[index] + offset``.
    """
    if d == 2:
        basis = [(1.0, [(i, 1.0, 0.0), (i, 2.0, -1.0)]) for i in range(3)]
        basis += [(4.0, [(i, 1.0, 0.0), (j, 1.0, 0.0)]) for i, j in _LOCAL_EDGES]
        return basis
    if d == 3:
        basis = [(0.5, [(i, 1.0, 0.0), (i, 3.0, -1.0), (i, 3.0, -2.0)]) for i in range(3)]
        for i, j in _LOCAL_EDGES:
            # node at 2/3 lambda_i + 1/3 lambda_j, then 1/3 lambda_i + 2/3 lambda_j
            basis.append((4.5, [(i, 1.0, 0.0), (j, 1.0, 0.0), (i, 3.0, -1.0)]))
            basis.append((4.5, [(i, 1.0, 0.0), (j, 1.0, 0.0), (j, 3.0, -1.0)]))
        basis.append((27.0, [(0, 1.0, 0.0), (1, 1.0, 0.0), (2, 1.0, 0.0)]))
        return basis
    raise ValueError(f"unsupported degree {d!r}; expected one of {SUPPORTED_DEGREES}")


def reference_nodes(d: int) -> np.ndarray:
    """Barycentric coordinates of the local nodes, shape (n_basis, 3)."""
    if d not in SUPPORTED_DEGREES:
        raise ValueError(f"unsupported degree {d!r}; expected one of {SUPPORTED_DEGREES}")
    nodes = [tuple(np.eye(3)[i]) for i in range(3)]
    for i, j in _LOCAL_EDGES:
        for k in range(1, d):
            p = np.zeros(3)
            p[i] = (d - k) / d
            p[j] = k / d
            nodes.append(tuple(p))
    if d == 3:
        nodes.append((1 / 3, 1 / 3, 1 / 3))
    return np.array(nodes)


def reference_basis(d: int, points):
    """Basis values, reference gradients and reference Hessians.

    Parameters
    ----------
    d : int
        Polynomial degree (2 or 3).
    points : array_like, shape (3,) or (nq, 3)
        Barycentric evaluation points.

    Returns
    -------
    values : (nq, nb)
    gradients : (nq, nb, 2)
    hessians : (nq, nb, 2, 2)

    A single point yields arrays without the leading axis.
    """
    basis = _factors(d)
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    nq, nb = len(pts), len(basis)
    vals = np.empty((nq, nb))
    grad_l = np.zeros((nq, nb, 3))
    hess_l = np.zeros((nq, nb, 3, 3))
    for b, (c, factors) in enumerate(basis):
        f = [slope * pts[:, idx] + off for idx, slope, off in factors]
        vals[:, b] = c * np.prod(f, axis=0)
        for p, (ip, sp_, _) in enumerate(factors):
            others = [f[k] for k in range(len(f)) if k != p]
            grad_l[:, b, ip] += c * sp_ * np.prod(others, axis=0)
            for r, (ir, sr, _) in enumerate(factors):
                if r == p:
                    continue
                rest = [f[k] for k in range(len(f)) if k not in (p, r)]
                hess_l[:, b, ip, ir] += c * sp_ * sr * np.prod(rest, axis=0)
    grads = grad_l @ _DLAMBDA
    hess = np.einsum("ai,qnab,bj->qnij", _DLAMBDA, hess_l, _DLAMBDA, optimize=True)
    if single:
        return vals[0], grads[0], hess[0]
    return vals, grads, hess


@lru_cache(maxsize=None)
def _tabulate_cached(d: int, key: bytes, shape: tuple):
    pts = np.frombuffer(key).reshape(shape)
    out = reference_basis(d, pts)
    for a in out:
        a.setflags(write=False)
    return out


def tabulate(d: int, points):
    """Cached `reference_basis` for a fixed point set (e.g. a quadrature rule)."""
    pts = np.ascontiguousarray(points, dtype=float)
    return _tabulate_cached(d, pts.tobytes(), pts.shape)


@dataclass(frozen=True, eq=False)
class FeSpace:
    """Continuous Lagrange space on a triangulation.

    Global numbering: vertices, then ``d - 1`` nodes per edge ordered from
    the lower to the higher vertex index, then interior nodes element by
    element.
    """

    mesh: Mesh
    degree: int
    cell_dofs: np.ndarray  # (T, nb)
    nodes: np.ndarray  # (n_dof, 2)
    boundary_dofs: np.ndarray  # sorted int array
    B: np.ndarray  # (T, 2, 2) affine Jacobians
    Binv: np.ndarray
    offsets: np.ndarray  # (T, 2)
    areas: np.ndarray

    @property
    def n_dof(self) -> int:
        return len(self.nodes)

    @property
    def n_basis(self) -> int:
        return self.cell_dofs.shape[1]

    @property
    def interior_dofs(self) -> np.ndarray:
        mask = np.ones(self.n_dof, dtype=bool)
        mask[self.boundary_dofs] = False
        return np.flatnonzero(mask)

    def physical_points(self, bary) -> np.ndarray:
        """Physical coordinates of barycentric points in every element: (T, nq, 2)."""
        ref = np.atleast_2d(bary)[:, 1:3]
        return np.einsum("tij,qj->tqi", self.B, ref) + self.offsets[:, None, :]


def build_space(mesh: Mesh, d: int) -> FeSpace:
    if d not in SUPPORTED_DEGREES:
        raise ValueError(f"unsupported degree {d!r}; expected one of {SUPPORTED_DEGREES}")
    V, E, T = mesh.n_vertices, mesh.n_edges, mesh.n_triangles
    n_int = (d - 1) * (d - 2) // 2
    nb = (d + 1) * (d + 2) // 2
    tris = mesh.triangles
    cell_dofs = np.empty((T, nb), dtype=np.int64)
    cell_dofs[:, :3] = tris

    col = 3
    for le, (i, j) in enumerate(_LOCAL_EDGES):
        g = mesh.tri_edges[:, le]
        forward = tris[:, i] < tris[:, j]
        for k in range(d - 1):
            # global edge node k counts from the lower vertex
            kk = np.where(forward, k, d - 2 - k)
            cell_dofs[:, col] = V + (d - 1) * g + kk
            col += 1
    if n_int:
        cell_dofs[:, col:] = V + (d - 1) * E + np.arange(T * n_int).reshape(T, n_int)

    n_dof = V + (d - 1) * E + n_int * T
    B, offsets = affine_maps(mesh)
    ref_nodes = reference_nodes(d)
    phys = np.einsum("tij,qj->tqi", B, ref_nodes[:, 1:3]) + offsets[:, None, :]
    nodes = np.empty((n_dof, 2))
    nodes[cell_dofs.ravel()] = phys.reshape(-1, 2)

    edge_bnd = np.flatnonzero(mesh.boundary_edges)
    vert_bnd = np.unique(mesh.edges[edge_bnd])
    edge_nodes = (V + (d - 1) * edge_bnd[:, None] + np.arange(d - 1)).ravel()
    boundary = np.union1d(vert_bnd, edge_nodes)

    detB = B[:, 0, 0] * B[:, 1, 1] - B[:, 0, 1] * B[:, 1, 0]
    return FeSpace(
        mesh=mesh,
        degree=d,
        cell_dofs=cell_dofs,
        nodes=nodes,
        boundary_dofs=boundary,
        B=B,
        Binv=np.linalg.inv(B),
        offsets=offsets,
        areas=0.5 * detB,
    )


@dataclass(eq=False)
class FeFunction:
    space: FeSpace
    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if self.coefficients.shape != (self.space.n_dof,):
            raise ValueError(
                f"expected {self.space.n_dof} coefficients, got shape {self.coefficients.shape}"
            )

    def copy(self) -> "FeFunction":
        return FeFunction(self.space, self.coefficients.copy())


def interpolate(space: FeSpace, w) -> FeFunction:
    """Nodal interpolant: coefficient i is ``w(x_i, y_i)``; `w` is called vectorized."""
    x, y = space.nodes.T
    vals = np.broadcast_to(np.asarray(w(x, y), dtype=float), x.shape).copy()
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        k = int(bad[0])
        raise ValueError(f"non-finite value {vals[k]!r} at node {k} {tuple(space.nodes[k])}")
    return FeFunction(space, vals)


def element_derivatives(u: FeFunction, bary, cells=None):
    """Values, physical gradients and Hessians of `u` at barycentric points.

    Returns arrays of shape (T, nq), (T, nq, 2) and (T, nq, 2, 2) over the
    selected `cells` (all by default).  Hessians are computed element by
    element: ``B^-T Dhat^2 B^-1``.
    """
    space = u.space
    vals, grads, hess = tabulate(space.degree, np.atleast_2d(bary))
    dofs = space.cell_dofs if cells is None else space.cell_dofs[cells]
    Binv = space.Binv if cells is None else space.Binv[cells]
    c = u.coefficients[dofs]
    val = c @ vals.T
    g_ref = np.einsum("tb,qbi->tqi", c, grads)
    h_ref = np.einsum("tb,qbij->tqij", c, hess)
    g = np.einsum("tji,tqj->tqi", Binv, g_ref)
    h = np.einsum("tki,tqkl,tlj->tqij", Binv, h_ref, Binv, optimize=True)
    return val, g, h


def evaluate(u: FeFunction, tri_index: int, point):
    """Value, gradient and Hessian (`Sym2`) of `u` at one barycentric point of one element."""
    val, g, h = element_derivatives(u, np.asarray(point, dtype=float)[None, :], cells=[tri_index])
    return float(val[0, 0]), g[0, 0], Sym2.from_matrix(h[0, 0])


def evaluate_at_points(u: FeFunction, points) -> np.ndarray:
    """Point values of `u` at physical coordinates (N, 2) inside the unit square."""
    pts = np.asarray(points, dtype=float)
    space = u.space
    cells = space.mesh.locate(pts)
    ref = np.einsum("nij,nj->ni", space.Binv[cells], pts - space.offsets[cells])
    bary = np.column_stack([1.0 - ref.sum(axis=1), ref])
    vals = reference_basis(space.degree, bary)[0]
    return np.einsum("nb,nb->n", vals, u.coefficients[space.cell_dofs[cells]])
