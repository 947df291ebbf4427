"""Structured triangulation of the unit square."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangulation of [0,1]^2.

    Attributes
    ----------
    vertices : (V, 2) float array
    triangles : (T, 3) int array, counterclockwise
    edges : (E, 2) int array, lower vertex index first
    boundary_edges : (E,) bool array
    h : float
        Side length of the subdivided squares.
    tri_edges : (T, 3) int array
        Global edge index of local edges (0,1), (1,2), (2,0).
    """

    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    boundary_edges: np.ndarray
    h: float
    n: int
    tri_edges: np.ndarray = field(repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def locate(self, points) -> np.ndarray:
        """Index of a triangle containing each point of `points` (shape (N, 2))."""
        pts = np.asarray(points, dtype=float)
        n = self.n
        ij = np.clip(np.floor(pts * n).astype(int), 0, n - 1)
        i, j = ij[:, 0], ij[:, 1]
        local = pts - ij * self.h
        # lower-right triangle {LL, LR, UR} sits below the diagonal
        upper = local[:, 1] > local[:, 0]
        return 2 * (j * n + i) + upper.astype(int)


def build_uniform_square_mesh(n_cells_per_side: int) -> Mesh:
    """Split each h x h square by its positive-slope diagonal.

    Vertices are numbered row-major, ``index = j * (n + 1) + i``.
    """
    n = int(n_cells_per_side)
    if n != n_cells_per_side or n < 1:
        raise ValueError(f"n_cells_per_side must be a positive integer, got {n_cells_per_side!r}")
    h = 1.0 / n
    coords = np.arange(n + 1) / n
    xx, yy = np.meshgrid(coords, coords)
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    jj, ii = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    ll = (jj * (n + 1) + ii).ravel()
    lr = ll + 1
    ul = ll + n + 1
    ur = ul + 1
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = np.column_stack([ll, lr, ur])
    triangles[1::2] = np.column_stack([ll, ur, ul])

    local = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    local.sort(axis=1)
    edges, inverse, counts = np.unique(local, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    n_tri = len(triangles)
    tri_edges = inverse.reshape(3, n_tri).T.copy()
    boundary = counts == 1

    return Mesh(
        vertices=vertices,
        triangles=triangles,
        edges=edges,
        boundary_edges=boundary,
        h=h,
        n=n,
        tri_edges=tri_edges,
    )


def affine_map(mesh: Mesh, tri_index: int):
    """Return (B, b) with x = B @ xhat + b mapping the reference triangle onto a mesh triangle."""
    p = mesh.vertices[mesh.triangles[tri_index]]
    b = p[0].copy()
    B = np.column_stack([p[1] - p[0], p[2] - p[0]])
    return B, b


def affine_maps(mesh: Mesh):
    """Vectorized `affine_map` over all triangles: (T, 2, 2) and (T, 2)."""
    p = mesh.vertices[mesh.triangles]
    B = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=-1)
    return B, p[:, 0].copy()


def validate_mesh(mesh: Mesh, atol: float = 1e-14) -> None:
    """Raise AssertionError if any structural invariant of `mesh` fails."""
    v = mesh.vertices
    assert np.all((v >= -atol) & (v <= 1 + atol)), "vertex outside unit square"
    areas = mesh.signed_areas()
    assert np.allclose(areas, 0.5 * mesh.h**2, rtol=0, atol=atol), "triangle area != h^2/2"
    assert np.all(mesh.edges[:, 0] < mesh.edges[:, 1]), "edge not oriented low-to-high"

    counts = np.bincount(mesh.tri_edges.ravel(), minlength=mesh.n_edges)
    assert np.all((counts == 1) | (counts == 2)), "non-conforming edge"
    assert np.array_equal(counts == 1, mesh.boundary_edges), "boundary flags inconsistent"

    ends = v[mesh.edges[mesh.boundary_edges]]
    on_side = [
        np.all(np.isclose(ends[:, :, k], c, atol=atol), axis=1) for k in (0, 1) for c in (0.0, 1.0)
    ]
    assert np.all(np.any(on_side, axis=0)), "boundary edge not on the square boundary"

    euler = mesh.n_vertices - mesh.n_edges + mesh.n_triangles
    assert euler == 1, f"Euler characteristic {euler} != 1"


def write_mesh_csv(mesh: Mesh, path) -> None:
    """Write a vertex section (index,x,y) followed by a triangle section (index,v0,v1,v2)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "x", "y"])
        for k, (x, y) in enumerate(mesh.vertices):
            w.writerow([k, f"{x:.17g}", f"{y:.17g}"])
        w.writerow([])
        w.writerow(["index", "v0", "v1", "v2"])
        for k, tri in enumerate(mesh.triangles):
            w.writerow([k, *map(int, tri)])
