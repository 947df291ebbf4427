"""2x2 symmetric matrix calculus and sparse SPD factorization.

`Sym2` fields may be scalars or numpy arrays of a common shape, so every
function here works pointwise on whole batches of Hessians.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class NotSPDError(np.linalg.LinAlgError):
    """Raised when a factorization meets a non-positive pivot."""

    def __init__(self, row: int, pivot: float):
        self.row = row
        self.pivot = pivot
        super().__init__(f"matrix not SPD: pivot {pivot!r} at row {row}")


class Sym2(NamedTuple):
    a11: np.ndarray | float
    a12: np.ndarray | float
    a22: np.ndarray | float

    @classmethod
    def from_matrix(cls, m) -> "Sym2":
        """Build from an array of shape (..., 2, 2); the upper off-diagonal is used."""
        m = np.asarray(m, dtype=float)
        return cls(m[..., 0, 0], m[..., 0, 1], m[..., 1, 1])

    def to_matrix(self) -> np.ndarray:
        a11, a12, a22 = np.broadcast_arrays(*map(np.asarray, self))
        return np.stack([np.stack([a11, a12], -1), np.stack([a12, a22], -1)], -2)

    def __add__(self, other):
        return Sym2(self.a11 + other.a11, self.a12 + other.a12, self.a22 + other.a22)

    def __sub__(self, other):
        return Sym2(self.a11 - other.a11, self.a12 - other.a12, self.a22 - other.a22)

    def scale(self, s) -> "Sym2":
        return Sym2(s * self.a11, s * self.a12, s * self.a22)


def det2(m: Sym2):
    return m.a11 * m.a22 - m.a12 * m.a12


def cof2(m: Sym2) -> Sym2:
    return Sym2(m.a22, -m.a12, m.a11)


def frobenius(a: Sym2, b: Sym2):
    """Double contraction A : B of two symmetric matrices."""
    return a.a11 * b.a11 + 2.0 * a.a12 * b.a12 + a.a22 * b.a22


def eig2(m: Sym2):
    """Eigenvalues (lam1 <= lam2) of a symmetric 2x2 matrix in closed form."""
    a11 = np.asarray(m.a11, dtype=float)
    a12 = np.asarray(m.a12, dtype=float)
    a22 = np.asarray(m.a22, dtype=float)
    mean = 0.5 * (a11 + a22)
    # hypot keeps the radius accurate when a12 is tiny relative to the diagonal gap
    radius = np.hypot(0.5 * (a11 - a22), a12)
    lam2 = mean + radius
    # lam1 from det/lam2 avoids cancellation when mean ~ radius
    det = a11 * a22 - a12 * a12
    with np.errstate(divide="ignore", invalid="ignore"):
        lam1 = np.where(np.abs(lam2) > np.abs(mean - radius), det / lam2, mean - radius)
    lam1 = np.where(np.isfinite(lam1), lam1, mean - radius)
    if lam1.ndim == 0:
        return float(lam1), float(lam2)
    return lam1, lam2


class SpdFactorization:
    """Factor-once handle for a sparse SPD matrix.

    Backed by SuperLU with a symmetric fill-reducing ordering and diagonal
    pivoting only, which makes the U diagonal the LDL^T pivots; positive
    definiteness is checked on those pivots.
    """

    def __init__(self, matrix):
        a = sp.csc_matrix(matrix, dtype=float)
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"matrix must be square, got {a.shape}")
        self.shape = a.shape
        self._matrix = a
        self._lu = spla.splu(
            a,
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
        pivots = self._lu.U.diagonal()
        scale = max(float(np.abs(pivots).max(initial=0.0)), 1.0)
        bad = np.flatnonzero(~(pivots > 1e-14 * scale))
        if bad.size:
            k = int(bad[0])
            raise NotSPDError(int(self._lu.perm_c[k]), float(pivots[k]))

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        x = self._lu.solve(b)
        # one step of iterative refinement keeps the residual at roundoff level
        r = b - self._matrix @ x
        return x + self._lu.solve(r)


def spd_factorize(matrix) -> SpdFactorization:
    return SpdFactorization(matrix)


def spd_solve(factorization: SpdFactorization, b) -> np.ndarray:
    return factorization.solve(b)
