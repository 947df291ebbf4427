"""Laplacian-preconditioned time marching for the discrete Monge-Ampere problem.

Each step solves one Poisson problem with the current Monge-Ampere residual
as forcing::

    (nu / alpha) A u^{k+1} = (nu / alpha) A u^k + N(u^k) - F     on interior DOFs

with ``u^{k+1} = g_h`` on the boundary.  The Laplacian block is factorized
once per mesh.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .assembly import (
    apply_dirichlet,
    assemble_load,
    assemble_ma_functional,
    assemble_ma_truncated,
    assemble_mass,
    assemble_stiffness,
    hessian_at_quadrature,
    integrate_against_basis,
    quadrature_values,
    truncate,
)
from .fe_space import FeFunction, FeSpace, build_space, interpolate
from .linalg import SpdFactorization, det2, eig2
from .mesh import Mesh
from .problems import Problem
from .quadrature import QuadratureRule, rule_for_degree

logger = logging.getLogger(__name__)

INIT_MODES = ("poisson-sqrt", "zero-data")


@dataclass
class SolverConfig:
    nu: float = 50.0
    alpha: float = 1.0
    degree: int = 2
    quad_degree: Optional[int] = None
    truncation: Optional[float] = None
    tol: float = 1e-10
    max_iters: Optional[int] = None
    initial_guess: str = "poisson-sqrt"
    divergence_factor: float = 1e6

    def validate(self) -> "SolverConfig":
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu!r}")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        if self.truncation is not None and not self.truncation > 0:
            raise ValueError(f"truncation must be positive, got {self.truncation!r}")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters!r}")
        if self.initial_guess not in INIT_MODES and not isinstance(self.initial_guess, FeFunction):
            raise ValueError(f"initial_guess must be one of {INIT_MODES} or an FeFunction")
        return self

    def quadrature_degree(self) -> int:
        return self.quad_degree if self.quad_degree is not None else 2 * self.degree

    def iteration_cap(self, h: float) -> int:
        if self.max_iters is not None:
            return int(self.max_iters)
        return max(1, int(10 * math.ceil(1.0 / h) * self.nu))


@dataclass
class IterationReport:
    increments: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    min_eigenvalues: list = field(default_factory=list)
    max_eigenvalues: list = field(default_factory=list)
    status: str = "running"
    residual_bound: float = math.nan
    final_residual: float = math.nan

    @property
    def n_iters(self) -> int:
        return len(self.increments)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def contraction_ratios(self) -> np.ndarray:
        inc = np.asarray(self.increments)
        return inc[1:] / inc[:-1]

    def rows(self):
        """Per-iteration telemetry as tuples (iter, increment, residual, min_lam1, max_lam2)."""
        return list(
            zip(
                range(1, self.n_iters + 1),
                self.increments,
                self.residuals,
                self.min_eigenvalues,
                self.max_eigenvalues,
            )
        )


class DivergenceError(RuntimeError):
    def __init__(self, message: str, report: IterationReport):
        super().__init__(message)
        self.report = report


class MarchingOperator:
    """Everything that stays fixed across time-marching steps on one mesh.

    Holds the stiffness and mass matrices, the factorized interior Laplacian
    block, the data load vector and the boundary values ``g_h``.
    """

    def __init__(self, space: FeSpace, rule: QuadratureRule, problem: Problem):
        self.space = space
        self.rule = rule
        self.problem = problem
        self.stiffness = assemble_stiffness(space, rule)
        self.mass = assemble_mass(space, rule)
        self.h1_matrix = (self.stiffness + self.mass).tocsr()
        self.f_quad = quadrature_values(space, rule, problem.f)
        self.load = integrate_against_basis(space, rule, self.f_quad)
        self.interior = space.interior_dofs
        self.boundary = space.boundary_dofs
        g_full = interpolate(space, problem.g).coefficients
        self.g_h = g_full[self.boundary]
        self.laplacian = self.stiffness[self.interior][:, self.interior].tocsr()
        self.factorization = SpdFactorization(self.laplacian)
        self.stiffness_norm = float(abs(self.stiffness).sum(axis=1).max())

    @classmethod
    def build(cls, problem: Problem, mesh: Mesh, config: SolverConfig) -> "MarchingOperator":
        space = build_space(mesh, config.degree)
        return cls(space, rule_for_degree(config.quadrature_degree()), problem)

    def with_boundary(self, interior_values) -> FeFunction:
        full = np.empty(self.space.n_dof)
        full[self.interior] = interior_values
        full[self.boundary] = self.g_h
        return FeFunction(self.space, full)

    def residual(self, u: FeFunction) -> np.ndarray:
        """Interior entries of N(u) - F."""
        r = assemble_ma_functional(self.space, self.rule, u) - self.load
        return r[self.interior]

    def h1_norm(self, v) -> float:
        v = np.asarray(v)
        return float(np.sqrt(max(v @ (self.h1_matrix @ v), 0.0)))


def residual_norm(space: FeSpace, rule: QuadratureRule, u: FeFunction, f) -> float:
    """Sup norm over interior DOFs of N(u) - load(f)."""
    r = assemble_ma_functional(space, rule, u) - assemble_load(space, rule, f)
    return float(np.abs(r[space.interior_dofs]).max(initial=0.0))


def _poisson(op: MarchingOperator, source_load: np.ndarray) -> FeFunction:
    """Solve int Du . Dv = -int s v with u = g_h on the boundary."""
    system = apply_dirichlet(op.stiffness, -source_load, op.space, op.g_h)
    return FeFunction(op.space, system.expand(op.factorization.solve(system.rhs)))


def initial_guess(op: MarchingOperator, mode: str = "poisson-sqrt") -> FeFunction:
    """Convex starting iterate.

    ``poisson-sqrt`` solves Laplace(u0) = 2 sqrt(f), the equality case of
    Laplace(u) >= 2 sqrt(det D^2 u) for convex u; ``zero-data`` solves
    Laplace(u0) = 0.
    """
    if mode == "poisson-sqrt":
        f = op.problem.f
        return _poisson(op, assemble_load(op.space, op.rule, lambda x, y: 2.0 * np.sqrt(f(x, y))))
    if mode == "zero-data":
        return _poisson(op, np.zeros(op.space.n_dof))
    raise ValueError(f"unknown initial guess mode {mode!r}; expected one of {INIT_MODES}")


def _check_update(u: np.ndarray) -> None:
    if not np.all(np.isfinite(u)):
        raise FloatingPointError("non-finite coefficient in time-marching update")


def time_march_step(u: FeFunction, op: MarchingOperator, nu: float, alpha: float = 1.0) -> FeFunction:
    rhs = op.residual(u)
    delta = (alpha / nu) * op.factorization.solve(rhs)
    new = u.coefficients[op.interior] + delta
    _check_update(new)
    return op.with_boundary(new)


def time_march_step_truncated(u: FeFunction, op: MarchingOperator, nu: float, m: float) -> FeFunction:
    rhs = assemble_ma_truncated(op.space, op.rule, u, op.problem.f, m)[op.interior]
    new = u.coefficients[op.interior] + op.factorization.solve(rhs) / nu
    _check_update(new)
    return op.with_boundary(new)


def _check_source(op: MarchingOperator) -> None:
    pts = op.space.physical_points(op.rule.points)
    fv = np.asarray(op.problem.f(pts[..., 0], pts[..., 1]), dtype=float)
    if np.any(fv < 0):
        raise ValueError("source f must be nonnegative at all quadrature points")


def march(op: MarchingOperator, config: SolverConfig, u0: FeFunction):
    """Iterate from `u0` until the H^1 increment drops below ``config.tol``."""
    config.validate()
    report = IterationReport()
    u = op.with_boundary(u0.coefficients[op.interior])
    cap = config.iteration_cap(op.space.mesh.h)
    first = None
    inc = math.nan
    for k in range(cap):
        hess = hessian_at_quadrature(u, op.rule)
        lam1, lam2 = eig2(hess)
        report.min_eigenvalues.append(float(np.min(lam1)))
        report.max_eigenvalues.append(float(np.max(lam2)))
        det = det2(hess)
        r = (integrate_against_basis(op.space, op.rule, det) - op.load)[op.interior]
        report.residuals.append(float(np.abs(r).max(initial=0.0)))
        if config.truncation is None:
            delta = (config.alpha / config.nu) * op.factorization.solve(r)
        else:
            t = integrate_against_basis(op.space, op.rule, truncate(det - op.f_quad, config.truncation))
            delta = op.factorization.solve(t[op.interior]) / config.nu
        full = np.zeros(op.space.n_dof)
        full[op.interior] = delta
        inc = op.h1_norm(full) if np.all(np.isfinite(delta)) else math.inf
        report.increments.append(inc)
        if not math.isfinite(inc):
            report.status = "diverged"
            raise DivergenceError(f"non-finite update at iteration {k + 1}", report)
        u = op.with_boundary(u.coefficients[op.interior] + delta)
        if first is None:
            first = inc
        elif inc > config.divergence_factor * max(first, np.finfo(float).tiny):
            report.status = "diverged"
            raise DivergenceError(
                f"increment {inc:.3e} exceeds {config.divergence_factor:g} x first increment", report
            )
        if k % 200 == 0:
            logger.debug("iter %d: increment %.3e residual %.3e", k + 1, inc, report.residuals[-1])
        if inc <= config.tol:
            report.status = "converged"
            break
    else:
        report.status = "max-iters"
        logger.warning("time marching stopped at the iteration cap %d (last increment %.3e)", cap, inc)

    report.final_residual = float(np.abs(op.residual(u)).max(initial=0.0))
    report.residual_bound = (config.nu / config.alpha) * op.stiffness_norm * config.tol
    return u, report


def solve_ma(problem: Problem, mesh: Mesh, config: Optional[SolverConfig] = None, operator=None):
    """Solve the discrete Monge-Ampere problem on `mesh`.

    Returns the final iterate and its `IterationReport`.  Raises
    `DivergenceError` (carrying the report) when the iteration blows up.
    """
    config = (config or SolverConfig()).validate()
    op = operator if operator is not None else MarchingOperator.build(problem, mesh, config)
    _check_source(op)
    if isinstance(config.initial_guess, FeFunction):
        u0 = config.initial_guess
    else:
        u0 = initial_guess(op, config.initial_guess)
    return march(op, config, u0)
