"""scikit-learn style front end: ``fit`` solves, ``predict`` evaluates u_h at points."""
from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils.validation import check_array, check_is_fitted

from .analysis import error_norms
from .fe_space import evaluate_at_points
from .mesh import build_uniform_square_mesh
from .problems import Problem, get_problem
from .solver import SolverConfig, solve_ma


class MongeAmpereSolver(BaseEstimator):
    """Lagrange finite-element solver for det D^2 u = f, u = g on the unit square.

    Parameters
    ----------
    n_cells : int
        Squares per side; h = 1 / n_cells.
    degree : {2, 3}
    nu : float
        Weight of the Laplacian preconditioner.
    alpha : float in (0, 1]
        Rescaling parameter; the step is ``alpha / nu`` times a Poisson solve.
    truncation : float or None
        Clamp level m for the truncated residual; None uses the plain scheme.
    tol : float
        Stop once the H^1 norm of an increment falls below `tol`.
    max_iters : int or None
        Iteration cap; None means ``10 * n_cells * nu``.
    quad_degree : int or None
        Quadrature exactness; None means ``2 * degree``.
    init : {"poisson-sqrt", "zero-data"}

    Attributes
    ----------
    solution_ : FeFunction
    report_ : IterationReport
    space_ : FeSpace
    """

    def __init__(
        self,
        n_cells=16,
        degree=2,
        nu=50.0,
        alpha=1.0,
        truncation=None,
        tol=1e-10,
        max_iters=None,
        quad_degree=None,
        init="poisson-sqrt",
    ):
        self.n_cells = n_cells
        self.degree = degree
        self.nu = nu
        self.alpha = alpha
        self.truncation = truncation
        self.tol = tol
        self.max_iters = max_iters
        self.quad_degree = quad_degree
        self.init = init

    def _config(self) -> SolverConfig:
        return SolverConfig(
            nu=self.nu,
            alpha=self.alpha,
            degree=self.degree,
            quad_degree=self.quad_degree,
            truncation=self.truncation,
            tol=self.tol,
            max_iters=self.max_iters,
            initial_guess=self.init,
        ).validate()

    def fit(self, problem, y=None):
        """Solve for `problem` (a `Problem` or a registry key such as ``"1"``).

        Raises `DivergenceError` if the iteration blows up; warns with
        `ConvergenceWarning` if the iteration cap is reached.
        """
        if not isinstance(problem, Problem):
            problem = get_problem(problem)
        config = self._config()
        mesh = build_uniform_square_mesh(self.n_cells)
        u, report = solve_ma(problem, mesh, config)
        self.problem_ = problem
        self.solution_ = u
        self.space_ = u.space
        self.report_ = report
        self.n_iter_ = report.n_iters
        if report.status == "max-iters":
            warnings.warn(
                f"time marching hit max_iters={config.iteration_cap(mesh.h)} "
                f"(last increment {report.increments[-1]:.3e})",
                ConvergenceWarning,
            )
        return self

    def predict(self, X):
        """Values of u_h at points X of shape (n_samples, 2) in [0, 1]^2."""
        check_is_fitted(self, "solution_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != 2:
            raise ValueError(f"X must have 2 columns (x, y), got {X.shape[1]}")
        if np.any((X < 0) | (X > 1)):
            raise ValueError("points must lie in the unit square")
        return evaluate_at_points(self.solution_, X)

    def error_report(self):
        """Errors against the problem's exact solution."""
        check_is_fitted(self, "solution_")
        if not self.problem_.has_exact:
            raise ValueError(f"problem {self.problem_.name!r} has no exact solution")
        return error_norms(self.solution_, self.problem_.exact_u, self.problem_.exact_grad_u)

    def score(self, X, y):
        """Negative RMS deviation of predictions from `y`."""
        pred = self.predict(X)
        y = np.asarray(y, dtype=float)
        return -float(np.sqrt(np.mean((pred - y) ** 2)))
