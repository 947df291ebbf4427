"""Lagrange finite elements for the Dirichlet problem of det D^2 u = f on the unit square."""
from .analysis import ErrorReport, convergence_rates, convexity_report, error_norms
from .estimator import MongeAmpereSolver
from .fe_space import FeFunction, FeSpace, build_space, interpolate
from .mesh import Mesh, build_uniform_square_mesh
from .problems import QUADRATIC, TEST1, TEST2, TEST3, Problem, get_problem
from .solver import DivergenceError, IterationReport, SolverConfig, residual_norm, solve_ma

__all__ = [
    "DivergenceError",
    "ErrorReport",
    "FeFunction",
    "FeSpace",
    "IterationReport",
    "Mesh",
    "MongeAmpereSolver",
    "Problem",
    "QUADRATIC",
    "SolverConfig",
    "TEST1",
    "TEST2",
    "TEST3",
    "build_space",
    "build_uniform_square_mesh",
    "convergence_rates",
    "convexity_report",
    "error_norms",
    "get_problem",
    "interpolate",
    "residual_norm",
    "solve_ma",
]

__version__ = "0.1.0"
