"""Reproducing-kernel solver for fifth-order two-point boundary-value problems."""

from .bench import ErrorTable, RunConfig, builtin_example, emit, run
from .estimator import RKHSBVPSolver
from .expr import eval_expression, parse_expression
from .kernel import (
    BivariateKernel,
    PiecewisePolynomial,
    bivariate_eval,
    build_bivariate_kernel,
    build_kernel_section,
    default_kernel,
    kernel_eval,
    t_kernel,
)
from .problem import BVPSpec, homogenize, load_problem, map_point_back, shift_polynomial
from .solver import (
    NodeSet,
    evaluate_solution,
    gram_matrix,
    gram_schmidt,
    parseval_partial_norms,
    psi_eval,
    solve_collocation,
    solve_linear,
    solve_nonlinear,
)

__version__ = "0.1.0"

__all__ = [
    "BVPSpec",
    "BivariateKernel",
    "ErrorTable",
    "NodeSet",
    "PiecewisePolynomial",
    "RKHSBVPSolver",
    "RunConfig",
    "bivariate_eval",
    "build_bivariate_kernel",
    "build_kernel_section",
    "builtin_example",
    "default_kernel",
    "emit",
    "eval_expression",
    "evaluate_solution",
    "gram_matrix",
    "gram_schmidt",
    "homogenize",
    "kernel_eval",
    "load_problem",
    "map_point_back",
    "parse_expression",
    "parseval_partial_norms",
    "psi_eval",
    "run",
    "shift_polynomial",
    "solve_collocation",
    "solve_linear",
    "solve_nonlinear",
    "t_kernel",
]
