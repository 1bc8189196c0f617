"""scikit-learn style front end for the solver."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .kernel import default_kernel
from .problem import BVPSpec, homogenize, load_problem
from .solver import NodeSet, evaluate_solution, solve_collocation, solve_linear, solve_nonlinear


class RKHSBVPSolver(BaseEstimator):
    """Solve a fifth-order BVP once, then evaluate the approximation anywhere.

    Parameters
    ----------
    n_nodes : int, default=36
        Number of equally spaced collocation nodes on the (mapped) unit interval.
    nodes : array-like, optional
        Explicit node positions in [0, 1]; overrides ``n_nodes``.
    method : {"series", "collocation"}, default="series"
        ``"series"`` builds the orthonormalised expansion, ``"collocation"``
        solves the Gram system directly.  Only used for linear problems.
    tol, max_iter
        Stopping rule for nonlinear problems.

    Attributes
    ----------
    solution_ : SeriesSolution
    n_iter_ : int
    converged_ : bool

    Examples
    --------
    >>> from rkhsbvp import RKHSBVPSolver, builtin_example
    >>> est = RKHSBVPSolver(n_nodes=36).fit(builtin_example("4.1"))
    >>> bool(abs(est.predict([0.5])[0] - 0.412180317) < 1e-5)
    True
    """

    def __init__(self, n_nodes=36, nodes=None, method="series", tol=1e-10, max_iter=25):
        self.n_nodes = n_nodes
        self.nodes = nodes
        self.method = method
        self.tol = tol
        self.max_iter = max_iter

    def _node_set(self):
        if self.nodes is not None:
            return NodeSet(np.asarray(self.nodes, dtype=float))
        if int(self.n_nodes) < 1:
            raise ValueError("n_nodes must be positive")
        return NodeSet.uniform(int(self.n_nodes))

    def fit(self, problem, y=None):
        """``problem`` is a :class:`BVPSpec` or a path to a problem file."""
        if not isinstance(problem, BVPSpec):
            problem = load_problem(problem)
        if self.method not in ("series", "collocation"):
            raise ValueError(f"unknown method {self.method!r}")
        h = homogenize(problem)
        nodes = self._node_set()
        K = default_kernel()
        if not h.is_linear:
            sol = solve_nonlinear(h, nodes, self.tol, self.max_iter, K)
        elif self.method == "collocation":
            sol = solve_collocation(h, nodes, K)
        else:
            sol = solve_linear(h, nodes, K)
        self.problem_ = problem
        self.solution_ = sol
        self.n_iter_ = sol.n_iter if not h.is_linear else 1
        self.converged_ = sol.converged
        return self

    def predict(self, X, deriv=0):
        """Approximate ``y^(deriv)`` at the points ``X`` (any shape, flattened)."""
        check_is_fitted(self, "solution_")
        X = check_array(np.asarray(X, dtype=float).reshape(-1, 1), ensure_2d=True).ravel()
        return np.atleast_1d(evaluate_solution(self.solution_, X, deriv))

    def score(self, X, y):
        """Negative maximum absolute error against reference values ``y``."""
        return -float(np.abs(self.predict(X) - np.asarray(y, dtype=float).ravel()).max())
