"""Truncated orthonormal-series solver on the W_2^6 reproducing kernel.

For nodes ``x_1 < ... < x_n`` the basis functions are

    Psi_i(x) = (L_eta R(x, eta))(x_i),

i.e. the operator applied to the kernel's second argument and evaluated at a
node.  Their Gram matrix in W_2^6 is ``G_ij = (L Psi_j)(x_i)``, the operator
applied in both arguments.  A lower-triangular ``B`` with ``B G B^T = I``
orthonormalises the basis and the solution is

    u_n = sum_i (sum_k B_ik g(x_k)) Psibar_i,   Psibar_i = sum_k B_ik Psi_k.

Nonlinear right-hand sides are handled by quasilinearization: each step
solves a linear problem whose zeroth-order coefficient absorbs the
u-derivative of the right-hand side.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack, solve_triangular

from .kernel import BivariateKernel, bivariate_eval, default_kernel
from .problem import HomogenizedBVP

__all__ = [
    "GramMatrixError",
    "NodeSet",
    "OrthonormalBasis",
    "SeriesSolution",
    "psi_eval",
    "gram_matrix",
    "gram_schmidt",
    "build_basis",
    "solve_linear",
    "solve_collocation",
    "solve_nonlinear",
    "evaluate_solution",
    "parseval_partial_norms",
    "collocation_residual",
]

logger = logging.getLogger(__name__)

MAX_PSI_ORDER = 5


class GramMatrixError(np.linalg.LinAlgError):
    """Cholesky factorisation of the Gram matrix failed."""

    def __init__(self, message: str, pivot: int | None = None):
        super().__init__(message)
        self.pivot = pivot


@dataclass(frozen=True)
class NodeSet:
    points: np.ndarray

    def __post_init__(self):
        p = np.array(self.points, dtype=float).ravel()
        if p.size == 0:
            raise ValueError("node set is empty")
        if not np.all(np.isfinite(p)):
            raise ValueError("nodes must be finite")
        if p[0] < 0.0 or p[-1] > 1.0:
            raise ValueError("nodes must lie in [0, 1]")
        if np.any(np.diff(p) <= 0):
            raise ValueError("nodes must be strictly increasing")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    @classmethod
    def uniform(cls, n: int = 36) -> "NodeSet":
        """``n`` equally spaced nodes including both endpoints."""
        if n < 1:
            raise ValueError("n must be positive")
        return cls(np.linspace(0.0, 1.0, n) if n > 1 else np.array([0.5]))

    def __len__(self):
        return self.points.size


def _as_nodes(nodes) -> NodeSet:
    if isinstance(nodes, NodeSet):
        return nodes
    if np.ndim(nodes) == 0:
        return NodeSet.uniform(int(nodes))
    return NodeSet(nodes)


def psi_eval(K: BivariateKernel, f_at_node, x_i: float, x, k: int = 0):
    """k-th derivative at ``x`` of the basis function attached to node ``x_i``.

    ``f_at_node`` holds the operator coefficients f_0..f_4 at ``x_i`` (a sixth
    entry, the unit leading coefficient, is accepted and ignored).
    """
    if not 0 <= k <= MAX_PSI_ORDER:
        raise ValueError(f"derivative order must be in 0..{MAX_PSI_ORDER}, got {k}")
    f = np.asarray(f_at_node, dtype=float)[:5]
    out = bivariate_eval(K, x, x_i, k, 5)
    for j in range(5):
        if f[j] != 0.0:
            out = out + f[j] * bivariate_eval(K, x, x_i, k, j)
    return out


def _psi_matrix(K, op_coeffs, nodes, t, k):
    """Matrix ``M[m, i] = Psi_i^(k)(t_m)``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    T, X = np.meshgrid(t, nodes, indexing="ij")
    out = np.zeros(T.shape)
    for q in range(6):
        w = op_coeffs[:, q]
        if np.any(w != 0.0):
            out += w[None, :] * bivariate_eval(K, T, X, k, q)
    return out


def gram_matrix(K: BivariateKernel, nodes, op_coeffs, symmetrize: bool = True) -> np.ndarray:
    """Gram matrix ``G_ij = <Psi_i, Psi_j> = (L Psi_j)(x_i)``.

    ``op_coeffs`` has shape ``(n, 6)``: operator coefficients of orders 0..5
    at each node (the last column is the leading coefficient, 1).
    """
    pts = _as_nodes(nodes).points
    op = np.asarray(op_coeffs, dtype=float)
    if op.shape != (pts.size, 6):
        raise ValueError(f"op_coeffs must have shape ({pts.size}, 6)")
    bad = np.flatnonzero(~np.isfinite(op).all(axis=1))
    if bad.size:
        raise FloatingPointError(f"non-finite operator coefficient at node index {bad[0]}")
    Xi, Xj = np.meshgrid(pts, pts, indexing="ij")
    G = np.zeros(Xi.shape)
    for p in range(6):
        for q in range(6):
            w = op[:, p][:, None] * op[:, q][None, :]
            if np.any(w != 0.0):
                G += w * bivariate_eval(K, Xi, Xj, p, q)
    return 0.5 * (G + G.T) if symmetrize else G


def _cholesky(G):
    c, info = lapack.dpotrf(G, lower=1, clean=1)
    return c, info


def gram_schmidt(G) -> np.ndarray:
    """Lower-triangular ``B`` with positive diagonal and ``B G B^T = I``.

    Computed as the inverse of the Cholesky factor, which is Gram-Schmidt in
    the G-inner product carried out stably.  On failure the factorisation is
    retried once with a diagonal shift of ``1e-12 * trace(G) / n``.
    """
    G = np.asarray(G, dtype=float)
    n = G.shape[0]
    Lc, info = _cholesky(G)
    if info != 0:
        jitter = 1e-12 * np.trace(G) / n
        logger.warning("Cholesky failed at pivot %d; retrying with jitter %.3e", info - 1, jitter)
        Lc, info2 = _cholesky(G + jitter * np.eye(n))
        if info2 != 0:
            raise GramMatrixError(
                f"Gram matrix is not positive definite (pivot {info - 1}); "
                "check for duplicate or nearly coincident nodes",
                pivot=info - 1,
            )
    return solve_triangular(Lc, np.eye(n), lower=True)


@dataclass(frozen=True)
class OrthonormalBasis:
    nodes: NodeSet
    op_coeffs: np.ndarray
    gram: np.ndarray
    beta: np.ndarray
    kernel: BivariateKernel = field(repr=False)

    def __len__(self):
        return len(self.nodes)

    def psi(self, t, k: int = 0) -> np.ndarray:
        """Raw basis values ``Psi_i^(k)(t_m)`` as an ``(m, n)`` matrix."""
        if not 0 <= k <= MAX_PSI_ORDER:
            raise ValueError(f"derivative order must be in 0..{MAX_PSI_ORDER}")
        return _psi_matrix(self.kernel, self.op_coeffs, self.nodes.points, t, k)

    def orthonormal(self, t, k: int = 0) -> np.ndarray:
        return self.psi(t, k) @ self.beta.T

    def orthonormality_defect(self) -> float:
        B = self.beta
        return float(np.abs(B @ self.gram @ B.T - np.eye(len(self))).max())


def build_basis(K: BivariateKernel, nodes, op_coeffs) -> OrthonormalBasis:
    nodes = _as_nodes(nodes)
    op = np.asarray(op_coeffs, dtype=float)
    G = gram_matrix(K, nodes, op)
    return OrthonormalBasis(nodes, op, G, gram_schmidt(G), K)


@dataclass
class SeriesSolution:
    """Truncated series ``u_n`` plus what is needed to map back to ``y``.

    ``coeffs`` are coordinates in the orthonormal basis; ``raw_coeffs`` in the
    raw basis.  ``data`` is the right-hand side vector the final linear solve
    was collocated against.
    """

    basis: OrthonormalBasis
    coeffs: np.ndarray
    raw_coeffs: np.ndarray
    problem: HomogenizedBVP
    data: np.ndarray
    iteration_trace: list = field(default_factory=list)
    converged: bool = True

    @property
    def n_iter(self) -> int:
        return len(self.iteration_trace)

    def u(self, t, k: int = 0):
        """k-th derivative of the homogeneous part on [0, 1]."""
        return self.basis.psi(t, k) @ self.raw_coeffs

    def __call__(self, x, k: int = 0):
        return evaluate_solution(self, x, k)


def _default_kernel(K):
    return default_kernel() if K is None else K


def _series(h, nodes, op, g, K):
    basis = build_basis(K, nodes, op)
    coeffs = basis.beta @ g
    raw = basis.beta.T @ coeffs
    return SeriesSolution(basis, coeffs, raw, h, np.asarray(g, dtype=float))


def solve_linear(h: HomogenizedBVP, nodes=36, K: BivariateKernel | None = None) -> SeriesSolution:
    """Orthonormal-series solution of a problem whose right-hand side is free of u."""
    if not h.is_linear:
        raise ValueError("right-hand side depends on u; use solve_nonlinear")
    K = _default_kernel(K)
    nodes = _as_nodes(nodes)
    t = nodes.points
    return _series(h, nodes, h.coefficients(t), h.rhs(t, 0.0), K)


def solve_collocation(h: HomogenizedBVP, nodes=36, K: BivariateKernel | None = None) -> SeriesSolution:
    """Same solution via ``G a = g`` in the raw basis (LU, no orthonormalisation)."""
    if not h.is_linear:
        raise ValueError("right-hand side depends on u; use solve_nonlinear")
    K = _default_kernel(K)
    nodes = _as_nodes(nodes)
    t = nodes.points
    op = h.coefficients(t)
    g = h.rhs(t, 0.0)
    G = gram_matrix(K, nodes, op)
    raw = np.linalg.solve(G, g)
    beta = gram_schmidt(G)
    basis = OrthonormalBasis(nodes, op, G, beta, K)
    # B^T c = a  =>  c = L^T a with L = B^-1
    coeffs = solve_triangular(beta.T, raw, lower=False)
    return SeriesSolution(basis, coeffs, raw, h, g)


def _u_derivative(h, t, u):
    step = 1e-6 * np.maximum(1.0, np.abs(u))
    return (h.rhs(t, u + step) - h.rhs(t, u - step)) / (2.0 * step)


def solve_nonlinear(
    h: HomogenizedBVP,
    nodes=36,
    tol: float = 1e-10,
    max_iter: int = 25,
    K: BivariateKernel | None = None,
) -> SeriesSolution:
    """Quasilinearization starting from ``u = 0``.

    Step m solves ``L u - J u = H(u_m) - J u_m`` with ``J = dH/du`` at the
    nodes.  Iteration stops once the largest nodal update, or the nodal
    residual of the unlinearised equation, drops to ``tol``.  If an update
    grows relative to the previous one the step is halved, at most five times.
    The returned solution has ``converged`` False when ``max_iter`` ran out.
    """
    K = _default_kernel(K)
    nodes = _as_nodes(nodes)
    t = nodes.points
    base = h.coefficients(t)
    u = np.zeros(t.size)
    trace = []
    prev = np.inf
    sol = None
    for m in range(1, max_iter + 1):
        H = h.rhs(t, u)
        J = _u_derivative(h, t, u)
        op = base.copy()
        op[:, 0] -= J
        sol = _series(h, nodes, op, H - J * u, K)
        u_new = sol.u(t)
        delta = u_new - u
        norm = float(np.abs(delta).max())
        lam = 1.0
        for _ in range(5):
            if lam * norm <= prev:
                break
            lam *= 0.5
        if not np.isfinite(norm):
            raise FloatingPointError(f"nonlinear iteration produced non-finite values at step {m}")
        trace.append((m, lam * norm))
        logger.debug("quasilinearization step %d: update %.3e (damping %.3g)", m, norm, lam)
        if lam == 1.0:
            residual = float(np.abs(sol.data + J * u_new - h.rhs(t, u_new)).max())
            if norm <= tol or residual <= tol:
                sol.iteration_trace = trace
                sol.converged = True
                return sol
        u = u + lam * delta
        prev = lam * norm
    sol.iteration_trace = trace
    sol.converged = False
    logger.warning("quasilinearization did not converge in %d iterations", max_iter)
    return sol


def evaluate_solution(s: SeriesSolution, x_original, k: int = 0):
    """k-th derivative of the approximate ``y`` at original-domain points."""
    h = s.problem
    x = np.asarray(x_original, dtype=float)
    span = h.b - h.a
    if np.any(x < h.a - 1e-12 * span) or np.any(x > h.b + 1e-12 * span):
        raise ValueError(f"x must lie in [{h.a}, {h.b}]")
    t = np.clip(h.to_unit(x), 0.0, 1.0)
    out = s.u(t.ravel(), k).reshape(t.shape) / h.h**k + h.shift(x, k)
    return float(out) if out.ndim == 0 else out


def collocation_residual(s: SeriesSolution) -> np.ndarray:
    """``(L u_n)(x_i) - g(x_i)`` at the nodes, from analytic basis derivatives."""
    t = s.basis.nodes.points
    op = s.basis.op_coeffs
    Lu = sum(op[:, p] * s.u(t, p) for p in range(6))
    return Lu - s.data


def parseval_partial_norms(h: HomogenizedBVP, nodes=36, K: BivariateKernel | None = None) -> np.ndarray:
    """Partial sums ``S_n = sum_{i<=n} <u, Psibar_i>^2`` for n = 1..N."""
    s = solve_linear(h, nodes, K)
    return np.cumsum(s.coeffs**2)
