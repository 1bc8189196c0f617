"""Runnable invariant checks, shared by the ``verify`` command."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bench import GRID_PRESETS, builtin_example
from .expr import eval_expression
from .kernel import (
    BivariateKernel,
    build_kernel_section,
    default_kernel,
    w6_inner_product,
)
from .problem import homogenize, shift_polynomial
from .solver import (
    collocation_residual,
    evaluate_solution,
    parseval_partial_norms,
    solve_collocation,
    solve_linear,
    solve_nonlinear,
)

__all__ = ["CheckResult", "REFERENCE_COEFFICIENTS", "TEST_POLYNOMIALS", "run_checks"]

# (row = power of x, column = power of y) -> printed value in the x <= y region
REFERENCE_COEFFICIENTS = {
    (3, 3): Fraction(12221, 169207956),
    (3, 5): Fraction(2461, 42301989),
    (4, 4): Fraction(728021, 2707327296),
    (4, 3): Fraction(-11725, 84603978),
    (4, 5): Fraction(-158419, 1353663648),
    (11, 0): Fraction(-1, 39916800),
    (11, 3): Fraction(2003, 21320202456),
    (10, 1): Fraction(1, 3628800),
    (9, 2): Fraction(-1, 725760),
}

# x^3 (1-x)^2, x^4 (1-x)^2, x^3 (1-x)^3: all satisfy the five boundary conditions
TEST_POLYNOMIALS = {
    "x^3(1-x)^2": np.array([0, 0, 0, 1, -2, 1], dtype=float),
    "x^4(1-x)^2": np.array([0, 0, 0, 0, 1, -2, 1], dtype=float),
    "x^3(1-x)^3": np.array([0, 0, 0, 1, -3, 3, -1], dtype=float),
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _check(name, value, limit, fmt="{:.3e}"):
    return CheckResult(name, bool(value <= limit), f"{fmt.format(value)} <= {limit:g}")


def kernel_checks(K: BivariateKernel, n_random: int = 100, seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    ys = rng.uniform(0.0, 1.0, n_random)
    cont, jump, bcs, repro = 0.0, 0.0, 0.0, 0.0
    for y in ys:
        s = build_kernel_section(y)
        cont = max(cont, max(abs(s.jump(k)) for k in range(11)))
        jump = max(jump, abs(s.jump(11) - 1.0))
        vals = [s(0.0, 0), s(1.0, 0), s(0.0, 1), s(1.0, 1), s(0.0, 2)]
        bcs = max(bcs, max(abs(v) for v in vals))
    for y in ys[:10]:
        s = K.section(y)
        for c in TEST_POLYNOMIALS.values():
            repro = max(repro, abs(w6_inner_product(c, s) - np.polynomial.polynomial.polyval(y, c)))
    g = np.linspace(0.0, 1.0, 20)
    X, Y = np.meshgrid(g, g, indexing="ij")
    sym = float(np.abs(K(X, Y) - K(Y, X)).max())
    nodes = np.linspace(0.05, 0.95, 10)
    eig = float(np.linalg.eigvalsh(K(*np.meshgrid(nodes, nodes, indexing="ij"))).min())
    return [
        _check("kernel continuity orders 0-10", cont, 1e-9),
        _check("kernel unit jump at order 11", jump, 1e-6),
        _check("kernel boundary conditions", bcs, 1e-9),
        _check("kernel symmetry", sym, 1e-10),
        _check("reproducing property", repro, 1e-6),
        CheckResult("kernel positive semidefinite", eig >= -1e-9, f"min eigenvalue {eig:.3e} >= -1e-9"),
    ]


def concordance_check(K: BivariateKernel) -> CheckResult:
    C = K.region_coeffs
    worst = 0.0
    for (i, j), v in REFERENCE_COEFFICIENTS.items():
        worst = max(worst, abs(C[i, j] / float(v) - 1.0))
    worst = max(worst, float(np.abs(C[:3]).max()) / float(np.abs(C).max()))
    return _check("published coefficient concordance", worst, 1e-9)


def shift_check(n: int = 100, seed: int = 1) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        bc = rng.normal(size=5)
        a = rng.uniform(-2, 2)
        b = a + rng.uniform(0.1, 3)
        p = shift_polynomial(bc, a, b)
        got = [p(a), p(a, 1), p(a, 2), p(b), p(b, 1)]
        worst = max(worst, float(np.abs(np.array(got) - bc).max()))
    return _check("shift polynomial conditions", worst, 1e-10)


def solver_checks(K: BivariateKernel, n: int = 36) -> list[CheckResult]:
    out = []
    h41 = homogenize(builtin_example("4.1"))
    s = solve_linear(h41, n, K)
    c = solve_collocation(h41, n, K)
    grid = np.linspace(0, 1, 11)
    out.append(_check("dual-path agreement (4.1)", float(np.abs(s(grid) - c(grid)).max()), 1e-8))
    out.append(_check("collocation residual (4.1)", float(np.abs(collocation_residual(s)).max()), 1e-7))
    bnd = max(abs(s.u(0.0, 0)[0]), abs(s.u(0.0, 1)[0]), abs(s.u(0.0, 2)[0]), abs(s.u(1.0, 0)[0]), abs(s.u(1.0, 1)[0]))
    out.append(_check("boundary exactness (4.1)", float(bnd), 1e-7))
    S = parseval_partial_norms(h41, n, K)
    out.append(_check("Parseval sums nondecreasing (4.1)", float(max(0.0, -np.diff(S).min())), 1e-12))
    for ex in ("4.1", "4.2", "4.3", "4.4"):
        h = homogenize(builtin_example(ex))
        sol = solve_linear(h, n, K) if h.is_linear else solve_nonlinear(h, n, K=K)
        out.append(_check(f"orthonormality n={n} ({ex})", sol.basis.orthonormality_defect(), 1e-8))
    return out


def accuracy_checks(K: BivariateKernel, n: int = 36) -> list[CheckResult]:
    limits = {"4.1": ("default", 1e-5), "4.2": ("default", 1e-5), "4.3": ("table3", 1e-6), "4.4": ("table4", 1e-6)}
    out = []
    for ex, (grid, limit) in limits.items():
        spec = builtin_example(ex)
        h = homogenize(spec)
        sol = solve_linear(h, n, K) if h.is_linear else solve_nonlinear(h, n, K=K)
        xs = np.array(GRID_PRESETS[grid])
        err = float(np.abs(evaluate_solution(sol, xs) - eval_expression(spec.exact, xs)).max())
        out.append(_check(f"max abs error n={n} ({ex})", err, limit))
    return out


def run_checks(K: BivariateKernel | None = None) -> list[CheckResult]:
    K = default_kernel() if K is None else K
    results = kernel_checks(K)
    results.append(concordance_check(K))
    results.append(shift_check())
    results.extend(solver_checks(K))
    results.extend(accuracy_checks(K))
    return results
