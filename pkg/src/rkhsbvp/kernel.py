"""Reproducing kernels of W_2^6[0,1] and W_2^1[0,1].

The W_2^6 kernel is a degree-11 piecewise polynomial in ``x`` with a single
breakpoint at ``y``.  Each section ``R_y`` is obtained by solving the 24x24
linear system formed by the interface conditions at ``x = y``, the five
homogeneous boundary conditions and the seven natural conditions coming from
integration by parts of the inner product.  The global bivariate form is then
recovered by interpolating the section coefficients in ``y``.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import mpmath
import numpy as np

__all__ = [
    "DEGREE",
    "KernelConditioningWarning",
    "KernelConstructionError",
    "PiecewisePolynomial",
    "BivariateKernel",
    "build_kernel_section",
    "kernel_eval",
    "build_bivariate_kernel",
    "default_kernel",
    "bivariate_eval",
    "t_kernel",
    "w6_inner_product",
]

DEGREE = 11
NCOEF = DEGREE + 1


class KernelConditioningWarning(RuntimeWarning):
    pass


class KernelConstructionError(RuntimeError):
    pass


def _check_unit(name, v):
    if np.any(np.asarray(v) < 0.0) or np.any(np.asarray(v) > 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {v}")


def _check_order(k, top=DEGREE):
    if not 0 <= k <= top:
        raise ValueError(f"derivative order must be in 0..{top}, got {k}")


def derivative_row(x, k: int) -> np.ndarray:
    """``d^k/dx^k`` of the monomials ``x^0..x^11`` at ``x``; broadcasts over ``x``.

    Result has shape ``x.shape + (12,)``.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape + (NCOEF,))
    for i in range(k, NCOEF):
        out[..., i] = math.perm(i, k) * x ** (i - k)
    return out


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Two monomial pieces of degree <= 11 joined at ``breakpoint``.

    ``lo_coeffs`` applies for ``x <= breakpoint``, ``hi_coeffs`` for
    ``x > breakpoint``; coefficient ``i`` multiplies ``x**i``.
    """

    breakpoint: float
    lo_coeffs: np.ndarray
    hi_coeffs: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo_coeffs, dtype=float)
        hi = np.asarray(self.hi_coeffs, dtype=float)
        if lo.shape != (NCOEF,) or hi.shape != (NCOEF,):
            raise ValueError("both coefficient vectors must have 12 entries")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo_coeffs", lo)
        object.__setattr__(self, "hi_coeffs", hi)

    def __call__(self, x, k: int = 0):
        return kernel_eval(self, x, k)

    def jump(self, k: int) -> float:
        """hi-minus-lo difference of the k-th derivative at the breakpoint."""
        row = derivative_row(self.breakpoint, k)
        return float(row @ (self.hi_coeffs - self.lo_coeffs))


def _mp_row(x, k):
    return [mpmath.mpf(math.perm(i, k)) * x ** (i - k) if i >= k else mpmath.mpf(0) for i in range(NCOEF)]


def _assemble(y, row):
    """Rows of the section system; unknowns are [lo coeffs, hi coeffs]."""
    zero = [0.0] * NCOEF
    rows, rhs = [], []

    def add(lo, hi, b=0.0):
        rows.append(list(lo) + list(hi))
        rhs.append(b)

    # continuity of orders 0..10 and unit jump of order 11 at x = y
    for k in range(DEGREE + 1):
        r = list(row(y, k))
        add([-v for v in r], r, 1.0 if k == DEGREE else 0.0)
    # homogeneous boundary conditions
    for k in (0, 1, 2):
        add(row(0.0, k), zero)
    for k in (0, 1):
        add(zero, row(1.0, k))
    # natural conditions at x = 0
    r5, r6 = row(0.0, 5), row(0.0, 6)
    add([a - b for a, b in zip(r5, r6)], zero)
    r4, r7 = row(0.0, 4), row(0.0, 7)
    add([a + b for a, b in zip(r4, r7)], zero)
    r3, r8 = row(0.0, 3), row(0.0, 8)
    add([a - b for a, b in zip(r3, r8)], zero)
    # natural conditions at x = 1
    for k in (6, 7, 8, 9):
        add(zero, row(1.0, k))
    return rows, rhs


def _solve_section_float(y: float) -> tuple[np.ndarray, float]:
    rows, rhs = _assemble(y, lambda x, k: derivative_row(x, k))
    A = np.array(rows, dtype=float)
    b = np.array(rhs, dtype=float)
    scale = np.abs(A).max(axis=1)
    A /= scale[:, None]
    b /= scale
    sol = np.linalg.solve(A, b)
    sol += np.linalg.solve(A, b - A @ sol)
    residual = float(np.abs(A @ sol - b).max())
    return sol, residual


def _solve_section_mp(y) -> list:
    y = mpmath.mpf(y)
    rows, rhs = _assemble(y, _mp_row)
    sol = mpmath.lu_solve(mpmath.matrix(rows), mpmath.matrix(rhs))
    return [sol[i] for i in range(2 * NCOEF)]


def build_kernel_section(y: float) -> PiecewisePolynomial:
    """Solve for the kernel section ``R_y`` in double precision."""
    _check_unit("y", y)
    sol, residual = _solve_section_float(float(y))
    if residual > 1e-8:
        warnings.warn(
            f"kernel section system at y={y} has residual {residual:.3e}",
            KernelConditioningWarning,
            stacklevel=2,
        )
    return PiecewisePolynomial(float(y), sol[:NCOEF], sol[NCOEF:])


def kernel_eval(section: PiecewisePolynomial, x, k: int = 0):
    """k-th derivative of ``section`` at ``x``; ``x == breakpoint`` uses the lo piece."""
    _check_order(k)
    _check_unit("x", x)
    x = np.asarray(x, dtype=float)
    rows = derivative_row(x, k)
    out = np.where(x <= section.breakpoint, rows @ section.lo_coeffs, rows @ section.hi_coeffs)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BivariateKernel:
    """``R(x, y) = sum C[i, j] x^i y^j`` for ``x <= y``; symmetry gives ``x > y``."""

    region_coeffs: np.ndarray

    def __post_init__(self):
        C = np.array(self.region_coeffs, dtype=float)
        if C.shape != (NCOEF, NCOEF):
            raise ValueError("region_coeffs must be 12x12")
        C.setflags(write=False)
        object.__setattr__(self, "region_coeffs", C)

    def __call__(self, x, y, kx: int = 0, ky: int = 0):
        return bivariate_eval(self, x, y, kx, ky)

    def section(self, y: float) -> PiecewisePolynomial:
        """The kernel section at ``y`` recovered from the bivariate form."""
        C = self.region_coeffs
        powers = derivative_row(y, 0)
        return PiecewisePolynomial(float(y), C @ powers, powers @ C)

    def to_csv(self) -> str:
        lines = [",".join(format(v, ".17g") for v in row) for row in self.region_coeffs]
        return "\n".join(lines) + "\n"


def _chebyshev_points(m: int, lo: float, hi: float) -> list:
    mid, half = (mpmath.mpf(lo) + hi) / 2, (mpmath.mpf(hi) - lo) / 2
    pts = [mid + half * mpmath.cos((2 * k + 1) * mpmath.pi / (2 * m)) for k in range(m)]
    return sorted(pts)


def build_bivariate_kernel(dps: int = 40, validate: bool = True) -> BivariateKernel:
    """Recover the 12x12 coefficient matrix of the x <= y region.

    Sections are solved at 12 Chebyshev-spaced values of ``y`` in
    [0.05, 0.95] and each lo-piece coefficient is interpolated as a degree-11
    polynomial in ``y``.  Both steps run in ``dps``-digit arithmetic: the
    12-point monomial Vandermonde has condition number ~4e8, which would
    otherwise cost most of the double-precision digits.

    With ``validate``, double-precision sections at four held-out ``y`` are
    compared with the interpolated form, on both pieces.
    """
    with mpmath.workdps(dps):
        ys = _chebyshev_points(NCOEF, 0.05, 0.95)
        sections = [_solve_section_mp(y) for y in ys]
        V = mpmath.matrix([[y**j for j in range(NCOEF)] for y in ys])
        C = np.zeros((NCOEF, NCOEF))
        for i in range(NCOEF):
            col = mpmath.lu_solve(V, mpmath.matrix([s[i] for s in sections]))
            C[i] = [float(col[j]) for j in range(NCOEF)]
    K = BivariateKernel(C)
    if validate:
        _validate(K)
    return K


def _validate(K: BivariateKernel, held_out=(0.13, 0.37, 0.61, 0.88), tol: float = 1e-7) -> None:
    scale = np.abs(K.region_coeffs).max()
    for y in held_out:
        direct = build_kernel_section(y)
        interp = K.section(y)
        for piece in ("lo_coeffs", "hi_coeffs"):
            dev = np.abs(getattr(direct, piece) - getattr(interp, piece)) / scale
            bad = np.flatnonzero(dev > tol)
            if bad.size:
                names = ", ".join(f"{'c' if piece == 'lo_coeffs' else 'd'}{i + 1}" for i in bad)
                raise KernelConstructionError(
                    f"interpolated kernel disagrees with direct solve at y={y}: {names} "
                    f"(max relative deviation {dev.max():.3e})"
                )


@functools.lru_cache(maxsize=None)
def default_kernel() -> BivariateKernel:
    """Process-wide shared kernel; built once, immutable."""
    return build_bivariate_kernel()


def bivariate_eval(K: BivariateKernel, x, y, kx: int = 0, ky: int = 0):
    """Mixed partial ``d^kx/dx^kx d^ky/dy^ky R(x, y)``; broadcasts over x and y."""
    _check_order(kx)
    _check_order(ky)
    _check_unit("x", x)
    _check_unit("y", y)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    C = K.region_coeffs
    rx, ry = derivative_row(x, kx), derivative_row(y, ky)
    lower = np.einsum("...i,ij,...j->...", rx, C, ry)
    # x > y: R(x, y) = P(y, x) with P the x <= y polynomial
    upper = np.einsum("...j,ij,...i->...", rx, C, ry)
    out = np.where(x <= y, lower, upper)
    return float(out) if out.ndim == 0 else out


def t_kernel(x, y):
    """Reproducing kernel of W_2^1[0,1]: ``1 + min(x, y)``."""
    _check_unit("x", x)
    _check_unit("y", y)
    out = 1.0 + np.minimum(x, y)
    return float(out) if np.ndim(out) == 0 else out


def _pieces(f):
    """Normalise ``f`` to a list of (a, b, coeffs) covering [0, 1]."""
    if isinstance(f, PiecewisePolynomial):
        b = f.breakpoint
        return [(0.0, b, f.lo_coeffs), (b, 1.0, f.hi_coeffs)]
    return [(0.0, 1.0, np.asarray(f, dtype=float))]


def w6_inner_product(u, g) -> float:
    """Inner product of W_2^6[0,1] for polynomial or piecewise-polynomial arguments.

    ``u`` and ``g`` are either monomial coefficient arrays or
    :class:`PiecewisePolynomial`.  The integral of the product of sixth
    derivatives is computed exactly, piece by piece.
    """
    P = np.polynomial.polynomial
    pu, pg = _pieces(u), _pieces(g)
    total = 0.0
    u0 = pu[0][2]
    g0 = pg[0][2]
    for i in range(6):
        total += P.polyval(0.0, P.polyder(u0, i)) * P.polyval(0.0, P.polyder(g0, i))
    cuts = sorted({0.0, 1.0, *(a for a, _, _ in pu), *(a for a, _, _ in pg)})
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a:
            continue
        m = 0.5 * (a + b)
        cu = next(c for lo, hi, c in pu if lo <= m <= hi)
        cg = next(c for lo, hi, c in pg if lo <= m <= hi)
        prod = P.polyint(P.polymul(P.polyder(cu, 6), P.polyder(cg, 6)))
        total += P.polyval(b, prod) - P.polyval(a, prod)
    return float(total)
