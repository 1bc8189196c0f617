"""Fifth-order two-point boundary-value problems and their homogenization.

A problem reads

    y^(5) + f4 y^(4) + ... + f0 y = rhs(x, y),   x in [a, b],
    y(a) = A0, y'(a) = A1, y''(a) = A2, y(b) = B0, y'(b) = B1.

:func:`homogenize` subtracts the unique quartic matching the five boundary
values and maps [a, b] onto [0, 1], giving a problem for ``u`` with all five
boundary values zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as P

from .expr import Expr, Num, eval_expression, parse_expression, references

__all__ = [
    "BVPSpec",
    "ShiftPolynomial",
    "HomogenizedBVP",
    "ProblemFileError",
    "shift_polynomial",
    "homogenize",
    "map_point_back",
    "parse_problem",
    "load_problem",
]

ZERO = Num(0.0)


class ProblemFileError(ValueError):
    pass


@dataclass(frozen=True)
class BVPSpec:
    interval: tuple[float, float]
    rhs: Expr
    bc: tuple[float, float, float, float, float]
    linear_coeffs: tuple[Expr, Expr, Expr, Expr, Expr] = (ZERO,) * 5
    exact: Expr | None = None
    name: str = ""

    def __post_init__(self):
        a, b = (float(v) for v in self.interval)
        if not a < b:
            raise ValueError(f"interval must satisfy a < b, got {self.interval}")
        if len(self.bc) != 5:
            raise ValueError(f"exactly five boundary values are required, got {len(self.bc)}")
        if len(self.linear_coeffs) != 5:
            raise ValueError("linear_coeffs must hold f0..f4")
        object.__setattr__(self, "interval", (a, b))
        object.__setattr__(self, "bc", tuple(float(v) for v in self.bc))
        object.__setattr__(self, "linear_coeffs", tuple(self.linear_coeffs))

    @property
    def is_linear(self) -> bool:
        return not references(self.rhs, "u")


@dataclass(frozen=True)
class ShiftPolynomial:
    """Quartic ``p(x) = sum coeffs[i] x^i`` in original coordinates."""

    coeffs: np.ndarray

    def __call__(self, x, k: int = 0):
        c = np.asarray(self.coeffs, dtype=float)
        if k:
            c = P.polyder(c, k) if k <= 4 else np.zeros(1)
        out = P.polyval(np.asarray(x, dtype=float), c)
        return float(out) if np.ndim(out) == 0 else out


def shift_polynomial(bc, a: float, b: float) -> ShiftPolynomial:
    """Quartic with p(a), p'(a), p''(a), p(b), p'(b) equal to ``bc``.

    Solved in the local variable ``s = x - a`` (better scaled for intervals
    away from the origin) and expanded back to monomials in ``x``.
    """
    if not a < b:
        raise ValueError("a < b required")
    A0, A1, A2, B0, B1 = (float(v) for v in bc)
    h = b - a
    # s-coefficients: q0 = A0, q1 = A1, q2 = A2/2; q3, q4 from the right end
    q0, q1, q2 = A0, A1, A2 / 2.0
    M = np.array([[h**3, h**4], [3 * h**2, 4 * h**3]])
    r = np.array([B0 - (q0 + q1 * h + q2 * h**2), B1 - (q1 + 2 * q2 * h)])
    q3, q4 = np.linalg.solve(M, r)
    q = np.array([q0, q1, q2, q3, q4])
    # p(x) = q(x - a)
    coeffs = np.zeros(5)
    shift = np.array([-a, 1.0])
    term = np.array([1.0])
    for qi in q:
        coeffs[: len(term)] += qi * term
        term = P.polymul(term, shift)
    return ShiftPolynomial(coeffs)


@dataclass(frozen=True)
class HomogenizedBVP:
    """Problem for ``u(t)`` on [0, 1] with zero boundary values.

    ``y(x) = u((x - a) / h) + p(x)`` with ``h = b - a``; the transformed
    equation is ``u^(5) + sum_i F_i(t) u^(i) = H(t, u)`` where
    ``F_i = h^(5-i) f_i`` and ``H = h^5 (rhs(x, u + p) - sum_i f_i p^(i))``.
    """

    spec: BVPSpec
    shift: ShiftPolynomial
    a: float
    b: float

    @property
    def h(self) -> float:
        return self.b - self.a

    @property
    def is_linear(self) -> bool:
        return self.spec.is_linear

    def to_original(self, t):
        return self.a + np.asarray(t, dtype=float) * self.h

    def to_unit(self, x):
        return (np.asarray(x, dtype=float) - self.a) / self.h

    def coefficients(self, t) -> np.ndarray:
        """Operator coefficients at ``t``; shape ``(len(t), 6)``, last column 1."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        x = self.to_original(t)
        out = np.ones((t.size, 6))
        for i, f in enumerate(self.spec.linear_coeffs):
            out[:, i] = self.h ** (5 - i) * _eval_x(f, x)
        return out

    def rhs(self, t, u):
        """``H(t, u)``; ``u`` broadcasts against ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        x = self.to_original(t)
        u = np.broadcast_to(np.asarray(u, dtype=float), t.shape)
        y = u + self.shift(x)
        val = eval_expression(self.spec.rhs, x, y)
        for i, f in enumerate(self.spec.linear_coeffs):
            if f != ZERO:
                val = val - _eval_x(f, x) * self.shift(x, i)
        return self.h**5 * np.asarray(val, dtype=float)

    def exact_u(self, t):
        """Homogenized exact solution ``y(x(t)) - p(x(t))``."""
        if self.spec.exact is None:
            raise ValueError("problem has no exact solution")
        x = self.to_original(t)
        return np.asarray(eval_expression(self.spec.exact, x), dtype=float) - self.shift(x)


def _eval_x(e: Expr, x):
    if isinstance(e, Num):
        return np.full(np.shape(x), e.value)
    return np.asarray(eval_expression(e, x), dtype=float) * np.ones(np.shape(x))


def homogenize(spec: BVPSpec) -> HomogenizedBVP:
    a, b = spec.interval
    return HomogenizedBVP(spec, shift_polynomial(spec.bc, a, b), a, b)


def map_point_back(h: HomogenizedBVP, t: float) -> float:
    """Original-domain abscissa of the unit-interval point ``t``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    return float(h.a + t * (h.b - h.a))


_KEYS = {"interval", "f0", "f1", "f2", "f3", "f4", "rhs", "bc", "exact", "name"}
ALIASES = {"y": "u"}


def _constant(text: str, key: str) -> float:
    e = parse_expression(text)
    if references(e, "x") or references(e, "u"):
        raise ProblemFileError(f"{key}: values must be constants, got {text!r}")
    return float(eval_expression(e, 0.0))


def _values(text: str, key: str) -> list[float]:
    return [_constant(tok, key) for tok in text.replace(",", " ").split()]


def parse_problem(text: str, source: str = "<string>") -> BVPSpec:
    """Parse the ``key = value`` problem format.

    Keys: ``interval`` (two numbers), ``f0``..``f4`` (default 0), ``rhs``,
    ``bc`` (A0 A1 A2 B0 B1), optional ``exact`` and ``name``.  ``#`` starts
    a comment.  Numbers may be constant expressions such as ``-exp(1)``; in
    expressions ``y`` is accepted as a synonym for ``u``.
    """
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ProblemFileError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ProblemFileError(f"{source}:{lineno}: unknown key {key!r}")
        if key in entries:
            raise ProblemFileError(f"{source}:{lineno}: duplicate key {key!r}")
        entries[key] = (value, lineno)

    for key in ("interval", "rhs", "bc"):
        if key not in entries:
            raise ProblemFileError(f"{source}: missing required key {key!r}")

    def expr(key):
        value, lineno = entries[key]
        try:
            return parse_expression(value, ALIASES)
        except ValueError as exc:
            raise ProblemFileError(f"{source}:{lineno}: {key}: {exc}") from exc

    def numbers(key, count):
        value, lineno = entries[key]
        try:
            vals = _values(value, key)
        except ValueError as exc:
            raise ProblemFileError(f"{source}:{lineno}: {key}: {exc}") from exc
        if len(vals) != count:
            raise ProblemFileError(
                f"{source}:{lineno}: {key} needs {count} values, got {len(vals)}"
            )
        return vals

    interval = numbers("interval", 2)
    bc = numbers("bc", 5)
    coeffs = tuple(expr(f"f{i}") if f"f{i}" in entries else ZERO for i in range(5))
    for i, c in enumerate(coeffs):
        if references(c, "u"):
            raise ProblemFileError(f"{source}: f{i} must not depend on u")
    exact = expr("exact") if "exact" in entries else None
    try:
        return BVPSpec(
            interval=tuple(interval),
            rhs=expr("rhs"),
            bc=tuple(bc),
            linear_coeffs=coeffs,
            exact=exact,
            name=entries.get("name", (source, 0))[0],
        )
    except ValueError as exc:
        raise ProblemFileError(f"{source}: {exc}") from exc


def load_problem(path) -> BVPSpec:
    path = Path(path)
    return parse_problem(path.read_text(encoding="utf-8"), str(path))
