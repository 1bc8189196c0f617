"""Built-in benchmark problems, runs and absolute-error tables."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .expr import eval_expression, parse_expression
from .problem import BVPSpec, homogenize, load_problem
from .solver import evaluate_solution, solve_linear, solve_nonlinear

__all__ = [
    "BUILTIN_IDS",
    "GRID_PRESETS",
    "PUBLISHED_ERRORS",
    "ErrorTable",
    "TableRow",
    "RunConfig",
    "builtin_example",
    "parse_grid",
    "run",
    "emit",
    "read_csv",
]

E = math.e
DEFAULT_GRID = tuple(round(0.1 * i, 10) for i in range(11))

_EXAMPLES = {
    "4.1": dict(
        name="Example 4.1: y^(5) = y - 15 e^x - 10 x e^x",
        f=("-1", "0", "0", "0", "0"),
        rhs="-15*exp(x) - 10*x*exp(x)",
        bc=(0.0, 1.0, 0.0, 0.0, -E),
        exact="x*(1 - x)*exp(x)",
    ),
    "4.2": dict(
        name="Example 4.2: y^(5) = e^-x y^2",
        f=("0",) * 5,
        rhs="exp(-x)*u^2",
        bc=(1.0, 1.0, 1.0, E, E),
        exact="exp(x)",
    ),
    "4.3": dict(
        name="Example 4.3: y^(5) = -24 e^-5y + 48/(1+x)^5",
        f=("0",) * 5,
        rhs="-24*exp(-5*u) + 48/(1 + x)^5",
        bc=(0.0, 1.0, -1.0, math.log(2.0), 0.5),
        exact="ln(1 + x)",
    ),
    "4.4": dict(
        name="Example 4.4: y^(5) + y^(4) + e^-2x y^2 = 2 e^x + 1",
        f=("0", "0", "0", "0", "1"),
        rhs="2*exp(x) + 1 - exp(-2*x)*u^2",
        bc=(1.0, 1.0, 1.0, E, E),
        exact="exp(x)",
    ),
}
BUILTIN_IDS = tuple(_EXAMPLES)

GRID_PRESETS = {
    "default": DEFAULT_GRID,
    "table3": (0.0, 0.0806, 0.1648, 0.2285, 0.3999, 0.5, 0.6923, 0.7714, 0.8836, 0.9447, 1.0),
    "table4": (0.0, 0.1, 0.1184, 0.1517, 0.2410, 0.3604, 0.4287, 0.5, 0.6395, 0.8482, 0.9996, 1.0),
}

# Published RKHSM absolute errors, for side-by-side display.
PUBLISHED_ERRORS = {
    "4.1": dict(zip(DEFAULT_GRID, (0.0, 5.89e-7, 1.73e-8, 6.02e-7, 7.42e-7, 3.32e-7, 3.10e-7, 3.08e-7, 4.58e-7, 4.30e-7, 2.36e-13))),
    "4.2": dict(zip(DEFAULT_GRID, (0.0, 5.19e-7, 0.60e-7, 3.19e-7, 2.50e-7, 3.03e-7, 9.60e-7, 4.20e-7, 4.09e-7, 5.46e-7, 5.34e-7))),
    "4.3": dict(zip(GRID_PRESETS["table3"], (0.0, 0.003e-8, 1.25e-8, 0.77e-8, 9.21e-8, 4.14e-8, 3.62e-8, 1.92e-8, 4.49e-8, 0.52e-8, 0.23e-8))),
    "4.4": dict(zip(GRID_PRESETS["table4"], (0.0,) * 10 + (1e-9, 0.0))),
}


def builtin_example(example_id: str) -> BVPSpec:
    """One of the four benchmark problems, ids ``"4.1"`` .. ``"4.4"``."""
    key = str(example_id)
    if key not in _EXAMPLES:
        raise KeyError(f"unknown example {example_id!r}; choose from {', '.join(BUILTIN_IDS)}")
    d = _EXAMPLES[key]
    return BVPSpec(
        interval=(0.0, 1.0),
        rhs=parse_expression(d["rhs"]),
        bc=d["bc"],
        linear_coeffs=tuple(parse_expression(f) for f in d["f"]),
        exact=parse_expression(d["exact"]),
        name=d["name"],
    )


def parse_grid(text: str) -> tuple[float, ...]:
    """``"a:b:step"``, a comma list, or a preset name (default, table3, table4)."""
    text = text.strip()
    if text in GRID_PRESETS:
        return GRID_PRESETS[text]
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise ValueError(f"bad grid range {text!r}; expected a:b:step")
        a, b, step = parts
        count = int(round((b - a) / step)) + 1
        return tuple(float(v) for v in np.linspace(a, a + (count - 1) * step, count))
    return tuple(float(p) for p in text.split(",") if p.strip())


@dataclass
class RunConfig:
    source: str = "4.1"
    n: int = 36
    grid: tuple[float, ...] | None = None
    tol: float = 1e-10
    max_iter: int = 25
    fmt: str = "text"

    def __post_init__(self):
        if self.n < 6:
            raise ValueError("at least 6 nodes are required")
        if self.fmt not in ("csv", "text"):
            raise ValueError("format must be csv or text")

    @property
    def is_builtin(self) -> bool:
        return str(self.source) in _EXAMPLES

    def load(self) -> BVPSpec:
        if self.is_builtin:
            return builtin_example(self.source)
        return load_problem(Path(self.source))


@dataclass(frozen=True)
class TableRow:
    x: float
    approx: float
    exact: float | None = None
    abs_error: float | None = None
    residual: float | None = None


@dataclass
class ErrorTable:
    rows: list[TableRow] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def has_exact(self) -> bool:
        return all(r.exact is not None for r in self.rows) if self.rows else True

    def max_error(self, xs=None) -> float:
        rows = self.rows if xs is None else [r for r in self.rows if any(abs(r.x - v) < 1e-12 for v in xs)]
        return max((r.abs_error for r in rows), default=0.0)


def _residual(sol, x):
    h = sol.problem
    t = np.atleast_1d(h.to_unit(x))
    op = h.coefficients(t)
    Lu = sum(op[:, p] * sol.u(t, p) for p in range(6))
    return (Lu - h.rhs(t, sol.u(t))) / h.h**5


def resolve_grid(spec: BVPSpec, grid=None) -> tuple[float, ...]:
    """Sorted evaluation abscissae; defaults to 11 equispaced points."""
    a, b = spec.interval
    if grid is None:
        grid = GRID_PRESETS["default"] if (a, b) == (0.0, 1.0) else tuple(np.linspace(a, b, 11))
    grid = tuple(sorted(float(v) for v in grid))
    if grid and (grid[0] < a or grid[-1] > b):
        raise ValueError(f"grid must lie within the problem interval [{a}, {b}]")
    return grid


def run(config: RunConfig) -> ErrorTable:
    """Solve the configured problem and tabulate it on the evaluation grid."""
    spec = config.load()
    h = homogenize(spec)
    grid = resolve_grid(spec, config.grid)

    start = time.perf_counter()
    if spec.is_linear:
        sol = solve_linear(h, config.n)
        method = "linear"
    else:
        sol = solve_nonlinear(h, config.n, config.tol, config.max_iter)
        method = "nonlinear"
    xs = np.array(grid, dtype=float)
    approx = np.atleast_1d(evaluate_solution(sol, xs))
    elapsed = time.perf_counter() - start

    rows = []
    if spec.exact is not None:
        exact = np.broadcast_to(np.asarray(eval_expression(spec.exact, xs), dtype=float), xs.shape)
        for x, e, y in zip(xs, exact, approx):
            rows.append(TableRow(float(x), float(y), float(e), abs(float(e) - float(y))))
    else:
        res = _residual(sol, xs)
        for x, y, r in zip(xs, approx, res):
            rows.append(TableRow(float(x), float(y), residual=float(r)))

    metadata = {
        "problem": spec.name or str(config.source),
        "source": str(config.source),
        "n": config.n,
        "method": method,
        "iterations": sol.n_iter if method == "nonlinear" else 1,
        "converged": sol.converged,
        "wall_time_s": elapsed,
    }
    return ErrorTable(rows, metadata)


def _g(v) -> str:
    return format(v, ".17g")


def emit(table: ErrorTable, fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if table.has_exact:
            writer.writerow(["x", "exact", "approx", "abs_error"])
            for r in table.rows:
                writer.writerow([_g(r.x), _g(r.exact), _g(r.approx), _g(r.abs_error)])
        else:
            writer.writerow(["x", "approx", "residual"])
            for r in table.rows:
                writer.writerow([_g(r.x), _g(r.approx), _g(r.residual)])
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")

    meta = table.metadata
    published = PUBLISHED_ERRORS.get(meta.get("source", ""), {})
    lines = []
    if table.has_exact:
        head = f"{'x':>8}  {'exact':>18}  {'approx':>18}  {'abs error':>10}"
        if published:
            head += f"  {'published':>10}"
        lines.append(head)
        for r in table.rows:
            line = f"{r.x:8.4f}  {r.exact:18.12f}  {r.approx:18.12f}  {r.abs_error:10.3e}"
            if published:
                ref = published.get(round(r.x, 10))
                line += f"  {ref:10.3e}" if ref is not None else f"  {'':>10}"
            lines.append(line)
    else:
        lines.append(f"{'x':>8}  {'approx':>18}  {'residual':>10}")
        for r in table.rows:
            lines.append(f"{r.x:8.4f}  {r.approx:18.12f}  {r.residual:10.3e}")
    lines.append("")
    for key in ("problem", "n", "method", "iterations", "converged"):
        if key in meta:
            lines.append(f"# {key}: {meta[key]}")
    if "wall_time_s" in meta:
        lines.append(f"# wall time: {meta['wall_time_s']:.3f} s")
    return "\n".join(lines) + "\n"


def read_csv(text: str) -> ErrorTable:
    """Inverse of ``emit(table, "csv")``."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = []
    for rec in reader:
        vals = dict(zip(header, (float(v) for v in rec)))
        rows.append(
            TableRow(
                vals["x"],
                vals["approx"],
                vals.get("exact"),
                vals.get("abs_error"),
                vals.get("residual"),
            )
        )
    return ErrorTable(rows)
