"""Command line interface: ``rkhsbvp solve | kernel-dump | verify``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .bench import RunConfig, emit, parse_grid, resolve_grid, run
from .expr import ExpressionDomainError
from .kernel import default_kernel
from .problem import ProblemFileError

EXIT_OK, EXIT_SOLVER, EXIT_INPUT = 0, 1, 2


def _write(text: str, out: str | None):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _cmd_solve(args) -> int:
    try:
        grid = parse_grid(args.grid) if args.grid else None
        config = RunConfig(
            source=args.example if args.example else args.problem,
            n=args.nodes,
            grid=grid,
            tol=args.tol,
            max_iter=args.max_iter,
            fmt=args.format,
        )
        resolve_grid(config.load(), config.grid)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        table = run(config)
    except ProblemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, ExpressionDomainError, ValueError, RuntimeError, FloatingPointError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if not table.metadata.get("converged", True):
        print("warning: nonlinear iteration did not converge", file=sys.stderr)
    _write(emit(table, args.format), args.out)
    return EXIT_OK


def _cmd_kernel_dump(args) -> int:
    _write(default_kernel().to_csv(), args.out)
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .checks import run_checks

    results = run_checks()
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_SOLVER


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rkhsbvp", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve a problem and print its error table")
    src = solve.add_mutually_exclusive_group(required=True)
    src.add_argument("--problem", metavar="PATH")
    src.add_argument("--example", metavar="ID", help="built-in example: 4.1, 4.2, 4.3 or 4.4")
    solve.add_argument("--nodes", type=int, default=36)
    solve.add_argument("--grid", help='"a:b:step", comma list, or preset (default, table3, table4)')
    solve.add_argument("--tol", type=float, default=1e-10)
    solve.add_argument("--max-iter", type=int, default=25)
    solve.add_argument("--format", choices=("csv", "text"), default="text")
    solve.add_argument("--out", metavar="PATH")
    solve.set_defaults(func=_cmd_solve)

    dump = sub.add_parser("kernel-dump", help="write the 12x12 kernel coefficient matrix as CSV")
    dump.add_argument("--out", metavar="PATH")
    dump.set_defaults(func=_cmd_kernel_dump)

    verify = sub.add_parser("verify", help="run the invariant suite")
    verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
