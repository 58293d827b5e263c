"""Command line entry point: ``fracwave {cond1d,cond2d,solve1d,solve2d,bench1d,bench2d}``."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .experiments import (
    SOLVERS,
    ExperimentConfig,
    ReportDocument,
    run_benchmark,
    run_condition_table,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3


def _add_common(p: argparse.ArgumentParser, dim: int) -> None:
    p.add_argument("--beta", type=float, default=0.5 if dim == 1 else 0.75)
    p.add_argument("--p", type=float, default=None, help="left-sided weight (default 1, or 0.5 for cond1d)")
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--a", type=float, default=1.0, help="diffusion coefficient")
    p.add_argument("--r", type=int, choices=(2, 3), default=2 if dim == 1 else 3)
    if dim == 2:
        p.add_argument("--alpha", type=float, default=None, help="x-direction exponent (default: beta)")
        p.add_argument("--s", type=int, choices=(2, 3), default=2)
        for name in ("p1", "q1", "p2", "q2", "a1", "a2"):
            p.add_argument(f"--{name}", type=float, default=None)
    p.add_argument("--n", type=int, default=None, help="single level (overrides --nmin/--nmax)")
    p.add_argument("--nmin", type=int, default=None)
    p.add_argument("--nmax", type=int, default=None)
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("csv", "text"), default="csv")


def _add_solve(p: argparse.ArgumentParser, dim: int, multi: bool) -> None:
    problems = ("f1", "f2") if dim == 1 else ("fs",)
    p.add_argument("--problem", choices=problems, default=problems[0])
    p.add_argument("--lambda", dest="lam", type=float, default=1.1, help="exponent of the f2 solution")
    if multi:
        p.add_argument("--solver", choices=SOLVERS, nargs="+", default=["lu", "bicgstab", "pre-bicgstab"])
    else:
        p.add_argument("--solver", choices=SOLVERS, default="pre-bicgstab")
    p.add_argument("--restart", type=int, default=0, metavar="M", help="GMRES restart length (0 = full)")
    p.add_argument("--tol", type=float, default=1e-7, help="absolute residual tolerance")
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--gnuplot", default=None, metavar="FILE", help="also write 'n h l2_error' columns")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracwave", description="Wavelet Galerkin experiments for fractional diffusion.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("cond1d", help="condition numbers of A_n and S A_n S^T")
    _add_common(p, 1)
    p = sub.add_parser("cond2d", help="condition numbers of C_n and S C_n S^T")
    _add_common(p, 2)
    for dim in (1, 2):
        p = sub.add_parser(f"solve{dim}d", help=f"solve the {dim}D model problem with one solver")
        _add_common(p, dim)
        _add_solve(p, dim, multi=False)
        p = sub.add_parser(f"bench{dim}d", help=f"benchmark several solvers on the {dim}D model problem")
        _add_common(p, dim)
        _add_solve(p, dim, multi=True)
    return parser


_DEFAULT_LEVELS = {
    "cond1d": (3, 10),
    "cond2d": (4, 5),
    "solve1d": (5, 10),
    "bench1d": (5, 10),
    "solve2d": (5, 5),
    "bench2d": (5, 6),
}
_MAX_LEVEL = {1: 12, 2: 6}


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    dim = 2 if args.command.endswith("2d") else 1
    lo, hi = _DEFAULT_LEVELS[args.command]
    if args.n is not None:
        lo = hi = args.n
    else:
        lo = args.nmin if args.nmin is not None else lo
        hi = args.nmax if args.nmax is not None else max(hi, lo)
    if hi > _MAX_LEVEL[dim]:
        raise ValueError(f"level {hi} exceeds the supported maximum {_MAX_LEVEL[dim]} for {dim}D")
    symmetric = args.command == "cond1d"
    p = args.p if args.p is not None else (0.5 if symmetric and args.q is None else None)
    q = args.q
    if p is None and q is None:
        p, q = 1.0, 0.0
    elif p is None:
        p = 1.0 - q
    elif q is None:
        q = 1.0 - p
    kw = dict(dim=dim, beta=args.beta, p=p, q=q, a=args.a, r=args.r, nmin=lo, nmax=hi)
    if dim == 2:
        kw.update(alpha=args.alpha, s=args.s)
        for name in ("p1", "q1", "p2", "q2", "a1", "a2"):
            kw[name] = getattr(args, name)
    if args.command.startswith(("solve", "bench")):
        solvers = args.solver if isinstance(args.solver, list) else [args.solver]
        if args.restart and not any(s.endswith("gmres") for s in solvers):
            raise ValueError("--restart only applies to gmres solvers")
        kw.update(
            problem=args.problem,
            lam=args.lam,
            solvers=tuple(solvers),
            restart=args.restart,
            tol=args.tol,
            max_iter=args.max_iter,
        )
    return ExperimentConfig(**kw)


def _write(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _write_gnuplot(doc: ReportDocument, path: str) -> None:
    lines = ["# n h l2_error solver"]
    for row in doc.rows:
        rec = dict(zip(doc.columns, row))
        if rec["l2_error"] is not None:
            lines.append(f"{rec['n']} {2.0 ** -rec['n']:.10e} {rec['l2_error']:.10e} {rec['solver']}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        config = config_from_args(args)
        if args.command.startswith("cond"):
            doc = run_condition_table(config)
        else:
            doc = run_benchmark(config)
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _write(doc.render(args.format), args.out)
    if getattr(args, "gnuplot", None):
        _write_gnuplot(doc, args.gnuplot)
    if "converged" in doc.columns and not all(doc.column("converged")):
        print(f"{parser.prog}: warning: at least one solve did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
