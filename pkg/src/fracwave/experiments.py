"""Condition-number tables, convergence tables and solver benchmarks."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .assembly import (
    FractionalForm1D,
    FractionalForm2D,
    assemble_A,
    assemble_C2d,
    load_vector_1d,
    load_vector_2d,
)
from .krylov import SolverConfig, SolverReport, bicgstab, gmres
from .linalg import condition_number_2, lu_solve_doolittle
from .problems import ProblemSpec, l2_error, make_f1, make_f2, make_fs
from .splines import WaveletBasisSpec
from .transform import TransformMatrix, multilevel_1d, multilevel_2d

__all__ = [
    "SOLVERS",
    "ReportDocument",
    "ExperimentConfig",
    "SolveResult",
    "wavelet_preconditioner",
    "solve_problem",
    "make_problem",
    "run_condition_table",
    "run_convergence_table",
    "run_benchmark",
]

SOLVERS = ("lu", "bicgstab", "pre-bicgstab", "gmres", "pre-gmres")


def _parse_cell(text: str):
    if text == "":
        return None
    if text in ("True", "False"):
        return text == "True"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _emit_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def _text_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v) or math.isinf(v):
            return str(v)
        if v != 0 and (abs(v) >= 1e4 or abs(v) < 1e-2):
            return f"{v:.4e}"
        return f"{v:.4f}"
    return str(value)


@dataclass
class ReportDocument:
    """Column-named table that serialises to CSV (lossless) and aligned text."""

    columns: list
    rows: list = field(default_factory=list)
    title: str = ""

    def add_row(self, **values) -> None:
        unknown = set(values) - set(self.columns)
        if unknown:
            raise KeyError(f"unknown columns {sorted(unknown)}")
        self.rows.append(tuple(values.get(c) for c in self.columns))

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_emit_cell(v) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, title: str = "") -> "ReportDocument":
        reader = csv.reader(io.StringIO(text))
        columns = next(reader)
        rows = [tuple(_parse_cell(c) for c in row) for row in reader if row]
        return cls(list(columns), rows, title)

    def to_text(self) -> str:
        cells = [list(self.columns)] + [[_text_cell(v) for v in row] for row in self.rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(self.columns))]
        lines = [self.title] if self.title else []
        for k, r in enumerate(cells):
            lines.append("  ".join(c.rjust(w) for c, w in zip(r, widths)))
            if k == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"

    def render(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "text":
            return self.to_text()
        raise ValueError(f"unknown format {fmt!r}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, ReportDocument):
            return NotImplemented
        return list(self.columns) == list(other.columns) and [tuple(r) for r in self.rows] == [
            tuple(r) for r in other.rows
        ]


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters shared by the table drivers and the command line."""

    dim: int = 1
    beta: float = 0.5
    alpha: Optional[float] = None
    p: float = 1.0
    q: float = 0.0
    a: float = 1.0
    p1: Optional[float] = None
    q1: Optional[float] = None
    p2: Optional[float] = None
    q2: Optional[float] = None
    a1: Optional[float] = None
    a2: Optional[float] = None
    r: int = 2
    s: int = 2
    nmin: int = 3
    nmax: int = 10
    problem: str = "f1"
    lam: float = 1.1
    solvers: tuple = ("bicgstab", "pre-bicgstab")
    restart: int = 0
    tol: float = 1e-7
    max_iter: int = 100_000

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dim}")
        if self.nmin > self.nmax:
            raise ValueError(f"empty level range {self.nmin}..{self.nmax}")
        if self.nmin < 2:
            raise ValueError("levels start at 2")
        bad = [s for s in self.solvers if s not in SOLVERS]
        if bad:
            raise ValueError(f"unknown solvers {bad}; choose from {SOLVERS}")

    @property
    def levels(self) -> range:
        return range(self.nmin, self.nmax + 1)

    def form_1d(self, n: int) -> FractionalForm1D:
        return FractionalForm1D(a=self.a, p=self.p, q=self.q, beta=self.beta, r=self.r, n=n)

    def form_2d(self, n: int) -> FractionalForm2D:
        alpha = self.beta if self.alpha is None else self.alpha
        return FractionalForm2D(
            s=self.s,
            a1=self.a if self.a1 is None else self.a1,
            a2=self.a if self.a2 is None else self.a2,
            p1=self.p if self.p1 is None else self.p1,
            q1=self.q if self.q1 is None else self.q1,
            p2=self.p if self.p2 is None else self.p2,
            q2=self.q if self.q2 is None else self.q2,
            alpha=alpha,
            beta=self.beta,
            r=self.r,
            n=n,
        )


def wavelet_preconditioner(form) -> TransformMatrix:
    """``S_n`` with ``mu = 1 - beta/2`` (1D) or ``S~_n`` with ``mu = (s + 1 - alpha)/2`` (2D)."""
    if isinstance(form, FractionalForm1D):
        return multilevel_1d(WaveletBasisSpec(form.r, 1 - form.beta / 2), form.n)
    return multilevel_2d(WaveletBasisSpec(form.r, (form.s + 1 - form.alpha) / 2), form.n)


def _log2_ratio(values: list) -> list:
    out = [None]
    for prev, cur in zip(values[:-1], values[1:]):
        out.append(math.log2(cur / prev) if prev and cur else None)
    return out


def run_condition_table(config: ExperimentConfig) -> ReportDocument:
    """kappa of the single-scale and wavelet stiffness matrices for each level."""
    if config.dim == 1:
        names = ("kappa_A", "ratio_A", "kappa_B", "ratio_B")
    else:
        names = ("kappa_C", "ratio_C", "kappa_D", "ratio_D")
    doc = ReportDocument(["n", "size", *names])
    raw, wav, sizes = [], [], []
    for n in config.levels:
        form = config.form_1d(n) if config.dim == 1 else config.form_2d(n)
        op = assemble_A(form) if config.dim == 1 else assemble_C2d(form)
        S = wavelet_preconditioner(form)
        sizes.append(form.size)
        raw.append(condition_number_2(op))
        wav.append(condition_number_2(S.congruence(op)))
    for row in zip(config.levels, sizes, raw, _log2_ratio(raw), wav, _log2_ratio(wav)):
        doc.add_row(**dict(zip(doc.columns, row)))
    return doc


def make_problem(config: ExperimentConfig) -> ProblemSpec:
    if config.dim == 1:
        if config.problem == "f1":
            return make_f1(config.beta, r=config.r)
        if config.problem == "f2":
            return make_f2(config.beta, config.lam, r=config.r)
        raise ValueError(f"problem {config.problem!r} is not one-dimensional")
    if config.problem != "fs":
        raise ValueError(f"problem {config.problem!r} is not two-dimensional")
    return make_fs(config.s, config.beta if config.alpha is None else config.alpha)


@dataclass
class SolveResult:
    solver: str
    n: int
    size: int
    coefficients: np.ndarray
    iterations: object
    cpu_seconds: float
    converged: bool
    l2_error: float
    report: Optional[SolverReport] = None


def _problem_form(problem: ProblemSpec, config: Optional[ExperimentConfig], n: int):
    if config is None:
        return problem.form_at(n)
    form = config.form_1d(n) if problem.dim == 1 else config.form_2d(n)
    # the forcing terms are only valid for the problem's own operator
    if form != problem.form_at(n):
        raise ValueError("form parameters do not match the manufactured problem")
    return form


def solve_problem(
    problem: ProblemSpec,
    n: int,
    solver: str,
    restart: int = 0,
    tol: float = 1e-7,
    max_iter: int = 100_000,
) -> SolveResult:
    """Assemble the level-``n`` system for ``problem`` and solve it with ``solver``."""
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}; choose from {SOLVERS}")
    form = problem.form_at(n)
    if problem.dim == 1:
        op = assemble_A(form)
        b = load_vector_1d(problem.forcing, form.r, n)
    else:
        op = assemble_C2d(form)
        b = load_vector_2d(problem.forcing, form.r, n)
    t0 = time.process_time()
    report = None
    if solver == "lu":
        x = lu_solve_doolittle(op.dense(), b)
        iterations, converged = None, True
    else:
        pre = wavelet_preconditioner(form) if solver.startswith("pre-") else None
        cfg = SolverConfig(tol=tol, max_iter=max_iter, restart=restart, preconditioner=pre)
        method = bicgstab if solver.endswith("bicgstab") else gmres
        report = method(op, b, cfg)
        x = report.solution
        converged = report.converged
        iterations = report.label if method is gmres and restart else report.iterations
    cpu = time.process_time() - t0
    err = l2_error(x, problem.exact, form.r, n) if problem.exact else None
    return SolveResult(solver, n, form.size, x, iterations, cpu, converged, err, report)


def _solver_label(name: str, restart: int) -> str:
    if name.endswith("gmres") and restart:
        return f"{name}({restart})"
    return name


def run_benchmark(config: ExperimentConfig) -> ReportDocument:
    """One row per (level, solver) with the bench CSV schema."""
    problem = make_problem(config)
    doc = ReportDocument(["n", "size", "solver", "iterations", "cpu_seconds", "l2_error", "converged"])
    for n in config.levels:
        _problem_form(problem, config, n)
        for name in config.solvers:
            res = solve_problem(problem, n, name, config.restart, config.tol, config.max_iter)
            doc.add_row(
                n=n,
                size=res.size,
                solver=_solver_label(name, config.restart),
                iterations=res.iterations,
                cpu_seconds=res.cpu_seconds,
                l2_error=res.l2_error,
                converged=res.converged,
            )
    return doc


def run_convergence_table(config: ExperimentConfig) -> ReportDocument:
    """Wide layout: iterations and cpu time per solver, the L2 error and the observed order."""
    problem = make_problem(config)
    cols = ["n", "size"]
    for name in config.solvers:
        label = _solver_label(name, config.restart)
        cols += [f"{label}_iter", f"{label}_cpu"]
    cols += ["l2_error", "order", "converged"]
    doc = ReportDocument(cols)
    errors = []
    for n in config.levels:
        _problem_form(problem, config, n)
        values = {"n": n}
        ok = True
        err = None
        for name in config.solvers:
            res = solve_problem(problem, n, name, config.restart, config.tol, config.max_iter)
            label = _solver_label(name, config.restart)
            values["size"] = res.size
            values[f"{label}_iter"] = res.iterations
            values[f"{label}_cpu"] = res.cpu_seconds
            ok = ok and res.converged
            if err is None:
                err = res.l2_error
        errors.append(err)
        values["l2_error"] = err
        values["converged"] = ok
        doc.add_row(**values)
    # observed order: log2 of successive error quotients
    orders = _log2_ratio(errors)
    i = doc.columns.index("order")
    doc.rows = [row[:i] + (None if o is None else -o,) + row[i + 1:] for row, o in zip(doc.rows, orders)]
    return doc
