"""Bi-CGSTAB and GMRES with optional wavelet preconditioning.

Both solvers start from the zero vector and stop on an absolute residual
2-norm test. Bi-CGSTAB reports half iterations when it exits at the
intermediate ``s`` check, so counts such as ``33.5`` are possible.

The stopping tests use recursively updated residuals, which can drift from
the true ones (Bi-CGSTAB on badly conditioned systems is prone to this). A
run is only reported as converged if the recomputed residual also satisfies
``||b - A x|| <= tol * (1 + ||b||)``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .transform import TransformMatrix, fast_apply, fast_apply_transpose

__all__ = [
    "SolverConfig",
    "SolverReport",
    "BreakdownError",
    "as_operator",
    "bicgstab",
    "gmres",
]


class BreakdownError(ArithmeticError):
    """Bi-CGSTAB recurrence hit a zero denominator."""

    def __init__(self, message: str, iteration: int):
        super().__init__(f"{message} at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-7
    max_iter: int = 100_000
    restart: int = 0
    preconditioner: Optional[TransformMatrix] = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tolerance must be positive, got {self.tol}")
        if self.restart < 0:
            raise ValueError(f"restart length must be >= 0, got {self.restart}")
        if self.max_iter < 0:
            raise ValueError(f"max_iter must be >= 0, got {self.max_iter}")


@dataclass
class SolverReport:
    solution: np.ndarray
    iterations: float
    converged: bool
    residual_history: list = field(default_factory=list)
    wall_time: float = 0.0
    label: str = ""
    true_residual: float = math.nan

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1] if self.residual_history else math.nan


def as_operator(A) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap a callable, an object with ``matvec`` or a (sparse) matrix as ``x -> A x``."""
    if hasattr(A, "matvec"):
        return A.matvec
    if callable(A):
        return A
    return lambda x: A @ x


def _format_count(k: float) -> str:
    return f"{k:.1f}" if k != int(k) else str(int(k))


def bicgstab(apply_A, b, config: SolverConfig = SolverConfig()) -> SolverReport:
    """Right-preconditioned Bi-CGSTAB; the preconditioner is ``S^T S``."""
    t0 = time.perf_counter()
    A = as_operator(apply_A)
    S = config.preconditioner
    if S is None:
        M = lambda v: v  # noqa: E731
    else:
        M = lambda v: fast_apply_transpose(S, fast_apply(S, v))  # noqa: E731
    b = np.asarray(b, dtype=float)
    if not np.all(np.isfinite(b)):
        raise ValueError("right-hand side has non-finite entries")
    eps = config.tol
    y = np.zeros_like(b)
    r = b.copy()
    r_hat = r.copy()
    history = [float(np.linalg.norm(r))]

    bound = eps * (1 + float(np.linalg.norm(b)))

    def done(iterations, converged):
        true_res = float(np.linalg.norm(b - A(y)))
        converged = converged and true_res <= bound
        label = _format_count(iterations)
        return SolverReport(y, iterations, converged, history, time.perf_counter() - t0, label, true_res)

    if history[0] <= eps:
        return done(0, True)
    rho_old = alpha = omega = 1.0
    p = v = None
    for k in range(1, config.max_iter + 1):
        rho = float(r_hat @ r)
        if rho == 0.0 or not math.isfinite(rho):
            raise BreakdownError("rho vanished", k)
        if k == 1:
            p = r.copy()
        else:
            beta = (rho / rho_old) * (alpha / omega)
            p = r + beta * (p - omega * v)
        p_hat = M(p)
        v = A(p_hat)
        denom = float(r_hat @ v)
        if denom == 0.0 or not math.isfinite(denom):
            raise BreakdownError("r_hat^T v vanished", k)
        alpha = rho / denom
        s = r - alpha * v
        s_norm = float(np.linalg.norm(s))
        if s_norm <= eps:
            y = y + alpha * p_hat
            history.append(s_norm)
            return done(k - 0.5, True)
        s_hat = M(s)
        t = A(s_hat)
        tt = float(t @ t)
        if tt == 0.0:
            raise BreakdownError("t vanished", k)
        omega = float(t @ s) / tt
        if omega == 0.0 or not math.isfinite(omega):
            raise BreakdownError("omega vanished", k)
        y = y + alpha * p_hat + omega * s_hat
        r = s - omega * t
        rho_old = rho
        r_norm = float(np.linalg.norm(r))
        history.append(r_norm)
        if r_norm <= eps:
            return done(k, True)
    return done(config.max_iter, False)


def _gmres_cycle(A, b, x, m, eps, history, budget):
    """One Arnoldi cycle of at most ``m`` steps from ``x``; returns (x, steps, converged)."""
    r = b - A(x)
    beta = float(np.linalg.norm(r))
    if beta <= eps:
        return x, 0, True
    N = len(b)
    V = np.zeros((m + 1, N))
    H = np.zeros((m + 1, m))
    cs = np.zeros(m)
    sn = np.zeros(m)
    g = np.zeros(m + 1)
    g[0] = beta
    V[0] = r / beta
    steps = 0
    converged = False
    for j in range(min(m, budget)):
        w = A(V[j])
        # modified Gram-Schmidt
        for i in range(j + 1):
            H[i, j] = w @ V[i]
            w -= H[i, j] * V[i]
        H[j + 1, j] = np.linalg.norm(w)
        happy = H[j + 1, j] <= 1e-14 * beta
        if not happy:
            V[j + 1] = w / H[j + 1, j]
        for i in range(j):
            hi, hk = H[i, j], H[i + 1, j]
            H[i, j] = cs[i] * hi + sn[i] * hk
            H[i + 1, j] = -sn[i] * hi + cs[i] * hk
        denom = math.hypot(H[j, j], H[j + 1, j])
        cs[j] = H[j, j] / denom
        sn[j] = H[j + 1, j] / denom
        H[j, j] = denom
        H[j + 1, j] = 0.0
        g[j + 1] = -sn[j] * g[j]
        g[j] = cs[j] * g[j]
        steps = j + 1
        res = abs(g[j + 1])
        history.append(float(res))
        if res <= eps or happy:
            converged = True
            break
    if steps:
        z = np.linalg.solve(np.triu(H[:steps, :steps]), g[:steps])
        x = x + V[:steps].T @ z
    return x, steps, converged


def gmres(apply_A, b, config: SolverConfig = SolverConfig()) -> SolverReport:
    """GMRES(m) (``restart == 0`` means full GMRES).

    With a wavelet preconditioner the iteration runs on ``D = S A S^T`` with
    right-hand side ``S b``, the stopping test uses that residual, and the
    returned solution is ``S^T z``.
    """
    t0 = time.perf_counter()
    A = as_operator(apply_A)
    S = config.preconditioner
    b = np.asarray(b, dtype=float)
    if not np.all(np.isfinite(b)):
        raise ValueError("right-hand side has non-finite entries")
    if S is not None:
        D = lambda z: fast_apply(S, A(fast_apply_transpose(S, z)))  # noqa: E731
        rhs = fast_apply(S, b)
    else:
        D, rhs = A, b
    N = len(rhs)
    m = config.restart if config.restart > 0 else max(min(config.max_iter, N), 1)
    eps = config.tol
    x = np.zeros_like(rhs)
    history = [float(np.linalg.norm(rhs))]
    total = 0
    cycles = 0
    last = 0
    converged = history[0] <= eps
    while not converged and total < config.max_iter:
        start_res = history[-1]
        x, last, converged = _gmres_cycle(D, rhs, x, m, eps, history, config.max_iter - total)
        total += last
        if converged:
            break
        cycles += 1
        if last == 0 or history[-1] >= start_res:
            # stagnated over a full cycle
            break
    if config.restart > 0:
        # cycles that ran to their full length, plus the steps of the last one
        full = total // config.restart if last == config.restart else cycles
        label = f"{full}x{config.restart}+{total - full * config.restart}"
    else:
        label = str(total)
    # residual of the system actually iterated
    true_res = float(np.linalg.norm(rhs - D(x)))
    converged = converged and true_res <= eps * (1 + float(np.linalg.norm(rhs)))
    y = fast_apply_transpose(S, x) if S is not None else x
    return SolverReport(y, float(total), bool(converged), history, time.perf_counter() - t0, label, true_res)
