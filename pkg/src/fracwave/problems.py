"""Model problems with known solutions and the discrete L2 error."""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import gamma
from typing import Optional, Union

import numpy as np

from .assembly import FractionalForm1D, FractionalForm2D
from .splines import basis_size, bspline

__all__ = [
    "ProblemSpec",
    "make_f1",
    "make_f2",
    "make_fs",
    "evaluate_terms",
    "basis_values",
    "l2_error",
]


@dataclass(frozen=True)
class ProblemSpec:
    """Forcing and exact solution as power-term lists.

    1D terms are ``(c, g)`` meaning ``c x**g``; 2D terms are ``(c, gx, gy)``
    meaning ``c x**gx y**gy``. ``form.n`` is a placeholder; use :meth:`form_at`.
    """

    name: str
    dim: int
    form: Union[FractionalForm1D, FractionalForm2D]
    forcing: tuple
    exact: Optional[tuple] = None
    lam: Optional[float] = None

    def form_at(self, n: int):
        return replace(self.form, n=n)

    @property
    def r(self) -> int:
        return self.form.r


def _check_beta(beta: float) -> None:
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")


def make_f1(beta: float, r: int = 2) -> ProblemSpec:
    """``-D 0D^{-beta} D u = f1`` with ``u = x**2 - x**3``."""
    _check_beta(beta)
    forcing = ((-2.0 / gamma(beta + 1), beta), (6.0 / gamma(beta + 2), beta + 1))
    exact = ((1.0, 2.0), (-1.0, 3.0))
    form = FractionalForm1D(a=1.0, p=1.0, q=0.0, beta=beta, r=r, n=max(2, r))
    return ProblemSpec("f1", 1, form, forcing, exact)


def make_f2(beta: float, lam: float = 1.1, r: int = 2) -> ProblemSpec:
    """``-D 0D^{-beta} D u = f2`` with ``u = x**lam - x``."""
    _check_beta(beta)
    if not lam > 1:
        raise ValueError(f"lambda must exceed 1, got {lam}")
    forcing = (
        (-gamma(lam + 1) / gamma(lam + beta - 1), lam + beta - 2),
        (1.0 / gamma(beta), beta - 1),
    )
    exact = ((1.0, float(lam)), (-1.0, 1.0))
    form = FractionalForm1D(a=1.0, p=1.0, q=0.0, beta=beta, r=r, n=max(2, r))
    return ProblemSpec("f2", 1, form, forcing, exact, lam=lam)


# x**2 (1 - x)**2 = x**2 - 2 x**3 + x**4
_QUARTIC = ((1.0, 2), (-2.0, 3), (1.0, 4))


def make_fs(s: int, alpha: float = 0.75) -> ProblemSpec:
    """``-D_x^s 0D_x^{-alpha} D_x u - D_y^s 0D_y^{-alpha} D_y u = f_s``, ``u = x^2(1-x)^2 y^2(1-y)^2``.

    Each directional term follows from ``D^s 0D^{-a} x**k = k!/Gamma(k+1+a-s) x**(k+a-s)``.
    For ``s = 3`` the forcing contains ``x**(alpha - 2)``, which is still
    integrable against the r = 3 basis because ``phi_{n,0}`` vanishes to
    second order at the origin.
    """
    if s not in (2, 3):
        raise ValueError(f"s must be 2 or 3, got {s}")
    _check_beta(alpha)
    directional = []
    for c, k in _QUARTIC:
        # -D^s 0D^{-a} D applied to c x**k
        coef = -c * k * gamma(k) / gamma(k + alpha - s)
        directional.append((coef, k - 1 + alpha - s))
    forcing = []
    for cx, gx in directional:
        for cy, gy in _QUARTIC:
            forcing.append((cx * cy, gx, float(gy)))
            forcing.append((cx * cy, float(gy), gx))
    exact = tuple((cx * cy, float(gx), float(gy)) for cx, gx in _QUARTIC for cy, gy in _QUARTIC)
    form = FractionalForm2D(s=s, alpha=alpha, beta=alpha, r=3, n=3)
    return ProblemSpec(f"f{s}", 2, form, tuple(forcing), exact)


def evaluate_terms(terms, *coords) -> np.ndarray:
    """Evaluate a power-term list at points (1D) or on the tensor grid ``x[:, None], y[None, :]`` (2D)."""
    if len(coords) == 1:
        (x,) = coords
        x = np.asarray(x, dtype=float)
        return sum(c * x**g for c, g in terms) + 0.0 * x
    x, y = (np.asarray(v, dtype=float) for v in coords)
    out = np.zeros((len(x), len(y)))
    for c, gx, gy in terms:
        out += c * np.outer(x**gx, y**gy)
    return out


def _quadrature(n: int, points: int):
    nodes, weights = np.polynomial.legendre.leggauss(points)
    h = 2.0**-n
    left = np.arange(2**n) * h
    x = (left[:, None] + h * (nodes[None, :] + 1) / 2).ravel()
    w = np.tile(weights * h / 2, 2**n)
    return x, w


def basis_values(r: int, n: int, x: np.ndarray) -> np.ndarray:
    """Dense ``(len(x), 2**n - r + 1)`` matrix of ``phi_{n,j}(x)``."""
    x = np.asarray(x, dtype=float)
    m = basis_size(r, n)
    M = bspline(r)
    t = 2.0**n * x
    out = np.empty((len(x), m))
    for j in range(m):
        out[:, j] = M(t - j)
    return 2.0 ** (n / 2) * out


def l2_error(coeffs, exact, r: int, n: int, points: Optional[int] = None) -> float:
    """``||u_n - u||_{L2}`` by Gauss-Legendre on every cell (``degree + 6`` points by default)."""
    coeffs = np.asarray(coeffs, dtype=float)
    m = basis_size(r, n)
    points = points or (r - 1) + 6
    x, w = _quadrature(n, points)
    B = basis_values(r, n, x)
    if coeffs.size == m:
        diff = B @ coeffs - (evaluate_terms(exact, x) if exact else 0.0)
        return float(np.sqrt(np.sum(w * diff**2)))
    if coeffs.size != m * m:
        raise ValueError(f"{coeffs.size} coefficients fit neither level {n} basis of order {r}")
    U = B @ coeffs.reshape(m, m) @ B.T
    if exact:
        U = U - evaluate_terms(exact, x, x)
    return float(np.sqrt(w @ (U**2) @ w))
