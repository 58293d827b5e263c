"""Galerkin matrices and load vectors on the level-``n`` spline basis.

Every basis function is a dilate/translate of ``M_r``, so each stiffness
matrix is Toeplitz and is fixed by a level-independent reference kernel
``g(d)`` (trial shifted ``d`` cells to the right of the test function) times
``2**(n * order)``. The kernel is computed exactly from truncated-power
expansions, see :mod:`fracwave.fractional`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .fractional import _MP, _mpf, frac_integral_piecewise, pair_profile, power_moment
from .linalg import KroneckerSumOperator, ToeplitzOperator
from .splines import bspline, basis_size

__all__ = [
    "FractionalForm1D",
    "FractionalForm2D",
    "reference_kernel",
    "stiffness_generators_1d",
    "assemble_A",
    "highorder_generators_1d",
    "right_sided_sign",
    "mass_generators_1d",
    "assemble_mass",
    "assemble_C2d",
    "load_vector_1d",
    "load_vector_2d",
]


def _check_weights(p: float, q: float, name: str = "p, q") -> None:
    if p < 0 or q < 0 or abs(p + q - 1.0) > 1e-12:
        raise ValueError(f"weights {name} must be non-negative and sum to 1, got {p}, {q}")


@dataclass(frozen=True)
class FractionalForm1D:
    """``a p <0D^{-beta} u', v'> + a q <xD1^{-beta} u', v'>`` on level ``n``."""

    a: float = 1.0
    p: float = 0.5
    q: float = 0.5
    beta: float = 0.5
    r: int = 2
    n: int = 3

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("diffusion coefficient must be positive")
        _check_weights(self.p, self.q)
        if not 0 <= self.beta < 1:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")
        if self.r not in (2, 3):
            raise ValueError(f"spline order must be 2 or 3, got {self.r}")
        if self.n < 2:
            raise ValueError(f"level {self.n} below the coarsest level 2")

    @property
    def size(self) -> int:
        return basis_size(self.r, self.n)


@dataclass(frozen=True)
class FractionalForm2D:
    """Two-direction form with ``D^{s-1}`` in front of each fractional flux."""

    s: int = 2
    a1: float = 1.0
    a2: float = 1.0
    p1: float = 1.0
    q1: float = 0.0
    p2: float = 1.0
    q2: float = 0.0
    alpha: float = 0.75
    beta: float = 0.75
    r: int = 3
    n: int = 4

    def __post_init__(self):
        if self.s not in (2, 3):
            raise ValueError(f"operator order s must be 2 or 3, got {self.s}")
        if self.a1 <= 0 or self.a2 <= 0:
            raise ValueError("diffusion coefficients must be positive")
        _check_weights(self.p1, self.q1, "p1, q1")
        _check_weights(self.p2, self.q2, "p2, q2")
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0 <= v < 1:
                raise ValueError(f"{name} must lie in [0, 1), got {v}")
        if self.r != 3:
            raise ValueError("the two-dimensional forms need r = 3")
        if self.n < 2:
            raise ValueError(f"level {self.n} below the coarsest level 2")

    @property
    def size(self) -> int:
        return basis_size(self.r, self.n) ** 2


@lru_cache(maxsize=None)
def _kernel_mp(r: int, s: int, order: float, d: int):
    trial = bspline(r).affine(1, -d).derivative()
    profile = frac_integral_piecewise(order, trial)
    val = pair_profile(profile, bspline(r), s)
    return -val if s % 2 == 0 else val


def reference_kernel(r: int, s: int, order: float, d: int) -> float:
    """``(-1)**(s-1) <0D^{-order} M_r'(. - d), D^s M_r>`` on the unit grid.

    ``s = 1`` is the plain fractional stiffness; ``s = 2, 3`` carry the extra
    derivatives moved onto the test function (distributionally for ``s = 3``).
    """
    return float(_kernel_mp(r, s, float(order), int(d)))


def _kernel_vectors(r: int, s: int, order: float, n: int):
    m = basis_size(r, n)
    factor = 2.0 ** (n * (s + 1 - order))
    # trial functions to the right of the test support see no left-sided tail
    row = np.zeros(m)
    for j in range(min(r, m)):
        row[j] = reference_kernel(r, s, order, j)
    col = np.array([reference_kernel(r, s, order, -i) for i in range(m)])
    return factor * col, factor * row


def stiffness_generators_1d(form: FractionalForm1D):
    """Return ``(a1, q1)``: first row (length r) and first column of the left-sided matrix.

    ``a1[i] = <0D^{-beta} phi'_{n,i}, phi'_{n,0}>`` and
    ``q1[j] = <0D^{-beta} phi'_{n,0}, phi'_{n,j}>``.
    """
    col, row = _kernel_vectors(form.r, 1, form.beta, form.n)
    return row[: form.r].copy(), col


def assemble_A(form: FractionalForm1D) -> ToeplitzOperator:
    """``A_n = a p T(q1, a1) + a q T(a1, q1)``."""
    a1, q1 = stiffness_generators_1d(form)
    row = np.zeros_like(q1)
    row[: len(a1)] = a1
    left = ToeplitzOperator(q1, row)
    return form.a * form.p * left + form.a * form.q * left.transpose()


def highorder_generators_1d(s: int, alpha: float, r: int, n: int):
    """First column and row of ``G[i, j] = <D^{s-1} 0D^{-alpha} phi_j', phi_i'>``."""
    if s not in (2, 3):
        raise ValueError(f"operator order s must be 2 or 3, got {s}")
    if r != 3:
        raise ValueError("higher-order forms need r = 3 splines")
    if not 0 <= alpha < 1:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    return _kernel_vectors(r, s, alpha, n)


def right_sided_sign(s: int) -> int:
    """Sign relating the right-sided directional matrix to ``G.T``.

    ``<D^{s-1} xD1^{-a} phi_j', phi_i'> = (-1)**(s-1) G[j, i]``: moving the
    ``s - 1`` derivatives across twice and the fractional integral once.
    """
    return -1 if s % 2 == 0 else 1


@lru_cache(maxsize=None)
def _mass_reference(r: int) -> tuple:
    base = bspline(r)
    out = []
    for d in range(r):
        shifted = base.affine(1, -d)
        out.append(Fraction(_exact_product_integral(base, shifted)))
    return tuple(out)


def _exact_product_integral(f, g) -> Fraction:
    knots = sorted(set(f.breakpoints) | set(g.breakpoints))
    total = Fraction(0)
    for a, b in zip(knots[:-1], knots[1:]):
        pf = f._local_at(a)
        pg = g._local_at(a)
        w = b - a
        for i, ci in enumerate(pf):
            for j, cj in enumerate(pg):
                total += ci * cj * w ** (i + j + 1) / (i + j + 1)
    return total


def mass_generators_1d(r: int, n: int):
    """Generators of ``<phi_{n,j}, phi_{n,i}>``; symmetric and independent of ``n``."""
    m = basis_size(r, n)
    ref = _mass_reference(r)
    col = np.zeros(m)
    k = min(r, m)
    col[:k] = [float(v) for v in ref[:k]]
    return col, col.copy()


def assemble_mass(r: int, n: int) -> ToeplitzOperator:
    col, row = mass_generators_1d(r, n)
    return ToeplitzOperator(col, row)


def _directional(s: int, order: float, p: float, q: float, a: float, n: int, r: int) -> ToeplitzOperator:
    col, row = highorder_generators_1d(s, order, r, n)
    G = ToeplitzOperator(col, row)
    return a * (p * G + (q * right_sided_sign(s)) * G.transpose())


def assemble_C2d(form: FractionalForm2D) -> KroneckerSumOperator:
    """``C = X (x) M + M (x) Y`` with x-index slowest in the flattening."""
    M = assemble_mass(form.r, form.n)
    X = _directional(form.s, form.alpha, form.p1, form.q1, form.a1, form.n, form.r)
    Y = _directional(form.s, form.beta, form.p2, form.q2, form.a2, form.n, form.r)
    return KroneckerSumOperator(((X, M), (M, Y)))


@lru_cache(maxsize=None)
def _power_load_reference(r: int, gamma: float, j: int):
    # int (xi + j)**gamma M_r(xi) d xi
    return power_moment(gamma, Fraction(-j), bspline(r))


def _power_load(r: int, n: int, gamma: float) -> np.ndarray:
    m = basis_size(r, n)
    g = _mpf(gamma)
    factor = _MP.mpf(2) ** (-_MP.mpf(n) / 2 - n * g)
    return np.array([float(factor * _power_load_reference(r, float(gamma), j)) for j in range(m)])


def load_vector_1d(terms, r: int, n: int) -> np.ndarray:
    """``<f, phi_{n,j}>`` for ``f = sum c x**gamma`` given as ``(c, gamma)`` pairs.

    Raises ``ValueError`` when a power is not integrable against the basis
    (``gamma + vanishing order of phi_{n,0} at 0 <= -1``).
    """
    out = np.zeros(basis_size(r, n))
    for c, gamma in terms:
        out += c * _power_load(r, n, gamma)
    return out


def load_vector_2d(terms, r: int, n: int) -> np.ndarray:
    """Tensor load vector for ``f = sum c x**gx y**gy`` given as ``(c, gx, gy)`` triples."""
    m = basis_size(r, n)
    out = np.zeros(m * m)
    for c, gx, gy in terms:
        out += c * np.kron(_power_load(r, n, gx), _power_load(r, n, gy))
    return out
