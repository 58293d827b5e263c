"""Cardinal B-splines, scaled spline bases and the two interval wavelet families.

Everything here is represented exactly as a :class:`PiecewisePolynomial` whose
knots and local monomial coefficients are :class:`fractions.Fraction` values
whenever the construction allows it. Irrational level normalisations
(``2**(n/2)`` for odd ``n``) are carried separately in ``PiecewisePolynomial.scale``
so the rational part stays exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from numbers import Real
from typing import Sequence

import numpy as np

__all__ = [
    "PiecewisePolynomial",
    "WaveletBasisSpec",
    "CoefficientTable",
    "coefficient_table",
    "bspline",
    "eval_bspline",
    "bspline_derivative",
    "scaled_basis_function",
    "wavelet_function",
    "basis_size",
]


def _shift_poly(coeffs: Sequence, delta) -> list:
    """Re-expand ``sum c_k t**k`` in powers of ``t - delta``."""
    deg = len(coeffs) - 1
    out = [0] * (deg + 1)
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        for i in range(k + 1):
            out[i] += c * comb(k, i) * delta ** (k - i)
    return out


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Compactly supported piecewise polynomial.

    On ``[breakpoints[i], breakpoints[i+1]]`` the function equals
    ``scale * sum_k coeffs[i][k] * (x - breakpoints[i])**k``; it is zero outside
    ``[breakpoints[0], breakpoints[-1]]``.
    """

    breakpoints: tuple
    coeffs: tuple
    scale: float = 1.0

    def __post_init__(self):
        bp = tuple(self.breakpoints)
        cf = tuple(tuple(c) for c in self.coeffs)
        if len(bp) < 2:
            raise ValueError("need at least two breakpoints")
        if any(b >= a for a, b in zip(bp[1:], bp[:-1])):
            raise ValueError("breakpoints must be strictly increasing")
        if len(cf) != len(bp) - 1:
            raise ValueError("one coefficient list per interval is required")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "coeffs", cf)

    @property
    def support(self) -> tuple:
        return self.breakpoints[0], self.breakpoints[-1]

    @property
    def degree(self) -> int:
        return max(len(c) for c in self.coeffs) - 1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        bp = np.array([float(b) for b in self.breakpoints])
        out = np.zeros_like(x)
        idx = np.searchsorted(bp, x, side="right") - 1
        # the right end point belongs to the last interval
        idx = np.where(x == bp[-1], len(bp) - 2, idx)
        inside = (idx >= 0) & (idx < len(bp) - 1)
        for i, cs in enumerate(self.coeffs):
            mask = inside & (idx == i)
            if not mask.any():
                continue
            t = x[mask] - bp[i]
            acc = np.zeros_like(t)
            for c in reversed(cs):
                acc = acc * t + float(c)
            out[mask] = acc
        return self.scale * out

    def derivative(self, k: int = 1) -> "PiecewisePolynomial":
        coeffs = [list(c) for c in self.coeffs]
        for _ in range(k):
            coeffs = [[j * c[j] for j in range(1, len(c))] or [0] for c in coeffs]
        return PiecewisePolynomial(self.breakpoints, coeffs, self.scale)

    def __mul__(self, other):
        if not isinstance(other, (Real, Fraction)):
            return NotImplemented
        if isinstance(other, (int, Fraction)):
            return PiecewisePolynomial(
                self.breakpoints, [[other * c for c in cs] for cs in self.coeffs], self.scale
            )
        return PiecewisePolynomial(self.breakpoints, self.coeffs, self.scale * float(other))

    __rmul__ = __mul__

    def __add__(self, other: "PiecewisePolynomial") -> "PiecewisePolynomial":
        if not isinstance(other, PiecewisePolynomial):
            return NotImplemented
        if self.scale != other.scale:
            raise ValueError("cannot add piecewise polynomials with different scales")
        knots = sorted(set(self.breakpoints) | set(other.breakpoints))
        coeffs = []
        for a in knots[:-1]:
            cs = _add_lists(self._local_at(a), other._local_at(a))
            coeffs.append(cs)
        return PiecewisePolynomial(knots, coeffs, self.scale)

    def _local_at(self, a) -> list:
        """Local coefficients about ``a`` of the piece starting at or containing ``a``."""
        bp = self.breakpoints
        if a < bp[0] or a >= bp[-1]:
            return [0]
        i = max(k for k in range(len(bp) - 1) if bp[k] <= a)
        return _shift_poly(self.coeffs[i], a - bp[i])

    def affine(self, a, b) -> "PiecewisePolynomial":
        """Return ``x -> self(a*x + b)`` for ``a != 0``; knots and coefficients stay exact."""
        if a == 0:
            raise ValueError("affine map must be invertible")
        knots = [(k - b) / a for k in self.breakpoints]
        if a > 0:
            coeffs = [[c * a**k for k, c in enumerate(cs)] for cs in self.coeffs]
            return PiecewisePolynomial(knots, coeffs, self.scale)
        # reversed orientation: re-expand each piece about its new left end
        new_knots = knots[::-1]
        new_coeffs = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            cs = self.coeffs[i]
            # piece i lives on [bp[i], bp[i+1]]; new left end maps to bp[i+1]
            width = self.breakpoints[i + 1] - self.breakpoints[i]
            about_right = _shift_poly(cs, width)
            new_coeffs.append([c * a**k for k, c in enumerate(about_right)])
        return PiecewisePolynomial(new_knots, new_coeffs, self.scale)

    def jumps(self, k: int = 0) -> list:
        """Jumps ``f^(k)(x+) - f^(k)(x-)`` at every breakpoint, without ``scale`` (outside counts as zero)."""
        d = self.derivative(k) if k else self
        out = []
        for i, x in enumerate(d.breakpoints):
            right = d.coeffs[i][0] if i < len(d.coeffs) else 0
            if i > 0:
                width = d.breakpoints[i] - d.breakpoints[i - 1]
                left = sum(c * width**j for j, c in enumerate(d.coeffs[i - 1]))
            else:
                left = 0
            out.append((x, right - left))
        return out

    def truncated_powers(self) -> list:
        """Expansion ``f(x) = scale * sum c * (x - knot)_+**k`` valid on the whole line.

        Returned as ``(knot, k, c)`` triples; ``c`` is the jump of the k-th
        derivative at ``knot`` divided by ``k!``.
        """
        terms = []
        for k in range(self.degree + 1):
            for x, jmp in self.jumps(k):
                if jmp != 0:
                    terms.append((x, k, Fraction(jmp) / factorial(k)))
        return terms

    def integral(self):
        total = 0
        for i, cs in enumerate(self.coeffs):
            w = self.breakpoints[i + 1] - self.breakpoints[i]
            total += sum(c * w ** (k + 1) / (k + 1) for k, c in enumerate(cs))
        return total if self.scale == 1.0 else float(total) * self.scale


def _add_lists(a: Sequence, b: Sequence) -> list:
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


@lru_cache(maxsize=None)
def bspline(m: int) -> PiecewisePolynomial:
    """Cardinal B-spline ``M_m`` on ``[0, m]`` with exact rational coefficients."""
    if m < 1:
        raise ValueError(f"invalid B-spline order {m}")
    # M_m(x) = sum_k (-1)^k C(m,k) (x-k)_+^{m-1} / (m-1)!
    coeffs = []
    for cell in range(m):
        local = [Fraction(0)] * m
        for k in range(cell + 1):
            c = Fraction((-1) ** k * comb(m, k), factorial(m - 1))
            for i, v in enumerate(_shift_poly([0] * (m - 1) + [1], cell - k)):
                local[i] += c * v
        coeffs.append(local)
    return PiecewisePolynomial([Fraction(i) for i in range(m + 1)], coeffs)


def eval_bspline(m: int, x):
    """Evaluate ``M_m`` at ``x`` (scalar or array)."""
    val = bspline(m)(x)
    return float(val) if np.ndim(val) == 0 else val


def bspline_derivative(m: int, k: int) -> PiecewisePolynomial:
    """Classical ``k``-th derivative of ``M_m``; ``k == m`` is the distributional case.

    For ``k == m`` the classical piecewise derivative is zero and the whole
    derivative sits in the Dirac jumps; use ``bspline(m).jumps(m - 1)``.
    """
    if k < 0 or k > m:
        raise ValueError(f"derivative order {k} not available for M_{m}")
    return bspline(m).derivative(k)


@dataclass(frozen=True)
class CoefficientTable:
    refinement: tuple
    interior_wavelet: tuple
    boundary_wavelet: tuple


_TABLES = {
    2: CoefficientTable(
        refinement=(Fraction(1, 2), Fraction(1), Fraction(1, 2)),
        interior_wavelet=(Fraction(1, 24), Fraction(-1, 4), Fraction(5, 12), Fraction(-1, 4), Fraction(1, 24)),
        boundary_wavelet=(Fraction(3, 8), Fraction(-1, 4), Fraction(1, 24)),
    ),
    3: CoefficientTable(
        refinement=(Fraction(1, 4), Fraction(3, 4), Fraction(3, 4), Fraction(1, 4)),
        interior_wavelet=(Fraction(1, 12), Fraction(-5, 12), Fraction(5, 12), Fraction(-1, 12)),
        boundary_wavelet=(Fraction(5, 12), Fraction(-1, 12)),
    ),
}

_DUAL_ORDER = {2: 2, 3: 1}


def coefficient_table(r: int) -> CoefficientTable:
    try:
        return _TABLES[r]
    except KeyError:
        raise ValueError(f"only spline orders 2 and 3 are supported, got {r}") from None


@dataclass(frozen=True)
class WaveletBasisSpec:
    """Spline order ``r`` with its matching dual order and level scaling exponent ``mu``."""

    r: int
    mu: float
    t: int = field(init=False)
    n0: int = field(init=False)

    def __post_init__(self):
        if self.r not in _DUAL_ORDER:
            raise ValueError(f"only spline orders 2 and 3 are supported, got {self.r}")
        if not 0 < self.mu < self.r - 0.5:
            raise ValueError(f"mu={self.mu} outside (0, {self.r - 0.5})")
        t = _DUAL_ORDER[self.r]
        n0 = 0
        while 2**n0 < self.r + t:
            n0 += 1
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "n0", n0)

    @property
    def table(self) -> CoefficientTable:
        return coefficient_table(self.r)


def basis_size(r: int, n: int) -> int:
    """Number of level-``n`` scaling functions, ``2**n - r + 1``."""
    return 2**n - r + 1


def _level_factor(n: int) -> float:
    return 2.0 ** (n / 2)


def scaled_basis_function(spec: WaveletBasisSpec, n: int, j: int) -> PiecewisePolynomial:
    """``phi_{n,j}(x) = 2**(n/2) M_r(2**n x - j)``."""
    if n < spec.n0:
        raise ValueError(f"level {n} below coarsest level {spec.n0}")
    if not 0 <= j <= 2**n - spec.r:
        raise IndexError(f"translation {j} outside 0..{2**n - spec.r}")
    pp = bspline(spec.r).affine(Fraction(2**n), Fraction(-j))
    return PiecewisePolynomial(pp.breakpoints, pp.coeffs, _level_factor(n))


def wavelet_expansion(spec: WaveletBasisSpec, n: int, j: int) -> dict:
    """Coefficients of ``psi_{n,j}`` in the level ``n+1`` basis, up to the factor ``2**(-1/2)``.

    Returns ``{translation: rational coefficient}``.
    """
    size = 2**n
    if not 1 <= j <= size:
        raise IndexError(f"wavelet index {j} outside 1..{size}")
    tab = spec.table
    r = spec.r
    if j == 1:
        return {l: c for l, c in enumerate(tab.boundary_wavelet)}
    if j == size:
        return {2 ** (n + 1) - r - l: c for l, c in enumerate(tab.boundary_wavelet)}
    return {2 * (j - 2) + l: c for l, c in enumerate(tab.interior_wavelet)}


def wavelet_function(spec: WaveletBasisSpec, n: int, j: int) -> PiecewisePolynomial:
    """Level-``n`` wavelet ``psi_{n,j}``, ``j`` in ``1..2**n``.

    ``j == 1`` is the left boundary wavelet, ``j == 2**n`` its mirror image
    about ``x = 1/2`` and the rest are translates of the interior wavelet.
    """
    if n < spec.n0:
        raise ValueError(f"level {n} below coarsest level {spec.n0}")
    expansion = wavelet_expansion(spec, n, j)
    base = bspline(spec.r)
    total = None
    for l, c in sorted(expansion.items()):
        term = base.affine(Fraction(2 ** (n + 1)), Fraction(-l)) * c
        total = term if total is None else total + term
    # 2^{(n+1)/2} from phi_{n+1,l} times the 2^{-1/2} of the two-scale relation
    return PiecewisePolynomial(total.breakpoints, total.coeffs, _level_factor(n))
