"""Closed-form left Riemann-Liouville integrals of piecewise polynomials.

A compactly supported piecewise polynomial is a finite sum of truncated powers
``c (x - k)_+**m``, and ``0D_x^{-beta}`` maps each of them to
``c Gamma(m+1)/Gamma(m+1+beta) (x - k)_+**(m+beta)``. Inner products of such
profiles against piecewise polynomials then reduce to integrals of
``(x - k)**e * polynomial`` over cells, which have elementary antiderivatives.

Far from the support these sums cancel heavily (terms grow like ``d**(r+1)``
while the result decays), so all arithmetic runs in a private 40-digit mpmath
context and only the final value is rounded to float.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath.ctx_mp import MPContext

from .splines import PiecewisePolynomial, _shift_poly

__all__ = [
    "FractionalProfile",
    "frac_integral_monomial",
    "frac_integral_piecewise",
    "power_moment",
    "pair_profile",
]

_MP = MPContext()
_MP.dps = 40


def _mpf(v):
    if isinstance(v, Fraction):
        return _MP.mpf(v.numerator) / v.denominator
    return _MP.mpf(v)


def _gamma_ratio(k: int, beta) -> object:
    """``Gamma(k+1) / Gamma(k+1+beta)`` in high precision."""
    b = _mpf(beta)
    return _MP.gamma(k + 1) / _MP.gamma(k + 1 + b)


def frac_integral_monomial(beta: float, k: int, shift: float, x: float) -> float:
    """Left RL integral of ``(xi - shift)_+**k`` evaluated at ``x``."""
    if beta <= 0:
        raise ValueError(f"fractional order must be positive, got beta={beta}")
    if k < 0 or int(k) != k:
        raise ValueError(f"power must be a non-negative integer, got {k}")
    t = _mpf(x) - _mpf(shift)
    if t <= 0:
        return 0.0
    return float(_gamma_ratio(int(k), beta) * t ** (int(k) + _mpf(beta)))


@dataclass(frozen=True)
class FractionalProfile:
    """``g(x) = scale * sum c * (x - knot)_+**exponent``.

    Knots are exact rationals; exponents and coefficients are mpmath numbers.
    """

    terms: tuple
    scale: float = 1.0

    def evaluate(self, x) -> object:
        """High-precision value at a single point (without ``scale``)."""
        xm = _mpf(x)
        total = _MP.mpf(0)
        for knot, e, c in self.terms:
            t = xm - _mpf(knot)
            if t > 0:
                total += c * t**e
            elif t == 0 and e == 0:
                total += c
        return total

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        vals = np.array([float(self.evaluate(v)) for v in x.ravel()])
        return self.scale * vals.reshape(x.shape)


def frac_integral_piecewise(beta: float, f: PiecewisePolynomial) -> FractionalProfile:
    """Exact profile of ``0D_x^{-beta} f``; ``beta == 0`` returns ``f`` itself in profile form."""
    if beta < 0:
        raise ValueError(f"fractional order must be non-negative, got beta={beta}")
    b = _mpf(beta)
    terms = []
    for knot, k, c in f.truncated_powers():
        coef = _mpf(c) if beta == 0 else _mpf(c) * _gamma_ratio(k, beta)
        terms.append((Fraction(knot), k + b, coef))
    return FractionalProfile(tuple(terms), f.scale)


def power_moment(exponent, knot, g: PiecewisePolynomial) -> object:
    """``int_{x > knot} (x - knot)**exponent g(x) dx`` without ``g.scale``, in mpmath."""
    e = _mpf(exponent)
    kn = knot if isinstance(knot, Fraction) else Fraction(knot)
    total = _MP.mpf(0)
    bp = g.breakpoints
    for i, cs in enumerate(g.coeffs):
        a, b = bp[i], bp[i + 1]
        if b <= kn:
            continue
        lower = max(a, kn)
        # local polynomial about knot instead of the cell's left end
        d = _shift_poly(cs, kn - a)
        hi = _mpf(b - kn)
        lo = _mpf(lower - kn)
        for m, c in enumerate(d):
            if c == 0:
                continue
            p = e + m + 1
            if p <= 0 and lo == 0:
                raise ValueError(f"(x - {kn})**{e + m} is not integrable at the knot")
            if p == 0:
                total += _mpf(c) * (_MP.log(hi) - _MP.log(lo))
            else:
                total += _mpf(c) * (hi**p - (lo**p if lo > 0 else 0)) / p
    return total


def pair_profile(profile: FractionalProfile, g: PiecewisePolynomial, order: int = 0) -> object:
    """``<profile, D^order g>`` over the whole line, derivatives taken distributionally.

    When ``D^(order-1) g`` is piecewise constant, ``D^order g`` is a sum of Dirac
    masses at the knots and the pairing becomes point evaluations of the
    (continuous) profile. Lower-order jumps would need profile derivatives and
    are rejected.
    """
    total = _MP.mpf(0)
    classical = g.derivative(order) if order else g
    for knot, e, c in profile.terms:
        total += c * power_moment(e, knot, classical)
    if order >= 1:
        for i in range(order - 1):
            if any(j != 0 for _, j in g.jumps(i)):
                raise NotImplementedError("pairing with derivatives of Dirac masses")
        for knot, jump in g.jumps(order - 1):
            if jump != 0:
                total += _mpf(jump) * profile.evaluate(knot)
    return total * _mpf(profile.scale) * _mpf(g.scale)
