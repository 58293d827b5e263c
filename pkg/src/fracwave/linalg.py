"""Toeplitz and Kronecker-sum operators, Doolittle LU and 2-norm condition numbers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "ToeplitzOperator",
    "KroneckerSumOperator",
    "SingularMatrixError",
    "toeplitz_matvec_fft",
    "kron_sum_matvec",
    "lu_factor_doolittle",
    "lu_solve_doolittle",
    "condition_number_2",
]


class SingularMatrixError(ArithmeticError):
    """Raised when LU elimination meets a zero pivot column."""


def _embedding_size(m: int) -> int:
    size = 1
    while size < 2 * m:
        size *= 2
    return size


@dataclass(frozen=True, eq=False)
class ToeplitzOperator:
    """Diagonal-constant matrix ``T[i, j] = col[i - j]`` (i >= j), ``row[j - i]`` (j > i).

    Products use a circulant embedding of size ``next_pow2(2m)``; the FFT of
    the embedded symbol is computed once at construction.
    """

    first_column: np.ndarray
    first_row: np.ndarray
    _symbol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        col = np.asarray(self.first_column, dtype=float).copy()
        row = np.asarray(self.first_row, dtype=float).copy()
        if col.ndim != 1 or row.ndim != 1 or len(col) != len(row) or len(col) == 0:
            raise ValueError("first column and first row must be 1-D of equal positive length")
        if col[0] != row[0]:
            raise ValueError(f"first_column[0]={col[0]} differs from first_row[0]={row[0]}")
        col.flags.writeable = False
        row.flags.writeable = False
        object.__setattr__(self, "first_column", col)
        object.__setattr__(self, "first_row", row)
        m = len(col)
        c = np.zeros(_embedding_size(m))
        c[:m] = col
        if m > 1:
            c[-(m - 1):] = row[:0:-1]
        object.__setattr__(self, "_symbol", np.fft.rfft(c))

    @property
    def dimension(self) -> int:
        return len(self.first_column)

    @property
    def shape(self) -> tuple:
        return (self.dimension, self.dimension)

    def dense(self) -> np.ndarray:
        return scipy.linalg.toeplitz(self.first_column, self.first_row)

    def transpose(self) -> "ToeplitzOperator":
        return ToeplitzOperator(self.first_row, self.first_column)

    @property
    def T(self) -> "ToeplitzOperator":
        return self.transpose()

    def matvec(self, y: np.ndarray, axis: int = 0) -> np.ndarray:
        """``T @ y``; for arrays, ``T`` acts along ``axis``."""
        y = np.asarray(y, dtype=float)
        m = self.dimension
        if y.shape[axis] != m:
            raise ValueError(f"operand has length {y.shape[axis]} along axis {axis}, expected {m}")
        size = 2 * (len(self._symbol) - 1)
        yh = np.fft.rfft(y, n=size, axis=axis)
        shape = [1] * y.ndim
        shape[axis] = -1
        z = np.fft.irfft(yh * self._symbol.reshape(shape), n=size, axis=axis)
        return np.take(z, np.arange(m), axis=axis)

    def __matmul__(self, y):
        return self.matvec(y)

    def __add__(self, other: "ToeplitzOperator") -> "ToeplitzOperator":
        if not isinstance(other, ToeplitzOperator):
            return NotImplemented
        return ToeplitzOperator(self.first_column + other.first_column, self.first_row + other.first_row)

    def __mul__(self, c: float) -> "ToeplitzOperator":
        return ToeplitzOperator(c * self.first_column, c * self.first_row)

    __rmul__ = __mul__


def toeplitz_matvec_fft(a1, q1, y, a: float = 1.0, p: float = 1.0, q: float = 0.0) -> np.ndarray:
    """``(a p T(q1, a1) + a q T(a1, q1)) y`` with one complex FFT pair.

    ``q1`` is the full first column of the left-sided matrix and ``a1`` its
    (possibly short) first row. The transpose term is obtained by running the
    reversed vector through the imaginary channel, since ``J T J = T^T`` for
    Toeplitz ``T``.
    """
    q1 = np.asarray(q1, dtype=float)
    a1 = np.asarray(a1, dtype=float)
    y = np.asarray(y, dtype=float)
    m = len(q1)
    if len(y) != m:
        raise ValueError(f"vector length {len(y)} does not match generator length {m}")
    if len(a1) > m or len(a1) == 0:
        raise ValueError(f"row generator length {len(a1)} must be in 1..{m}")
    if a1[0] != q1[0]:
        raise ValueError("generators disagree on the diagonal entry")
    size = _embedding_size(m)
    c = np.zeros(size)
    c[:m] = q1
    # upper band wraps around to the tail of the circulant column
    if len(a1) > 1:
        c[size - len(a1) + 1:] = a1[:0:-1]
    t = np.zeros(size, dtype=complex)
    t[:m] = y + 1j * y[::-1]
    z = np.fft.ifft(np.fft.fft(t) * np.fft.fft(c))
    return a * p * z.real[:m] + a * q * z.imag[m - 1::-1]


def _apply_factor(F, Y: np.ndarray, axis: int) -> np.ndarray:
    if isinstance(F, ToeplitzOperator):
        return F.matvec(Y, axis=axis)
    F = np.asarray(F)
    if axis == 0:
        return F @ Y
    return Y @ F.T


@dataclass(frozen=True, eq=False)
class KroneckerSumOperator:
    """``sum_k L_k (x) R_k`` acting on row-major flattened ``(n1, n2)`` arrays.

    Factors may be :class:`ToeplitzOperator` or dense arrays.
    """

    terms: tuple

    def __post_init__(self):
        terms = tuple(tuple(t) for t in self.terms)
        if not terms:
            raise ValueError("at least one Kronecker term is required")
        shapes = {(_dim(L), _dim(R)) for L, R in terms}
        if len(shapes) != 1:
            raise ValueError(f"Kronecker terms do not conform: {sorted(shapes)}")
        object.__setattr__(self, "terms", terms)

    @property
    def factor_shape(self) -> tuple:
        L, R = self.terms[0]
        return _dim(L), _dim(R)

    @property
    def dimension(self) -> int:
        n1, n2 = self.factor_shape
        return n1 * n2

    @property
    def shape(self) -> tuple:
        return (self.dimension, self.dimension)

    def matvec(self, y: np.ndarray) -> np.ndarray:
        return kron_sum_matvec(self, y)

    def __matmul__(self, y):
        return self.matvec(y)

    def dense(self) -> np.ndarray:
        return sum(np.kron(_dense(L), _dense(R)) for L, R in self.terms)

    def transpose(self) -> "KroneckerSumOperator":
        return KroneckerSumOperator(tuple((_transpose(L), _transpose(R)) for L, R in self.terms))


def _dim(F) -> int:
    if isinstance(F, ToeplitzOperator):
        return F.dimension
    F = np.asarray(F)
    if F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise ValueError("Kronecker factors must be square")
    return F.shape[0]


def _dense(F) -> np.ndarray:
    return F.dense() if isinstance(F, ToeplitzOperator) else np.asarray(F, dtype=float)


def _transpose(F):
    return F.transpose() if isinstance(F, ToeplitzOperator) else np.asarray(F).T


def kron_sum_matvec(op: KroneckerSumOperator, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    n1, n2 = op.factor_shape
    if y.shape != (n1 * n2,):
        raise ValueError(f"vector of shape {y.shape} does not match operator dimension {n1 * n2}")
    Y = y.reshape(n1, n2)
    out = np.zeros_like(Y)
    for L, R in op.terms:
        out += _apply_factor(R, _apply_factor(L, Y, 0), 1)
    return out.ravel()


def lu_factor_doolittle(A: np.ndarray):
    """Doolittle factorisation ``P A = L U`` with partial pivoting.

    Returns ``(LU, perm)``: unit lower triangle of ``L`` below the diagonal,
    ``U`` on and above it, and the row permutation as an index array.
    """
    LU = np.array(A, dtype=float, copy=True)
    n, m = LU.shape
    if n != m:
        raise ValueError("matrix must be square")
    perm = np.arange(n)
    scale = np.abs(LU).max() if n else 0.0
    for k in range(n):
        # Doolittle order: finish column k of L (and the pivot candidates) first
        if k:
            LU[k:, k] -= LU[k:, :k] @ LU[:k, k]
        piv = k + int(np.argmax(np.abs(LU[k:, k])))
        if LU[piv, k] == 0 or abs(LU[piv, k]) <= np.finfo(float).eps * scale * 1e-3:
            raise SingularMatrixError(f"zero pivot in column {k}")
        if piv != k:
            LU[[k, piv]] = LU[[piv, k]]
            perm[[k, piv]] = perm[[piv, k]]
        if k:
            LU[k, k + 1:] -= LU[k, :k] @ LU[:k, k + 1:]
        LU[k + 1:, k] /= LU[k, k]
    return LU, perm


def lu_solve_doolittle(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``A x = b`` by Doolittle LU with partial pivoting."""
    b = np.asarray(b, dtype=float)
    LU, perm = lu_factor_doolittle(A)
    if b.shape[0] != LU.shape[0]:
        raise ValueError("right-hand side does not match matrix size")
    z = scipy.linalg.solve_triangular(LU, b[perm], lower=True, unit_diagonal=True)
    return scipy.linalg.solve_triangular(LU, z, lower=False)


def condition_number_2(A) -> float:
    """Spectral condition number ``sigma_max / sigma_min`` from a full SVD."""
    if hasattr(A, "dense"):
        A = A.dense()
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] < 1e-300:
        return float("inf")
    return float(sv[0] / sv[-1])
