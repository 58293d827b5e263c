"""Multilevel wavelet transforms ``S_n`` (1D) and ``S~_n`` (2D).

The transform is kept in factored form,

    S_n = D0 @ F_{n0+1} @ ... @ F_n,   F_k = blockdiag(P_k, I),

where ``P_k`` is the one-level change of basis and ``D0`` scales the coarsest
scaling functions by ``2**(-n0 mu)``. Only the ``P_k`` are stored. They have
O(2**k) non-zeros (O(4**k) in 2D), so the storage and the cost of applying
``S_n`` or its transpose are linear in the number of unknowns. The explicit
product is only formed on request.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .splines import WaveletBasisSpec, basis_size, wavelet_expansion

__all__ = [
    "TransformMatrix",
    "one_level_blocks",
    "one_level_1d",
    "multilevel_1d",
    "one_level_2d",
    "multilevel_2d",
    "fast_apply",
    "fast_apply_transpose",
]

_ROOT_HALF = 2.0**-0.5


@dataclass(frozen=True, eq=False)
class TransformMatrix:
    """Square sparse transform ``D0 @ blockdiag(P_{n0+1}, I) @ ... @ P_n``.

    ``blocks`` holds the one-level matrices ``P_k`` in increasing ``k``; each
    acts on the leading ``size(P_k)`` entries only, so the identity parts are
    never stored. ``coarse_scale`` multiplies the leading ``coarse_size``
    entries last.
    """

    blocks: tuple
    coarse_size: int
    coarse_scale: float
    spec: WaveletBasisSpec
    level: int
    dim: int = 1

    def __post_init__(self):
        blocks = tuple(sp.csr_matrix(B) for B in self.blocks)
        prev = self.coarse_size
        for B in blocks:
            if B.shape[0] != B.shape[1]:
                raise ValueError("transform blocks must be square")
            if B.shape[0] <= prev:
                raise ValueError("transform blocks must grow with the level")
            prev = B.shape[0]
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "_transposed", tuple(B.T.tocsr() for B in blocks))

    @property
    def size(self) -> int:
        return self.blocks[-1].shape[0] if self.blocks else self.coarse_size

    @property
    def shape(self) -> tuple:
        return (self.size, self.size)

    @property
    def nnz(self) -> int:
        return sum(B.nnz for B in self.blocks) + self.coarse_size

    def apply(self, x: np.ndarray) -> np.ndarray:
        return fast_apply(self, x)

    def apply_transpose(self, x: np.ndarray) -> np.ndarray:
        return fast_apply_transpose(self, x)

    def to_sparse(self) -> sp.csr_matrix:
        N = self.size
        diag = np.ones(N)
        diag[: self.coarse_size] = self.coarse_scale
        out = sp.diags(diag)
        for B in self.blocks:
            rest = N - B.shape[0]
            out = out @ (sp.block_diag([B, sp.identity(rest)]) if rest else B)
        return sp.csr_matrix(out)

    def dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def congruence(self, A) -> np.ndarray:
        """Dense ``S A S^T`` for a dense, Toeplitz or Kronecker-sum ``A``."""
        if hasattr(A, "dense"):
            A = A.dense()
        S = self.to_sparse()
        left = np.asarray(S @ np.asarray(A, dtype=float))
        return np.asarray((S @ left.T).T)


def _check_length(T: TransformMatrix, x: np.ndarray) -> np.ndarray:
    x = np.array(x, dtype=float)
    if x.shape[0] != T.size:
        raise ValueError(f"vector length {x.shape[0]} does not match transform size {T.size}")
    return x


def fast_apply(T: TransformMatrix, x: np.ndarray) -> np.ndarray:
    """``S x``: finest block first, each acting on a shrinking leading slice."""
    x = _check_length(T, x)
    for B in reversed(T.blocks):
        m = B.shape[0]
        x[:m] = B @ x[:m]
    x[: T.coarse_size] *= T.coarse_scale
    return x


def fast_apply_transpose(T: TransformMatrix, x: np.ndarray) -> np.ndarray:
    """``S^T x``."""
    x = _check_length(T, x)
    x[: T.coarse_size] *= T.coarse_scale
    for Bt in T._transposed:
        m = Bt.shape[0]
        x[:m] = Bt @ x[:m]
    return x


def one_level_blocks(spec: WaveletBasisSpec, k: int):
    """Unscaled scaling block (rows ``phi_{k-1,j}``) and wavelet block (rows ``psi_{k-1,j}``).

    Both are expressed in the level-``k`` basis and include the two-scale
    factor ``2**(-1/2)``.
    """
    if k <= spec.n0:
        raise ValueError(f"one-level transform needs k > n0 = {spec.n0}, got {k}")
    r = spec.r
    tab = spec.table
    n_fine = basis_size(r, k)
    n_coarse = basis_size(r, k - 1)
    rows, cols, vals = [], [], []
    for j in range(n_coarse):
        for l, h in enumerate(tab.refinement):
            rows.append(j)
            cols.append(2 * j + l)
            vals.append(float(h) * _ROOT_HALF)
    Pphi = sp.csr_matrix((vals, (rows, cols)), shape=(n_coarse, n_fine))
    rows, cols, vals = [], [], []
    for j in range(1, 2 ** (k - 1) + 1):
        for col, c in wavelet_expansion(spec, k - 1, j).items():
            rows.append(j - 1)
            cols.append(col)
            vals.append(float(c) * _ROOT_HALF)
    Ppsi = sp.csr_matrix((vals, (rows, cols)), shape=(2 ** (k - 1), n_fine))
    return Pphi, Ppsi


def one_level_1d(spec: WaveletBasisSpec, k: int) -> TransformMatrix:
    """``P_k``: stacks ``Phi_{k-1}`` over ``2**(-(k-1) mu) Gamma_{k-1}`` in terms of ``Phi_k``."""
    Pphi, Ppsi = one_level_blocks(spec, k)
    P = sp.vstack([Pphi, 2.0 ** (-(k - 1) * spec.mu) * Ppsi]).tocsr()
    return TransformMatrix((P,), 0, 1.0, spec, k, 1)


def one_level_2d(spec: WaveletBasisSpec, k: int) -> TransformMatrix:
    """Tensor one-level transform; row blocks ordered phi(x)phi, phi(x)psi, psi(x)phi, psi(x)psi."""
    Pphi, Ppsi = one_level_blocks(spec, k)
    w = 2.0 ** (-(k - 1) * spec.mu)
    P = sp.vstack(
        [
            sp.kron(Pphi, Pphi),
            w * sp.kron(Pphi, Ppsi),
            w * sp.kron(Ppsi, Pphi),
            w * sp.kron(Ppsi, Ppsi),
        ]
    ).tocsr()
    return TransformMatrix((P,), 0, 1.0, spec, k, 2)


def _multilevel(spec: WaveletBasisSpec, n: int, dim: int) -> TransformMatrix:
    if n < spec.n0:
        raise ValueError(f"level {n} below coarsest level {spec.n0}")
    one_level = one_level_1d if dim == 1 else one_level_2d
    blocks = tuple(one_level(spec, k).blocks[0] for k in range(spec.n0 + 1, n + 1))
    coarse = basis_size(spec.r, spec.n0) ** dim
    return TransformMatrix(blocks, coarse, 2.0 ** (-spec.n0 * spec.mu), spec, n, dim)


def multilevel_1d(spec: WaveletBasisSpec, n: int) -> TransformMatrix:
    """``S_n`` with ``Psi_n = S_n Phi_n``."""
    return _multilevel(spec, n, 1)


def multilevel_2d(spec: WaveletBasisSpec, n: int) -> TransformMatrix:
    """``S~_n`` for the tensor basis (x-index slowest)."""
    return _multilevel(spec, n, 2)
