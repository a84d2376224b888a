"""Multilevel block Toeplitz and circulant operators built from symbols.

An operator of level sizes n = (n_1, ..., n_d) and block size s1 x s2 is

    T_n(f) = sum_k  J_{n_1}^{k_1} kron ... kron J_{n_d}^{k_d} kron fhat_k

with J_n^k the shift with ones where (row - col) = k, or the circulant
version Z_n^k with ones where (row - col) = k mod n.  Vectors are indexed
with the space indices outermost and the block component innermost, so a
vector reshapes to (n_1, ..., n_d, s).

Also provides the grid-cutting matrices used by the multigrid coarsening,
the layout permutations between interleaved and separated block orderings,
Galerkin triple products and a coordinate text export.
"""
from __future__ import annotations

from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .symbols import TrigPolynomial, _as_tuple

DENSE_CAP = 20000


class StructuredOperator:
    """Toeplitz or circulant operator generated by a symbol.

    Parameters
    ----------
    kind : str
        "toeplitz" or "circulant".
    symbol : TrigPolynomial
        Generating symbol; its dimension d must match len(n).
    n : int or tuple
        Level sizes.
    """

    def __init__(self, kind: str, symbol: TrigPolynomial, n):
        if kind not in ("toeplitz", "circulant"):
            raise ValueError(f"unknown kind {kind!r}")
        self.kind = kind
        self.symbol = symbol
        self.n = _as_tuple(n, symbol.d)
        if any(v < 1 for v in self.n):
            raise ValueError(f"level sizes must be positive, got {self.n}")
        self._grid_evals: Optional[np.ndarray] = None
        self._sparse: Optional[sp.csr_matrix] = None

    # ------------------------------------------------------------------
    @property
    def space_size(self) -> int:
        return int(np.prod(self.n))

    @property
    def shape(self) -> Tuple[int, int]:
        m = self.space_size
        return (m * self.symbol.s1, m * self.symbol.s2)

    def __repr__(self) -> str:
        return f"StructuredOperator({self.kind}, n={self.n}, shape={self.shape})"

    # ------------------------------------------------------------------
    # application
    # ------------------------------------------------------------------
    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[0] != self.shape[1]:
            raise ValueError(f"shape mismatch: {x.shape[0]} vs {self.shape[1]}")
        if self.kind == "circulant":
            return self._matvec_fft(x)
        return self._matvec_shift(x)

    def _matvec_shift(self, x: np.ndarray) -> np.ndarray:
        f = self.symbol
        xg = x.reshape(self.n + (f.s2,))
        out = np.zeros(self.n + (f.s1,), dtype=complex)
        for k, block in f.coeffs.items():
            src = []
            dst = []
            ok = True
            for nj, kj in zip(self.n, k):
                if abs(kj) >= nj:
                    ok = False
                    break
                # rows i with 0 <= i - k < n receive x[i - k]
                dst.append(slice(max(kj, 0), nj + min(kj, 0)))
                src.append(slice(max(-kj, 0), nj + min(-kj, 0)))
            if not ok:
                continue
            out[tuple(dst)] += xg[tuple(src)] @ block.T
        res = out.reshape(-1)
        if np.isrealobj(x) and _real_coefficients(f):
            return res.real.copy()
        return res

    def _matvec_fft(self, x: np.ndarray) -> np.ndarray:
        f = self.symbol
        if self._grid_evals is None:
            self._grid_evals = _folded_grid_evals(f, self.n)
        xg = x.reshape(self.n + (f.s2,)).astype(complex)
        axes = tuple(range(f.d))
        z = np.fft.ifftn(xg, axes=axes)
        w = np.einsum("...rc,...c->...r", self._grid_evals, z)
        y = np.fft.fftn(w, axes=axes).reshape(-1)
        if np.isrealobj(x) and _real_coefficients(f):
            return y.real.copy()
        return y

    def eigenblocks(self) -> np.ndarray:
        """Grid evaluations diagonalizing a circulant, shape (*n, s1, s2).

        Point order is lexicographic in the grid multi-index (first index
        slowest), matching the unitary transform F_{n_1} kron ... kron I_s.
        """
        if self.kind != "circulant":
            raise ValueError("eigenblocks are defined for circulants")
        if self._grid_evals is None:
            self._grid_evals = _folded_grid_evals(self.symbol, self.n)
        return self._grid_evals.copy()

    # ------------------------------------------------------------------
    # materialization
    # ------------------------------------------------------------------
    def to_sparse(self) -> sp.csr_matrix:
        if self._sparse is not None:
            return self._sparse
        f = self.symbol
        total = None
        for k, block in f.coeffs.items():
            shift = None
            for nj, kj in zip(self.n, k):
                j = _shift_matrix(nj, kj, circulant=(self.kind == "circulant"))
                shift = j if shift is None else sp.kron(shift, j, format="coo")
                if shift.nnz == 0:
                    break
            if shift is None or shift.nnz == 0:
                continue
            term = sp.kron(shift, sp.coo_matrix(block), format="coo")
            total = term if total is None else total + term
        if total is None:
            total = sp.coo_matrix(self.shape)
        out = total.tocsr()
        if _real_coefficients(f):
            out = sp.csr_matrix((out.data.real, out.indices, out.indptr),
                                shape=out.shape)
        self._sparse = out
        return out

    def dense(self, cap: int = DENSE_CAP) -> np.ndarray:
        rows, cols = self.shape
        if max(rows, cols) > cap:
            raise ValueError(f"dense materialization refused: size {self.shape} "
                             f"exceeds cap {cap}")
        return self.to_sparse().toarray()


def toeplitz(symbol: TrigPolynomial, n) -> StructuredOperator:
    return StructuredOperator("toeplitz", symbol, n)


def circulant(symbol: TrigPolynomial, n) -> StructuredOperator:
    return StructuredOperator("circulant", symbol, n)


def _real_coefficients(f: TrigPolynomial, tol: float = 1e-14) -> bool:
    return all(np.max(np.abs(b.imag)) <= tol for b in f.coeffs.values()) \
        if f.coeffs else True


def _shift_matrix(n: int, k: int, circulant: bool) -> sp.coo_matrix:
    if circulant:
        rows = np.arange(n)
        cols = (rows - k) % n
        return sp.coo_matrix((np.ones(n), (rows, cols)), shape=(n, n))
    if abs(k) >= n:
        return sp.coo_matrix((n, n))
    rows = np.arange(max(k, 0), n + min(k, 0))
    return sp.coo_matrix((np.ones(len(rows)), (rows, rows - k)), shape=(n, n))


def _folded_grid_evals(f: TrigPolynomial, n) -> np.ndarray:
    """Symbol evaluations on the 2 pi m / n grid with frequencies folded mod n.

    Folding first makes the evaluations consistent with the sparse
    materialization when some |k_j| >= n_j (the aliased coefficients sum).
    """
    folded = {}
    for k, block in f.coeffs.items():
        kf = tuple(int(kj % nj) for kj, nj in zip(k, n))
        if kf in folded:
            folded[kf] = folded[kf] + block
        else:
            folded[kf] = block.copy()
    g = TrigPolynomial(f.d, f.s1, f.s2, folded)
    return g.evaluate_grid(n)


def unitary_block_dft(n, s: int) -> np.ndarray:
    """Dense (F_{n_1} kron ... kron F_{n_d} kron I_s) used by the circulant
    diagonalization, with F_m the unitary DFT matrix exp(-2 pi i j k / m) / sqrt(m)."""
    n = tuple(int(v) for v in n)
    out = None
    for nj in n:
        j = np.arange(nj)
        fj = np.exp(-2j * np.pi * np.outer(j, j) / nj) / np.sqrt(nj)
        out = fj if out is None else np.kron(out, fj)
    return np.kron(out, np.eye(s))


# ----------------------------------------------------------------------
# grid cutting
# ----------------------------------------------------------------------

class CuttingMatrix:
    """Downsampling selector for one coarsening step.

    Per dimension, a size-n grid keeps every other source starting from
    the first one, k = ceil(n / 2) of them.  Anchoring the kept set at
    the leading edge keeps a size 2^t + 1 grid inside the same family
    (the coarse grid has 2^{t-1} + 1 points) and, combined with the
    boundary-aware transfer stencils, leaves no fine boundary line
    outside the range of the composed prolongation.  The multilevel
    selector is the Kronecker product of the per-dimension ones,
    optionally followed by an identity on the block components.
    """

    def __init__(self, n):
        self.n = tuple(int(v) for v in n)
        self.k = tuple(_coarse_size(v) for v in self.n)
        if any(v < 2 for v in self.k):
            raise ValueError(f"grid {self.n} is too small to cut")
        self.keep = tuple(np.arange(0, nv, 2) for nv in self.n)

    def as_sparse(self, block_s: int = 1) -> sp.csr_matrix:
        """The selector as a tall sparse 0/1 matrix of shape (N_fine, N_coarse)."""
        out = None
        for nv, kv, idx in zip(self.n, self.k, self.keep):
            kmat = sp.coo_matrix((np.ones(kv), (idx, np.arange(kv))),
                                 shape=(nv, kv))
            out = kmat if out is None else sp.kron(out, kmat, format="coo")
        if block_s > 1:
            out = sp.kron(out, sp.eye(block_s), format="coo")
        return out.tocsr()

    def cut(self, x: np.ndarray, block_s: int = 1) -> np.ndarray:
        """Apply the transpose selector: pick the kept grid values."""
        xg = x.reshape(self.n + (block_s,))
        for axis, idx in enumerate(self.keep):
            xg = np.take(xg, idx, axis=axis)
        return xg.reshape(-1)

    def embed(self, y: np.ndarray, block_s: int = 1) -> np.ndarray:
        """Apply the selector: place coarse values on the kept fine positions."""
        yg = y.reshape(self.k + (block_s,))
        out = np.zeros(self.n + (block_s,), dtype=yg.dtype)
        out[np.ix_(*self.keep)] = yg
        return out.reshape(-1)


def _coarse_size(n: int) -> int:
    return (n + 1) // 2


# ----------------------------------------------------------------------
# layout permutations
# ----------------------------------------------------------------------

def block_permute(x: np.ndarray, s: int) -> np.ndarray:
    """Point-interleaved to block-separated layout.

    Input has the s components of each grid point contiguous; output lists
    all first components, then all second ones, and so on.
    """
    x = np.asarray(x)
    if x.shape[0] % s:
        raise ValueError("length not divisible by block size")
    return x.reshape(-1, s).T.reshape(-1).copy()


def block_unpermute(x: np.ndarray, s: int) -> np.ndarray:
    """Inverse of block_permute."""
    x = np.asarray(x)
    if x.shape[0] % s:
        raise ValueError("length not divisible by block size")
    return x.reshape(s, -1).T.reshape(-1).copy()


def interleave_groups(group_sizes, m: int) -> np.ndarray:
    """Index map between fully interleaved and group-concatenated layouts.

    Consider m grid points carrying s = sum(group_sizes) components each.
    The interleaved layout keeps all s components of a point together; the
    grouped layout concatenates one block per group, each internally
    point-interleaved over that group's components.  Returns `perm` with
    grouped_index = perm[interleaved_index]; for matrices,
    M_interleaved = M_grouped[perm][:, perm].
    """
    sizes = [int(v) for v in group_sizes]
    s = sum(sizes)
    perm = np.empty(m * s, dtype=np.int64)
    offsets = np.cumsum([0] + sizes) * m
    pos = 0
    for point in range(m):
        for g, sg in enumerate(sizes):
            base = offsets[g] + point * sg
            perm[pos:pos + sg] = np.arange(base, base + sg)
            pos += sg
    return perm


# ----------------------------------------------------------------------
# products and export
# ----------------------------------------------------------------------

def galerkin_triple(r: sp.spmatrix, m: sp.spmatrix, p: sp.spmatrix) -> sp.csr_matrix:
    """Sparse triple product R M P with small entries pruned."""
    out = (r @ (m @ p)).tocsr()
    out.data[np.abs(out.data) < 1e-14] = 0.0
    out.eliminate_zeros()
    return out


def write_coo_text(m: sp.spmatrix, path) -> None:
    """Write a sparse matrix as `i j value` lines with 1-based indices."""
    coo = sp.coo_matrix(m)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        for i, j, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{i + 1} {j + 1} {v:.17g}\n")
