"""Matrix-valued trigonometric polynomials.

A symbol is a finite Fourier sum

    f(theta) = sum_k fhat_k exp(i <k, theta>),    k in Z^d,

with matrix coefficients fhat_k of a fixed size s1 x s2.  Symbols are the
generating functions of the structured (Toeplitz / circulant) matrices used
throughout the package: every operator block is defined by one of them, and
the solver parameters are computed from their spectral data.
"""
from __future__ import annotations

from typing import Callable, Dict, Iterable, Tuple

import numpy as np

MultiIndex = Tuple[int, ...]

# Coefficient blocks with max-abs below this are dropped on construction.
_DROP_TOL = 1e-15


class TrigPolynomial:
    """Trigonometric polynomial with s1 x s2 complex matrix coefficients.

    Parameters
    ----------
    d : int
        Number of angular variables.
    s1, s2 : int
        Row and column size of each coefficient block.
    coeffs : dict
        Map from frequency multi-index (length-d tuple of ints) to an
        (s1, s2) array-like.  Near-zero blocks are dropped.
    """

    __slots__ = ("d", "s1", "s2", "coeffs", "hermitian")

    def __init__(self, d: int, s1: int, s2: int,
                 coeffs: Dict[MultiIndex, np.ndarray]):
        self.d = int(d)
        self.s1 = int(s1)
        self.s2 = int(s2)
        store: Dict[MultiIndex, np.ndarray] = {}
        for k, block in coeffs.items():
            k = tuple(int(v) for v in k)
            if len(k) != self.d:
                raise ValueError(f"frequency {k} has wrong length for d={d}")
            arr = np.asarray(block, dtype=complex).reshape(self.s1, self.s2)
            if np.max(np.abs(arr)) <= _DROP_TOL:
                continue
            store[k] = arr.copy()
        self.coeffs = store
        self.hermitian = self._check_hermitian()

    # ------------------------------------------------------------------
    # basic structure
    # ------------------------------------------------------------------
    def _check_hermitian(self, tol: float = 1e-13) -> bool:
        if self.s1 != self.s2:
            return False
        for k, block in self.coeffs.items():
            mk = tuple(-v for v in k)
            other = self.coeffs.get(mk)
            if other is None:
                if np.max(np.abs(block)) > tol:
                    return False
                continue
            if np.max(np.abs(block - other.conj().T)) > tol:
                return False
        return True

    @property
    def degree(self) -> MultiIndex:
        """Componentwise max |k| over the support (zeros for the zero symbol)."""
        if not self.coeffs:
            return (0,) * self.d
        return tuple(max(abs(k[j]) for k in self.coeffs) for j in range(self.d))

    def copy(self) -> "TrigPolynomial":
        return TrigPolynomial(self.d, self.s1, self.s2, self.coeffs)

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------
    def evaluate(self, theta) -> np.ndarray:
        """Evaluate at one point, returns an (s1, s2) complex array."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.d,):
            raise ValueError(f"expected {self.d} angles, got shape {theta.shape}")
        out = np.zeros((self.s1, self.s2), dtype=complex)
        for k, block in self.coeffs.items():
            out += block * np.exp(1j * float(np.dot(k, theta)))
        return out

    def evaluate_grid(self, n) -> np.ndarray:
        """Evaluate on the uniform grid theta_m = 2 pi m / n, m in prod(range(n_j)).

        Returns an array of shape (*n, s1, s2).
        """
        n = _as_tuple(n, self.d)
        out = np.zeros(n + (self.s1, self.s2), dtype=complex)
        axes_phases = []
        for j, nj in enumerate(n):
            m = np.arange(nj)
            axes_phases.append(np.exp(2j * np.pi * m / nj))
        for k, block in self.coeffs.items():
            phase = np.ones(n, dtype=complex)
            for j, kj in enumerate(k):
                shape = [1] * self.d
                shape[j] = n[j]
                phase = phase * (axes_phases[j] ** kj).reshape(shape)
            out += phase[..., None, None] * block
        return out

    def eig_at(self, theta) -> np.ndarray:
        """Eigenvalues at one point, ascending (requires a Hermitian symbol)."""
        if not self.hermitian:
            raise ValueError("eigenvalue ordering is defined for Hermitian symbols")
        return np.linalg.eigvalsh(self.evaluate(theta))

    def sup_norm(self, grid_n: int = 64) -> float:
        """Max spectral norm over the uniform grid with grid_n points per dimension."""
        vals = self.evaluate_grid((grid_n,) * self.d)
        flat = vals.reshape(-1, self.s1, self.s2)
        return float(np.linalg.norm(flat, ord=2, axis=(1, 2)).max())

    def coefficient(self, k: MultiIndex) -> np.ndarray:
        """Coefficient block at frequency k (zeros if absent)."""
        k = tuple(int(v) for v in k)
        block = self.coeffs.get(k)
        if block is None:
            return np.zeros((self.s1, self.s2), dtype=complex)
        return block.copy()

    # ------------------------------------------------------------------
    # algebra
    # ------------------------------------------------------------------
    def add(self, other: "TrigPolynomial") -> "TrigPolynomial":
        self._check_compat(other, same_shape=True)
        out: Dict[MultiIndex, np.ndarray] = {k: v.copy() for k, v in self.coeffs.items()}
        for k, block in other.coeffs.items():
            if k in out:
                out[k] = out[k] + block
            else:
                out[k] = block.copy()
        return TrigPolynomial(self.d, self.s1, self.s2, out)

    def scale(self, c: complex) -> "TrigPolynomial":
        return TrigPolynomial(self.d, self.s1, self.s2,
                              {k: c * v for k, v in self.coeffs.items()})

    def sub(self, other: "TrigPolynomial") -> "TrigPolynomial":
        return self.add(other.scale(-1.0))

    def adjoint(self) -> "TrigPolynomial":
        """Pointwise conjugate transpose: coefficients fhat_{-k}^H."""
        out = {tuple(-v for v in k): block.conj().T for k, block in self.coeffs.items()}
        return TrigPolynomial(self.d, self.s2, self.s1, out)

    def multiply(self, other: "TrigPolynomial") -> "TrigPolynomial":
        """Pointwise matrix product, computed as coefficient convolution."""
        self._check_compat(other)
        if self.s2 != other.s1:
            raise ValueError(f"inner sizes differ: {self.s2} vs {other.s1}")
        out: Dict[MultiIndex, np.ndarray] = {}
        for ka, a in self.coeffs.items():
            for kb, b in other.coeffs.items():
                k = tuple(x + y for x, y in zip(ka, kb))
                prod = a @ b
                if k in out:
                    out[k] = out[k] + prod
                else:
                    out[k] = prod
        return TrigPolynomial(self.d, self.s1, other.s2, out)

    def swap_args(self) -> "TrigPolynomial":
        """Reverse the angular variables: g(theta_1, ..., theta_d) = f(theta_d, ..., theta_1)."""
        out = {tuple(reversed(k)): v for k, v in self.coeffs.items()}
        return TrigPolynomial(self.d, self.s1, self.s2, out)

    def _check_compat(self, other: "TrigPolynomial", same_shape: bool = False):
        if self.d != other.d:
            raise ValueError("dimension mismatch")
        if same_shape and (self.s1, self.s2) != (other.s1, other.s2):
            raise ValueError("block size mismatch")

    def __repr__(self) -> str:
        return (f"TrigPolynomial(d={self.d}, s1={self.s1}, s2={self.s2}, "
                f"nnz={len(self.coeffs)}, degree={self.degree})")


# ----------------------------------------------------------------------
# constructors and combinators
# ----------------------------------------------------------------------

def zero(d: int, s1: int, s2: int) -> TrigPolynomial:
    return TrigPolynomial(d, s1, s2, {})


def constant(block, d: int) -> TrigPolynomial:
    block = np.atleast_2d(np.asarray(block, dtype=complex))
    return TrigPolynomial(d, block.shape[0], block.shape[1],
                          {(0,) * d: block})


def identity(d: int, s: int) -> TrigPolynomial:
    return constant(np.eye(s), d)


def from_scalar_terms(d: int, terms: Dict[MultiIndex, complex]) -> TrigPolynomial:
    """Scalar (1 x 1) polynomial from a frequency -> coefficient map."""
    return TrigPolynomial(d, 1, 1, {k: np.array([[v]]) for k, v in terms.items()})


def tensor(f: TrigPolynomial, g: TrigPolynomial) -> TrigPolynomial:
    """Tensor product: evaluate(tensor(f, g), (t1, t2)) = f(t1) kron g(t2).

    Frequencies concatenate, coefficient blocks combine by Kronecker product.
    """
    out: Dict[MultiIndex, np.ndarray] = {}
    for ka, a in f.coeffs.items():
        for kb, b in g.coeffs.items():
            k = ka + kb
            blk = np.kron(a, b)
            if k in out:
                out[k] = out[k] + blk
            else:
                out[k] = blk
    return TrigPolynomial(f.d + g.d, f.s1 * g.s1, f.s2 * g.s2, out)


def assemble_blocks(rows) -> TrigPolynomial:
    """Assemble a block matrix of symbols into one larger symbol.

    `rows` is a list of lists; each entry is a TrigPolynomial or None (zero
    block).  Row/column block sizes must be consistent.
    """
    nrow = len(rows)
    ncol = len(rows[0])
    d = None
    row_sizes = [None] * nrow
    col_sizes = [None] * ncol
    for i, row in enumerate(rows):
        if len(row) != ncol:
            raise ValueError("ragged block rows")
        for j, f in enumerate(row):
            if f is None:
                continue
            d = f.d if d is None else d
            if f.d != d:
                raise ValueError("dimension mismatch between blocks")
            if row_sizes[i] is None:
                row_sizes[i] = f.s1
            elif row_sizes[i] != f.s1:
                raise ValueError("inconsistent row block sizes")
            if col_sizes[j] is None:
                col_sizes[j] = f.s2
            elif col_sizes[j] != f.s2:
                raise ValueError("inconsistent column block sizes")
    if d is None or any(s is None for s in row_sizes) or any(s is None for s in col_sizes):
        raise ValueError("cannot infer block sizes (a full row or column of None)")
    s1 = sum(row_sizes)
    s2 = sum(col_sizes)
    roff = np.cumsum([0] + row_sizes)
    coff = np.cumsum([0] + col_sizes)
    out: Dict[MultiIndex, np.ndarray] = {}
    for i, row in enumerate(rows):
        for j, f in enumerate(row):
            if f is None:
                continue
            for k, block in f.coeffs.items():
                tgt = out.setdefault(k, np.zeros((s1, s2), dtype=complex))
                tgt[roff[i]:roff[i + 1], coff[j]:coff[j + 1]] += block
    return TrigPolynomial(d, s1, s2, out)


# ----------------------------------------------------------------------
# symbols that are only defined pointwise (rational in the coefficients)
# ----------------------------------------------------------------------

class SymbolSingularError(ValueError):
    """Raised when a pointwise symbol is evaluated at a singular angle."""


class PointwiseSymbol:
    """Symbol given by an evaluation rule instead of a coefficient list.

    Used for quantities like Schur complements whose entries are rational
    functions of the angles.  Supports evaluation and grid sup-norms; the
    evaluation rule may raise SymbolSingularError at isolated angles, and
    grid scans skip those points.
    """

    def __init__(self, d: int, s1: int, s2: int,
                 rule: Callable[[np.ndarray], np.ndarray], name: str = ""):
        self.d = d
        self.s1 = s1
        self.s2 = s2
        self.rule = rule
        self.name = name

    def evaluate(self, theta) -> np.ndarray:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.d,):
            raise ValueError(f"expected {self.d} angles")
        return np.asarray(self.rule(theta), dtype=complex).reshape(self.s1, self.s2)

    def sup_norm_grid(self, grid_n: int = 64):
        """Max spectral norm over the uniform grid, skipping singular points.

        Returns (value, argmax_theta, n_skipped).
        """
        best = -np.inf
        best_theta = None
        skipped = 0
        grids = [2 * np.pi * np.arange(grid_n) / grid_n] * self.d
        for idx in np.ndindex(*(grid_n,) * self.d):
            theta = np.array([grids[j][idx[j]] for j in range(self.d)])
            try:
                val = float(np.linalg.norm(self.evaluate(theta), ord=2))
            except SymbolSingularError:
                skipped += 1
                continue
            if val > best:
                best = val
                best_theta = theta
        return best, best_theta, skipped


# ----------------------------------------------------------------------
# plain-text serialization
# ----------------------------------------------------------------------

def write_symbol(f: TrigPolynomial, path) -> None:
    """Write `f` in the plain-text exchange format.

    Header line `d s1 s2`, then one line per nonzero coefficient entry:
    `k1 ... kd row col re im` with 1-based row/col.
    """
    lines = [f"{f.d} {f.s1} {f.s2}"]
    for k in sorted(f.coeffs):
        block = f.coeffs[k]
        for r in range(f.s1):
            for c in range(f.s2):
                v = block[r, c]
                if v == 0:
                    continue
                ks = " ".join(str(x) for x in k)
                lines.append(f"{ks} {r + 1} {c + 1} {v.real:.17g} {v.imag:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_symbol(path) -> TrigPolynomial:
    """Read a symbol written by `write_symbol`."""
    with open(path) as fh:
        tokens = [line.split() for line in fh if line.strip()]
    if not tokens:
        raise ValueError("empty symbol file")
    d, s1, s2 = (int(x) for x in tokens[0])
    coeffs: Dict[MultiIndex, np.ndarray] = {}
    for parts in tokens[1:]:
        if len(parts) != d + 4:
            raise ValueError(f"malformed coefficient line: {' '.join(parts)}")
        k = tuple(int(x) for x in parts[:d])
        r = int(parts[d]) - 1
        c = int(parts[d + 1]) - 1
        val = float(parts[d + 2]) + 1j * float(parts[d + 3])
        block = coeffs.setdefault(k, np.zeros((s1, s2), dtype=complex))
        block[r, c] += val
    return TrigPolynomial(d, s1, s2, coeffs)


def _as_tuple(n, d: int) -> Tuple[int, ...]:
    if np.isscalar(n):
        return (int(n),) * d
    n = tuple(int(v) for v in n)
    if len(n) != d:
        raise ValueError(f"expected {d} sizes, got {n}")
    return n
