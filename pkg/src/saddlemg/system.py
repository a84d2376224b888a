"""Finest-level assembly of the structured Stokes saddle-point system.

The unknowns are grouped as [u_x | u_y | p].  Each velocity group carries
four interleaved components per coarse cell and is generated by the
velocity stiffness symbol; the coupling blocks come from the divergence
symbols.  The assembled system is

    [ A   B^T ] [u]   [f]
    [ B    0  ] [p] = [g]

with A block diagonal over the two velocity directions.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import stokes_symbols as ss
from .structured import interleave_groups, toeplitz

VELOCITY_COMPONENTS = 4


def grid_size(t: int) -> int:
    """Mesh parameter for refinement exponent t."""
    if t < 1:
        raise ValueError("refinement exponent must be >= 1")
    return 2 ** t + 1


class StokesSystem:
    """Assembled saddle-point system on an n x n coarse-cell grid."""

    def __init__(self, n: int):
        if n < 2:
            raise ValueError("grid size must be >= 2")
        self.n = int(n)
        m = self.n * self.n
        self.velocity_size = 2 * VELOCITY_COMPONENTS * m
        self.pressure_size = m
        self.size = self.velocity_size + self.pressure_size

        ax = toeplitz(ss.velocity_stiffness_symbol(), (n, n)).to_sparse()
        ay = toeplitz(ss.velocity_stiffness_symbol_y(), (n, n)).to_sparse()
        bx = toeplitz(ss.coupling_symbol_x(), (n, n)).to_sparse()
        by = toeplitz(ss.coupling_symbol_y(), (n, n)).to_sparse()

        self.a = sp.block_diag((ax, ay), format="csr")
        self.bt = sp.vstack([bx, by], format="csr")
        self.b = self.bt.T.tocsr()

    def full_sparse(self) -> sp.csr_matrix:
        """The whole saddle-point matrix in the grouped ordering."""
        return sp.bmat([[self.a, self.bt], [self.b, None]], format="csr")

    def apply(self, x: np.ndarray) -> np.ndarray:
        u = x[:self.velocity_size]
        p = x[self.velocity_size:]
        return np.concatenate([self.a @ u + self.bt @ p, self.b @ u])

    def manufactured_rhs(self) -> tuple[np.ndarray, np.ndarray]:
        """Right-hand side with a known smooth solution.

        Returns (b, x_true) where x_true samples sin(4t) + cos(6t) + 1 at
        uniformly spaced t in [0, pi], one sample per unknown.
        """
        t = np.linspace(0.0, np.pi, self.size)
        x_true = np.sin(4.0 * t) + np.cos(6.0 * t) + 1.0
        return self.apply(x_true), x_true


def stokes_global_permutation(n: int) -> np.ndarray:
    """Index map from the grouped layout to the point-interleaved one.

    With perm = stokes_global_permutation(n), a grouped vector v satisfies
    v_interleaved = v[perm]; a grouped matrix M satisfies
    M_interleaved = M[np.ix_(perm, perm)].  The interleaved layout keeps
    all nine unknowns of a grid point contiguous, matching the operator
    generated by the nine-row global symbol.
    """
    return interleave_groups(
        [VELOCITY_COMPONENTS, VELOCITY_COMPONENTS, 1], n * n)
