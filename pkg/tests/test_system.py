"""Tests of the assembled saddle-point system."""

import numpy as np
import pytest
import scipy.sparse.linalg as spla

import saddlemg.stokes_symbols as ss
from saddlemg.structured import toeplitz
from saddlemg.system import (StokesSystem, grid_size,
                             stokes_global_permutation)


def test_grid_size():
    assert [grid_size(t) for t in (1, 2, 3, 5, 8)] == [3, 5, 9, 33, 257]
    with pytest.raises(ValueError):
        grid_size(0)


def test_sizes_and_symmetry():
    sys_ = StokesSystem(5)
    assert sys_.velocity_size == 8 * 25
    assert sys_.pressure_size == 25
    assert sys_.size == 9 * 25
    m = sys_.full_sparse()
    assert (m - m.T).nnz == 0


def test_apply_matches_full_matrix():
    sys_ = StokesSystem(5)
    rng = np.random.default_rng(2)
    x = rng.standard_normal(sys_.size)
    assert np.allclose(sys_.apply(x), sys_.full_sparse() @ x, atol=1e-12)


def test_velocity_block_positive_definite():
    sys_ = StokesSystem(5)
    lam = np.linalg.eigvalsh(sys_.a.toarray())
    assert lam[0] > 0.0


def test_full_matrix_nonsingular():
    sys_ = StokesSystem(5)
    lu = spla.splu(sys_.full_sparse().tocsc())
    rng = np.random.default_rng(3)
    x = rng.standard_normal(sys_.size)
    b = sys_.apply(x)
    assert np.allclose(lu.solve(b), x, atol=1e-8)


def test_manufactured_rhs_consistent():
    sys_ = StokesSystem(5)
    b, x_true = sys_.manufactured_rhs()
    t = np.linspace(0.0, np.pi, sys_.size)
    assert np.allclose(x_true, np.sin(4 * t) + np.cos(6 * t) + 1.0,
                       atol=1e-15)
    assert np.allclose(b, sys_.full_sparse() @ x_true, atol=1e-12)


def test_deterministic_assembly():
    m1 = StokesSystem(5).full_sparse()
    m2 = StokesSystem(5).full_sparse()
    assert (m1 != m2).nnz == 0


def test_global_permutation_matches_nine_row_symbol():
    n = 4
    sys_ = StokesSystem(n)
    perm = stokes_global_permutation(n)
    assert sorted(perm) == list(range(sys_.size))
    grouped = sys_.full_sparse().toarray()
    interleaved = grouped[np.ix_(perm, perm)]
    want = toeplitz(ss.global_symbol(), (n, n)).dense().real
    assert np.allclose(interleaved, want, atol=1e-12)
