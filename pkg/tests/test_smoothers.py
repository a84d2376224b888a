"""Jacobi and Vanka smoother tests."""

import numpy as np
import pytest

from saddlemg.smoothers import (VankaHierarchy, VankaSmoother, jacobi_apply,
                                vanka_apply, vanka_solve)
from saddlemg.symbols import from_scalar_terms
from saddlemg.structured import circulant
from saddlemg.system import StokesSystem


def test_jacobi_error_propagation_matrix():
    f = from_scalar_terms(1, {(0,): 4.0, (1,): 1.0, (-1,): 1.0})
    m = circulant(f, 4).to_sparse().real
    rng = np.random.default_rng(0)
    x_star = rng.standard_normal(4)
    b = m @ x_star
    x0 = rng.standard_normal(4)
    omega, nu = 0.7, 3
    got = jacobi_apply(m, omega, b, x0, sweeps=nu)
    d = np.asarray(m.diagonal())
    prop = np.eye(4) - omega * np.diag(1.0 / d) @ m.toarray()
    want = x_star + np.linalg.matrix_power(prop, nu) @ (x0 - x_star)
    assert np.max(np.abs(got - want)) < 1e-12


def test_jacobi_rate_on_shifted_cosine():
    # symbol 4 + 2 cos t: undamped Jacobi contracts at exactly 1/2
    f = from_scalar_terms(1, {(0,): 4.0, (1,): 1.0, (-1,): 1.0})
    m = circulant(f, 4).to_sparse().real
    d = np.asarray(m.diagonal())
    prop = np.eye(4) - np.diag(1.0 / d) @ m.toarray()
    rho = max(abs(np.linalg.eigvals(prop)))
    assert abs(rho - 0.5) < 1e-12


def test_jacobi_rejects_zero_diagonal():
    import scipy.sparse as sp
    m = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 2.0]]))
    with pytest.raises(ValueError):
        jacobi_apply(m, 0.8, np.ones(2), np.zeros(2))


def test_vanka_patches_cover_pressure_rows():
    sys_ = StokesSystem(5)
    m = sys_.full_sparse().tocsr()
    sm = VankaSmoother(m, sys_.velocity_size)
    assert sm.pptr.size - 1 == sys_.pressure_size
    for j in range(sys_.pressure_size):
        dofs = sm.pidx[sm.pptr[j]:sm.pptr[j + 1]]
        row = sys_.velocity_size + j
        cols = m.indices[m.indptr[row]:m.indptr[row + 1]]
        vel = set(int(c) for c in cols if c < sys_.velocity_size)
        assert vel == set(int(d) for d in dofs[:-1])
        assert dofs[-1] == row


def test_vanka_grouped_inverses_are_exact():
    sys_ = StokesSystem(5)
    m = sys_.full_sparse().tocsr()
    sm = VankaSmoother(m, sys_.velocity_size)
    assert len(sm.invs) < sm.pptr.size - 1  # grouping actually shares work
    for jp in range(sm.pptr.size - 1):
        dofs = sm.pidx[sm.pptr[jp]:sm.pptr[jp + 1]]
        local = m[np.ix_(dofs, dofs)].toarray()
        inv = np.asarray(sm.invs[sm.pcls[jp]])
        resid = np.max(np.abs(local @ inv - np.eye(dofs.size)))
        assert resid < 1e-12


def test_vanka_sweep_reduces_residual():
    sys_ = StokesSystem(5)
    m = sys_.full_sparse()
    b, _ = sys_.manufactured_rhs()
    x1 = vanka_apply(sys_, b, np.zeros(sys_.size), sweeps=1)
    r0 = np.linalg.norm(b)
    r1 = np.linalg.norm(b - m @ x1)
    assert r1 < 0.5 * r0


def test_vanka_damping_changes_update():
    sys_ = StokesSystem(5)
    m = sys_.full_sparse()
    b, _ = sys_.manufactured_rhs()
    full = VankaSmoother(m, sys_.velocity_size).apply(b, np.zeros(sys_.size))
    damped = VankaSmoother(m, sys_.velocity_size, damping=0.8).apply(
        b, np.zeros(sys_.size))
    assert not np.allclose(full, damped)


def test_vanka_hierarchy_and_solve():
    sys_ = StokesSystem(17)
    h = VankaHierarchy(sys_)
    assert h.sizes_n == [17, 9]
    b, _ = sys_.manufactured_rhs()
    res = vanka_solve(h, b, cycle="v", pre=2, post=2)
    assert res.converged
    assert res.final_relres < 1e-6
    x_err = np.linalg.norm(b - sys_.full_sparse() @ res.x) / np.linalg.norm(b)
    assert x_err < 1e-6


def test_vanka_hierarchy_coarsening_modes():
    sys_ = StokesSystem(17)
    g = VankaHierarchy(sys_, coarsening="galerkin")
    r = VankaHierarchy(sys_, coarsening="rediscretize")
    assert g.depth == r.depth == 2
    assert g.mats[1].shape == r.mats[1].shape
    with pytest.raises(ValueError):
        VankaHierarchy(sys_, coarsening="agglomerate")


def test_vanka_solve_deterministic():
    sys_ = StokesSystem(17)
    h = VankaHierarchy(sys_)
    b, _ = sys_.manufactured_rhs()
    r1 = vanka_solve(h, b, cycle="v", pre=1, post=1)
    r2 = vanka_solve(h, b, cycle="v", pre=1, post=1)
    assert r1.history == r2.history
