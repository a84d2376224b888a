"""Hierarchy construction, cycles, and contraction checks."""

import numpy as np
import pytest
import scipy.sparse.linalg as spla

from saddlemg.multigrid import (Hierarchy, build_prolongations,
                                coarse_transfer_matrices, iteration_matrix,
                                solve, spectral_radius_power)
from saddlemg.system import StokesSystem


def test_hierarchy_levels_halve():
    h = Hierarchy(StokesSystem(17))
    assert [lv.n for lv in h.levels] == [17, 9, 5, 3]
    assert h.depth == 4


def test_prolongation_shapes():
    p_vel, p_c, k = build_prolongations(9)
    assert k == 5
    assert p_vel.shape == (8 * 81, 8 * 25)
    assert p_c.shape == (81, 25)


def test_transformed_blocks_definite():
    for alpha in (0.1, 0.5, 2.0 / 3.0, 1.0, 1.3):
        h = Hierarchy(StokesSystem(9), alpha=alpha)
        for lv in h.levels:
            lam = np.linalg.eigvalsh(lv.c_trans.toarray())
            assert lam[0] > 0.0, f"alpha={alpha} n={lv.n}"
            lam_a = np.linalg.eigvalsh(lv.a.toarray())
            assert lam_a[0] > 0.0


def test_triangular_factors_invert():
    h = Hierarchy(StokesSystem(9))
    lv = h.levels[0]
    rng = np.random.default_rng(8)
    x = rng.standard_normal(lv.size)
    assert np.allclose(lv.apply_u_inv(lv.apply_u(x)), x, atol=1e-12)
    # the left factor is an involution
    assert np.allclose(lv.apply_l(lv.apply_l(x)), x, atol=1e-12)


def test_transform_identity():
    """The transformed matrix equals L @ saddle @ U applied to vectors."""
    h = Hierarchy(StokesSystem(9))
    lv = h.levels[0]
    rng = np.random.default_rng(9)
    x = rng.standard_normal(lv.size)
    saddle = lv.saddle_matrix()
    want = lv.apply_l(saddle @ lv.apply_u(x))
    assert np.allclose(lv.a_hat @ x, want, atol=1e-10)


def test_composite_identity_two_level_pairs():
    h = Hierarchy(StokesSystem(17))
    for ell in (0, 1):
        r, mid, p = coarse_transfer_matrices(h, ell)
        got = (r @ mid @ p).toarray()
        want = h.levels[ell + 1].saddle_matrix().toarray()
        rel = np.linalg.norm(got - want) / np.linalg.norm(want)
        assert rel <= 1e-10


def test_cycle_zero_fixed_point():
    h = Hierarchy(StokesSystem(9))
    z = np.zeros(h.levels[0].size)
    out = h.cycle(z, z.copy(), 2, 1, 1, 0.6, 0.8, 1)
    assert np.linalg.norm(out) == 0.0


def test_solve_reaches_direct_solution():
    sys_ = StokesSystem(17)
    h = Hierarchy(sys_)
    b, _ = sys_.manufactured_rhs()
    res = solve(h, b, cycle="tgm", pre=0, post=1, omega_pre=0.6,
                omega_post=0.8)
    assert res.converged
    assert res.final_relres < 1e-6
    x_dir = spla.splu(sys_.full_sparse().tocsc()).solve(b)
    err = np.linalg.norm(res.x - x_dir) / np.linalg.norm(x_dir)
    assert err < 1e-5
    assert len(res.history) == res.iterations
    assert len(res.history_original) == res.iterations


def test_solve_deterministic():
    sys_ = StokesSystem(9)
    h = Hierarchy(sys_)
    b, _ = sys_.manufactured_rhs()
    kw = dict(cycle="v", pre=1, post=1, omega_pre=0.6, omega_post=0.8)
    r1 = solve(h, b, **kw)
    r2 = solve(h, b, **kw)
    assert r1.history == r2.history
    assert np.array_equal(r1.x, r2.x)


def test_all_cycle_kinds_converge():
    sys_ = StokesSystem(17)
    h = Hierarchy(sys_)
    b, _ = sys_.manufactured_rhs()
    for cycle in ("tgm", "v", "w"):
        res = solve(h, b, cycle=cycle, pre=2, post=2, omega_pre=0.6,
                    omega_post=0.8)
        assert res.converged, cycle


def test_unknown_cycle_rejected():
    sys_ = StokesSystem(9)
    h = Hierarchy(sys_)
    b, _ = sys_.manufactured_rhs()
    with pytest.raises(ValueError):
        solve(h, b, cycle="fmg")


def test_tgm_contracts_at_desk_scale():
    h = Hierarchy(StokesSystem(9))
    e = iteration_matrix(h, depth=2, pre=0, post=1, omega_post=0.8)
    rho = spectral_radius_power(e, steps=1000)
    assert rho < 1.0
    # one smoothing step at every admissible count keeps contraction
    for post in (2, 3):
        e = iteration_matrix(h, depth=2, pre=0, post=post, omega_post=0.8)
        assert spectral_radius_power(e, steps=1000) < 1.0


def test_iteration_matrix_linearity():
    """The dense map reproduces the cycle on a random vector."""
    h = Hierarchy(StokesSystem(9))
    e = iteration_matrix(h, depth=2, pre=1, post=1, omega_pre=0.6,
                         omega_post=0.8)
    rng = np.random.default_rng(12)
    v = rng.standard_normal(e.shape[0])
    zero = np.zeros_like(v)
    want = h.cycle(zero, v.copy(), 2, 1, 1, 0.6, 0.8, 1)
    assert np.allclose(e @ v, want, atol=1e-10)


def test_spectral_radius_power_on_known_matrix():
    m = np.diag([0.9, -0.5, 0.1])
    assert abs(spectral_radius_power(m, steps=500) - 0.9) < 1e-6
