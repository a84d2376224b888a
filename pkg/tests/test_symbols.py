"""Unit tests for the trigonometric polynomial algebra."""

import numpy as np
import pytest

from saddlemg.symbols import (PointwiseSymbol, SymbolSingularError,
                              TrigPolynomial, constant, from_scalar_terms,
                              identity, read_symbol, tensor, write_symbol,
                              zero)


def scalar_1d(terms):
    return from_scalar_terms(1, {(k,): v for k, v in terms.items()})


def test_constant_and_identity_evaluate():
    f = identity(2, 3)
    assert np.allclose(f.evaluate((0.3, -1.2)), np.eye(3))
    block = np.array([[2.0, 1.0], [1.0, 2.0]])
    g = constant(block, 2)
    assert np.allclose(g.evaluate((0.0, 0.0)), block)


def test_scalar_evaluation_matches_cosine():
    f = scalar_1d({0: 2.0, 1: 1.0, -1: 1.0})
    for theta in (0.0, 0.7, np.pi / 3, -2.1):
        want = 2.0 + 2.0 * np.cos(theta)
        assert abs(f.evaluate((theta,))[0, 0] - want) < 1e-14


def test_add_sub_scale():
    f = scalar_1d({0: 1.0, 1: 0.5, -1: 0.5})
    g = scalar_1d({0: 3.0})
    theta = (1.234,)
    got = f.add(g).evaluate(theta)[0, 0]
    assert abs(got - (f.evaluate(theta)[0, 0] + 3.0)) < 1e-14
    got = g.sub(f).scale(2.0).evaluate(theta)[0, 0]
    assert abs(got - 2.0 * (3.0 - f.evaluate(theta)[0, 0])) < 1e-14


def test_multiply_is_pointwise_product():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((2, 2))
    f = TrigPolynomial(1, 2, 2, {(0,): a + a.T})
    g = scalar_1d({0: 1.0, 1: 0.5, -1: 0.5})
    gm = TrigPolynomial(1, 2, 2, {k: v * np.eye(2)
                                  for k, v in g.coeffs.items()})
    prod = f.multiply(gm)
    for theta in (0.0, 0.9, -2.3):
        want = f.evaluate((theta,)) @ gm.evaluate((theta,))
        assert np.allclose(prod.evaluate((theta,)), want, atol=1e-13)


def test_adjoint_flips_and_conjugates():
    m = np.array([[0.0, 1.0], [0.0, 0.0]])
    f = TrigPolynomial(1, 2, 2, {(1,): m, (-1,): m.T})
    fh = f.adjoint()
    theta = (0.77,)
    assert np.allclose(fh.evaluate(theta), f.evaluate(theta).conj().T,
                       atol=1e-14)


def test_tensor_and_swap_args():
    f = scalar_1d({0: 2.0, 1: 1.0, -1: 1.0})
    g = scalar_1d({0: 1.0, 1: 0.5, -1: 0.5})
    fg = tensor(f, g)
    t1, t2 = 0.4, -1.1
    want = f.evaluate((t1,))[0, 0] * g.evaluate((t2,))[0, 0]
    assert abs(fg.evaluate((t1, t2))[0, 0] - want) < 1e-14
    sw = fg.swap_args()
    assert abs(sw.evaluate((t2, t1))[0, 0] - want) < 1e-14


def test_eig_at_sorted_and_real_for_hermitian():
    off = np.array([[0.0, 1.0], [1.0, 0.0]])
    f = TrigPolynomial(2, 2, 2, {(0, 0): 3.0 * np.eye(2),
                                 (1, 0): 0.5 * off, (-1, 0): 0.5 * off})
    lam = f.eig_at((0.0, 0.0))
    assert np.all(np.diff(lam) >= 0)
    assert np.allclose(lam, [2.0, 4.0])


def test_sup_norm_of_constant():
    f = constant(np.diag([1.0, -4.0]), 2)
    assert abs(f.sup_norm(8) - 4.0) < 1e-12


def test_degree_and_coefficient_access():
    f = from_scalar_terms(2, {(0, 0): 1.0, (2, -1): 0.5, (-2, 1): 0.5})
    assert tuple(f.degree) == (2, 1)
    assert f.coefficient((2, -1))[0, 0] == 0.5
    assert f.coefficient((5, 5)).shape == (1, 1)
    assert np.all(f.coefficient((5, 5)) == 0)


def test_zero_symbol():
    z = zero(2, 2, 3)
    assert z.evaluate((0.1, 0.2)).shape == (2, 3)
    assert np.all(z.evaluate((0.1, 0.2)) == 0)


def test_serialization_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    blocks = {}
    for k in ((0, 0), (1, -1), (-1, 1), (2, 0), (-2, 0)):
        blocks[k] = rng.standard_normal((2, 2))
    for k in ((1, -1), (2, 0)):
        blocks[tuple(-x for x in k)] = blocks[k].T
    f = TrigPolynomial(2, 2, 2, blocks)
    path = tmp_path / "sym.txt"
    write_symbol(f, path)
    g = read_symbol(path)
    assert g.d == f.d and g.s1 == f.s1 and g.s2 == f.s2
    for theta in ((0.0, 0.0), (0.5, -0.25), (2.0, 1.0)):
        assert np.allclose(g.evaluate(theta), f.evaluate(theta), atol=1e-15)


def test_serialization_format_header(tmp_path):
    f = from_scalar_terms(2, {(0, 0): 1.5, (1, 0): 0.25, (-1, 0): 0.25})
    path = tmp_path / "s.txt"
    write_symbol(f, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "2 1 1"
    parts = lines[1].split()
    assert len(parts) == 2 + 4


def test_pointwise_symbol_singularity_skipped():
    def rule(theta):
        if abs(theta[0]) < 1e-12 and abs(theta[1]) < 1e-12:
            raise SymbolSingularError("origin")
        return np.array([[np.cos(theta[0])]])

    s = PointwiseSymbol(2, 1, 1, rule)
    with pytest.raises(SymbolSingularError):
        s.evaluate((0.0, 0.0))
    sup, argmax, skipped = s.sup_norm_grid(8)
    assert skipped == 1
    assert abs(sup - 1.0) < 1e-12
