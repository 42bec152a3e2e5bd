import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmodcert.freealg import (
    FreePoly,
    MatrixTuple,
    ParseError,
    Signature,
    SignatureError,
    adjoint,
    basis_size,
    evaluate,
    format_poly,
    hermitian_part,
    is_hermitian,
    monomial_basis,
    parse_poly,
    random_poly,
    random_tuple,
    word_index,
)

HERM2 = Signature(2, (True, True))
NONHERM1 = Signature(1, (False,))
MIXED = Signature(2, (True, False), ("x", "y"))

seeds = st.integers(0, 2**32 - 1)
sigs = st.sampled_from([HERM2, NONHERM1, MIXED, Signature(2, (False, False))])


def test_unit_law():
    p = parse_poly("(1.5-2i)*z1*z2 + 3*z2", HERM2)
    assert HERM2.one() * p == p
    assert p * HERM2.one() == p


def test_product_of_letters():
    p = HERM2.var(0) * HERM2.var(1)
    assert p.terms == {(0, 1): 1.0}


def test_square_expansion():
    z1, z2 = HERM2.var(0), HERM2.var(1)
    p = (z1 + z2) ** 2
    assert p.terms == {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): 1}


def test_adjoint_rules():
    z1, z2 = HERM2.var(0), HERM2.var(1)
    assert adjoint(1j * z1 * z2) == -1j * z2 * z1
    assert adjoint(HERM2.one()) == HERM2.one()
    z = NONHERM1.var(0)
    assert adjoint(z + z.adj()) == z + z.adj()
    assert is_hermitian(z + z.adj())
    assert not is_hermitian(z)


def test_no_stored_zeros():
    z = NONHERM1.var(0)
    p = z + 1e-13 * z.adj() - z
    assert p.is_zero() and p.terms == {}


def test_evaluate_trivial():
    rng = np.random.default_rng(0)
    X = random_tuple(HERM2, 3, rng)
    assert np.array_equal(evaluate(HERM2.one(), X), np.eye(3))
    np.testing.assert_allclose(evaluate(HERM2.var(0) * HERM2.var(1), X), X.mats[0] @ X.mats[1], atol=1e-14)


def test_evaluate_adjoint_100():
    rng = np.random.default_rng(1)
    for k in range(100):
        sig = [HERM2, NONHERM1, MIXED][k % 3]
        p = random_poly(sig, 3, rng)
        X = random_tuple(sig, int(rng.integers(1, 5)), rng)
        np.testing.assert_allclose(evaluate(adjoint(p), X), evaluate(p, X).conj().T, atol=1e-10)


def test_monomial_basis_examples():
    s1 = Signature(1, (True,))
    assert monomial_basis(s1, 1) == [(), (0,)]
    assert len(monomial_basis(HERM2, 2)) == 7
    b = monomial_basis(NONHERM1, 2)
    assert len(b) == 7 and (1,) in b
    assert basis_size(HERM2, 3) == len(monomial_basis(HERM2, 3)) == 15


def test_graded_lex_order():
    b = monomial_basis(HERM2, 3)
    keys = [(len(w), w) for w in b]
    assert keys == sorted(keys)
    idx = word_index(b)
    assert all(b[idx[w]] == w for w in b)


def test_matrix_tuple_validation():
    with pytest.raises(ValueError):
        MatrixTuple((np.array([[0, 1], [0, 0]]),), Signature(1, (True,)))
    with pytest.raises(SignatureError):
        MatrixTuple((np.eye(2),), HERM2)
    X = MatrixTuple((np.array([[0, 1], [0, 0]]),), NONHERM1)
    assert X.dim == 2


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_poly("z1 +", HERM2)
    with pytest.raises(ParseError):
        parse_poly("w", HERM2)
    with pytest.raises(ParseError):
        parse_poly("", HERM2)


def test_parse_examples():
    p = parse_poly("(1.5-2i)*z1*z2^* + 3", Signature(2, (False, False)))
    assert p.coeff((0, 3)) == complex(1.5, -2)
    assert p.coeff(()) == 3
    q = parse_poly("2i*x*y^* - y/2", MIXED)
    assert q.coeff((0, 3)) == 2j and q.coeff((1,)) == -0.5


@settings(max_examples=60, deadline=None)
@given(sigs, seeds)
def test_adjoint_involutive_antihomomorphism(sig, seed):
    rng = np.random.default_rng(seed)
    p, q = random_poly(sig, 2, rng, 0.6), random_poly(sig, 2, rng, 0.6)
    assert adjoint(adjoint(p)) == p
    assert (adjoint(p * q)).allclose(adjoint(q) * adjoint(p), 1e-12)
    assert is_hermitian(hermitian_part(p), 1e-12)


@settings(max_examples=40, deadline=None)
@given(sigs, seeds, st.integers(1, 4))
def test_evaluate_is_star_homomorphism(sig, seed, n):
    rng = np.random.default_rng(seed)
    p, q = random_poly(sig, 2, rng, 0.7), random_poly(sig, 2, rng, 0.7)
    X = random_tuple(sig, n, rng)
    lhs = evaluate(p * q, X)
    rhs = evaluate(p, X) @ evaluate(q, X)
    assert np.linalg.norm(lhs - rhs) <= 1e-10 * (1 + np.linalg.norm(rhs))
    np.testing.assert_allclose(evaluate(p + q, X), evaluate(p, X) + evaluate(q, X), atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(sigs, seeds)
def test_format_parse_round_trip(sig, seed):
    rng = np.random.default_rng(seed)
    p = random_poly(sig, 3, rng, 0.5)
    text = format_poly(p)
    assert parse_poly(text, sig).allclose(p, 1e-12)


@settings(max_examples=30, deadline=None)
@given(sigs, st.integers(0, 3))
def test_basis_is_deterministic_and_indexed(sig, d):
    b1, b2 = monomial_basis(sig, d), monomial_basis(sig, d)
    assert b1 == b2
    assert len(set(b1)) == len(b1) == basis_size(sig, d)
    assert all(len(w) <= d for w in b1)


def test_signature_mismatch():
    with pytest.raises(SignatureError):
        HERM2.var(0) + MIXED.var(0)
    with pytest.raises(SignatureError):
        FreePoly({(7,): 1.0}, HERM2)
