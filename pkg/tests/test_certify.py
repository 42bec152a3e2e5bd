import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmodcert.certify import (
    CertifyError,
    UcpMapSpec,
    choi_value,
    evaluation_spec,
    extract_certificate,
    hull_project_membership,
    member_eps,
    norm_bracket,
    norm_upper,
    ucp_check,
)
from qmodcert.freealg import evaluate, hermitian_part, parse_poly, random_poly
from qmodcert.qmodule import IDEAL, ball_module, preset, sos_module
from qmodcert.repsearch import SearchConfig, sample_feasible


def random_member(Q, rng, shift=0.3):
    """Sum of squares plus generator terms plus a positive constant: in Q_2 by construction."""
    sig = Q.sig
    a = sig.const(shift)
    for _ in range(2):
        p = random_poly(sig, 1, rng)
        a = a + p.adj() * p
    for g in Q.generators:
        if g.degree > 2:
            continue
        if g.kind == IDEAL:
            a = a + g.payload * float(rng.normal())
        else:
            v = rng.normal(size=g.size) + 1j * rng.normal(size=g.size)
            for i in range(g.size):
                for j in range(g.size):
                    a = a + g.matrix[i][j] * complex(np.conj(v[i]) * v[j])
    return hermitian_part(a)


def _sum_of_generators(Q):
    sig = Q.sig
    terms = [sig.var(i) if sig.hermitian[i] else sig.var(i) + sig.var_star(i) for i in range(sig.nvars)]
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out


# ---------------------------------------------------------------------------
# membership


def test_unit_is_trivially_certified():
    for name in ("ball:1", "free_group:2", "sos:1"):
        Q = preset(name)
        r = member_eps(Q.sig.one(), Q, 2)
        assert r.found
        assert r.certificate.reconstruct().allclose(Q.sig.one(), 1e-7)


def test_hermitian_ball_generator_certified():
    Q = preset("ball_herm:1")
    r = member_eps(parse_poly("1-z*z", Q.sig), Q, 2)
    assert r.status == "certificate"
    assert r.certificate.min_eig() >= -1e-9


def test_odd_polynomial_not_sos():
    Q = sos_module(1)
    r = member_eps(parse_poly("z", Q.sig), Q, 2, eps=0.1)
    assert r.status == "not_found" and r.certificate is None


def test_member_errors():
    Q = preset("free_group:1")
    with pytest.raises(CertifyError):
        member_eps(parse_poly("z", Q.sig), Q, 2)
    with pytest.raises(CertifyError):
        member_eps(parse_poly("z*z*z^*+z^**z^**z", Q.sig), Q, 2)


def test_reconstruction_within_threshold():
    rng = np.random.default_rng(11)
    Q = preset("cube:2")
    a = random_member(Q, rng)
    r = member_eps(a, Q, 2)
    assert r.found
    assert r.certificate.residual <= 1e-7 * (1 + a.max_abs_coeff())


# ---------------------------------------------------------------------------
# norms


def test_norm_ball_generator():
    Q = preset("ball:1")
    assert abs(norm_upper(parse_poly("z", Q.sig), Q, 2).value - 1) <= 1e-6


def test_norm_of_unit():
    Q = preset("ball:1")
    assert abs(norm_upper(Q.sig.one(), Q, 2).value - 1) <= 1e-6


def test_norm_free_group_two():
    Q = preset("free_group:2")
    r = norm_upper(parse_poly("z1+z1^*+z2+z2^*", Q.sig), Q, 2)
    assert abs(r.value - 4) <= 1e-4
    assert set(r.per_mode) == {"square", "hermitian"}
    assert r.value == min(m["value"] for m in r.per_mode.values())


def test_norm_zero_and_modes():
    Q = preset("ball:1")
    assert norm_upper(Q.sig.zero(), Q, 2).value == 0.0
    with pytest.raises(CertifyError):
        norm_upper(parse_poly("z", Q.sig), Q, 2, mode="hermitian")
    with pytest.raises(CertifyError):
        norm_upper(parse_poly("z*z", Q.sig), Q, 2, mode="square")


def test_norm_refuses_non_archimedean():
    Q = sos_module(1)
    with pytest.raises(CertifyError):
        norm_upper(parse_poly("z", Q.sig), Q, 2)


@pytest.mark.parametrize("name", ["ball:1", "free_group:1", "cube:2", "isometry:2", "pencil_ball:2"])
def test_norm_monotone_in_degree(name):
    Q = preset(name)
    a = _sum_of_generators(Q)
    v2, v4 = (norm_upper(a, Q, d).value for d in (2, 4))
    assert v4 <= v2 + 1e-7


@pytest.mark.parametrize("name", ["free_group:1", "free_group:2", "ball:1", "ball:2", "pencil_ball:2", "isometry:2"])
def test_bracket_ordered_on_rfd_presets(name):
    Q = preset(name)
    a = _sum_of_generators(Q)
    br = norm_bracket(a, Q, 2, 2, config=SearchConfig(n=2, restarts=4))
    assert br.lower <= br.upper + 1e-4
    assert br.width >= -1e-4


# ---------------------------------------------------------------------------
# extraction


def test_extract_single_square():
    Q = preset("free_group:1")
    a = parse_poly("2-z-z^*", Q.sig)
    D = extract_certificate(member_eps(a, Q, 2).certificate)
    assert len(D) == 1
    (t,) = D.squares
    p = t.vector[0] * math.sqrt(t.weight)
    # the square is (1 - z)*(1 - z) up to a unimodular factor
    c1, cz = p.coeff(()), p.coeff((0,))
    assert abs(abs(c1) - 1) <= 1e-5 and abs(cz + c1) <= 1e-5
    assert abs(p.coeff((1,))) <= 1e-5


def test_extract_zero_polynomial():
    Q = preset("free_group:1")
    D = extract_certificate(member_eps(Q.sig.zero(), Q, 2).certificate)
    assert len(D) == 0 and D.multipliers == [] and D.text == "0"


def test_extract_round_trip():
    rng = np.random.default_rng(20)
    names = ["ball:1", "free_group:1", "cube:2", "ball_herm:2", "pencil_ball:2"]
    for k in range(20):
        Q = preset(names[k % len(names)])
        a = random_member(Q, rng)
        r = member_eps(a, Q, 2, eps=1e-3)
        assert r.found, (k, Q.name)
        D = extract_certificate(r.certificate)
        assert D.residual <= 1e-6 * (1 + a.max_abs_coeff())
        assert all(t.weight > 0 for t in D.squares)


# ---------------------------------------------------------------------------
# soundness


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["ball:1", "ball:2", "cube:2", "free_group:1", "isometry:2"]))
def test_certificates_are_sound(seed, name):
    Q = preset(name)
    rng = np.random.default_rng(seed)
    # members of Q_2 pushed toward the boundary, so most but not all are certified
    a = random_member(Q, rng, 0.0) + hermitian_part(random_poly(Q.sig, 2, rng)) * 0.2 - rng.uniform(0, 0.5)
    r = member_eps(a, Q, 2)
    if not r.found:
        return
    for _ in range(100):
        X = sample_feasible(Q, int(rng.integers(1, 4)), rng)
        assert Q.violation(X) <= 1e-8
        M = evaluate(a, X)
        assert np.linalg.eigvalsh((M + M.conj().T) / 2)[0] >= -1e-6


# ---------------------------------------------------------------------------
# Choi tests


def _ball_spec(t):
    Q = ball_module(1)
    basis = [Q.sig.one(), Q.sig.var(0), Q.sig.var_star(0)]
    return Q, UcpMapSpec(basis, [np.eye(1), np.array([[t]]), np.array([[t]])])


def _rho_on(poly, spec):
    """Image of ``poly`` under the linear map defined on span(spec.basis)."""
    words = sorted({w for p in list(spec.basis) + [poly] for w in p.terms}, key=lambda w: (len(w), w))
    M = np.array([[p.coeff(w) for p in spec.basis] for w in words], dtype=complex)
    v = np.array([poly.coeff(w) for w in words], dtype=complex)
    c, *_ = np.linalg.lstsq(M, v, rcond=None)
    assert np.abs(M @ c - v).max() <= 1e-10
    return sum(ck * R for ck, R in zip(c, spec.images))


def test_ucp_violation_and_witness():
    Q, spec = _ball_spec(1.001)
    r = ucp_check(spec, Q, 2)
    assert r.status == "violated" and r.value < 0
    w = r.witness
    hs = [parse_poly(s, Q.sig) for s in w["basis"]]
    H = [np.array(M, dtype=complex) for M in w["H"]]
    # re-evaluate the Choi functional on the witness independently
    val = sum(np.sum(_rho_on(h, spec) * Hb).real for h, Hb in zip(hs, H))
    assert val < 0 and abs(val - w["choi_value"]) <= 1e-9
    assert abs(w["normalization"] - 1) <= 1e-6
    assert w["cone_residual"] <= 1e-6


@pytest.mark.parametrize("d", [2, 4])
def test_ucp_contraction_consistent(d):
    Q, spec = _ball_spec(0.999)
    assert ucp_check(spec, Q, d).status == "ucp_consistent"


@pytest.mark.parametrize("d", [2, 4])
def test_ucp_evaluation_at_representation(d):
    rng = np.random.default_rng(d)
    Q = preset("ball:1")
    X = sample_feasible(Q, 2, rng)
    spec = evaluation_spec([Q.sig.one(), Q.sig.var(0), Q.sig.var_star(0)], X)
    r = ucp_check(spec, Q, d)
    assert r.status == "ucp_consistent" and r.value >= -1e-7


def test_ucp_spec_validation():
    Q = ball_module(1)
    with pytest.raises(CertifyError):
        UcpMapSpec([Q.sig.one()], [np.eye(1), np.eye(1)])
    with pytest.raises(CertifyError):
        UcpMapSpec([Q.sig.one(), Q.sig.var(0)], [np.eye(1), np.eye(2)])


def test_choi_value_pairing():
    R = [np.array([[1.0, 2.0], [3.0, 4.0]])]
    H = [np.array([[1.0, 0.0], [1.0, 0.0]])]
    assert choi_value(R, H) == 4.0


# ---------------------------------------------------------------------------
# hull projections


def _c_basis(Q):
    return [parse_poly("(c+c^*)/2", Q.sig), parse_poly("(c-c^*)/(2i)", Q.sig)]


def test_hull_trivial_point_inside():
    Q = preset("heisenberg")
    assert hull_project_membership([1.0, 0.0], _c_basis(Q), Q, 2).status == "inside_d"


def test_hull_outside_point():
    Q = preset("heisenberg")
    r = hull_project_membership([1.1, 0.0], _c_basis(Q), Q, 2)
    assert r.status == "outside" and r.witness is not None and r.value < 0


def test_hull_circle_scan():
    Q = preset("heisenberg")
    for j in range(12):
        th = 2 * math.pi * j / 12
        assert hull_project_membership([math.cos(th), math.sin(th)], _c_basis(Q), Q, 2).status == "inside_d"


def test_hull_input_errors():
    Q = preset("heisenberg")
    with pytest.raises(CertifyError):
        hull_project_membership([1.0], _c_basis(Q), Q, 2)
    with pytest.raises(CertifyError):
        hull_project_membership([1.0], [parse_poly("c", Q.sig)], Q, 2)
