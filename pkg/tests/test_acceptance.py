"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from qmodcert import evaluate, member_eps, norm_upper, parse_poly, preset
from qmodcert.certify import UcpMapSpec, hull_project_membership, ucp_check
from qmodcert.freealg import hermitian_part, random_poly
from qmodcert.heisenberg import (
    butterfly,
    harper_min,
    harper_norm,
    projection,
    relation_residual,
    root_rep,
    roots_hull,
    slope_mismatch,
)
from qmodcert.qmodule import IDEAL, ball_module
from qmodcert.repsearch import SearchConfig, sample_feasible, search, unitary_dilate
from qmodcert.sdp import INFEASIBLE, OPTIMAL, block_problem, solve, verify_infeasibility

from oracles import convex_hull_vertices, oracle_status, random_block_instance


@pytest.fixture
def report(capsys):
    def _report(num, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {num:>2} {'PASS' if ok else 'FAIL'}: {detail}")
        return ok

    return _report


def test_01_single_unitary_bracket(report):
    Q = preset("free_group:1")
    a = parse_poly("z+z^*", Q.sig)
    t0 = time.perf_counter()
    up = norm_upper(a, Q, 2).value
    low = search(a, Q, SearchConfig(n=1, restarts=8)).value
    dt = time.perf_counter() - t0
    ok = 2 <= up <= 2 + 1e-5 and 2 - 1e-6 <= low <= 2 and dt < 1.0
    report(1, ok, f"upper={up:.12g} lower={low:.15g} time={dt:.2f}s")
    assert ok


def test_02_free_group_two_generators(report):
    Q = preset("free_group:2")
    a = parse_poly("z1+z1^*+z2+z2^*", Q.sig)
    up = norm_upper(a, Q, 2).value
    low = search(a, Q, SearchConfig(n=1)).value
    ok = up <= 4 + 1e-4 and low >= 4 - 1e-6 and up - low <= 2e-4
    report(2, ok, f"upper={up:.12g} lower={low:.15g} width={up - low:.3e}")
    assert ok


def test_03_ball_norm(report):
    Q = preset("ball:1")
    a = parse_poly("z", Q.sig)
    up = norm_upper(a, Q, 2).value
    low = search(a, Q, SearchConfig(n=2)).value
    ok = up - low <= 1e-4
    report(3, ok, f"upper={up:.12g} lower={low:.15g} width={up - low:.3e}")
    assert ok


def _member_candidate(Q, rng, k):
    """Alternate random hermitian polynomials with shifted elements of Q."""
    sig = Q.sig
    if k % 2 == 0:
        return hermitian_part(random_poly(sig, 2, rng)) + sig.const(rng.uniform(0, 6))
    a = sig.zero()
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
    return hermitian_part(a) - sig.const(rng.uniform(0, 0.3))


def test_04_membership_soundness(report):
    rng = np.random.default_rng(4)
    names = ["ball:1", "ball:2", "cube:2", "free_group:1", "pencil_ball:2", "ball_herm:2", "isometry:2"]
    found, tried, worst = 0, 0, math.inf
    while found < 50 and tried < 1000:
        Q = preset(names[tried % len(names)])
        a = _member_candidate(Q, rng, tried // len(names))
        tried += 1
        r = member_eps(a, Q, 2)
        if r.status != "certificate":
            continue
        found += 1
        for _ in range(100):
            X = sample_feasible(Q, int(rng.integers(1, 5)), rng)
            M = evaluate(a, X)
            worst = min(worst, float(np.linalg.eigvalsh((M + M.conj().T) / 2)[0]))
    ok = found == 50 and worst >= -1e-6
    report(4, ok, f"certified={found} (of {tried} tried) min eigenvalue over 5000 evaluations={worst:.3e}")
    assert ok


def test_05_sdp_oracle_agreement(report):
    rng = np.random.default_rng(5)
    agree, undecided, mism = 0, 0, []
    for i in range(50):
        sizes, rows, b = random_block_instance(rng, feasible=(i % 2 == 0))
        oracle = oracle_status(sizes, rows, b, rng)
        res = solve(block_problem(sizes, rows, b))
        ours = {OPTIMAL: "feasible", INFEASIBLE: "infeasible"}.get(res.status, res.status)
        if res.status == INFEASIBLE:
            by, lam = verify_infeasibility(block_problem(sizes, rows, b), res.certificate)
            if not (by > 0 and lam <= 1e-9):
                ours = "bad_certificate"
        undecided += oracle == "undecided"
        if ours == oracle:
            agree += 1
        else:
            mism.append((i, oracle, ours))
    ok = agree == 50
    report(5, ok, f"agreement {agree}/50, oracle undecided {undecided}, mismatches {mism}")
    assert ok


def test_06_harper_values(report):
    v01 = harper_norm(0, 1)
    v12 = harper_norm(1, 2, grid=64)
    sym = 0.0
    for q in range(1, 13):
        for p in range(q):
            if math.gcd(p, q) == 1:
                sym = max(sym, abs(harper_norm(p, q, 16) + harper_min(p, q, 16)))
    ok = v01 == 4.0 and abs(v12 - 2 * math.sqrt(2)) <= 1e-3 and sym <= 1e-6
    report(6, ok, f"norm(0/1)={v01!r} norm(1/2)={v12:.10f} max|max+min|={sym:.2e}")
    assert ok


def test_07_butterfly_boundary(report):
    t0 = time.perf_counter()
    recs = butterfly(12, 64)
    left, right = slope_mismatch(1, 2, 157)
    dt = time.perf_counter() - t0
    vals = np.array([r.norm_plus for r in recs])
    lo_ok = bool(np.all(vals >= 2 * math.sqrt(2) - 1e-2)) and bool(np.all(vals <= 4))
    at4 = sorted(r.theta for r in recs if r.norm_plus >= 4 - 1e-9)
    four_ok = len(at4) == 2 and at4[0] == 0 and abs(at4[1] - 2 * math.pi) < 1e-12
    slope_ok = abs(left - right) > 0.1
    ok = lo_ok and four_ok and slope_ok and dt < 60
    low = min(recs, key=lambda r: r.norm_plus)
    report(7, ok, f"range [{vals.min():.6f}, {vals.max():.6f}] (min at {low.p}/{low.q}; required >= "
                  f"{2 * math.sqrt(2) - 1e-2:.6f}), value 4 at {len(at4)} angles, slopes {left:.4f}/{right:.4f}, "
                  f"time={dt:.1f}s")
    assert lo_ok, "boundary values below 2*sqrt(2)-1e-2"
    assert four_ok and slope_ok and dt < 60


def test_08_unitary_dilation(report):
    rng = np.random.default_rng(8)
    worst_u, exact = 0.0, True
    for _ in range(1000):
        s = int(rng.integers(1, 7))
        T = rng.normal(size=(s, s)) + 1j * rng.normal(size=(s, s))
        T /= np.linalg.norm(T, 2) * (1.0 if rng.random() < 0.2 else rng.uniform(1.0, 3.0))
        U = unitary_dilate(T)
        worst_u = max(worst_u, float(np.linalg.norm(U.conj().T @ U - np.eye(2 * s), 2)))
        exact &= bool(np.array_equal(U[:s, :s], T))
    ok = worst_u <= 1e-10 and exact
    report(8, ok, f"max ||U*U-I||={worst_u:.2e} exact block recovery={exact}")
    assert ok


def test_09_roots_of_unity(report):
    rel, proj = 0.0, 0.0
    for n in range(1, 13):
        for k in range(n):
            X = root_rep(n, k)
            rel = max(rel, relation_residual(X))
            x, y = projection(X)
            proj = max(proj, abs(x - math.cos(2 * math.pi * k / n)), abs(y - math.sin(2 * math.pi * k / n)))
    pts = roots_hull(6)
    nv = convex_hull_vertices(pts)
    ok = rel <= 1e-12 and proj <= 1e-12 and nv == 12 and len(pts) == 12
    report(9, ok, f"relation residual={rel:.1e} projection error={proj:.1e} hull vertices={nv}")
    assert ok


def test_10_ucp_boundary(report):
    Q = ball_module(1)
    basis = [Q.sig.one(), Q.sig.var(0), Q.sig.var_star(0)]
    status = {}
    for t in (0.0, 0.999, 1.001):
        r = ucp_check(UcpMapSpec(basis, [np.eye(1), np.array([[t]]), np.array([[t]])]), Q, 2)
        status[t] = (r.status, r.value)
    ok = (status[0.0][0] == "ucp_consistent" and status[0.999][0] == "ucp_consistent"
          and status[1.001][0] == "violated")
    report(10, ok, ", ".join(f"t={t}: {s} ({v:.2e})" for t, (s, v) in status.items()))
    assert ok


def test_11_heisenberg_hull(report):
    Q = preset("heisenberg")
    basis = [parse_poly("(c+c^*)/2", Q.sig), parse_poly("(c-c^*)/(2i)", Q.sig)]
    inside = 0
    for j in range(64):
        th = 2 * math.pi * j / 64
        r = hull_project_membership([math.cos(th), math.sin(th)], basis, Q, 4)
        inside += r.status == "inside_d"
    out = hull_project_membership([1.1, 0.0], basis, Q, 4)
    ok = inside == 64 and out.status == "outside" and out.witness is not None
    report(11, ok, f"circle points inside_d: {inside}/64; (1.1, 0): {out.status} value={out.value:.3e}")
    assert ok
