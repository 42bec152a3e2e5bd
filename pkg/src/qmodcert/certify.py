"""SDP front-ends: membership certificates, norm upper bounds, Choi tests.

Every query builds a :class:`~qmodcert.gram.GramSystem` for a truncation of
the module, solves it with :func:`qmodcert.sdp.solve` and re-checks the
answer in exact coefficient arithmetic where possible.  Infeasibility at a
given degree is never turned into a statement about the full module.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import sdp
from .freealg import FreePoly, format_poly, is_hermitian
from .gram import GramSystem, coefficient_gap
from .qmodule import ModuleDescription, ModuleError, localizing_block, reduce_poly, truncate

CERT_RTOL = 1e-7
UCP_TOL = 1e-7


class CertifyError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


def _psd_clip(G: np.ndarray) -> np.ndarray:
    G = (G + G.conj().T) / 2
    w, V = np.linalg.eigh(G)
    return (V * np.clip(w, 0, None)) @ V.conj().T


# ---------------------------------------------------------------------------
# certificates


@dataclass
class GramCertificate:
    target: FreePoly
    d: int
    blocks: list  # (label, generator matrix or None, words, G)
    multipliers: list  # (element, value): element is hermitian, value real
    residual: float
    reducer: str | None = None
    system: object = field(default=None, repr=False, compare=False)
    elim: object = field(default=None, repr=False, compare=False)

    def reconstruct(self) -> FreePoly:
        sig = self.target.sig
        total = sig.zero()
        for label, gen, words, G in self.blocks:
            total = total + _gram_element(gen, words, G, sig, self.reducer)
        for elem, val in self.multipliers:
            total = total + elem * val
        return reduce_poly(total, self.reducer)

    def min_eig(self) -> float:
        return min((float(np.linalg.eigvalsh(G)[0]) for *_, G in self.blocks if G.size), default=0.0)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "target": format_poly(self.target),
            "residual": self.residual,
            "blocks": [
                {"label": label, "size": int(G.shape[0]), "rank": int(np.sum(np.linalg.eigvalsh(G) > 1e-9)),
                 "trace": float(np.trace(G).real)}
                for label, gen, words, G in self.blocks
            ],
        }


def _gram_element(gen, words, G, sig, reducer) -> FreePoly:
    from .qmodule import SCALAR, Generator

    g = gen if gen is not None else Generator(SCALAR, sig.one(), "1")
    B = localizing_block(g, words, reducer=reducer)
    total = sig.zero()
    for I, row in enumerate(B):
        for J, p in enumerate(row):
            if abs(G[I, J]) > 1e-15:
                total = total + p * complex(G[I, J])
    return total


def _certificate_from(sys_: GramSystem, elim, X, target: FreePoly, d: int) -> GramCertificate:
    nb = len(sys_.blocks)
    Xc = [_psd_clip(x) for x in X[:nb]] + list(X[nb:])
    f = sys_.free_values(elim, Xc)
    blocks = [(blk.label, blk.gen, blk.words, G) for blk, G in zip(sys_.blocks, Xc)]
    mults = [(col.element, float(v)) for col, v in zip(sys_.free_columns, f) if col.element is not None]
    cert = GramCertificate(target, d, blocks, mults, 0.0, sys_.reducer, sys_, elim)
    cert.residual = (cert.reconstruct() - sys_.reduce(target)).max_abs_coeff()
    return cert


def _threshold(p: FreePoly) -> float:
    return CERT_RTOL * (1 + p.max_abs_coeff())


@dataclass
class MemberResult:
    status: str  # "certificate" | "not_found"
    d: int
    eps: float
    certificate: GramCertificate | None
    sdp_status: str
    residuals: dict

    @property
    def found(self) -> bool:
        return self.status == "certificate"


def member_eps(a: FreePoly, Q: ModuleDescription, d: int, eps: float = 0.0, exact: bool = True,
               tol: float = sdp.DEFAULT_TOL, max_iter: int = sdp.DEFAULT_MAX_ITER) -> MemberResult:
    """Search for a degree-``d`` certificate of ``a + eps`` in ``Q``."""
    if not is_hermitian(a, 1e-10):
        raise CertifyError("target polynomial must be hermitian")
    if d < a.degree:
        raise CertifyError(f"truncation degree {d} is below deg(a) = {a.degree}")
    target = a + eps
    if Q.reduce(target).is_zero():
        return MemberResult("certificate", d, eps, GramCertificate(target, d, [], [], 0.0, Q.reducer), "trivial", {})
    plan = truncate(Q, d, exact)
    S = GramSystem(Q, exact)
    S.add_truncation(plan)
    S.set_target(target)
    P, elim = S.build()
    res = sdp.solve(P, tol, max_iter)
    out = dict(res.residuals, iterations=res.iterations)
    if res.status != sdp.OPTIMAL:
        return MemberResult("not_found", d, eps, None, res.status, out)
    cert = _certificate_from(S, elim, res.X, target, d)
    out["reconstruction"] = cert.residual
    if cert.residual > _threshold(target):
        return MemberResult("not_found", d, eps, None, res.status, out)
    return MemberResult("certificate", d, eps, cert, res.status, out)


# ---------------------------------------------------------------------------
# norm upper bounds


@dataclass
class NormUpperResult:
    value: float
    mode: str  # "square" (t - a*a) or "hermitian" (l -+ a)
    d: int
    status: str
    residuals: dict
    per_mode: dict = field(default_factory=dict)


def _check_archimedean(Q: ModuleDescription, override: bool):
    if not Q.is_archimedean and not override:
        raise CertifyError(f"module {Q.name!r} is not flagged archimedean; pass the override to proceed")


def _norm_square(a, Q, d, exact, tol, max_iter):
    plan = truncate(Q, d, exact)
    S = GramSystem(Q, exact)
    S.add_truncation(plan)
    S.add_scalar("t", {(0, (), 0, 0): -1.0}, objective=1.0)
    S.set_target(a.adj() * a, sign=-1.0)
    P, elim = S.build()
    res = sdp.solve(P, tol, max_iter)
    return res, elim


def _norm_hermitian(a, Q, d, exact, tol, max_iter):
    plan = truncate(Q, d, exact)
    S = GramSystem(Q, exact)
    S.add_truncation(plan, channel=0)
    S.add_truncation(plan, channel=1)
    S.add_scalar("l", {(0, (), 0, 0): -1.0, (1, (), 0, 0): -1.0}, objective=1.0)
    S.set_target(a, channel=0, sign=-1.0)
    S.set_target(a, channel=1, sign=1.0)
    P, elim = S.build()
    res = sdp.solve(P, tol, max_iter)
    return res, elim


def norm_upper(a: FreePoly, Q: ModuleDescription, d: int, mode: str = "auto", exact: bool = True,
               allow_non_archimedean: bool = False, tol: float = sdp.DEFAULT_TOL,
               max_iter: int = sdp.DEFAULT_MAX_ITER) -> NormUpperResult:
    """Upper bound for the Q-norm of ``a`` from the degree-``d`` truncation."""
    _check_archimedean(Q, allow_non_archimedean)
    herm = is_hermitian(a, 1e-10)
    modes = []
    if mode in ("auto", "square") and d >= 2 * a.degree:
        modes.append("square")
    if mode in ("auto", "hermitian") and herm and d >= a.degree:
        modes.append("hermitian")
    if mode == "hermitian" and not herm:
        raise CertifyError("hermitian mode needs a hermitian polynomial")
    if mode not in ("auto", "square", "hermitian"):
        raise CertifyError(f"unknown mode {mode!r}")
    if not modes:
        raise CertifyError(f"truncation degree {d} too small for deg(a) = {a.degree}")
    if Q.reduce(a).is_zero():
        return NormUpperResult(0.0, modes[0], d, sdp.OPTIMAL, {})
    per = {}
    for m in modes:
        fn = _norm_square if m == "square" else _norm_hermitian
        res, elim = fn(a, Q, d, exact, tol, max_iter)
        if res.status == sdp.OPTIMAL:
            # larger of primal and dual, rounded up by the residuals so that
            # solver inaccuracy does not push the bound below the true value
            v = max(res.primal_objective, res.dual_objective)
            r = res.residuals
            v += (r.get("primal", 0.0) + max(0.0, -r.get("min_eig", 0.0)) + abs(r.get("gap", 0.0))) * (1 + abs(v))
            val = math.sqrt(max(v, 0.0)) if m == "square" else max(v, 0.0)
        elif res.status == sdp.INFEASIBLE:
            val = math.inf
        else:
            val = math.nan
        per[m] = {"value": val, "status": res.status, "residuals": dict(res.residuals, iterations=res.iterations)}
    ok = {m: r for m, r in per.items() if r["status"] in (sdp.OPTIMAL, sdp.INFEASIBLE)}
    if not ok:
        m = modes[0]
        return NormUpperResult(math.nan, m, d, per[m]["status"], per[m]["residuals"], per)
    m = min(ok, key=lambda k: ok[k]["value"])
    return NormUpperResult(ok[m]["value"], m, d, ok[m]["status"], ok[m]["residuals"], per)


# ---------------------------------------------------------------------------
# extraction


@dataclass
class SquareTerm:
    label: str
    weight: float
    vector: tuple  # polynomials p_k; the term is sum_kl p_k* g_kl p_l
    block: int = 0


@dataclass
class Decomposition:
    squares: list
    multipliers: list
    residual: float
    text: str

    def __len__(self):
        return len(self.squares)


def _rank_reduce(cert: GramCertificate, max_rounds: int = 100) -> GramCertificate:
    """Move along null directions of the constraints until some eigenvalue hits zero."""
    S, elim = cert.system, cert.elim
    if S is None or not cert.blocks:
        return cert
    Gs = [G.copy() for *_, G in cert.blocks]
    A_all = elim.A_full
    proj = elim.proj
    real = not any(np.iscomplexobj(G) and np.abs(G.imag).max(initial=0) > 0 for G in Gs) and all(
        not np.iscomplexobj(A) for A in A_all[:len(Gs)])
    for _ in range(max_rounds):
        cols, meta = [], []
        for bi, G in enumerate(Gs):
            w, V = np.linalg.eigh(G)
            keep = w > 1e-9 * max(1.0, w[-1] if w.size else 0.0)
            V, w = V[:, keep], w[keep]
            r = V.shape[1]
            if r == 0:
                continue
            A = A_all[bi]
            if proj is not None:
                A = np.tensordot(proj, A, axes=(1, 0))
            VAV = np.einsum("ia,kij,jb->kab", V.conj(), A, V)
            for (i, j, kind) in _herm_basis(r, real):
                E = _basis_matrix(r, i, j, kind)
                cols.append(np.einsum("kab,ab->k", VAV.conj(), E).real)
                meta.append((bi, V, w, i, j, kind))
        if not cols:
            break
        M = np.array(cols).T
        _, s, Vt = np.linalg.svd(M, full_matrices=True)
        nullity = M.shape[1] - int(np.sum(s > 1e-9 * max(1.0, s[0] if s.size else 0.0)))
        if nullity <= 0:
            break
        delta = Vt[-1]
        dirs = {}
        for coef, (bi, V, w, i, j, kind) in zip(delta, meta):
            r = V.shape[1]
            D = dirs.setdefault(bi, (V, w, np.zeros((r, r), dtype=complex)))[2]
            D += coef * _basis_matrix(r, i, j, kind)
        # largest step keeping every block PSD
        tmax = np.inf
        for bi, (V, w, D) in dirs.items():
            s_ = 1 / np.sqrt(w)
            ev = np.linalg.eigvalsh((D * s_[:, None]) * s_[None, :])
            if ev[0] < 0:
                tmax = min(tmax, -1 / ev[0])
        sign = 1.0
        if not np.isfinite(tmax):
            sign, tmax = -1.0, np.inf
            for bi, (V, w, D) in dirs.items():
                s_ = 1 / np.sqrt(w)
                ev = np.linalg.eigvalsh((D * s_[:, None]) * s_[None, :])
                if ev[-1] > 0:
                    tmax = min(tmax, 1 / ev[-1])
        if not np.isfinite(tmax):
            break
        for bi, (V, w, D) in dirs.items():
            G = (V * w) @ V.conj().T + sign * tmax * V @ D @ V.conj().T
            Gs[bi] = _psd_clip(G.real if real else G)
    new = _certificate_from(S, elim, Gs + [np.zeros((1, 1))] * len(S.scalars), cert.target, cert.d)
    return new if new.residual <= max(cert.residual, _threshold(cert.target)) else cert


def _herm_basis(r: int, real: bool):
    for i in range(r):
        yield (i, i, "d")
    for i in range(r):
        for j in range(i + 1, r):
            yield (i, j, "s")
            if not real:
                yield (i, j, "a")


def _basis_matrix(r, i, j, kind):
    E = np.zeros((r, r), dtype=complex)
    if kind == "d":
        E[i, i] = 1
    elif kind == "s":
        E[i, j] = E[j, i] = 1
    else:
        E[i, j], E[j, i] = 1j, -1j
    return E


def extract_certificate(cert: GramCertificate, reduce_rank: bool = True, tol: float = 1e-6) -> Decomposition:
    """Explicit ``sum_j p_j* g p_j`` decomposition from the Gram blocks."""
    if reduce_rank:
        cert = _rank_reduce(cert)
    sig = cert.target.sig
    squares = []
    top = max((np.linalg.eigvalsh((G + G.conj().T) / 2)[-1] for _, _, _, G in cert.blocks if G.size), default=0.0)
    cut = 1e-8 * max(1.0, top)
    for bi, (label, gen, words, G) in enumerate(cert.blocks):
        w, V = np.linalg.eigh((G + G.conj().T) / 2)
        if w.size and w[0] < -1e-9 * max(1.0, abs(w[-1])):
            raise CertifyError(f"Gram block {label!r} is indefinite (min eigenvalue {w[0]:.3e})")
        s = 1 if gen is None else gen.size
        N = len(words)
        for lam, v in zip(w[::-1], V.T[::-1]):
            if lam <= cut:
                continue
            vec = []
            for k in range(s):
                p = sig.zero()
                for i, wd in enumerate(words):
                    c = np.conj(v[k * N + i])
                    if abs(c) > 1e-12:
                        p = p + sig.word(wd) * complex(c)
                vec.append(p)
            squares.append(SquareTerm(label, float(lam), tuple(vec), bi))
    recon = sig.zero()
    for t in squares:
        gen = cert.blocks[t.block][1]
        recon = recon + t.weight * _square_element(t.vector, gen, sig)
    for elem, val in cert.multipliers:
        recon = recon + elem * val
    recon = reduce_poly(recon, cert.reducer)
    resid = (recon - reduce_poly(cert.target, cert.reducer)).max_abs_coeff()
    if resid > tol * (1 + cert.target.max_abs_coeff()):
        raise CertifyError(f"decomposition does not reconstruct the target (residual {resid:.3e})")
    mults = [(e, v) for e, v in cert.multipliers if abs(v) > 1e-12]
    return Decomposition(squares, mults, resid, _decomposition_text(squares, mults, cert))


def _square_element(vec, gen, sig) -> FreePoly:
    if gen is None:
        p = vec[0]
        return p.adj() * p
    M = gen.matrix
    total = sig.zero()
    for k, pk in enumerate(vec):
        for l, pl in enumerate(vec):
            total = total + pk.adj() * M[k][l] * pl
    return total


def _decomposition_text(squares, mults, cert) -> str:
    parts = []
    for t in squares:
        if len(t.vector) == 1:
            p = format_poly(t.vector[0])
            core = f"({p})^*({p})" if t.label == "sos" else f"({p})^*[{t.label}]({p})"
        else:
            vec = ", ".join(format_poly(p) for p in t.vector)
            core = f"[{vec}]^*[{t.label}][{vec}]"
        parts.append(f"{t.weight:.6g} * {core}")
    for e, v in mults:
        parts.append(f"{v:.6g} * ({format_poly(e)})")
    return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# Choi tests


@dataclass
class UcpMapSpec:
    basis: list  # FreePoly spanning V (must contain 1 in its span, *-closed)
    images: list  # n x n complex matrices
    n: int = 0

    def __post_init__(self):
        self.images = [np.atleast_2d(np.asarray(M, dtype=complex)) for M in self.images]
        if len(self.images) != len(self.basis):
            raise CertifyError("need one image per basis element")
        if not self.basis:
            raise CertifyError("empty subspace")
        n = self.images[0].shape[0]
        if any(M.shape != (n, n) for M in self.images):
            raise CertifyError("images must be square matrices of a common size")
        if self.n and self.n != n:
            raise CertifyError("image size does not match n")
        self.n = n


@dataclass
class UcpResult:
    status: str  # "ucp_consistent" | "violated"
    value: float  # minimum of the normalized Choi functional over the truncated cone
    d: int
    witness: dict | None
    sdp_status: str
    residuals: dict


def _coeff_matrix(polys, words_index, reducer):
    rows = np.zeros((len(polys), len(words_index)), dtype=complex)
    for i, p in enumerate(polys):
        for w, c in reduce_poly(p, reducer).terms.items():
            rows[i, words_index[w]] += c
    return rows


def hermitian_basis(spec: UcpMapSpec, Q: ModuleDescription, exact: bool = True):
    """Real basis (h_b, rho(h_b)) of the hermitian part of V, with validation."""
    red = Q.reducer if exact else None
    basis = [reduce_poly(p, red) for p in spec.basis]
    adjs = [reduce_poly(p.adj(), red) for p in basis]
    one = Q.sig.one()
    words = sorted({w for p in basis + adjs + [one] for w in p.terms}, key=lambda w: (len(w), w))
    idx = {w: i for i, w in enumerate(words)}
    Bm = _coeff_matrix(basis, idx, None)  # rows = basis elements
    scale = 1 + np.abs(Bm).max()

    def coords(p):
        v = _coeff_matrix([p], idx, None)[0]
        x, *_ = np.linalg.lstsq(Bm.T, v, rcond=None)
        if np.abs(Bm.T @ x - v).max() > 1e-9 * scale:
            return None
        return x

    x1 = coords(one)
    if x1 is None:
        raise CertifyError("subspace does not contain 1")
    rho1 = sum(c * M for c, M in zip(x1, spec.images))
    if np.abs(rho1 - np.eye(spec.n)).max() > 1e-9:
        raise CertifyError("image of 1 is not the identity")
    cand, imgs = [], []
    for p, ps, M in zip(basis, adjs, spec.images):
        xs = coords(ps)
        if xs is None:
            raise CertifyError("subspace is not *-closed")
        Ms = sum(c * N for c, N in zip(xs, spec.images))
        if np.abs(Ms - M.conj().T).max() > 1e-9 * (1 + np.abs(M).max()):
            raise CertifyError("images do not respect the involution")
        cand.append((p + ps) * 0.5)
        imgs.append((M + M.conj().T) / 2)
        cand.append((p - ps) * (-0.5j))
        imgs.append((M - M.conj().T) / 2j)
    # real-linearly independent subset, keeping 1 first
    cand = [one] + cand
    imgs = [np.eye(spec.n, dtype=complex)] + imgs
    R = _coeff_matrix(cand, idx, None)
    R = np.concatenate([R.real, R.imag], axis=1)
    chosen, span = [], np.zeros((0, R.shape[1]))
    for i in range(len(cand)):
        trial = np.vstack([span, R[i]])
        if np.linalg.matrix_rank(trial, tol=1e-9) > span.shape[0]:
            span = trial
            chosen.append(i)
    return [cand[i] for i in chosen], [(imgs[i] + imgs[i].conj().T) / 2 for i in chosen]


def _herm_params(n: int):
    """Real basis of n x n Hermitian matrices as (label, matrix, is_imag)."""
    out = []
    for a in range(n):
        E = np.zeros((n, n), dtype=complex)
        E[a, a] = 1
        out.append((f"({a},{a})", E, False))
    for a in range(n):
        for b in range(a + 1, n):
            E = np.zeros((n, n), dtype=complex)
            E[a, b] = E[b, a] = 1
            out.append((f"({a},{b})", E, False))
            F = np.zeros((n, n), dtype=complex)
            F[a, b], F[b, a] = 1j, -1j
            out.append((f"({a},{b})", F, True))
    return out


def choi_value(images: Sequence[np.ndarray], H: Sequence[np.ndarray]) -> float:
    """c_rho(sum_b h_b (x) H_b) = sum_b sum_{ab} rho(h_b)_{ab} (H_b)_{ab}."""
    return float(sum(np.sum(R * Hb).real for R, Hb in zip(images, H)))


def ucp_check(spec: UcpMapSpec, Q: ModuleDescription, d: int, exact: bool = True, tol: float = UCP_TOL,
              sdp_tol: float = sdp.DEFAULT_TOL, max_iter: int = sdp.DEFAULT_MAX_ITER) -> UcpResult:
    """Minimize the Choi functional over the truncated cone intersected with V (x) M_n."""
    hs, rh = hermitian_basis(spec, Q, exact)
    n = spec.n
    plan = truncate(Q, d, exact)
    S = GramSystem(Q, exact)
    S.add_truncation(plan, n=n)
    for bi, (h, R) in enumerate(zip(hs, rh)):
        hr = S.reduce(h)
        for lab, E, imag in _herm_params(n):
            coeffs = {}
            for w, c in hr.terms.items():
                for a in range(n):
                    for b in range(n):
                        if E[a, b] != 0:
                            coeffs[(0, w, a, b)] = coeffs.get((0, w, a, b), 0) - c * E[a, b]
            norm = hr.coeff(()) * np.trace(E)
            if abs(norm) > 0:
                coeffs[("norm", (), 0, 0)] = norm
            obj = float(np.sum(R * E).real)
            S.add_free(("im " if imag else "re ") + f"H{bi}{lab}", coeffs, objective=obj, meta=(bi, E))
    S.target[("norm", (), 0, 0)] = 1.0
    P, elim = S.build()
    pmap = [col.meta for col in S.free_columns]

    def witness_from(f, X, gram_scale=1.0):
        H = [np.zeros((n, n), dtype=complex) for _ in hs]
        for val, pm in zip(f, pmap):
            if pm is not None:
                bi, E = pm
                H[bi] += val * E
        q = {}
        for bi, h in enumerate(hs):
            for w, c in S.reduce(h).terms.items():
                for a in range(n):
                    for b in range(n):
                        if abs(H[bi][a, b]) > 0:
                            q[(0, w, a, b)] = q.get((0, w, a, b), 0) + c * H[bi][a, b]
        # Gram part plus ideal multipliers only: this is the cone element itself
        f_cone = np.array([0.0 if pm is not None else v for v, pm in zip(f, pmap)])
        recon = S.reconstruct(X, f_cone) if X is not None else {}
        recon_q = {k: v for k, v in recon.items() if k[0] != "norm"}
        gap = coefficient_gap(recon_q, {k: v for k, v in q.items() if abs(v) > 1e-12}) if X is not None else 0.0
        return {
            "basis": [format_poly(h) for h in hs],
            "H": [M.tolist() for M in H],
            "choi_value": choi_value(rh, H),
            "normalization": float(sum(S.reduce(h).coeff(()).real * np.trace(M).real for h, M in zip(hs, H))),
            "cone_residual": float(gap),
        }

    if elim.unbounded:
        # a free direction (e.g. an element of V in the ideal) pairs nontrivially with rho
        return UcpResult("violated", -math.inf, d, {"reason": "functional does not vanish on the relations"},
                         "unbounded", {})
    res = sdp.solve(P, sdp_tol, max_iter)
    info = dict(res.residuals, iterations=res.iterations)
    if res.status == sdp.UNBOUNDED:
        f = S.free_values(elim, res.X, homogeneous=True)
        wit = witness_from(f, res.X)
        status = "violated" if wit["choi_value"] < 0 else "ucp_consistent"
        return UcpResult(status, -math.inf, d, wit, res.status, info)
    if res.status != sdp.OPTIMAL:
        raise NumericalFailure(f"SDP ended with status {res.status}: {res.message}")
    value = res.primal_objective + elim.offset
    if value < -tol:
        nb = len(S.blocks)
        X = [_psd_clip(x) for x in res.X[:nb]] + list(res.X[nb:])
        f = S.free_values(elim, X)
        wit = witness_from(f, X)
        return UcpResult("violated", value, d, wit, res.status, info)
    return UcpResult("ucp_consistent", value, d, None, res.status, info)


@dataclass
class HullResult:
    status: str  # "inside_d" | "outside"
    value: float
    d: int
    witness: dict | None
    residuals: dict


def hull_project_membership(x: Sequence[float], basis: Sequence[FreePoly], Q: ModuleDescription, d: int,
                            exact: bool = True, tol: float = UCP_TOL) -> HullResult:
    """Is the unital functional 1 -> 1, h_b -> x_b nonnegative on the degree-d cone restricted to V?"""
    x = np.asarray(x, dtype=float).reshape(-1)
    if len(x) != len(basis):
        raise CertifyError("x must have one entry per basis element")
    for h in basis:
        if not is_hermitian(h, 1e-10):
            raise CertifyError(f"basis element {format_poly(h)} is not hermitian")
    spec = UcpMapSpec([Q.sig.one()] + list(basis), [np.eye(1)] + [np.array([[v]]) for v in x], 1)
    r = ucp_check(spec, Q, d, exact=exact, tol=tol)
    status = "outside" if r.status == "violated" else "inside_d"
    return HullResult(status, r.value, d, r.witness, r.residuals)


def evaluation_spec(basis: Sequence[FreePoly], X) -> UcpMapSpec:
    """The map v -> v(X) restricted to span(basis)."""
    from .freealg import evaluate

    return UcpMapSpec(list(basis), [evaluate(p, X) for p in basis])


# ---------------------------------------------------------------------------
# brackets


@dataclass
class NormBracket:
    upper: float
    lower: float
    d: int
    n: int
    mode: str = ""
    point: object = None

    @property
    def width(self) -> float:
        return self.upper - self.lower


def norm_bracket(a: FreePoly, Q: ModuleDescription, d: int, n: int, config=None, **kw) -> NormBracket:
    from .repsearch import SearchConfig, search_lower

    up = norm_upper(a, Q, d, **kw)
    cfg = config or SearchConfig(n=n)
    low, X = search_lower(a, Q, cfg)
    return NormBracket(up.value, low, d, cfg.n, up.mode, X)
