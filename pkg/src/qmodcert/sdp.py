"""Dense primal-dual interior point solver for small block-diagonal SDPs.

Standard form::

    minimize    <C, X>
    subject to  <A_k, X> = b_k,   k = 1..m
                X = diag(X_1, ..., X_p) >= 0

with Hermitian blocks.  Complex data is embedded into real symmetric blocks
of twice the size; the solver proper works on real symmetric matrices.  The
iteration runs on the homogeneous self-dual embedding, so infeasible and
unbounded problems end with a ray certificate instead of stalling.  Scaling
is Nesterov-Todd, directions use Mehrotra's predictor-corrector.

Status ``optimal`` is only reported once the original (unscaled) data meet
``max_k |<A_k, X> - b_k| <= tol (1 + max|b|)``, ``lambda_min(C - A^T y) >= -tol (1 + max|C|)``,
``lambda_min(X) >= -tol`` and a relative duality gap of at most ``tol``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
MAX_ITER = "max_iter"

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 200
RANK_TOL = 1e-10
MIN_MARGIN = 1e-8


class SdpError(ValueError):
    pass


def _herm(M):
    return (M + M.conj().T) / 2


@dataclass
class SdpProblem:
    """``A[b]`` has shape (m, n_b, n_b); ``C`` is None for pure feasibility."""

    blocks: tuple
    A: list
    b: np.ndarray
    C: list | None = None

    def __post_init__(self):
        self.blocks = tuple(int(n) for n in self.blocks)
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        m = self.b.shape[0]
        A = []
        for n, Ab in zip(self.blocks, self.A, strict=True):
            Ab = np.asarray(Ab)
            if Ab.size == 0:
                Ab = np.zeros((m, n, n))
            if Ab.shape != (m, n, n):
                raise SdpError(f"constraint block has shape {Ab.shape}, expected {(m, n, n)}")
            A.append(Ab)
        self.A = A
        if self.C is not None:
            self.C = [np.asarray(Cb) for Cb in self.C]
            for n, Cb in zip(self.blocks, self.C, strict=True):
                if Cb.shape != (n, n):
                    raise SdpError("objective block has wrong shape")

    @property
    def m(self) -> int:
        return self.b.shape[0]

    @property
    def is_real(self) -> bool:
        mats = list(self.A) + list(self.C or [])
        return all(not np.iscomplexobj(M) or np.abs(M.imag).max(initial=0.0) == 0.0 for M in mats)

    def check_hermitian(self, tol: float = 1e-10):
        for Ab in self.A:
            if Ab.size and np.abs(Ab - Ab.conj().transpose(0, 2, 1)).max() > tol * (1 + np.abs(Ab).max()):
                raise SdpError("constraint matrices are not Hermitian")
        for Cb in self.C or []:
            if Cb.size and np.abs(Cb - Cb.conj().T).max() > tol * (1 + np.abs(Cb).max()):
                raise SdpError("objective matrix is not Hermitian")

    def objective(self, X) -> float:
        if self.C is None:
            return 0.0
        return float(sum(np.vdot(Cb, Xb).real for Cb, Xb in zip(self.C, X)))

    def apply(self, X) -> np.ndarray:
        """Vector of <A_k, X>."""
        out = np.zeros(self.m)
        for Ab, Xb in zip(self.A, X):
            out += np.einsum("kij,ij->k", Ab.conj(), Xb).real
        return out

    def adjoint(self, y) -> list:
        return [np.einsum("k,kij->ij", y, Ab) for Ab in self.A]


@dataclass
class SdpResult:
    status: str
    X: list
    y: np.ndarray
    Z: list
    primal_objective: float
    dual_objective: float
    residuals: dict
    iterations: int
    certificate: np.ndarray | None = None
    margin: float = 0.0
    message: str = ""
    info: dict = field(default_factory=dict)

    @property
    def objective(self) -> float:
        return self.primal_objective

    @property
    def G(self) -> list:
        return self.X


# ---------------------------------------------------------------------------
# real embedding


def realify(P: SdpProblem) -> SdpProblem:
    """Embed Hermitian blocks as real symmetric [[Re, -Im], [Im, Re]].

    Inner products double: <A~, X~> = 2 <A, X>, so the right-hand side is
    doubled and the objective of the embedded problem is twice the original.
    """
    P.check_hermitian()

    def emb(M):
        R, I = M.real, M.imag
        return np.block([[R, -I], [I, R]])

    A = []
    for Ab in P.A:
        R, I = Ab.real, Ab.imag
        top = np.concatenate([R, -I], axis=2)
        bot = np.concatenate([I, R], axis=2)
        A.append(np.concatenate([top, bot], axis=1))
    C = None if P.C is None else [emb(Cb) for Cb in P.C]
    return SdpProblem(tuple(2 * n for n in P.blocks), A, 2 * P.b, C)


def embed_matrix(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    return np.block([[M.real, -M.imag], [M.imag, M.real]])


def unembed_matrix(X: np.ndarray) -> np.ndarray:
    """Hermitian matrix whose embedding is the symmetric part of X in the right subspace."""
    n = X.shape[0] // 2
    P1, Q, R, P2 = X[:n, :n], X[:n, n:], X[n:, :n], X[n:, n:]
    return _herm((P1 + P2) / 2 + 1j * (R - Q) / 2)


# ---------------------------------------------------------------------------
# preprocessing


@dataclass
class _Prep:
    keep: np.ndarray
    row_scale: np.ndarray
    infeasible_y: np.ndarray | None = None
    margin: float = 0.0


def _row_matrix(P: SdpProblem) -> np.ndarray:
    cols = []
    for Ab in P.A:
        flat = Ab.reshape(P.m, -1)
        cols.append(flat.real)
        if np.iscomplexobj(flat):
            cols.append(flat.imag)
    if not cols:
        return np.zeros((P.m, 0))
    return np.concatenate(cols, axis=1)


def _preprocess(P: SdpProblem, tol: float) -> _Prep:
    m = P.m
    R = _row_matrix(P)
    norms = np.linalg.norm(R, axis=1)
    zero = norms <= RANK_TOL
    bscale = 1 + np.abs(P.b).max(initial=0.0)
    bad = np.flatnonzero(zero & (np.abs(P.b) > tol * bscale))
    if bad.size:
        k = bad[np.argmax(np.abs(P.b[bad]))]
        y = np.zeros(m)
        y[k] = np.sign(P.b[k])
        return _Prep(np.zeros(0, int), np.ones(m), y, float(abs(P.b[k])))
    live = np.flatnonzero(~zero)
    scale = np.ones(m)
    scale[live] = 1 / norms[live]
    if live.size == 0:
        return _Prep(live, scale)
    Rs = R[live] * scale[live, None]
    _, T, piv = sla.qr(Rs.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(T))
    r = int(np.sum(diag > RANK_TOL * max(diag[0], 1.0))) if diag.size else 0
    keep = np.sort(live[piv[:r]])
    dep = np.setdiff1d(live, keep)
    if dep.size:
        # dependent rows must be consistent with the kept ones
        Bk = Rs[np.searchsorted(live, keep)]
        bk = P.b[keep] * scale[keep]
        coef, *_ = np.linalg.lstsq(Bk.T, (R[dep] * scale[dep, None]).T, rcond=None)
        mismatch = P.b[dep] * scale[dep] - coef.T @ bk
        j = int(np.argmax(np.abs(mismatch)))
        if abs(mismatch[j]) > 1e-8 * (1 + np.abs(bk).max(initial=0.0)):
            y = np.zeros(m)
            s = np.sign(mismatch[j])
            y[dep[j]] = s * scale[dep[j]]
            y[keep] -= s * coef[:, j] * scale[keep]
            return _Prep(keep, scale, y, float(abs(mismatch[j])))
    return _Prep(keep, scale)


# ---------------------------------------------------------------------------
# interior point core (real symmetric blocks)


class _Singular(Exception):
    pass


def _inner(U, V) -> float:
    return float(sum(np.sum(u * v) for u, v in zip(U, V)))


def _nt_scaling(X, Z):
    out = []
    for Xb, Zb in zip(X, Z):
        L = np.linalg.cholesky(Xb)
        R = np.linalg.cholesky(Zb)
        U, d, Vt = np.linalg.svd(R.T @ L)
        G = L @ Vt.T / np.sqrt(d)
        out.append((G, G @ G.T, d))
    return out


def _max_step(lam, dS) -> float:
    s = 1 / np.sqrt(lam)
    ev = np.linalg.eigvalsh((dS * s[:, None]) * s[None, :])
    return np.inf if ev[0] >= 0 else -1 / ev[0]


def _ipm(A, b, C, tol, max_iter):
    m = b.shape[0]
    sizes = [Cb.shape[0] for Cb in C]
    N = sum(sizes)
    X = [np.eye(n) for n in sizes]
    Z = [np.eye(n) for n in sizes]
    y = np.zeros(m)
    tau = kappa = 1.0

    def Aop(U):
        out = np.zeros(m)
        for Ab, Ub in zip(A, U):
            out += np.tensordot(Ab, Ub, axes=([1, 2], [0, 1]))
        return out

    def ATop(v):
        return [np.tensordot(v, Ab, axes=(0, 0)) for Ab in A]

    nb = np.linalg.norm(b)
    nc = np.sqrt(_inner(C, C))
    best = None
    status = MAX_ITER
    it = 0
    for it in range(1, max_iter + 1):
        AX = Aop(X)
        ATy = ATop(y)
        rp = b * tau - AX
        rd = [Cb * tau - a - zb for Cb, a, zb in zip(C, ATy, Z)]
        cx, by = _inner(C, X), float(b @ y)
        rg = kappa + cx - by
        mu = (_inner(X, Z) + tau * kappa) / (N + 1)

        pres = np.linalg.norm(rp) / tau / (1 + nb)
        dres = np.sqrt(_inner(rd, rd)) / tau / (1 + nc)
        gap = abs(cx - by) / tau / (1 + abs(cx / tau) + abs(by / tau))
        res = {"primal": pres, "dual": dres, "gap": gap}
        score = max(pres, dres, gap)
        if best is None or score < best[0]:
            best = (score, [x / tau for x in X], y / tau, [z / tau for z in Z], res)
        if m > 0 and max(pres, dres, gap) <= tol or m == 0 and max(dres, gap) <= tol:
            status = OPTIMAL
            break
        if by > 0:
            ray = np.sqrt(sum(np.sum((a + zb) ** 2) for a, zb in zip(ATy, Z)))
            if ray / by <= tol:
                status = INFEASIBLE
                break
        if cx < 0:
            if np.linalg.norm(AX) / -cx <= tol:
                status = UNBOUNDED
                break
        if mu < 1e-18 and tau < 1e-12 * max(1.0, kappa):
            break

        try:
            scal = _nt_scaling(X, Z)
        except np.linalg.LinAlgError:
            break
        WCW = [W @ Cb @ W for (G, W, d), Cb in zip(scal, C)]
        Mmat = np.zeros((m, m))
        for (G, W, d), Ab in zip(scal, A):
            WAW = np.einsum("ij,kjl,lm->kim", W, Ab, W, optimize=True)
            Mmat += np.tensordot(Ab, WAW, axes=([1, 2], [1, 2]))
        h = Aop(WCW)
        cw = _inner(C, WCW)
        Wrd = [W @ r @ W for (G, W, d), r in zip(scal, rd)]
        try:
            cf = sla.cho_factor(Mmat + 1e-14 * np.trace(Mmat) / max(m, 1) * np.eye(m), check_finite=False) if m else None
        except (np.linalg.LinAlgError, sla.LinAlgError):
            raise _Singular("Schur complement is not positive definite") from None

        def msolve(v):
            return sla.cho_solve(cf, v, check_finite=False) if m else v

        u = msolve(h + b)

        def direction(sigma, eta, corr, corr_tau):
            Rs = [sigma * mu * np.eye(len(d)) - np.diag(d * d) - cr for (G, W, d), cr in zip(scal, corr)]
            Delta = [2 * R / (d[:, None] + d[None, :]) for (G, W, d), R in zip(scal, Rs)]
            GDG = [G @ D @ G.T for (G, W, d), D in zip(scal, Delta)]
            r_tau = sigma * mu - tau * kappa - corr_tau
            r1 = eta * rp - Aop(GDG) + eta * Aop(Wrd)
            r2 = -eta * rg - r_tau / tau - _inner(C, GDG) + eta * _inner(WCW, rd)
            v = msolve(r1)
            denom = (h - b) @ u - cw - kappa / tau
            dtau = (r2 - (h - b) @ v) / denom
            dy = v + u * dtau
            ATdy = ATop(dy)
            dZ = [eta * r + Cb * dtau - a for r, Cb, a in zip(rd, C, ATdy)]
            dX = [gd - W @ z @ W for gd, (G, W, d), z in zip(GDG, scal, dZ)]
            dkappa = (r_tau - kappa * dtau) / tau
            sZ = [G.T @ z @ G for (G, W, d), z in zip(scal, dZ)]
            sX = [D - z for D, z in zip(Delta, sZ)]
            return dX, dy, dZ, dtau, dkappa, sX, sZ

        def step_length(sX, sZ, dtau, dkappa):
            a = np.inf
            for (G, W, d), x, z in zip(scal, sX, sZ):
                a = min(a, _max_step(d, _herm(x)), _max_step(d, _herm(z)))
            if dtau < 0:
                a = min(a, -tau / dtau)
            if dkappa < 0:
                a = min(a, -kappa / dkappa)
            return a

        zero_corr = [np.zeros((n, n)) for n in sizes]
        dXa, dya, dZa, dta, dka, sXa, sZa = direction(0.0, 1.0, zero_corr, 0.0)
        aa = min(1.0, step_length(sXa, sZa, dta, dka))
        mu_aff = (_inner([x + aa * dx for x, dx in zip(X, dXa)], [z + aa * dz for z, dz in zip(Z, dZa)])
                  + (tau + aa * dta) * (kappa + aa * dka)) / (N + 1)
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3
        corr = [(x @ z + z @ x) / 2 for x, z in zip(sXa, sZa)]
        dX, dy, dZ, dt, dk, sX, sZ = direction(sigma, 1 - sigma, corr, dta * dka)
        alpha = min(1.0, 0.99 * step_length(sX, sZ, dt, dk))
        X = [_sym(x + alpha * dx) for x, dx in zip(X, dX)]
        Z = [_sym(z + alpha * dz) for z, dz in zip(Z, dZ)]
        y = y + alpha * dy
        tau += alpha * dt
        kappa += alpha * dk
        # keep the homogeneous scale bounded
        s = max(tau, kappa, 1.0)
        if s > 1e8:
            X = [x / s for x in X]
            Z = [z / s for z in Z]
            y, tau, kappa = y / s, tau / s, kappa / s
    return status, X, y, Z, tau, kappa, it, best


def _sym(M):
    return (M + M.T) / 2


def _alternating_projections(A, b, sizes, tol, iters=5000):
    """Feasibility by alternating projection onto {A(X) = b} and the PSD cone."""
    m = b.shape[0]
    rows = np.concatenate([Ab.reshape(m, -1) for Ab in A], axis=1)
    pinv = np.linalg.pinv(rows)
    offsets = np.cumsum([0] + [n * n for n in sizes])
    x = pinv @ b
    for _ in range(iters):
        Xs = [x[offsets[i]:offsets[i + 1]].reshape(n, n) for i, n in enumerate(sizes)]
        P = []
        for Xb in Xs:
            w, V = np.linalg.eigh(_sym(Xb))
            P.append((V * np.clip(w, 0, None)) @ V.T)
        p = np.concatenate([Pb.reshape(-1) for Pb in P])
        x = p - pinv @ (rows @ p - b)
        if np.linalg.norm(rows @ p - b) <= tol * (1 + np.linalg.norm(b)):
            return True, P
    return False, P


# ---------------------------------------------------------------------------
# driver


def solve(P: SdpProblem, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> SdpResult:
    """Solve ``P``; see module docstring for the problem form."""
    P.check_hermitian()
    complex_data = not P.is_real
    Q = realify(P) if complex_data else SdpProblem(
        P.blocks, [Ab.real.astype(float) for Ab in P.A], P.b,
        None if P.C is None else [Cb.real.astype(float) for Cb in P.C])
    sizes = list(Q.blocks)
    m = P.m

    prep = _preprocess(Q, tol)
    if prep.infeasible_y is not None:
        y = prep.infeasible_y
        yn = y / max(np.linalg.norm(y), 1e-300)
        return _finish(P, INFEASIBLE, None, np.zeros(m), None, 0, complex_data,
                       certificate=yn, margin=float(P.b @ yn),
                       message="inconsistent linear constraints")
    keep, rs = prep.keep, prep.row_scale
    A = [Ab[keep] * rs[keep, None, None] for Ab in Q.A]
    b = Q.b[keep] * rs[keep]
    C = Q.C if Q.C is not None else [np.zeros((n, n)) for n in sizes]

    bs = max(1.0, np.abs(b).max(initial=0.0))
    cs = max(1.0, max((np.abs(Cb).max(initial=0.0) for Cb in C), default=0.0))
    b_s, C_s = b / bs, [Cb / cs for Cb in C]

    # the interior point loop works on scaled data; tighten its tolerance until
    # the residuals of the original problem meet ``tol``
    inner_tol, total_it = tol, 0
    while True:
        try:
            status, X, y, Z, tau, kappa, it, best = _ipm(A, b_s, C_s, inner_tol, max_iter - total_it)
        except _Singular as e:
            ok, Xp = _alternating_projections(A, b_s, sizes, tol)
            Xr = [x * bs for x in Xp]
            return _finish(P, OPTIMAL if ok and Q.C is None else MAX_ITER, Xr, np.zeros(m), None, 0,
                           complex_data, message=f"{e}; used alternating projections")
        total_it += it
        if status != OPTIMAL:
            break
        trial = _unscale(P, X, y, Z, tau, bs, cs, keep, rs, complex_data, total_it)
        if _acceptable(P, trial, tol):
            return trial
        if inner_tol <= 1e-13 or total_it >= max_iter:
            status = MAX_ITER
            best = (0.0, [x / tau for x in X], y / tau, [z / tau for z in Z], {})
            break
        inner_tol /= 10
    it = total_it

    y_full = np.zeros(m)
    if status == INFEASIBLE:
        y_full[keep] = y * rs[keep]
        cert = y_full / np.linalg.norm(y_full)
        margin = float(P.b @ cert)
        if margin < MIN_MARGIN:
            status = MAX_ITER
        else:
            return _finish(P, INFEASIBLE, None, np.zeros(m), None, it, complex_data,
                           certificate=cert, margin=margin, message="dual improving ray")
    if status == UNBOUNDED:
        Xr = [x / max(abs(_inner(C_s, X)), 1e-300) for x in X]
        return _finish(P, UNBOUNDED, Xr, np.zeros(m), None, it, complex_data,
                       margin=1.0, message="primal improving ray (objective unbounded below)")
    if status == MAX_ITER:
        _, Xb, yb, Zb, _ = best
        X, y, Z = Xb, yb, Zb
        tau = 1.0
    res = _unscale(P, X, y, Z, tau, bs, cs, keep, rs, complex_data, it)
    res.status = status
    return res


def _unscale(P, X, y, Z, tau, bs, cs, keep, rs, complex_data, it):
    y_full = np.zeros(P.m)
    Xr = [x / tau * bs for x in X]
    Zr = [z / tau * cs for z in Z]
    y_full[keep] = (y / tau) * cs * rs[keep]
    return _finish(P, OPTIMAL, Xr, y_full, Zr, it, complex_data)


def _acceptable(P: SdpProblem, r: SdpResult, tol: float) -> bool:
    """Optimality test on the original data: primal residual within tol (1 + |b|),
    dual cone violation within tol (1 + |C|), relative gap within tol."""
    res = r.residuals
    bn = 1 + np.abs(P.b).max(initial=0.0)
    cn = 1 + max((np.abs(Cb).max(initial=0.0) for Cb in P.C or []), default=0.0)
    return (res["primal"] <= tol * bn and res["dual_min_eig"] >= -tol * cn and res["min_eig"] >= -tol
            and abs(res["gap"]) <= tol * (1 + abs(r.primal_objective) + abs(r.dual_objective)))


def _finish(P, status, Xr, y, Zr, it, complex_data, certificate=None, margin=0.0, message=""):
    sizes = P.blocks
    if Xr is None:
        X = [np.zeros((n, n), dtype=complex if complex_data else float) for n in sizes]
    elif complex_data:
        X = [unembed_matrix(x) for x in Xr]
    else:
        X = [_sym(x) for x in Xr]
    if Zr is None:
        Z = [np.zeros_like(x) for x in X]
    elif complex_data:
        Z = [unembed_matrix(z) for z in Zr]
    else:
        Z = [_sym(z) for z in Zr]
    # dual variables of the complex problem: <A, X> = b  <->  <A~, X~> = 2b with the same y
    res = residuals(P, X, y)
    pobj = P.objective(X)
    dobj = float(P.b @ y)
    return SdpResult(status, X, y, Z, pobj, dobj, res, it, certificate, margin, message)


def residuals(P: SdpProblem, X, y) -> dict:
    """Absolute primal/dual/gap residuals and the smallest eigenvalue of X."""
    r = P.apply(X) - P.b
    pres = float(np.abs(r).max(initial=0.0))
    if P.C is not None:
        S = [Cb - a for Cb, a in zip(P.C, P.adjoint(y))]
        dmin = min((float(np.linalg.eigvalsh(_herm(s))[0]) for s in S if s.size), default=0.0)
        gap = P.objective(X) - float(P.b @ y)
    else:
        dmin, gap = 0.0, 0.0
    xmin = min((float(np.linalg.eigvalsh(_herm(x))[0]) for x in X if x.size), default=0.0)
    return {"primal": pres, "dual_min_eig": dmin, "gap": gap, "min_eig": xmin}


def verify_infeasibility(P: SdpProblem, y: np.ndarray) -> tuple:
    """(b^T y, largest eigenvalue of A^T y): a valid ray has the first positive, the second <= 0."""
    S = P.adjoint(y)
    lam = max((float(np.linalg.eigvalsh(_herm(s))[-1]) for s in S if s.size), default=0.0)
    return float(P.b @ y), lam


# ---------------------------------------------------------------------------
# SDPA sparse format
#
# The file stores  max <F0, Y>  s.t.  <F_i, Y> = c_i,  Y >= 0  (SDPA dual form),
# which is our problem with F0 = -C, F_i = A_i, c = b.  Complex problems are
# written after the real embedding.  Lines:
#   m / number of blocks / block sizes / c_1 .. c_m /
#   then "i block row col value" triples (1-based, upper triangle, i = 0 for F0).


def dump_sdpa(P: SdpProblem, path_or_file) -> None:
    Q = P if P.is_real else realify(P)
    lines = [str(Q.m), str(len(Q.blocks)), " ".join(str(n) for n in Q.blocks),
             " ".join(repr(float(v)) for v in Q.b)]

    def emit(i, blk, M):
        M = np.real(M)
        for r, c in zip(*np.nonzero(np.triu(M))):
            lines.append(f"{i} {blk + 1} {r + 1} {c + 1} {float(M[r, c])!r}")

    if Q.C is not None:
        for blk, Cb in enumerate(Q.C):
            emit(0, blk, -Cb)
    for blk, Ab in enumerate(Q.A):
        for k in range(Q.m):
            emit(k + 1, blk, Ab[k])
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as fh:
            fh.write(text)


def load_sdpa(path_or_file) -> SdpProblem:
    if hasattr(path_or_file, "read"):
        text = path_or_file.read()
    else:
        with open(path_or_file) as fh:
            text = fh.read()
    rows = [ln.split("*")[0].strip() for ln in text.splitlines()]
    rows = [ln for ln in rows if ln and not ln.startswith('"')]
    m = int(rows[0].split()[0])
    nblocks = int(rows[1].split()[0])
    sizes = [abs(int(float(t))) for t in rows[2].replace(",", " ").replace("{", " ").replace("}", " ").split()][:nblocks]
    b = np.array([float(t) for t in rows[3].replace(",", " ").replace("{", " ").replace("}", " ").split()][:m])
    A = [np.zeros((m, n, n)) for n in sizes]
    C = [np.zeros((n, n)) for n in sizes]
    has_obj = False
    for ln in rows[4:]:
        i, blk, r, c, v = ln.split()[:5]
        i, blk, r, c, v = int(i), int(blk) - 1, int(r) - 1, int(c) - 1, float(v)
        if i == 0:
            has_obj = True
            C[blk][r, c] = C[blk][c, r] = -v
        else:
            A[blk][i - 1, r, c] = A[blk][i - 1, c, r] = v
    return SdpProblem(tuple(sizes), A, b, C if has_obj else None)


def block_problem(blocks: Sequence[int], rows: Sequence[Sequence], b, C=None) -> SdpProblem:
    """Build a problem from per-constraint lists of per-block matrices."""
    m = len(rows)
    A = []
    for j, n in enumerate(blocks):
        dtype = complex if any(np.iscomplexobj(r[j]) for r in rows) else float
        Ab = np.zeros((m, n, n), dtype=dtype)
        for k, r in enumerate(rows):
            Ab[k] = r[j]
        A.append(Ab)
    return SdpProblem(tuple(blocks), A, np.asarray(b, dtype=float), C)
