"""Finite-dimensional points of a module: lower-bound search and dilations.

``search_lower`` maximizes ``||a(X)||`` over tuples X satisfying the module
constraints, by projected gradient ascent with random restarts.  The value
at any feasible X is a lower bound for the Q-norm.  The remaining helpers
build points of matrix convex sets: unitary dilations, isometric
extensions, compressions and Haar-random isometries.
"""
from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize

from .freealg import FreePoly, MatrixTuple, Signature, evaluate
from .qmodule import IDEAL, PENCIL, ModuleDescription, ModuleError

FEAS_TOL = 1e-8


class SearchError(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    n: int = 1
    restarts: int = 32
    iterations: int = 300
    step: float = 0.5
    beta: float = 200.0
    topk: int = 3
    penalty: float = 100.0
    seed: int = 0
    jobs: int = 1
    feas_tol: float = FEAS_TOL

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("representation dimension must be at least 1")
        if self.restarts < 1 or self.iterations < 0:
            raise ValueError("need at least one restart")


@dataclass(frozen=True)
class Isometry:
    V: np.ndarray

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.V, dtype=complex))
        if V.shape[0] < V.shape[1]:
            raise ValueError("an isometry C^s -> C^r needs r >= s")
        err = np.abs(V.conj().T @ V - np.eye(V.shape[1])).max()
        if err > 1e-10:
            raise ValueError(f"columns are not orthonormal (error {err:.2e})")
        object.__setattr__(self, "V", V)

    @property
    def shape(self):
        return self.V.shape


# ---------------------------------------------------------------------------
# random matrices


def haar_isometry(r: int, s: int, rng: np.random.Generator) -> np.ndarray:
    """r x s isometry distributed by Haar measure (QR with phase-fixed R)."""
    if s > r:
        raise ValueError("need s <= r")
    Z = (rng.standard_normal((r, s)) + 1j * rng.standard_normal((r, s))) / math.sqrt(2)
    Qm, R = np.linalg.qr(Z)
    d = np.diag(R)
    ph = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return Qm * ph[None, :]


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    return haar_isometry(n, n, rng)


def _ginibre(n, rng):
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2 * n)


def _gue(n, rng):
    G = _ginibre(n, rng)
    return (G + G.conj().T) / 2


# ---------------------------------------------------------------------------
# retractions


def polar(M: np.ndarray) -> np.ndarray:
    U, _, Vh = np.linalg.svd(M, full_matrices=False)
    return U @ Vh


def clip_singular(M: np.ndarray, bound: float = 1.0) -> np.ndarray:
    U, s, Vh = np.linalg.svd(M, full_matrices=False)
    return (U * np.minimum(s, bound)) @ Vh


def clip_eigen(H: np.ndarray, bound: float = 1.0) -> np.ndarray:
    w, V = np.linalg.eigh((H + H.conj().T) / 2)
    return (V * np.clip(w, -bound, bound)) @ V.conj().T


def stack_polar(mats) -> list:
    """Nearest tuple with sum_i X_i* X_i = I (polar factor of the stacked column)."""
    s = mats[0].shape[0]
    S = np.vstack(mats)
    U, _, Vh = np.linalg.svd(S, full_matrices=False)
    W = U @ Vh
    return [W[i * s:(i + 1) * s] for i in range(len(mats))]


def stack_clip(mats) -> list:
    s = mats[0].shape[0]
    S = clip_singular(np.vstack(mats))
    return [S[i * s:(i + 1) * s] for i in range(len(mats))]


def _kind(Q: ModuleDescription) -> str:
    p = Q.preset
    if p in ("free_group", "toeplitz"):
        return "unitary"
    if p == "heisenberg":
        return "heisenberg"
    if p == "isometry":
        return "isometry"
    if p == "ball":
        if Q.params.get("kind") == "column_contractions":
            return "col_ball"
        return "row_ball_herm" if Q.params.get("hermitian") else "row_ball"
    if p == "pencil":
        return "pencil"
    if p == "sos" or not Q.generators:
        return "free"
    if all(g.kind == PENCIL or (g.kind != IDEAL and g.degree <= 1) for g in Q.generators) and all(Q.sig.hermitian):
        return "pencil"
    return "penalty"


def _pencil_lmin(Q: ModuleDescription, mats) -> float:
    X = MatrixTuple(tuple(mats), Q.sig)
    lm = np.inf
    for g in Q.inequalities:
        M = g.evaluate(X)
        lm = min(lm, float(np.linalg.eigvalsh((M + M.conj().T) / 2)[0]))
    return lm


def _pencil_scale(Q: ModuleDescription, mats) -> list:
    """Scale X toward 0 (where every generator is the identity) until feasible."""
    if _pencil_lmin(Q, mats) >= 0:
        return list(mats)
    zero = [np.zeros_like(m) for m in mats]
    if _pencil_lmin(Q, zero) <= 0:
        raise SearchError("the origin is not interior; no feasible point found")
    lo, hi = 0.0, 1.0
    if all(g.kind == PENCIL or g.degree <= 1 for g in Q.inequalities):
        # linear: L(sX) = L(0) + s K  -> exact largest s
        svals = []
        for g in Q.inequalities:
            L0 = g.evaluate(MatrixTuple(tuple(zero), Q.sig))
            K = g.evaluate(MatrixTuple(tuple(mats), Q.sig)) - L0
            w = sla.eigh((K + K.conj().T) / 2, (L0 + L0.conj().T) / 2, eigvals_only=True)
            if w[0] < 0:
                svals.append(-1 / w[0])
        s = min(svals + [1.0]) * (1 - 1e-12)
        out = [s * m for m in mats]
        if _pencil_lmin(Q, out) >= 0:
            return out
    for _ in range(60):
        mid = (lo + hi) / 2
        if _pencil_lmin(Q, [mid * m for m in mats]) >= 0:
            lo = mid
        else:
            hi = mid
    return [lo * m for m in mats]


def project_feasible(X: MatrixTuple, Q: ModuleDescription) -> MatrixTuple:
    """Retract X onto the level-n set of Q (nearest effort for unstructured modules)."""
    kind = _kind(Q)
    mats = [np.array(m, dtype=complex) for m in X.mats]
    herm = Q.sig.hermitian
    mats = [(m + m.conj().T) / 2 if h else m for m, h in zip(mats, herm)]
    if kind in ("unitary", "heisenberg"):
        out = [polar(m) for m in mats]
    elif kind == "isometry":
        out = stack_polar(mats)
    elif kind == "row_ball":
        out = stack_clip(mats)
    elif kind == "row_ball_herm":
        if len(mats) == 1:
            out = [clip_eigen(mats[0])]
        else:
            nrm = np.linalg.norm(np.vstack(mats), 2)
            out = [m / nrm for m in mats] if nrm > 1 else mats
    elif kind == "col_ball":
        out = [clip_singular(m) for m in mats]
    elif kind == "pencil":
        out = _pencil_scale(Q, mats)
    else:
        out = mats
    out = [(m + m.conj().T) / 2 if h else m for m, h in zip(out, herm)]
    return MatrixTuple(tuple(out), Q.sig)


def sample_feasible(Q: ModuleDescription, n: int, rng: np.random.Generator) -> MatrixTuple:
    """A random point of the level-n set."""
    kind = _kind(Q)
    k = Q.sig.nvars
    if kind == "unitary":
        return MatrixTuple(tuple(haar_unitary(n, rng) for _ in range(k)), Q.sig)
    if kind == "heisenberg":
        return _heisenberg_sample(n, rng)
    herm = Q.sig.hermitian
    mats = [_gue(n, rng) if h else _ginibre(n, rng) for h in herm]
    if kind == "penalty":
        return MatrixTuple(tuple(mats), Q.sig)
    return project_feasible(MatrixTuple(tuple(mats), Q.sig), Q)


def _heisenberg_sample(n: int, rng: np.random.Generator) -> MatrixTuple:
    from .heisenberg import SIG, irrep

    blocks, left = [], n
    while left:
        q = int(rng.integers(1, left + 1))
        ps = [p for p in range(q) if math.gcd(p, q) == 1] or [0]
        p = int(rng.choice(ps))
        blocks.append(irrep(p, q, *rng.uniform(0, 2 * np.pi, 2)).mats)
        left -= q
    mats = [sla.block_diag(*[b[i] for b in blocks]) for i in range(3)]
    U = haar_unitary(n, rng)
    return MatrixTuple(tuple(U @ m @ U.conj().T for m in mats), SIG)


# ---------------------------------------------------------------------------
# objective and gradient


def _words_with_prefix_suffix(p: FreePoly, X: MatrixTuple):
    sig = p.sig
    s = X.dim
    L = {x: X.letter_matrix(x, sig) for x in sig.letters}
    for w, c in p.terms.items():
        pre = [np.eye(s, dtype=complex)]
        for x in w:
            pre.append(pre[-1] @ L[x])
        suf = [np.eye(s, dtype=complex)]
        for x in reversed(w):
            suf.append(L[x] @ suf[-1])
        suf = suf[::-1]  # suf[i] = product of letters i..end
        yield w, c, pre, suf


def smoothed_value(M: np.ndarray, beta: float, k: int) -> tuple:
    """(log-sum-exp over the top-k squared singular values / beta, matrix gradient)."""
    U, s, Vh = np.linalg.svd(M)
    k = min(k, len(s))
    s2 = s[:k] ** 2
    z = beta * (s2 - s2[0])
    wts = np.exp(z)
    wts /= wts.sum()
    val = s2[0] + math.log(np.exp(z).sum()) / beta
    G = (U[:, :k] * (wts * 2 * s[:k])) @ Vh[:k]
    return val, G


def objective_gradient(a: FreePoly, X: MatrixTuple, beta: float = 200.0, k: int = 3) -> tuple:
    """Smoothed objective and its Euclidean gradient with respect to each X_i."""
    sig = a.sig
    M = evaluate(a, X)
    val, Mg = smoothed_value(M, beta, k)
    grads = [np.zeros((X.dim, X.dim), dtype=complex) for _ in range(sig.nvars)]
    Mg_h = Mg.conj().T
    for w, c, pre, suf in _words_with_prefix_suffix(a, X):
        for pos, x in enumerate(w):
            P, S = pre[pos], suf[pos + 1]
            i = sig.var_of(x)
            if sig.is_starred(x):
                grads[i] += c * S @ Mg_h @ P
            else:
                grads[i] += np.conj(c) * P.conj().T @ Mg @ S.conj().T
    for i, h in enumerate(sig.hermitian):
        if h:
            grads[i] = (grads[i] + grads[i].conj().T) / 2
    return val, grads


def _penalty(Q: ModuleDescription, X: MatrixTuple) -> float:
    v = 0.0
    for g in Q.generators:
        M = g.evaluate(X)
        if g.kind == IDEAL:
            v += float(np.linalg.norm(M) ** 2)
        else:
            w = np.linalg.eigvalsh((M + M.conj().T) / 2)
            v += float(np.sum(np.minimum(w, 0) ** 2))
    return v


def spectral_norm(a: FreePoly, X: MatrixTuple) -> float:
    return float(np.linalg.norm(evaluate(a, X), 2))


def rounding_slack(a: FreePoly, X: MatrixTuple) -> float:
    """Bound on the floating-point error of ``spectral_norm(a, X)``.

    Standard forward bound for products and sums of dense matrices, with
    a factor of four for safety.
    """
    u = np.finfo(float).eps / 2
    norms = [float(np.linalg.norm(m, 2)) for m in X.mats]
    total = 0.0
    for w, c in a.terms.items():
        prod = 1.0
        for letter in w:
            prod *= norms[X.sig.var_of(letter)]
        total += abs(c) * prod * (len(w) + 1)
    return 4.0 * u * X.dim * (len(a.terms) + 1) * total


# ---------------------------------------------------------------------------
# search


@dataclass
class SearchResult:
    value: float  # computed norm rounded down by the floating-point error bound
    X: MatrixTuple
    violation: float
    restart: int
    values: list = field(default_factory=list)
    raw_value: float = float("nan")


def _ascent(a, Q, X, cfg: SearchConfig, kind: str) -> MatrixTuple:
    pen = kind == "penalty"

    def f(Y):
        v, g = objective_gradient(a, Y, cfg.beta, cfg.topk)
        if pen:
            v -= cfg.penalty * _penalty(Q, Y)
        return v, g

    def retract(mats):
        Y = MatrixTuple(tuple(mats), Q.sig) if not pen else MatrixTuple(
            tuple((m + m.conj().T) / 2 if h else m for m, h in zip(mats, Q.sig.hermitian)), Q.sig)
        return Y if pen else project_feasible(Y, Q)

    val, g = f(X)
    step = cfg.step
    for _ in range(cfg.iterations):
        gn = math.sqrt(sum(float(np.sum(np.abs(x) ** 2)) for x in g))
        if gn < 1e-14:
            break
        while step > 1e-12:
            cand = retract([x + (step / gn) * d for x, d in zip(X.mats, g)])
            cv, cg = f(cand)
            if cv > val + 1e-15:
                X, val, g = cand, cv, cg
                step = min(step * 1.5, 10.0)
                break
            step *= 0.5
        else:
            break
    return X


def _one_restart(a, Q, cfg: SearchConfig, kind: str, seed_seq) -> tuple:
    rng = np.random.default_rng(seed_seq)
    X0 = sample_feasible(Q, cfg.n, rng)
    X = _ascent(a, Q, X0, cfg, kind)
    if kind == "penalty":
        X = project_feasible(X, Q)
    return spectral_norm(a, X), Q.violation(X), X


def _heisenberg_search(a: FreePoly, cfg: SearchConfig):
    from .heisenberg import SIG, irrep

    if a.sig.nvars != 3:
        raise SearchError("polynomial is not over the Heisenberg generators")
    rng = np.random.default_rng(cfg.seed)
    fracs = sorted({Fraction(p, q) for q in range(1, cfg.n + 1) for p in range(q)})
    best = (-1.0, None)
    per = max(1, cfg.restarts // max(1, len(fracs)))
    for fr in fracs:
        p, q = fr.numerator, fr.denominator

        def neg(k, p=p, q=q):
            return -spectral_norm(a, MatrixTuple(irrep(p, q, k[0], k[1]).mats, a.sig))

        for _ in range(per):
            k0 = rng.uniform(0, 2 * np.pi, 2)
            r = minimize(neg, k0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 400})
            if -r.fun > best[0] + 1e-15:
                best = (-r.fun, (p, q, r.x))
    p, q, k = best[1]
    blocks = [irrep(p, q, k[0], k[1]).mats] + [irrep(0, 1).mats] * (cfg.n - q)
    mats = tuple(sla.block_diag(*[b[i] for b in blocks]) for i in range(3))
    X = MatrixTuple(mats, SIG)
    return X


def search(a: FreePoly, Q: ModuleDescription, cfg: SearchConfig | None = None) -> SearchResult:
    cfg = cfg or SearchConfig()
    if a.sig != Q.sig:
        raise ModuleError("polynomial and module have different signatures")
    kind = _kind(Q)
    if kind == "heisenberg":
        X = _heisenberg_search(a, cfg)
        v = spectral_norm(a, X)
        return SearchResult(v - rounding_slack(a, X), X, Q.violation(X), 0, [], v)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    if cfg.jobs > 1:
        with ThreadPoolExecutor(cfg.jobs) as ex:
            runs = list(ex.map(lambda s: _one_restart(a, Q, cfg, kind, s), seeds))
    else:
        runs = [_one_restart(a, Q, cfg, kind, s) for s in seeds]
    best = None
    for i, (v, viol, X) in enumerate(runs):
        if viol > cfg.feas_tol:
            continue
        if best is None or v > best[0]:
            best = (v, i, X, viol)
    if best is None:
        raise SearchError("no feasible point found")
    v, i, X, viol = best
    return SearchResult(v - rounding_slack(a, X), X, viol, i, [r[0] for r in runs], v)


def search_lower(a: FreePoly, Q: ModuleDescription, cfg: SearchConfig | None = None) -> tuple:
    """(value, X): ``||a(X)||`` at the best feasible tuple found."""
    r = search(a, Q, cfg)
    return r.value, r.X


# ---------------------------------------------------------------------------
# dilations, extensions, compressions


def unitary_dilate(T: np.ndarray) -> np.ndarray:
    """[[T, (I - T T*)^1/2], [(I - T* T)^1/2, -T*]] for a contraction T."""
    T = np.atleast_2d(np.asarray(T, dtype=complex))
    if T.shape[0] != T.shape[1]:
        raise ValueError("T must be square")
    W, sv, Vh = np.linalg.svd(T)
    if sv[0] > 1 + 1e-12:
        raise ValueError("T is not a contraction")
    # both defect operators from one SVD; (1-s)(1+s) avoids cancellation near s = 1
    sv = np.minimum(sv, 1.0)
    dv = np.sqrt((1 - sv) * (1 + sv))
    V = Vh.conj().T
    D_T = (V * dv) @ Vh
    D_Ts = (W * dv) @ W.conj().T
    return np.block([[T, D_Ts], [D_T, -T.conj().T]])


def isometry_extend(maps, basis: np.ndarray | None = None) -> list:
    """Extend M_i : H_1 -> H_2 (given on an orthonormal basis of H_1) to H_2.

    ``maps[i]`` is r x k (images of the k basis vectors), ``basis`` is r x k
    with orthonormal columns (default: first k coordinate vectors).  The
    stacked input must be isometric; the output stack is isometric on C^r.
    """
    maps = [np.atleast_2d(np.asarray(M, dtype=complex)) for M in maps]
    r, k = maps[0].shape
    if any(M.shape != (r, k) for M in maps):
        raise ValueError("all maps must have the same shape")
    E = np.eye(r, k, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
    if E.shape != (r, k) or np.abs(E.conj().T @ E - np.eye(k)).max() > 1e-10:
        raise ValueError("basis of H_1 must have orthonormal columns")
    S = np.vstack(maps)
    if np.abs(S.conj().T @ S - np.eye(k)).max() > 1e-10:
        raise ValueError("the stacked maps are not isometric on H_1")
    F = sla.null_space(E.conj().T) if k < r else np.zeros((r, 0))
    T = sla.null_space(S.conj().T) if k > 0 else np.eye(S.shape[0])
    T = T[:, : r - k]
    St = S @ E.conj().T + T @ F.conj().T
    n = len(maps)
    return [St[i * r:(i + 1) * r] for i in range(n)]


def compress(X: MatrixTuple, V, Q: ModuleDescription | None = None) -> MatrixTuple:
    """(V* X_1 V, ..., V* X_n V)."""
    V = V.V if isinstance(V, Isometry) else np.asarray(V, dtype=complex)
    if V.shape[0] != X.dim:
        raise ValueError(f"isometry has {V.shape[0]} rows but the tuple has dimension {X.dim}")
    Y = MatrixTuple(tuple(V.conj().T @ m @ V for m in X.mats), X.sig)
    if Q is not None and any(g.kind == PENCIL for g in Q.generators) and Q.violation(X) <= 1e-12:
        assert Q.violation(Y) <= 1e-9, "compression left the free spectrahedron"
    return Y


def direct_sum(*tuples: MatrixTuple) -> MatrixTuple:
    k = len(tuples[0])
    return MatrixTuple(tuple(sla.block_diag(*[t.mats[i] for t in tuples]) for i in range(k)), tuples[0].sig)


def mconv_sample(Q: ModuleDescription, r: int, s: int, count: int, seed: int = 0) -> list:
    """Compressions V* A V of random level-r points A through Haar isometries."""
    if s > r:
        raise ValueError("need r >= s")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        A = sample_feasible(Q, r, rng)
        V = haar_isometry(r, s, rng)
        out.append(compress(A, V, Q))
    return out


# ---------------------------------------------------------------------------
# text format for tuples


def _fmt_entry(z: complex) -> str:
    sign = "-" if z.imag < 0 or (z.imag == 0 and math.copysign(1, z.imag) < 0) else "+"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def format_tuple(X: MatrixTuple, sig: Signature | None = None) -> str:
    sig = sig or X.sig
    names = sig.names if sig is not None else tuple(f"z{i + 1}" for i in range(len(X)))
    buf = io.StringIO()
    buf.write(f"dim={X.dim} nvars={len(X)}\n")
    for name, M in zip(names, X.mats):
        buf.write(f"# {name}\n")
        for row in M:
            buf.write(" ".join(_fmt_entry(complex(z)) for z in row) + "\n")
    return buf.getvalue()


def parse_tuple(text: str, sig: Signature | None = None) -> MatrixTuple:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("dim="):
        raise ValueError("tuple text must start with 'dim=<s> nvars=<n>'")
    head = dict(tok.split("=") for tok in lines[0].split())
    s, n = int(head["dim"]), int(head["nvars"])
    mats, i = [], 1
    for _ in range(n):
        if i >= len(lines) or not lines[i].startswith("#"):
            raise ValueError(f"expected '# name' at line {i + 1}")
        i += 1
        rows = []
        for _ in range(s):
            rows.append([complex(tok.replace("i", "j")) for tok in lines[i].split()])
            i += 1
        mats.append(np.array(rows))
    return MatrixTuple(tuple(mats), sig)
