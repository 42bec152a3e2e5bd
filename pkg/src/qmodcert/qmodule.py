"""Quadratic modules given by generators and relations, and their truncations.

A module is the SOS cone of the free *-algebra plus conjugates ``w* g w`` of
its generators.  Relations ``r = 0`` enter as ideal pairs ``±r``; for the
group presets (and the Toeplitz algebra) a monomial rewriting system gives
exact normal forms, which the truncation uses in ``exact`` mode.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .freealg import (
    FreePoly,
    MatrixTuple,
    ParseError,
    Signature,
    adjoint,
    evaluate,
    format_poly,
    is_hermitian,
    monomial_basis,
    parse_poly,
)

SCALAR, PENCIL, IDEAL = "scalar_poly", "matrix_pencil", "ideal_pair"


class ModuleError(ValueError):
    pass


@dataclass(frozen=True)
class Generator:
    kind: str
    payload: object
    label: str = ""

    def __post_init__(self):
        if self.kind not in (SCALAR, PENCIL, IDEAL):
            raise ModuleError(f"unknown generator kind {self.kind!r}")
        if self.kind == PENCIL:
            rows = tuple(tuple(r) for r in self.payload)
            if any(len(r) != len(rows) for r in rows):
                raise ModuleError("pencil must be square")
            object.__setattr__(self, "payload", rows)

    @property
    def sig(self) -> Signature:
        return self.matrix[0][0].sig

    @property
    def matrix(self) -> tuple:
        if self.kind == PENCIL:
            return self.payload
        return ((self.payload,),)

    @property
    def size(self) -> int:
        return len(self.matrix)

    @property
    def degree(self) -> int:
        return max(p.degree for row in self.matrix for p in row)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        if self.kind == IDEAL:
            return True
        M = self.matrix
        s = len(M)
        return all(
            (M[i][j] - adjoint(M[j][i])).max_abs_coeff() <= tol for i in range(s) for j in range(s)
        )

    def evaluate(self, X: MatrixTuple) -> np.ndarray:
        return np.block([[evaluate(p, X) for p in row] for row in self.matrix])


# ---------------------------------------------------------------------------
# monomial reducers


def _free_group_nf(sig: Signature, w):
    out = []
    for x in w:
        if out and out[-1] == sig.star(x):
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def _toeplitz_nf(sig: Signature, w):
    # z z* -> 1 only
    out = []
    for x in w:
        if out and x >= sig.nvars and out[-1] == sig.star(x):
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def _heisenberg_nf(sig: Signature, w):
    from .heisenberg import element_to_word, word_to_element

    return element_to_word(word_to_element(w))


REDUCERS: dict[str, Callable] = {
    "free_group": _free_group_nf,
    "toeplitz": _toeplitz_nf,
    "heisenberg": _heisenberg_nf,
}


def reduce_poly(p: FreePoly, reducer: str | None) -> FreePoly:
    if reducer is None:
        return p
    nf = REDUCERS[reducer]
    t: dict = {}
    for w, c in p.terms.items():
        r = nf(p.sig, w)
        t[r] = t.get(r, 0) + c
    return FreePoly(t, p.sig)


# ---------------------------------------------------------------------------
# module descriptions


@dataclass(frozen=True)
class ModuleDescription:
    sig: Signature
    generators: tuple = ()
    name: str = "custom"
    archimedean_bound: float | None = None
    reducer: str | None = None
    preset: str | None = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        gens = tuple(self.generators)
        for g in gens:
            if g.sig != self.sig:
                raise ModuleError("generator signature differs from module signature")
            if not g.is_hermitian():
                raise ModuleError(f"generator {g.label or g.kind} is not hermitian")
        if self.reducer is not None and self.reducer not in REDUCERS:
            raise ModuleError(f"unknown reducer {self.reducer!r}")
        object.__setattr__(self, "generators", gens)

    @property
    def inequalities(self) -> list:
        return [g for g in self.generators if g.kind != IDEAL]

    @property
    def relations(self) -> list:
        return [g for g in self.generators if g.kind == IDEAL]

    @property
    def is_archimedean(self) -> bool:
        return self.archimedean_bound is not None

    def reduce(self, p: FreePoly) -> FreePoly:
        return reduce_poly(p, self.reducer)

    def violation(self, X: MatrixTuple) -> float:
        """Largest constraint violation at X: negative eigenvalues and relation norms."""
        v = 0.0
        for g in self.generators:
            M = g.evaluate(X)
            if g.kind == IDEAL:
                v = max(v, float(np.linalg.norm(M, 2)))
            else:
                M = (M + M.conj().T) / 2
                v = max(v, float(-np.linalg.eigvalsh(M)[0]))
        return v

    def poly(self, text: str) -> FreePoly:
        return parse_poly(text, self.sig)


def _ideal(r: FreePoly, label: str = "") -> Generator:
    return Generator(IDEAL, r, label or format_poly(r))


def _scalar(g: FreePoly, label: str = "") -> Generator:
    return Generator(SCALAR, g, label or format_poly(g))


def sos_module(nvars: int = 1, hermitian: bool = True) -> ModuleDescription:
    sig = Signature(nvars, (hermitian,) * nvars)
    return ModuleDescription(sig, (), name=f"sos:{nvars}", preset="sos", params={"n": nvars})


def pencil_module(mats: Sequence, archimedean_bound: float | None = None, names=()) -> ModuleDescription:
    """Module generated by the linear pencil ``I + sum_i M_i z_i`` (hermitian z_i)."""
    mats = [np.atleast_2d(np.asarray(M, dtype=complex)) for M in mats]
    if not mats:
        raise ModuleError("need at least one coefficient matrix")
    s = mats[0].shape[0]
    for M in mats:
        if M.shape != (s, s):
            raise ModuleError("pencil coefficients must share one square size")
        if np.abs(M - M.conj().T).max() > 1e-12:
            raise ModuleError("pencil coefficients must be Hermitian")
    n = len(mats)
    sig = Signature(n, (True,) * n, tuple(names))
    L = [[sig.zero() for _ in range(s)] for _ in range(s)]
    for a in range(s):
        for b in range(s):
            p = sig.const(1.0 if a == b else 0.0)
            for i, M in enumerate(mats):
                if M[a, b] != 0:
                    p = p + sig.var(i) * complex(M[a, b])
            L[a][b] = p
    gen = Generator(PENCIL, L, "L")
    return ModuleDescription(
        sig,
        (gen,),
        name="pencil",
        archimedean_bound=archimedean_bound,
        preset="pencil",
        params={"mats": [M.tolist() for M in mats]},
    )


def cube_pencil(n: int) -> list:
    """Coefficients of diag(1 - z_1, 1 + z_1, ..., 1 - z_n, 1 + z_n)."""
    mats = []
    for i in range(n):
        M = np.zeros((2 * n, 2 * n))
        M[2 * i, 2 * i] = -1.0
        M[2 * i + 1, 2 * i + 1] = 1.0
        mats.append(M)
    return mats


def ball_pencil(n: int) -> list:
    """Arrow-head pencil [[1, z^T],[z, I]] of size n+1; level-1 set is the unit ball."""
    mats = []
    for i in range(n):
        M = np.zeros((n + 1, n + 1))
        M[0, i + 1] = M[i + 1, 0] = 1.0
        mats.append(M)
    return mats


def ball_module(n: int = 1, kind: str = "row_ball", hermitian: bool = False) -> ModuleDescription:
    sig = Signature(n, (hermitian,) * n)
    zz = [sig.var_star(i) * sig.var(i) for i in range(n)]
    if kind == "row_ball":
        gens = (_scalar(1 - sum(zz[1:], zz[0])),)
        bound = 1.0
    elif kind == "column_contractions":
        gens = tuple(_scalar(1 - q) for q in zz)
        bound = float(n)
    else:
        raise ModuleError(f"unknown ball kind {kind!r}")
    return ModuleDescription(
        sig,
        gens,
        name=f"ball:{n}" if kind == "row_ball" else f"ball_col:{n}",
        archimedean_bound=bound,
        preset="ball",
        params={"n": n, "kind": kind, "hermitian": hermitian},
    )


def isometry_module(n: int = 1) -> ModuleDescription:
    sig = Signature(n, (False,) * n)
    r = sum((sig.var_star(i) * sig.var(i) for i in range(1, n)), sig.var_star(0) * sig.var(0)) - 1
    return ModuleDescription(
        sig, (_ideal(r),), name=f"isometry:{n}", archimedean_bound=1.0, preset="isometry", params={"n": n}
    )


def _unitary_relations(sig: Signature, i: int) -> list:
    z, zs = sig.var(i), sig.var_star(i)
    return [_ideal(zs * z - 1), _ideal(z * zs - 1)]


def group_module(preset: str, m: int = 1) -> ModuleDescription:
    """``free_group`` (m unitaries), ``heisenberg`` or ``toeplitz``."""
    if preset == "free_group":
        sig = Signature(m, (False,) * m)
        rels = [g for i in range(m) for g in _unitary_relations(sig, i)]
        return ModuleDescription(
            sig, tuple(rels), name=f"free_group:{m}", archimedean_bound=float(m),
            reducer="free_group", preset="free_group", params={"m": m},
        )
    if preset == "heisenberg":
        sig = Signature(3, (False,) * 3, ("a", "b", "c"))
        a, b, c = sig.var(0), sig.var(1), sig.var(2)
        rels = [g for i in range(3) for g in _unitary_relations(sig, i)]
        rels += [_ideal(a * b - c * b * a), _ideal(c * a - a * c), _ideal(c * b - b * c)]
        return ModuleDescription(
            sig, tuple(rels), name="heisenberg", archimedean_bound=3.0,
            reducer="heisenberg", preset="heisenberg", params={},
        )
    if preset == "toeplitz":
        sig = Signature(1, (False,))
        z, zs = sig.var(0), sig.var_star(0)
        return ModuleDescription(
            sig, (_ideal(z * zs - 1),), name="toeplitz", archimedean_bound=1.0,
            reducer="toeplitz", preset="toeplitz", params={},
        )
    raise ModuleError(f"unknown group preset {preset!r}")


PRESETS = {
    "free_group:<m>": "free group on m unitaries (group algebra)",
    "heisenberg": "discrete Heisenberg group <a,b,c | c=aba^-1b^-1, c central>",
    "toeplitz": "Toeplitz algebra C<z,z*>/(zz* - 1)",
    "ball:<n>": "row ball, generator 1 - sum z_i^* z_i",
    "ball_col:<n>": "column contractions, generators 1 - z_i^* z_i",
    "ball_herm:<n>": "row ball in hermitian variables",
    "isometry:<n>": "ideal sum z_i^* z_i = 1",
    "cube:<n>": "free cube pencil diag(1 -+ z_i), hermitian variables",
    "pencil_ball:<n>": "arrow-head pencil [[1, z^T],[z, I]], hermitian variables",
    "sos:<n>": "sums of squares only, hermitian variables (not archimedean)",
}


def preset(name: str) -> ModuleDescription:
    """Resolve a preset name such as ``free_group:2`` or ``heisenberg``."""
    base, _, arg = name.partition(":")
    try:
        k = int(arg) if arg else 1
    except ValueError:
        raise ModuleError(f"bad preset parameter in {name!r}") from None
    if k < 1:
        raise ModuleError("preset parameter must be positive")
    if base == "free_group":
        return group_module("free_group", k)
    if base in ("heisenberg", "toeplitz"):
        return group_module(base)
    if base == "ball":
        return ball_module(k, "row_ball")
    if base == "ball_col":
        return ball_module(k, "column_contractions")
    if base == "ball_herm":
        return ball_module(k, "row_ball", hermitian=True)
    if base == "isometry":
        return isometry_module(k)
    if base == "cube":
        return replace(pencil_module(cube_pencil(k), archimedean_bound=float(k)), name=f"cube:{k}")
    if base == "pencil_ball":
        return replace(pencil_module(ball_pencil(k), archimedean_bound=1.0), name=f"pencil_ball:{k}")
    if base == "sos":
        return sos_module(k, hermitian=True)
    raise ModuleError(f"unknown preset {name!r}")


# ---------------------------------------------------------------------------
# truncations


@dataclass(frozen=True)
class TruncationPlan:
    d: int
    exact: bool
    sos_words: tuple
    gen_words: tuple  # one word list per inequality generator
    ideal_pairs: tuple  # one (u, v) list per active relation
    relations: tuple

    @property
    def gram_dims(self) -> list:
        return [len(self.sos_words)] + [len(w) for w in self.gen_words]

    @property
    def total_gram_dim(self) -> int:
        return sum(self.gram_dims)


def _unique_words(words, Q: ModuleDescription, exact: bool):
    if not exact or Q.reducer is None:
        return tuple(words)
    nf = REDUCERS[Q.reducer]
    seen, out = set(), []
    for w in words:
        r = nf(Q.sig, w)
        if r not in seen:
            seen.add(r)
            out.append(w)
    return tuple(out)


def truncate(Q: ModuleDescription, d: int, exact: bool = True) -> TruncationPlan:
    """Multiplier words for the degree-``d`` truncation of ``Q``."""
    exact = exact and Q.reducer is not None
    # relations that the normal form already enforces do not constrain d
    active = [g for g in Q.generators if not (exact and g.kind == IDEAL and Q.reduce(g.payload).is_zero())]
    max_deg = max((g.degree for g in active), default=0)
    if d < max_deg or d < 0:
        raise ModuleError(f"truncation degree {d} below generator degree {max_deg}")
    sos = _unique_words(monomial_basis(Q.sig, d // 2), Q, exact)
    gen_words = tuple(
        _unique_words(monomial_basis(Q.sig, (d - g.degree) // 2), Q, exact) for g in Q.inequalities
    )
    rels, pairs = [], []
    for g in Q.relations:
        r = g.payload
        if exact and Q.reduce(r).is_zero():
            continue
        k = d - r.degree
        words = monomial_basis(Q.sig, k)
        rels.append(g)
        pairs.append(tuple((u, v) for u in words for v in words if len(u) + len(v) <= k))
    return TruncationPlan(d, exact, sos, gen_words, tuple(pairs), tuple(rels))


def localizing_block(g: Generator, words: Sequence, X: MatrixTuple | None = None, reducer: str | None = None):
    """Block ``B[(k,i)][(l,j)] = w_i* g_kl w_j``; evaluated numerically when X is given."""
    M = g.matrix
    s, N = len(M), len(words)
    sig = g.sig
    wpolys = [sig.word(w) for w in words]
    wstar = [adjoint(p) for p in wpolys]
    B = [[None] * (s * N) for _ in range(s * N)]
    for k in range(s):
        for i in range(N):
            for l in range(s):
                for j in range(N):
                    B[k * N + i][l * N + j] = reduce_poly(wstar[i] * M[k][l] * wpolys[j], reducer)
    if X is None:
        return B
    return np.block([[evaluate(p, X) for p in row] for row in B])


def is_hermitian_block(B) -> bool:
    n = len(B)
    return all((B[i][j] - adjoint(B[j][i])).max_abs_coeff() <= 1e-12 for i in range(n) for j in range(n))


# ---------------------------------------------------------------------------
# JSON description files

_FIELDS = {"name", "signature", "generators", "relations", "archimedean_bound", "reducer", "preset"}


def module_from_dict(data: dict) -> ModuleDescription:
    if "preset" in data and data["preset"] is not None:
        Q = preset(data["preset"])
        if set(data) - {"preset"} and module_to_dict(Q) != {**module_to_dict(Q), **data}:
            raise ModuleError(f"description does not match preset {data['preset']!r}")
        return Q
    unknown = set(data) - _FIELDS
    if unknown:
        raise ModuleError(f"unknown field(s) in module description: {sorted(unknown)}")
    try:
        sd = data["signature"]
    except KeyError:
        raise ModuleError("missing field 'signature'") from None
    bad = set(sd) - {"nvars", "hermitian", "names"}
    if bad:
        raise ModuleError(f"unknown field(s) in signature: {sorted(bad)}")
    try:
        sig = Signature(int(sd["nvars"]), tuple(sd.get("hermitian", ())), tuple(sd.get("names", ())))
    except (KeyError, ValueError, TypeError) as e:
        raise ModuleError(f"bad signature: {e}") from None
    gens = []
    try:
        for k, gd in enumerate(data.get("generators", [])):
            kind = gd.get("kind", SCALAR)
            extra = set(gd) - {"kind", "poly", "matrix", "label"}
            if extra:
                raise ModuleError(f"unknown field(s) in generators[{k}]: {sorted(extra)}")
            if kind == SCALAR:
                gens.append(_scalar(parse_poly(gd["poly"], sig), gd.get("label", "")))
            elif kind == PENCIL:
                rows = [[parse_poly(e, sig) for e in row] for row in gd["matrix"]]
                gens.append(Generator(PENCIL, rows, gd.get("label", "L")))
            else:
                raise ModuleError(f"generators[{k}].kind must be scalar_poly or matrix_pencil")
        for r in data.get("relations", []):
            gens.append(_ideal(parse_poly(r, sig)))
    except ParseError as e:
        raise ModuleError(f"bad polynomial in module description: {e}") from None
    except KeyError as e:
        raise ModuleError(f"missing field {e}") from None
    bound = data.get("archimedean_bound")
    return ModuleDescription(
        sig,
        tuple(gens),
        name=data.get("name", "custom"),
        archimedean_bound=None if bound is None else float(bound),
        reducer=data.get("reducer"),
    )


def module_to_dict(Q: ModuleDescription) -> dict:
    gens = []
    for g in Q.inequalities:
        if g.kind == SCALAR:
            gens.append({"kind": SCALAR, "poly": format_poly(g.payload), "label": g.label})
        else:
            gens.append({"kind": PENCIL, "matrix": [[format_poly(p) for p in row] for row in g.payload],
                         "label": g.label})
    return {
        "name": Q.name,
        "signature": {"nvars": Q.sig.nvars, "hermitian": list(Q.sig.hermitian), "names": list(Q.sig.names)},
        "generators": gens,
        "relations": [format_poly(g.payload) for g in Q.relations],
        "archimedean_bound": Q.archimedean_bound,
        "reducer": Q.reducer,
        "preset": Q.name if _resolvable(Q.name) else None,
    }


def _resolvable(name: str) -> bool:
    try:
        preset(name)
    except ModuleError:
        return False
    return True


def load_module(path: str) -> ModuleDescription:
    with open(path) as fh:
        return module_from_dict(json.load(fh))
