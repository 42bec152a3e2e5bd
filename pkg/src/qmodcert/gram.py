"""Linear systems in Gram-matrix variables for truncated quadratic modules.

An element of the degree-d truncation is written as

    sum_g  sum_{I,J} G^g_{IJ} w_I* g w_J   +   sum_{r,(u,v)} (c u r v + conj(c) (u r v)*)

with Hermitian PSD ``G^g`` and free complex multipliers ``c``.  Matching
coefficients against a target gives complex linear equations in the ``G``s;
each equation is split into a real and an imaginary row.  The free
multipliers (and any other free real parameters) are eliminated by
projecting onto the orthogonal complement of their column space, leaving a
standard-form SDP.

Matrix-valued elements (for ``Q (x) M_n``) use coefficient keys
``(channel, word, alpha, beta)``; the Gram index is ``(block row, alpha)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .freealg import FreePoly
from .qmodule import REDUCERS, SCALAR, Generator, ModuleDescription, TruncationPlan, localizing_block, reduce_poly
from .sdp import SdpProblem

ZERO_TOL = 1e-12


@dataclass
class GramBlock:
    label: str
    gen: Generator | None  # None for the plain sums of squares
    words: tuple
    polys: list  # reduced localizing block, (s N) x (s N)
    n: int = 1
    channel: int = 0

    @property
    def size(self) -> int:
        return len(self.polys) * self.n


@dataclass
class FreeColumn:
    """A real free parameter with its coefficient contributions."""

    label: str
    coeffs: dict  # key -> complex
    objective: float = 0.0
    element: FreePoly | None = None  # scalar element contributed per unit value
    meta: object = None


@dataclass
class ScalarBlock:
    """A 1x1 PSD variable (t >= 0) entering with fixed coefficients."""

    label: str
    coeffs: dict
    objective: float = 0.0


@dataclass
class Elimination:
    keys: list
    rows: list  # (key, part) for each real row before projection
    proj: np.ndarray | None  # U_perp^T, or None when nothing was eliminated
    solve_free: np.ndarray | None  # maps (b - A(G)) to free parameters
    unbounded: bool = False
    offset: float = 0.0
    A_full: list = field(default_factory=list)
    b_full: np.ndarray | None = None


class GramSystem:
    def __init__(self, Q: ModuleDescription, exact: bool = True):
        self.Q = Q
        self.sig = Q.sig
        self.reducer = Q.reducer if exact else None
        self.blocks: list[GramBlock] = []
        self.scalars: list[ScalarBlock] = []
        self.free: list[FreeColumn] = []
        self.target: dict = {}
        self.block_objective: dict = {}  # block index -> Hermitian matrix

    # -- construction -------------------------------------------------------

    def reduce(self, p: FreePoly) -> FreePoly:
        return reduce_poly(p, self.reducer)

    def add_truncation(self, plan: TruncationPlan, channel: int = 0, n: int = 1):
        one = Generator(SCALAR, self.sig.one(), "1")
        self._add_block("sos", None, one, plan.sos_words, channel, n)
        for g, words in zip(self.Q.inequalities, plan.gen_words):
            self._add_block(g.label or g.kind, g, g, words, channel, n)
        for g, pairs in zip(plan.relations, plan.ideal_pairs):
            self.add_ideal(g.payload, pairs, channel, n, g.label)

    def _add_block(self, label, gen, g, words, channel, n):
        if not words:
            return
        polys = localizing_block(g, words, reducer=self.reducer)
        self.blocks.append(GramBlock(label, gen, tuple(words), polys, n, channel))

    def add_ideal(self, r: FreePoly, pairs, channel: int = 0, n: int = 1, label: str = ""):
        sig = self.sig
        for u, v in pairs:
            m = self.reduce(sig.word(u) * r * sig.word(v))
            if m.is_zero():
                continue
            ms = self.reduce(m.adj())
            for a in range(n):
                for b in range(n):
                    re, im = {}, {}
                    for w, c in m.terms.items():
                        _acc(re, (channel, w, a, b), c)
                        _acc(im, (channel, w, a, b), 1j * c)
                    for w, c in ms.terms.items():
                        _acc(re, (channel, w, b, a), c)
                        _acc(im, (channel, w, b, a), -1j * c)
                    tag = f"{label}[{u},{v}]({a},{b})"
                    self.free.append(FreeColumn("re " + tag, re, element=m + ms))
                    self.free.append(FreeColumn("im " + tag, im, element=1j * m - 1j * ms))

    def add_scalar(self, label: str, coeffs: dict, objective: float = 0.0):
        self.scalars.append(ScalarBlock(label, dict(coeffs), objective))

    def add_free(self, label: str, coeffs: dict, objective: float = 0.0, meta=None):
        self.free.append(FreeColumn(label, dict(coeffs), objective, meta=meta))

    def set_target(self, p: FreePoly, channel: int = 0, a: int = 0, b: int = 0, sign: float = 1.0):
        for w, c in self.reduce(p).terms.items():
            _acc(self.target, (channel, w, a, b), sign * c)

    # -- keys -----------------------------------------------------------------

    def partner(self, key):
        ch, w, a, b = key
        if ch == "norm":
            return key
        w2 = self.sig.adjoint_word(w)
        if self.reducer is not None:
            w2 = REDUCERS[self.reducer](self.sig, w2)
        return (ch, w2, b, a)

    def _block_terms(self, blk: GramBlock):
        """Yield (key, I, J, coefficient) for the block."""
        n = blk.n
        for p, row in enumerate(blk.polys):
            for q, poly in enumerate(row):
                for w, c in poly.terms.items():
                    for a in range(n):
                        for b in range(n):
                            yield (blk.channel, w, a, b), p * n + a, q * n + b, c

    def all_keys(self) -> list:
        keys = set(self.target)
        for blk in self.blocks:
            for key, *_ in self._block_terms(blk):
                keys.add(key)
        for col in self.free + self.scalars:
            keys.update(col.coeffs)
        return sorted(keys, key=_key_order)

    # -- assembly -------------------------------------------------------------

    def is_real(self) -> bool:
        vals = [c for blk in self.blocks for *_, c in self._block_terms(blk)]
        vals += list(self.target.values())
        vals += [c for col in self.scalars for c in col.coeffs.values()]
        # "im" columns carry i*(...) and drop out of a real system; that is exact
        # only when they do not touch the objective
        vals += [c for col in self.free if not col.label.startswith("im ") for c in col.coeffs.values()]
        if any(col.objective != 0 for col in self.free if col.label.startswith("im ")):
            return False
        mats = list(self.block_objective.values())
        return all(abs(complex(v).imag) <= ZERO_TOL for v in vals) and all(
            not np.iscomplexobj(M) or np.abs(M.imag).max(initial=0) <= ZERO_TOL for M in mats
        )

    def build(self) -> tuple:
        """Assemble the SDP; returns (SdpProblem, Elimination)."""
        real = self.is_real()
        keys = self.all_keys()
        key_set = set(keys)
        canon = []
        for k in keys:
            pk = self.partner(k)
            if _key_order(k) <= _key_order(pk) or pk not in key_set:
                canon.append(k)
        canon_set = {k: i for i, k in enumerate(canon)}
        rows = []
        for k in canon:
            rows.append((k, "re"))
            if not real and self.partner(k) != k:
                rows.append((k, "im"))
        row_of = {r: i for i, r in enumerate(rows)}
        m = len(rows)
        dtype = float if real else complex

        # Gram blocks: coefficient = sum_IJ G_IJ K_IJ = tr(A G) with A = K^T
        A_blocks = []
        for blk in self.blocks:
            K = np.zeros((m, blk.size, blk.size), dtype=complex)
            for key, I, J, c in self._block_terms(blk):
                if key not in canon_set:
                    continue
                if (key, "re") in row_of:
                    K[row_of[(key, "re")], I, J] += c
                if (key, "im") in row_of:
                    K[row_of[(key, "im")], I, J] += c
            A = np.transpose(K, (0, 2, 1))
            H = np.empty_like(A)
            for (key, part), i in row_of.items():
                Ai = A[i]
                H[i] = (Ai + Ai.conj().T) / 2 if part == "re" else (Ai - Ai.conj().T) / 2j
            A_blocks.append(H.real.copy() if real else H)
        for sc in self.scalars:
            col = np.zeros((m, 1, 1))
            for key, c in sc.coeffs.items():
                if key in canon_set:
                    if (key, "re") in row_of:
                        col[row_of[(key, "re")], 0, 0] += complex(c).real
                    if (key, "im") in row_of:
                        col[row_of[(key, "im")], 0, 0] += complex(c).imag
            A_blocks.append(col)
        bvec = np.zeros(m)
        for key, c in self.target.items():
            if key in canon_set:
                if (key, "re") in row_of:
                    bvec[row_of[(key, "re")]] += complex(c).real
                if (key, "im") in row_of:
                    bvec[row_of[(key, "im")]] += complex(c).imag
            elif abs(c) > ZERO_TOL and self.partner(key) not in canon_set:
                raise AssertionError("target key outside the key set")

        free = [c for c in self.free if not (real and c.label.startswith("im "))]
        B = np.zeros((m, len(free)))
        cf = np.zeros(len(free))
        for j, col in enumerate(free):
            cf[j] = col.objective
            for key, c in col.coeffs.items():
                if key in canon_set:
                    if (key, "re") in row_of:
                        B[row_of[(key, "re")], j] += complex(c).real
                    if (key, "im") in row_of:
                        B[row_of[(key, "im")], j] += complex(c).imag

        sizes = [blk.size for blk in self.blocks] + [1] * len(self.scalars)
        C = []
        for i, blk in enumerate(self.blocks):
            M = self.block_objective.get(i)
            C.append(np.zeros((blk.size, blk.size), dtype=dtype) if M is None else (M.real if real else M))
        for sc in self.scalars:
            C.append(np.array([[sc.objective]]))
        has_obj = any(np.abs(M).max(initial=0) > 0 for M in C) or np.abs(cf).max(initial=0) > 0

        elim = Elimination(keys=canon, rows=rows, proj=None, solve_free=None, A_full=A_blocks, b_full=bvec)
        self._free_used = free
        if len(free):
            U, S, Vt = np.linalg.svd(B, full_matrices=True)
            r = int(np.sum(S > 1e-10 * max(S[0] if S.size else 0.0, 1.0)))
            Ur, Up = U[:, :r], U[:, r:]
            Vr = Vt[:r].T
            elim.proj = Up.T
            elim.solve_free = Vr @ np.diag(1 / S[:r]) @ Ur.T
            if np.abs(cf).max(initial=0) > 0:
                resid = cf - Vr @ (Vr.T @ cf)
                elim.unbounded = bool(np.linalg.norm(resid) > 1e-9 * max(1.0, np.linalg.norm(cf)))
                g = Ur @ ((Vr.T @ cf) / S[:r])
                elim.offset = float(g @ bvec)
                C = [Cb - np.tensordot(g, Ab, axes=(0, 0)) for Cb, Ab in zip(C, A_blocks)]
            A_proj = [np.tensordot(Up.T, Ab, axes=(1, 0)) for Ab in A_blocks]
            b_proj = Up.T @ bvec
        else:
            A_proj, b_proj = A_blocks, bvec
        P = SdpProblem(tuple(sizes), A_proj, b_proj, C if has_obj else None)
        return P, elim

    @property
    def free_columns(self) -> list:
        return self._free_used

    def free_values(self, elim: Elimination, X: list, homogeneous: bool = False) -> np.ndarray:
        """Least-norm free parameters completing the Gram blocks ``X``.

        ``homogeneous`` drops the right-hand side (for recession directions).
        """
        if elim.solve_free is None:
            return np.zeros(len(self._free_used))
        AX = np.zeros(len(elim.b_full))
        for Ab, Xb in zip(elim.A_full, X):
            AX += np.einsum("kij,ij->k", Ab.conj(), Xb).real
        rhs = -AX if homogeneous else elim.b_full - AX
        return elim.solve_free @ rhs

    # -- reconstruction -------------------------------------------------------

    def reconstruct(self, X: list, f: np.ndarray | None = None) -> dict:
        """Coefficients (key -> complex) of the element given by Gram blocks and free values."""
        out: dict = {}
        for blk, G in zip(self.blocks, X):
            for key, I, J, c in self._block_terms(blk):
                _acc(out, key, G[I, J] * c)
        for sc, G in zip(self.scalars, X[len(self.blocks):]):
            for key, c in sc.coeffs.items():
                _acc(out, key, G[0, 0].real * c)
        if f is not None:
            for col, val in zip(self._free_used, f):
                for key, c in col.coeffs.items():
                    _acc(out, key, val * c)
        return {k: v for k, v in out.items() if abs(v) > ZERO_TOL}


def _acc(d: dict, key, c):
    d[key] = d.get(key, 0) + c


def _key_order(key):
    ch, w, a, b = key
    return (str(ch), len(w), tuple(w), a, b)


def coefficient_gap(lhs: dict, rhs: dict) -> float:
    keys = set(lhs) | set(rhs)
    return max((abs(lhs.get(k, 0) - rhs.get(k, 0)) for k in keys), default=0.0)
