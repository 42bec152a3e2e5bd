"""Discrete Heisenberg group: normal forms, rational irreps and Harper norms.

Group elements are kept as ``a^i b^j c^k`` with ``c = a b a^-1 b^-1`` central,
so ``b a = a b c^-1`` and

    (i, j, k) (i', j', k') = (i + i', j + j', k + k' - j i').
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import minimize_scalar

from .freealg import MatrixTuple, Signature

SIG = Signature(3, (False,) * 3, ("a", "b", "c"))

# letter index -> group generator exponent vector
_LETTER_ELEMENT = {
    0: (1, 0, 0), 3: (-1, 0, 0),
    1: (0, 1, 0), 4: (0, -1, 0),
    2: (0, 0, 1), 5: (0, 0, -1),
}
_CHAR_LETTER = {"a": 0, "b": 1, "c": 2, "A": 3, "B": 4, "C": 5}


@dataclass(frozen=True)
class HeisenbergWord:
    i: int
    j: int
    k: int
    phase: complex = 1.0

    def __mul__(self, other: "HeisenbergWord") -> "HeisenbergWord":
        return HeisenbergWord(
            self.i + other.i, self.j + other.j, self.k + other.k - self.j * other.i,
            self.phase * other.phase,
        )

    def inverse(self) -> "HeisenbergWord":
        return HeisenbergWord(-self.i, -self.j, -self.k - self.i * self.j, 1 / self.phase)

    @property
    def exponents(self) -> tuple:
        return (self.i, self.j, self.k)

    def at_angle(self, theta: float) -> "HeisenbergWord":
        """Image in the quotient where c acts as e^{i theta}: c-power folded into the phase."""
        return HeisenbergWord(self.i, self.j, 0, self.phase * np.exp(1j * theta * self.k))


IDENTITY = HeisenbergWord(0, 0, 0)


def word_to_element(w: Iterable) -> HeisenbergWord:
    """Reduce a word of letter indices (a,b,c = 0,1,2; adjoints 3,4,5)."""
    i = j = k = 0
    for x in w:
        di, dj, dk = _LETTER_ELEMENT[x]
        # (i,j,k)(di,dj,dk)
        k += dk - j * di
        i += di
        j += dj
    return HeisenbergWord(i, j, k)


def element_to_word(g: HeisenbergWord) -> tuple:
    out = []
    out += [0] * g.i if g.i >= 0 else [3] * (-g.i)
    out += [1] * g.j if g.j >= 0 else [4] * (-g.j)
    out += [2] * g.k if g.k >= 0 else [5] * (-g.k)
    return tuple(out)


def parse_word(text: str) -> tuple:
    """``"abAB"`` style words; upper case letters are inverses."""
    try:
        return tuple(_CHAR_LETTER[ch] for ch in text if not ch.isspace())
    except KeyError as e:
        raise ValueError(f"unknown letter {e.args[0]!r}; use a,b,c and A,B,C for inverses") from None


def normal_form(word) -> HeisenbergWord:
    if isinstance(word, str):
        word = parse_word(word)
    return word_to_element(word)


# ---------------------------------------------------------------------------
# representations


def clock_shift(q: int, p: int) -> tuple:
    # exact residues keep every entry correctly rounded
    A = np.diag(np.exp(2j * np.pi * ((p * np.arange(q)) % q) / q))
    B = np.roll(np.eye(q, dtype=complex), 1, axis=0)  # B e_k = e_{k+1}
    return A, B


def irrep(p: int, q: int, k1: float = 0.0, k2: float = 0.0) -> MatrixTuple:
    """q-dimensional irreducible representation with c -> e^{2 pi i p/q}."""
    if q < 1 or math.gcd(p, q) != 1:
        raise ValueError(f"need gcd(p, q) = 1 and q >= 1, got p={p}, q={q}")
    A, B = clock_shift(q, p)
    A = np.exp(1j * k1) * A
    B = np.exp(1j * k2) * B
    C = np.exp(2j * np.pi * p / q) * np.eye(q)
    return MatrixTuple((A, B, C), SIG)


def relation_residual(X: MatrixTuple) -> float:
    A, B, C = X.mats
    I = np.eye(X.dim)
    res = [
        A.conj().T @ A - I, A @ A.conj().T - I,
        B.conj().T @ B - I, B @ B.conj().T - I,
        C.conj().T @ C - I, C @ C.conj().T - I,
        A @ B - C @ B @ A, C @ A - A @ C, C @ B - B @ C,
    ]
    return max(float(np.abs(r).max()) for r in res)


def root_rep(n: int, k: int) -> MatrixTuple:
    """n-dimensional representation with c -> e^{2 pi i k/n} (copies of one irrep)."""
    if n < 1 or not 0 <= k < n:
        raise ValueError("need 0 <= k < n")
    fr = Fraction(k, n)
    p, q = fr.numerator, fr.denominator
    A, B, C = irrep(p, q).mats
    copies = n // q
    I = np.eye(copies)
    return MatrixTuple((np.kron(I, A), np.kron(I, B), np.kron(I, C)), SIG)


def projection(X: MatrixTuple) -> tuple:
    """Normalized-trace values of ((c + c*)/2, (c - c*)/(2i))."""
    C = X.mats[2]
    t = np.trace(C) / X.dim
    return float(t.real), float(t.imag)


def harper_matrix(p: int, q: int, k1: float, k2: float) -> np.ndarray:
    A, B, _ = irrep(p, q, k1, k2).mats
    H = A + A.conj().T + B + B.conj().T
    return (H + H.conj().T) / 2


def _lam_max(p, q, k1, k2) -> float:
    H = harper_matrix(p, q, k1, k2)
    return float(eigh(H, eigvals_only=True, subset_by_index=[q - 1, q - 1])[0])


def _golden_refine(f, k1, k2, h, passes=2):
    best = f(k1, k2)
    for _ in range(passes):
        r = minimize_scalar(lambda t: -f(t, k2), bounds=(k1 - h, k1 + h), method="bounded",
                            options={"xatol": 1e-10})
        if -r.fun > best:
            best, k1 = -r.fun, r.x
        r = minimize_scalar(lambda t: -f(k1, t), bounds=(k2 - h, k2 + h), method="bounded",
                            options={"xatol": 1e-10})
        if -r.fun > best:
            best, k2 = -r.fun, r.x
    return best


def _extreme(p: int, q: int, grid: int, sign: float) -> float:
    # Bloch phases are periodic mod 2pi/q in each direction
    period = 2 * np.pi / q
    ks = period * np.arange(grid) / grid
    f = (lambda a, b: _lam_max(p, q, a, b)) if sign > 0 else (lambda a, b: _lam_min(p, q, a, b))
    vals = np.array([[f(a, b) for b in ks] for a in ks])
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
    best = max(float(vals[i, j]), _golden_refine(f, ks[i], ks[j], period / grid))
    return best


def _lam_min(p, q, k1, k2) -> float:
    H = harper_matrix(p, q, k1, k2)
    return -float(eigh(H, eigvals_only=True, subset_by_index=[0, 0])[0])


def harper_norm(p: int, q: int, grid: int = 64) -> float:
    """Norm of a + a* + b + b* over all irreps with c -> e^{2 pi i p/q}."""
    if grid < 2:
        raise ValueError("grid must be at least 2")
    if math.gcd(p, q) != 1:
        raise ValueError("p and q must be coprime")
    return _extreme(p, q, grid, +1.0)


def harper_min(p: int, q: int, grid: int = 64) -> float:
    """Smallest spectral value of a + a* + b + b* over the same irreps."""
    return -_extreme(p, q, grid, -1.0)


def farey(q_max: int) -> list:
    """Fractions p/q in [0, 1] with q <= q_max, sorted."""
    if q_max < 1:
        raise ValueError("q_max must be at least 1")
    fr = {Fraction(p, q) for q in range(1, q_max + 1) for p in range(q + 1)}
    return sorted(fr)


@dataclass(frozen=True)
class ButterflyRecord:
    theta: float
    p: int
    q: int
    norm_plus: float
    norm_minus: float


def butterfly(q_max: int, grid: int = 64, jobs: int = 1) -> list:
    """Boundary of the butterfly: one record per Farey fraction p/q, q <= q_max."""
    fracs = farey(q_max)

    def one(fr: Fraction) -> ButterflyRecord:
        p, q = fr.numerator, fr.denominator
        v = harper_norm(p, q, grid)
        return ButterflyRecord(2 * np.pi * p / q, p, q, v, -v)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(jobs) as ex:
            return list(ex.map(one, fracs))
    return [one(fr) for fr in fracs]


def butterfly_csv(records: Sequence[ButterflyRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "p", "q", "norm_plus", "norm_minus"])
    for r in records:
        w.writerow([f"{r.theta:.12g}", r.p, r.q, f"{r.norm_plus:.12g}", f"{r.norm_minus:.12g}"])
    return buf.getvalue()


def slope_mismatch(p: int, q: int, m: int, grid: int = 4) -> tuple:
    """Left and right difference quotients of theta -> ||H_theta|| at 2 pi p/q.

    Only p/q = 1/2 is supported; the neighbours are m/(2m+1) and (m+1)/(2m+1).
    """
    if (p, q) != (1, 2):
        raise ValueError("only implemented at theta = pi")
    Q = 2 * m + 1
    th0 = np.pi
    v0 = harper_norm(1, 2, 64)
    left = (v0 - harper_norm(m, Q, grid)) / (th0 - 2 * np.pi * m / Q)
    right = (harper_norm(m + 1, Q, grid) - v0) / (2 * np.pi * (m + 1) / Q - th0)
    return left, right


def roots_hull(n_max: int) -> list:
    """Distinct roots of unity of order <= n_max as (x, y) points, sorted by angle."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    fr = sorted({Fraction(k, n) for n in range(1, n_max + 1) for k in range(n)})
    return [(math.cos(2 * math.pi * f), math.sin(2 * math.pi * f)) for f in fr]
