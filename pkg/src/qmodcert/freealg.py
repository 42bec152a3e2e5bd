"""Free *-algebra arithmetic: words, polynomials, matrix tuples and evaluation.

A variable ``z_i`` is either hermitian (one letter, ``z_i* = z_i``) or not, in
which case it contributes two letters: index ``i`` for ``z_i`` and ``i + n``
for ``z_i*``.  Words are tuples of letter indices; the empty tuple is the unit.
"""
from __future__ import annotations

import functools
import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

ZERO_TOL = 1e-12
HERM_TOL = 1e-10

Word = tuple  # tuple[int, ...]


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    nvars: int
    hermitian: tuple = ()
    names: tuple = ()

    def __post_init__(self):
        if self.nvars < 1:
            raise ValueError("nvars must be positive")
        herm = tuple(bool(h) for h in self.hermitian) or (False,) * self.nvars
        if len(herm) != self.nvars:
            raise ValueError("hermitian flags must match nvars")
        names = tuple(self.names)
        if not names:
            names = ("z",) if self.nvars == 1 else tuple(f"z{i + 1}" for i in range(self.nvars))
        if len(names) != self.nvars or len(set(names)) != self.nvars:
            raise ValueError("names must be distinct, one per variable")
        object.__setattr__(self, "hermitian", herm)
        object.__setattr__(self, "names", names)

    @functools.cached_property
    def letters(self) -> tuple:
        """Letter indices in alphabet order."""
        extra = [i + self.nvars for i in range(self.nvars) if not self.hermitian[i]]
        return tuple(range(self.nvars)) + tuple(extra)

    @functools.cached_property
    def letter_set(self) -> frozenset:
        return frozenset(self.letters)

    def star(self, letter: int) -> int:
        n = self.nvars
        if letter < n:
            return letter if self.hermitian[letter] else letter + n
        return letter - n

    def var_of(self, letter: int) -> int:
        return letter if letter < self.nvars else letter - self.nvars

    def is_starred(self, letter: int) -> bool:
        return letter >= self.nvars

    def letter_name(self, letter: int) -> str:
        name = self.names[self.var_of(letter)]
        return name + "^*" if self.is_starred(letter) else name

    def adjoint_word(self, w: Word) -> Word:
        return tuple(self.star(x) for x in reversed(w))

    # constructors
    def one(self) -> "FreePoly":
        return FreePoly({(): 1.0}, self)

    def zero(self) -> "FreePoly":
        return FreePoly({}, self)

    def var(self, i: int) -> "FreePoly":
        return FreePoly({(i,): 1.0}, self)

    def var_star(self, i: int) -> "FreePoly":
        return FreePoly({(self.star(i),): 1.0}, self)

    def word(self, w: Sequence[int]) -> "FreePoly":
        return FreePoly({tuple(w): 1.0}, self)

    def const(self, c: complex) -> "FreePoly":
        return FreePoly({(): c}, self)


def _clean(terms: Mapping) -> dict:
    out = {}
    for w, c in terms.items():
        c = complex(c)
        if abs(c) > ZERO_TOL:
            out[tuple(w)] = c
    return out


class FreePoly:
    """Polynomial in the free *-algebra with complex coefficients.

    Instances are treated as immutable; arithmetic returns new objects.
    """

    __slots__ = ("terms", "sig")

    def __init__(self, terms: Mapping, sig: Signature):
        self.sig = sig
        self.terms = _clean(terms)
        for w in self.terms:
            for x in w:
                if x not in sig.letter_set:
                    raise SignatureError(f"letter {x} not in alphabet of {sig}")

    @property
    def nvars(self) -> int:
        return self.sig.nvars

    def _check(self, other: "FreePoly"):
        if other.sig != self.sig:
            raise SignatureError("variable signatures differ")

    def _coerce(self, other) -> "FreePoly":
        if isinstance(other, FreePoly):
            self._check(other)
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return self.sig.const(complex(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t = dict(self.terms)
        for w, c in other.terms.items():
            t[w] = t.get(w, 0) + c
        return FreePoly(t, self.sig)

    __radd__ = __add__

    def __neg__(self):
        return FreePoly({w: -c for w, c in self.terms.items()}, self.sig)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return FreePoly({w: c * other for w, c in self.terms.items()}, self.sig)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return FreePoly({w: other * c for w, c in self.terms.items()}, self.sig)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * (1.0 / other)
        return NotImplemented

    def __pow__(self, k: int):
        out = self.sig.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, FreePoly):
            return NotImplemented
        return self.sig == other.sig and self.terms == other.terms

    def __hash__(self):
        return hash((self.sig, frozenset(self.terms.items())))

    def __repr__(self):
        return f"FreePoly({format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)

    @property
    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def adj(self) -> "FreePoly":
        return adjoint(self)

    def is_hermitian(self, tol: float = 0.0) -> bool:
        return is_hermitian(self, tol)

    def coeff(self, w: Sequence[int]) -> complex:
        return self.terms.get(tuple(w), 0j)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def allclose(self, other: "FreePoly", tol: float = 1e-9) -> bool:
        return (self - other).max_abs_coeff() <= tol


def mul(p: FreePoly, q: FreePoly) -> FreePoly:
    p._check(q)
    t: dict = {}
    for w1, c1 in p.terms.items():
        for w2, c2 in q.terms.items():
            w = w1 + w2
            t[w] = t.get(w, 0) + c1 * c2
    return FreePoly(t, p.sig)


def adjoint(p: FreePoly) -> FreePoly:
    sig = p.sig
    return FreePoly({sig.adjoint_word(w): c.conjugate() for w, c in p.terms.items()}, sig)


def is_hermitian(p: FreePoly, tol: float = 0.0) -> bool:
    diff = p - adjoint(p)
    return diff.max_abs_coeff() <= tol


def hermitian_part(p: FreePoly) -> FreePoly:
    return (p + adjoint(p)) * 0.5


def monomial_basis(sig: Signature, d: int) -> list:
    """All words of degree <= d in graded-lexicographic order."""
    if d < 0:
        raise ValueError("degree must be nonnegative")
    letters = sig.letters
    out = []
    for k in range(d + 1):
        out.extend(itertools.product(letters, repeat=k))
    return out


def word_index(words: Sequence[Word]) -> dict:
    return {w: i for i, w in enumerate(words)}


def basis_size(sig: Signature, d: int) -> int:
    m = len(sig.letters)
    return sum(m**k for k in range(d + 1))


# ---------------------------------------------------------------------------
# matrix tuples and evaluation


@dataclass(frozen=True)
class MatrixTuple:
    """One square complex matrix per variable, all of the same size."""

    mats: tuple
    sig: Signature | None = field(default=None, compare=False)

    def __post_init__(self):
        mats = tuple(np.array(m, dtype=complex) for m in self.mats)
        if not mats:
            raise ValueError("empty tuple")
        s = mats[0].shape[0]
        for m in mats:
            if m.ndim != 2 or m.shape != (s, s):
                raise ValueError("matrices must be square and of equal size")
        if self.sig is not None:
            if len(mats) != self.sig.nvars:
                raise SignatureError("one matrix per variable required")
            for h, m in zip(self.sig.hermitian, mats):
                if h and np.abs(m - m.conj().T).max() > HERM_TOL * max(1.0, np.abs(m).max()):
                    raise ValueError("hermitian variable needs a Hermitian matrix")
        object.__setattr__(self, "mats", mats)

    @property
    def dim(self) -> int:
        return self.mats[0].shape[0]

    def __len__(self):
        return len(self.mats)

    def __getitem__(self, i):
        return self.mats[i]

    def letter_matrix(self, letter: int, sig: Signature) -> np.ndarray:
        m = self.mats[sig.var_of(letter)]
        return m.conj().T if sig.is_starred(letter) else m


def evaluate(p: FreePoly, X: MatrixTuple | Sequence[np.ndarray]) -> np.ndarray:
    if not isinstance(X, MatrixTuple):
        X = MatrixTuple(tuple(X))
    sig = p.sig
    if len(X) != sig.nvars:
        raise SignatureError("tuple length does not match number of variables")
    s = X.dim
    letter_mats = {x: X.letter_matrix(x, sig) for x in sig.letters}
    cache: dict = {(): np.eye(s, dtype=complex)}

    def word_mat(w):
        if w in cache:
            return cache[w]
        m = word_mat(w[:-1]) @ letter_mats[w[-1]]
        cache[w] = m
        return m

    out = np.zeros((s, s), dtype=complex)
    for w, c in p.terms.items():
        out += c * word_mat(w)
    return out


def evaluate_matrix(P: Sequence[Sequence[FreePoly]], X: MatrixTuple) -> np.ndarray:
    """Evaluate a matrix of polynomials blockwise, giving an (r*s)x(r*s) matrix."""
    return np.block([[evaluate(pij, X) for pij in row] for row in P])


# ---------------------------------------------------------------------------
# text format


def _fmt_real(x: float) -> str:
    r = repr(float(x))
    return r[:-2] if r.endswith(".0") else r


def _fmt_coeff(c: complex) -> str:
    if c.imag == 0:
        return _fmt_real(c.real)
    if c.real == 0:
        return f"({_fmt_real(c.imag)}i)"
    sign = "-" if c.imag < 0 else "+"
    return f"({_fmt_real(c.real)}{sign}{_fmt_real(abs(c.imag))}i)"


def format_word(w: Word, sig: Signature) -> str:
    return "*".join(sig.letter_name(x) for x in w)


def _word_order(sig: Signature):
    return lambda w: (len(w), w)


def format_poly(p: FreePoly) -> str:
    if not p.terms:
        return "0"
    parts = []
    for w in sorted(p.terms, key=_word_order(p.sig)):
        c = p.terms[w]
        ws = format_word(w, p.sig)
        neg = c.imag == 0 and c.real < 0
        mag = complex(-c.real, 0) if neg else c
        if not ws:
            body = _fmt_coeff(mag)
        elif mag == 1:
            body = ws
        else:
            body = f"{_fmt_coeff(mag)}*{ws}"
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?(?:i(?![A-Za-z0-9_]))?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\^\*|[-+*/()^])"
    r")"
)


class ParseError(ValueError):
    pass


def _tokenize(text: str) -> list:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
    return out


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = sig
        self.lookup = {}
        for k, name in enumerate(sig.names):
            self.lookup[name] = k
            self.lookup.setdefault(f"z{k + 1}", k)

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self) -> FreePoly:
        if not self.toks:
            raise ParseError("empty polynomial")
        p = self.expr()
        if self.i != len(self.toks):
            raise ParseError(f"trailing input at token {self.peek()[1]!r}")
        return p

    def expr(self) -> FreePoly:
        sign = 1.0
        kind, val = self.peek()
        if val in ("+", "-"):
            self.take()
            sign = -1.0 if val == "-" else 1.0
        p = self.term() * sign
        while True:
            kind, val = self.peek()
            if val not in ("+", "-"):
                return p
            self.take()
            t = self.term()
            p = p + t if val == "+" else p - t

    def term(self) -> FreePoly:
        p = self.factor()
        while True:
            kind, val = self.peek()
            if val == "*":
                self.take()
                p = p * self.factor()
            elif val == "/":
                self.take()
                q = self.factor()
                if q.degree > 0 or q.is_zero():
                    raise ParseError("can only divide by nonzero constants")
                p = p * (1.0 / q.coeff(()))
            else:
                return p

    def factor(self) -> FreePoly:
        kind, val = self.take()
        if kind == "num":
            if val.endswith("i"):
                base = self.sig.const(complex(0, float(val[:-1])))
            else:
                base = self.sig.const(float(val))
        elif kind == "name":
            if val == "i":
                base = self.sig.const(1j)
            elif val in self.lookup:
                base = self.sig.var(self.lookup[val])
            else:
                raise ParseError(f"unknown variable {val!r}")
        elif val == "(":
            base = self.expr()
            if self.take()[1] != ")":
                raise ParseError("missing ')'")
        elif val == "-":
            return -self.factor()
        else:
            raise ParseError(f"unexpected token {val!r}")
        while True:
            kind, v = self.peek()
            if v == "^*":
                self.take()
                base = adjoint(base)
            elif v == "^":
                self.take()
                k, e = self.take()
                if k != "num" or not e.isdigit():
                    raise ParseError("exponent must be a nonnegative integer")
                base = base ** int(e)
            else:
                return base


def parse_poly(text: str, sig: Signature) -> FreePoly:
    """Parse e.g. ``(1.5-2i)*z1*z2^* + 3``; inverse of :func:`format_poly`."""
    return _Parser(text, sig).parse()


def random_poly(sig: Signature, d: int, rng: np.random.Generator, density: float = 1.0) -> FreePoly:
    terms = {}
    for w in monomial_basis(sig, d):
        if rng.random() <= density:
            terms[w] = complex(rng.normal(), rng.normal())
    return FreePoly(terms, sig)


def random_tuple(sig: Signature, s: int, rng: np.random.Generator) -> MatrixTuple:
    mats = []
    for h in sig.hermitian:
        g = rng.normal(size=(s, s)) + 1j * rng.normal(size=(s, s))
        mats.append((g + g.conj().T) / 2 if h else g)
    return MatrixTuple(tuple(mats), sig)


def poly_from_terms(items: Iterable, sig: Signature) -> FreePoly:
    t: dict = {}
    for w, c in items:
        t[tuple(w)] = t.get(tuple(w), 0) + c
    return FreePoly(t, sig)
