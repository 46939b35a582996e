"""Noncommutative words in Alice's and Bob's +-1 observables.

Letters are ``A0, A1, A2`` (Alice) and ``B0, B1, B2`` (Bob).  Every letter
squares to the identity and Alice's letters commute with Bob's, so a word has
a unique normal form: Alice's block then Bob's block, each free of adjacent
repeats.  Moments are real-symmetrized, so a word and its adjoint share one
moment key.
"""
from __future__ import annotations

import itertools
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import UnsupportedControl

ALPHABET = ("A0", "A1", "A2", "B0", "B1", "B2")
PRUNE = 1e-14

Word = tuple


def _party(letter: str) -> str:
    if letter not in ALPHABET:
        raise ValueError(f"unknown letter {letter!r}")
    return letter[0]


def _reduce_block(letters: Iterable[str]) -> list:
    stack: list = []
    for letter in letters:
        if stack and stack[-1] == letter:
            stack.pop()
        else:
            stack.append(letter)
    return stack


def parse_word(text: str) -> Word:
    """``"A0A1B0"`` -> ``("A0", "A1", "B0")``; ``""`` or ``"I"`` is the identity."""
    if text in ("", "I"):
        return ()
    if len(text) % 2:
        raise ValueError(f"cannot parse word {text!r}")
    return tuple(text[k : k + 2] for k in range(0, len(text), 2))


def word_str(w: Word) -> str:
    return "".join(w) if w else "I"


def canonicalize_word(w) -> Word:
    if isinstance(w, str):
        w = parse_word(w)
    a = _reduce_block(x for x in w if _party(x) == "A")
    b = _reduce_block(x for x in w if _party(x) == "B")
    return tuple(a + b)


def adjoint(w) -> Word:
    return canonicalize_word(tuple(reversed(canonicalize_word(w))))


def moment_key(w) -> Word:
    """Representative of ``{w, w^dagger}``: shorter first, then lexicographic."""
    c = canonicalize_word(w)
    d = adjoint(c)
    return min(c, d, key=lambda u: (len(u), u))


def key_order(k: Word):
    return (len(k), k)


class Poly:
    """Real linear combination of canonical words, with operator product."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        self.terms: dict = {}
        for w, c in (terms or {}).items():
            self._add(canonicalize_word(w), float(c))
        self._prune()

    def _add(self, w: Word, c: float):
        self.terms[w] = self.terms.get(w, 0.0) + c

    def _prune(self):
        for w in [w for w, c in self.terms.items() if abs(c) <= PRUNE]:
            del self.terms[w]

    @classmethod
    def identity(cls, coef: float = 1.0) -> "Poly":
        return cls({(): coef})

    @classmethod
    def letter(cls, name: str, coef: float = 1.0) -> "Poly":
        _party(name)
        return cls({(name,): coef})

    @classmethod
    def lift(cls, x) -> "Poly":
        if isinstance(x, Poly):
            return x
        if isinstance(x, str):
            return cls({parse_word(x): 1.0})
        return cls.identity(float(x))

    def __add__(self, other):
        other = Poly.lift(other)
        out = Poly(self.terms)
        for w, c in other.terms.items():
            out._add(w, c)
        out._prune()
        return out

    __radd__ = __add__

    def __neg__(self):
        return Poly({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-Poly.lift(other))

    def __rsub__(self, other):
        return Poly.lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, (Poly, str)):
            return Poly({w: c * float(other) for w, c in self.terms.items()})
        other = Poly.lift(other)
        out = Poly()
        for (u, a), (v, b) in itertools.product(self.terms.items(), other.terms.items()):
            out._add(canonicalize_word(u + v), a * b)
        out._prune()
        return out

    def __rmul__(self, other):
        return Poly.lift(other) * self

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def __eq__(self, other):
        other = Poly.lift(other)
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0.0) - other.terms.get(k, 0.0)) <= 1e-12 for k in keys)

    def __repr__(self):
        if not self.terms:
            return "Poly(0)"
        body = " + ".join(f"{c:.6g}*{word_str(w)}" for w, c in sorted(self.terms.items(), key=lambda t: key_order(t[0])))
        return f"Poly({body})"

    def adjoint(self) -> "Poly":
        return Poly({adjoint(w): c for w, c in self.terms.items()})

    def coefficient(self, w) -> float:
        return self.terms.get(canonicalize_word(w), 0.0)

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def letters(self) -> set:
        return {x for w in self.terms for x in w}

    def parties(self) -> set:
        return {x[0] for x in self.letters()}

    def is_affine(self) -> bool:
        return self.degree() <= 1

    def matrix(self, letters: Mapping[str, np.ndarray], dim: int | None = None) -> np.ndarray:
        """Evaluate on one party's side, substituting each letter by a matrix."""
        if dim is None:
            dim = next(iter(letters.values())).shape[0]
        out = np.zeros((dim, dim), dtype=complex)
        for w, c in self.terms.items():
            m = np.eye(dim, dtype=complex)
            for x in w:
                m = m @ letters[x]
            out += c * m
        return out

    def expectation(self) -> "MomentPolynomial":
        return MomentPolynomial.from_poly(self)


class MomentPolynomial:
    """Linear form over real-symmetrized moments ``m[key] = Re<psi|w|psi>``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping | None = None):
        self.coeffs: dict = {}
        for k, c in (coeffs or {}).items():
            key = moment_key(k)
            self.coeffs[key] = self.coeffs.get(key, 0.0) + float(c)
        for k in [k for k, c in self.coeffs.items() if abs(c) <= PRUNE]:
            del self.coeffs[k]

    @classmethod
    def from_poly(cls, p: Poly) -> "MomentPolynomial":
        return cls(p.terms)

    def keys(self) -> list:
        return sorted(self.coeffs, key=key_order)

    @property
    def constant(self) -> float:
        return self.coeffs.get((), 0.0)

    def evaluate(self, moments) -> float:
        """``moments`` is a mapping from key to value, or a callable on keys."""
        get = moments if callable(moments) else moments.__getitem__
        return float(sum(c * get(k) for k, c in self.coeffs.items()))

    def __repr__(self):
        body = " + ".join(f"{self.coeffs[k]:.6g}*<{word_str(k)}>" for k in self.keys())
        return f"MomentPolynomial({body})"


def poly_product(p, q) -> Poly:
    return Poly.lift(p) * Poly.lift(q)


def word_matrix(w: Word, letters: Mapping[str, np.ndarray], da: int, db: int) -> np.ndarray:
    """Matrix of a canonical word on ``A (x) B``."""
    ma = np.eye(da, dtype=complex)
    mb = np.eye(db, dtype=complex)
    for x in canonicalize_word(w):
        if x[0] == "A":
            ma = ma @ letters[x]
        else:
            mb = mb @ letters[x]
    return np.kron(ma, mb)


def moment_evaluator(state: np.ndarray, letters: Mapping[str, np.ndarray], da: int, db: int) -> Callable:
    """Callable giving ``Re<state|w|state>`` for any word, with caching."""
    psi = np.asarray(state, dtype=complex).ravel()
    cache: dict = {}

    def value(k) -> float:
        k = canonicalize_word(k)
        if k not in cache:
            cache[k] = float(np.real(psi.conj() @ word_matrix(k, letters, da, db) @ psi))
        return cache[k]

    return value


def _kraus_products(z: Poly, x: Poly) -> dict:
    """``K_k^dagger K_i`` for the swap Kraus operators ``K_0=(I+Z)/2, K_1=X(I-Z)/2``."""
    ident = Poly.identity()
    k = {0: (ident + z) / 2, 1: x * (ident - z) / 2}
    return {(kk, ii): k[kk].adjoint() * k[ii] for kk in (0, 1) for ii in (0, 1)}


def _check_control(name: str, p: Poly, party: str):
    if not p.is_affine():
        raise UnsupportedControl(f"{name} has degree {p.degree()}; controls must be affine in the letters")
    if p.parties() - {party}:
        raise UnsupportedControl(f"{name} uses letters of the other party: {sorted(p.letters())}")


def expand_swap_fidelity(controls, target) -> MomentPolynomial:
    """Swap-circuit fidelity with ``target`` as a linear form over moments.

    ``controls`` carries symbolic ``za, xa, zb, xb`` (affine :class:`Poly`);
    ``target`` is a two-qubit state with real amplitudes, first qubit Alice's
    ancilla.  The ancilla state is
    ``rho[(i,j),(k,l)] = <(K_k^+ K_i)_A (K_l^+ K_j)_B>``.
    """
    za, xa, zb, xb = (Poly.lift(getattr(controls, n)) for n in ("za", "xa", "zb", "xb"))
    for name, p, party in (("Z'_A", za, "A"), ("X'_A", xa, "A"), ("Z'_B", zb, "B"), ("X'_B", xb, "B")):
        _check_control(name, p, party)
    t = np.asarray(getattr(target, "amplitudes", target), dtype=complex).ravel()
    if t.size != 4 or np.max(np.abs(t.imag)) > 1e-14:
        raise ValueError("target must be a two-qubit state with real amplitudes")
    t = t.real.reshape(2, 2)
    ka, kb = _kraus_products(za, xa), _kraus_products(zb, xb)
    total = Poly()
    for i, j, k, l in itertools.product((0, 1), repeat=4):
        w = t[i, j] * t[k, l]
        if w == 0.0:
            continue
        total = total + (ka[(k, i)] * kb[(l, j)]) * w
    return total.expectation()
