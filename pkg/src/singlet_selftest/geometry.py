"""Geometry of (2,2,2) correlation points on the singlet boundary of the quantum set.

A point is the 2x2 table of correlators ``E[x][y] = <A_x B_y>``.  The boundary
conditions are written in terms of ``arcsin(E)``; the realization geometry in
terms of the angles ``alpha = arccos(E)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NotSelfTesting

DEFAULT_TOL = 1e-9

#: Degenerate pattern (positions with alpha in {0, pi}) -> case label, in the
#: order the cases are conventionally enumerated.
DEGENERATE_CASES = {
    frozenset({(0, 0), (1, 0)}): "i",
    frozenset({(0, 0), (0, 1)}): "ii",
    frozenset({(0, 0), (1, 1)}): "iii",
    frozenset({(0, 1), (1, 0)}): "iv",
    frozenset({(0, 1), (1, 1)}): "v",
    frozenset({(1, 0), (1, 1)}): "vi",
    frozenset({(0, 0), (0, 1), (1, 0), (1, 1)}): "vii",
}

_CELLS = ((0, 0), (0, 1), (1, 0), (1, 1))


def _as_table(values) -> tuple:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1 and arr.size == 4:
        arr = arr.reshape(2, 2)
    if arr.ndim != 2 or arr.shape[0] != 2 or arr.shape[1] < 2:
        raise ValueError(f"expected a 2xN correlator table, got shape {arr.shape}")
    return tuple(tuple(float(v) for v in row) for row in arr)


def _as_pair(values) -> Optional[tuple]:
    if values is None:
        return None
    pair = tuple(float(v) for v in values)
    if len(pair) != 2:
        raise ValueError("marginals must be a pair")
    return pair


@dataclass(frozen=True)
class CorrelationPoint:
    """Observed correlators, optionally with single-party marginals.

    ``e`` is indexed ``e[x][y]``.  A 2x3 table is accepted for the five-setting
    Mayers-Yao data; everything Theorem-related requires 2x2.
    """

    e: tuple
    marg_a: Optional[tuple] = None
    marg_b: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "e", _as_table(self.e))
        object.__setattr__(self, "marg_a", _as_pair(self.marg_a))
        object.__setattr__(self, "marg_b", _as_pair(self.marg_b))
        for v in itertools.chain(self.matrix.flat, self.marg_a or (), self.marg_b or ()):
            if not math.isfinite(v) or abs(v) > 1.0:
                raise ValueError(f"correlation value {v!r} outside [-1, 1]")

    @classmethod
    def from_flat(cls, e00, e01, e10, e11, **kw) -> "CorrelationPoint":
        return cls(((e00, e01), (e10, e11)), **kw)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.e, dtype=float)

    @property
    def n_settings_b(self) -> int:
        return len(self.e[0])

    def flat(self) -> tuple:
        return tuple(self.e[x][y] for x, y in _CELLS)

    def _require_2x2(self):
        if self.n_settings_b != 2:
            raise ValueError("operation defined for 2x2 correlation points only")


@dataclass(frozen=True)
class AnglePoint:
    """Angles ``alpha[x][y] = arccos(E[x][y])`` and, when canonical, ``theta``."""

    alpha: tuple
    theta: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", _as_table(self.alpha))
        for v in self.matrix.flat:
            if not (-1e-12 <= v <= math.pi + 1e-12):
                raise ValueError(f"angle {v!r} outside [0, pi]")

    @classmethod
    def canonical(cls, theta: float, alpha00: float, alpha01: float) -> "AnglePoint":
        """Point on the canonical sector from ``(theta, alpha00, alpha01)``.

        ``alpha10 = theta - alpha00`` and ``alpha11 = alpha01 - theta``.
        """
        a10 = theta - alpha00
        a11 = alpha01 - theta
        return cls(((alpha00, alpha01), (a10, a11)), theta=theta)

    @classmethod
    def from_flat(cls, a00, a01, a10, a11, theta=None) -> "AnglePoint":
        return cls(((a00, a01), (a10, a11)), theta=theta)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.alpha, dtype=float)

    def flat(self) -> tuple:
        return tuple(self.alpha[x][y] for x, y in _CELLS)

    def correlations(self) -> CorrelationPoint:
        return CorrelationPoint(np.cos(self.matrix))

    def canonical_residual(self) -> float:
        """``|alpha01 - (alpha00 + alpha10 + alpha11)|``."""
        (a00, a01), (a10, a11) = self.alpha
        return abs(a01 - (a00 + a10 + a11))

    def degenerate_cells(self, tol: float = DEFAULT_TOL) -> frozenset:
        return frozenset(
            (x, y)
            for x, y in _CELLS
            if self.alpha[x][y] <= tol or self.alpha[x][y] >= math.pi - tol
        )


@dataclass(frozen=True)
class ConditionMatch:
    i: int
    j: int
    xi: int
    residual: float


@dataclass(frozen=True, order=True)
class Relabeling:
    """Outcome flips and setting swaps acting on a correlation table.

    The image of ``e`` is ``e'[x][y] = sa[x] * sb[y] * e[pa(x)][pb(y)]`` where
    ``pa``/``pb`` swap the two settings when ``swap_a``/``swap_b`` is set.
    Field order is the lexicographic order used to pick a canonical relabeling.
    """

    swap_a: bool = False
    swap_b: bool = False
    flip_a: tuple = (False, False)
    flip_b: tuple = (False, False)

    @property
    def signs_a(self) -> tuple:
        return tuple(-1 if f else 1 for f in self.flip_a)

    @property
    def signs_b(self) -> tuple:
        return tuple(-1 if f else 1 for f in self.flip_b)

    @property
    def is_identity(self) -> bool:
        return self == Relabeling()

    def _pa(self, x: int) -> int:
        return 1 - x if self.swap_a else x

    def _pb(self, y: int) -> int:
        return 1 - y if self.swap_b else y

    def apply(self, p: CorrelationPoint) -> CorrelationPoint:
        p._require_2x2()
        sa, sb = self.signs_a, self.signs_b
        e = [[sa[x] * sb[y] * p.e[self._pa(x)][self._pb(y)] for y in range(2)] for x in range(2)]
        ma = mb = None
        if p.marg_a is not None:
            ma = [sa[x] * p.marg_a[self._pa(x)] for x in range(2)]
        if p.marg_b is not None:
            mb = [sb[y] * p.marg_b[self._pb(y)] for y in range(2)]
        return CorrelationPoint(e, ma, mb)

    def inverse(self) -> "Relabeling":
        # the inverse keeps the swaps and moves each sign to the swapped slot
        return Relabeling(
            self.swap_a,
            self.swap_b,
            tuple(self.flip_a[self._pa(x)] for x in range(2)),
            tuple(self.flip_b[self._pb(y)] for y in range(2)),
        )

    def to_dict(self) -> dict:
        return {
            "swap_a": self.swap_a,
            "swap_b": self.swap_b,
            "signs_a": list(self.signs_a),
            "signs_b": list(self.signs_b),
        }


def all_relabelings() -> list:
    """The 64 relabelings in lexicographic order, identity first."""
    out = []
    for sa, sb, fa0, fa1, fb0, fb1 in itertools.product((False, True), repeat=6):
        out.append(Relabeling(sa, sb, (fa0, fa1), (fb0, fb1)))
    return out


_RELABELINGS = all_relabelings()


@dataclass(frozen=True)
class Classification:
    """Result of :func:`classify`.

    ``tag`` is one of ``"SelfTesting"``, ``"DegenerateLocal"``,
    ``"NotOnSingletBoundary"``.
    """

    tag: str
    condition: Optional[ConditionMatch] = None
    relabeling: Optional[Relabeling] = None
    case: Optional[str] = None
    matches: tuple = field(default=())

    @property
    def is_self_testing(self) -> bool:
        return self.tag == "SelfTesting"

    def to_dict(self) -> dict:
        out = {"tag": self.tag}
        if self.condition is not None:
            c = self.condition
            out["condition"] = {"i": c.i, "j": c.j, "xi": c.xi, "residual": c.residual}
        if self.relabeling is not None:
            out["relabeling"] = self.relabeling.to_dict()
        if self.case is not None:
            out["case"] = self.case
        out["matches"] = [
            {"i": m.i, "j": m.j, "xi": m.xi, "residual": m.residual} for m in self.matches
        ]
        return out


def _arccos(e: np.ndarray) -> np.ndarray:
    return np.arccos(np.clip(e, -1.0, 1.0))


def angles_from_correlations(p: CorrelationPoint, tol: float = DEFAULT_TOL) -> AnglePoint:
    """Principal-branch angles of ``p``; ``theta`` is set only on the canonical sector."""
    p._require_2x2()
    alpha = _arccos(p.matrix)
    a = AnglePoint(alpha)
    if a.canonical_residual() <= 4 * tol:
        return AnglePoint(alpha, theta=float(alpha[0, 0] + alpha[1, 0]))
    return a


def condition_residual(p: CorrelationPoint, i: int, j: int, xi: int) -> float:
    s = np.arcsin(np.clip(p.matrix, -1.0, 1.0))
    total = s.sum() - 2.0 * s[i, j]
    return float(abs(total - xi * math.pi))


def check_selftest_condition(p: CorrelationPoint, tol: float = DEFAULT_TOL) -> list:
    """All eight boundary conditions ``(i, j, xi)`` met by ``p`` within ``tol``.

    The result is sorted by residual, ties broken by ``(i, j)`` then ``xi = +1``
    before ``xi = -1``.
    """
    p._require_2x2()
    found = []
    for order, ((i, j), xi) in enumerate(itertools.product(_CELLS, (1, -1))):
        r = condition_residual(p, i, j, xi)
        if r <= tol:
            found.append((r, order, ConditionMatch(i, j, xi, r)))
    found.sort(key=lambda t: t[:2])
    return [m for _, _, m in found]


def _canonical_relabelings(p: CorrelationPoint, tol: float):
    for r in _RELABELINGS:
        q = r.apply(p)
        if condition_residual(q, 0, 1, 1) <= tol:
            yield r, q


def degenerate_case(a: AnglePoint, tol: float = DEFAULT_TOL) -> Optional[str]:
    return DEGENERATE_CASES.get(a.degenerate_cells(tol))


def classify(p: CorrelationPoint, tol: float = DEFAULT_TOL) -> Classification:
    """Decide whether ``p`` self-tests the singlet.

    Points on the singlet boundary with two or more angles in ``{0, pi}`` are
    local; they get the case label of their degenerate pattern once brought
    to the canonical sector.
    """
    matches = tuple(check_selftest_condition(p, tol))
    if not matches:
        return Classification("NotOnSingletBoundary")
    alpha = angles_from_correlations(p, tol)
    if len(alpha.degenerate_cells(tol)) <= 1:
        relabel, _ = next(_canonical_relabelings(p, tol), (None, None))
        return Classification("SelfTesting", matches[0], relabel, matches=matches)

    case = None
    chosen = None
    for r, q in _canonical_relabelings(p, tol):
        case = degenerate_case(angles_from_correlations(q, tol), tol)
        if case is not None:
            chosen = r
            break
    return Classification("DegenerateLocal", matches[0], chosen, case=case, matches=matches)


def canonicalize(p: CorrelationPoint, tol: float = DEFAULT_TOL):
    """Relabel a self-testing point onto the ``alpha01 = alpha00 + alpha10 + alpha11`` sector.

    Returns ``(relabeling, point)``; the lexicographically smallest relabeling
    that works is chosen so the output is deterministic.

    Raises
    ------
    NotSelfTesting
        If ``p`` does not classify as self-testing.
    """
    c = classify(p, tol)
    if not c.is_self_testing or c.relabeling is None:
        raise NotSelfTesting(f"point classifies as {c.tag}")
    return c.relabeling, c.relabeling.apply(p)


def canonical_angles(p: CorrelationPoint, tol: float = DEFAULT_TOL) -> AnglePoint:
    _, q = canonicalize(p, tol)
    return angles_from_correlations(q, tol)


def chsh_max(p) -> float:
    """Largest CHSH combination over sign placements and pairs of Bob's settings."""
    e = p.matrix if isinstance(p, CorrelationPoint) else np.asarray(p, dtype=float)
    best = -math.inf
    for c0, c1 in itertools.combinations(range(e.shape[1]), 2):
        sub = e[:, [c0, c1]].ravel()
        total = sub.sum()
        best = max(best, float(np.max(np.abs(total - 2.0 * sub))))
    return best


def nonlocality_witness(a: AnglePoint, tol: float = DEFAULT_TOL) -> bool:
    """True when at most one angle is 0 or pi, i.e. the point is nonlocal."""
    return len(a.degenerate_cells(tol)) <= 1


def mayers_yao_point() -> CorrelationPoint:
    """The five-setting Mayers-Yao correlations (Bob has three settings)."""
    r = 1.0 / math.sqrt(2.0)
    return CorrelationPoint(((1.0, 0.0, r), (0.0, 1.0, r)))
