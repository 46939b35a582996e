"""XOR games tangent to the quantum set at self-testing points.

A game is a 2x2 coefficient table ``f``; its figure of merit on correlators is
``sum_xy f[x][y] E[x][y]``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .errors import ZeroCorrelator
from .geometry import AnglePoint, CorrelationPoint

GRID_POINTS = 64
VALUE_TOL = 1e-6
_SINE_TOL = 1e-12


@dataclass(frozen=True)
class GameVector:
    f: tuple

    def __post_init__(self):
        arr = np.asarray(self.f, dtype=float).reshape(2, 2)
        if not np.all(np.isfinite(arr)):
            raise ValueError("game coefficients must be finite")
        object.__setattr__(self, "f", tuple(tuple(float(v) for v in row) for row in arr))

    @classmethod
    def from_flat(cls, f00, f01, f10, f11) -> "GameVector":
        return cls(((f00, f01), (f10, f11)))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.f)

    def flat(self) -> tuple:
        return (self.f[0][0], self.f[0][1], self.f[1][0], self.f[1][1])

    def value(self, p: CorrelationPoint) -> float:
        p._require_2x2()
        return float(np.sum(self.matrix * p.matrix))


def game_coefficients(a: AnglePoint) -> GameVector:
    """Normal of the quantum boundary at a canonical point.

    ``f = (1/sin a00, -1/sin(a00+a10+a11), 1/sin a10, 1/sin a11)``.
    """
    (a00, _), (a10, a11) = a.alpha
    sines = {
        "alpha00": math.sin(a00),
        "alpha00+alpha10+alpha11": math.sin(a00 + a10 + a11),
        "alpha10": math.sin(a10),
        "alpha11": math.sin(a11),
    }
    for name, s in sines.items():
        if abs(s) <= _SINE_TOL:
            raise ZeroCorrelator(name, s)
    return GameVector.from_flat(
        1.0 / sines["alpha00"],
        -1.0 / sines["alpha00+alpha10+alpha11"],
        1.0 / sines["alpha10"],
        1.0 / sines["alpha11"],
    )


def classical_value(g: GameVector) -> float:
    """Best deterministic strategy, by enumeration of the 16 sign assignments."""
    f = g.matrix
    return max(
        float(np.array(sa) @ f @ np.array(sb))
        for sa in itertools.product((1, -1), repeat=2)
        for sb in itertools.product((1, -1), repeat=2)
    )


def _objective(f: np.ndarray):
    def neg(v):
        a1, b0, b1 = v
        a = (0.0, a1)
        b = (b0, b1)
        val = sum(f[x, y] * math.cos(a[x] - b[y]) for x in range(2) for y in range(2))
        grad_a1 = -sum(f[1, y] * math.sin(a1 - b[y]) for y in range(2))
        grad_b = [sum(f[x, y] * math.sin(a[x] - b[y]) for x in range(2)) for y in range(2)]
        return -val, -np.array([grad_a1, grad_b[0], grad_b[1]])

    return neg


def _grid_maxima(values: np.ndarray, keep: float) -> list:
    """Indices of periodic local maxima within ``keep`` of the global maximum."""
    top = values.max()
    mask = values >= top - keep
    for axis in range(3):
        for shift in (1, -1):
            mask &= values >= np.roll(values, shift, axis=axis)
    return [tuple(i) for i in np.argwhere(mask)]


def _optimize(g: GameVector, n: int):
    if n < 32:
        raise ValueError("grid needs at least 32 points per angle")
    f = g.matrix
    values = kernels.xor_grid(np.ascontiguousarray(f), n)
    step = 2.0 * math.pi / n
    fun = _objective(f)
    spread = float(np.abs(f).sum()) * step * step
    found = []
    for idx in _grid_maxima(values, keep=spread):
        res = minimize(fun, np.array(idx, dtype=float) * step, jac=True, method="BFGS", options={"gtol": 1e-12})
        found.append((-float(res.fun), res.x))
    found.sort(key=lambda t: -t[0])
    return found


def _correlators(v) -> np.ndarray:
    a1, b0, b1 = v
    a = (0.0, a1)
    return np.array([[math.cos(a[x] - b) for b in (b0, b1)] for x in range(2)])


def quantum_value(g: GameVector, grid: int = GRID_POINTS) -> float:
    """Maximum over coplanar qubit strategies (grid search plus BFGS polish)."""
    return _optimize(g, grid)[0][0]


def verify_maximizer(g: GameVector, p: CorrelationPoint, grid: int = GRID_POINTS) -> dict:
    """Check that ``p`` attains the quantum value of ``g`` and report uniqueness.

    ``maximizer_spread`` is the largest correlator distance between ``p``-like
    optima found from different grid basins; near zero means every optimum
    lands on the same correlation point.
    """
    found = _optimize(g, grid)
    q = found[0][0]
    at_p = g.value(p)
    best = [_correlators(x) for v, x in found if v >= q - VALUE_TOL]
    spread = max(float(np.abs(c - best[0]).max()) for c in best)
    return {
        "value_at_point": at_p,
        "quantum_value": q,
        "difference": q - at_p,
        "classical_value": classical_value(g),
        "attains_quantum_value": q - at_p <= VALUE_TOL,
        "maximizer_spread": spread,
        "distance_to_point": float(np.abs(best[0] - p.matrix).max()),
        "basins": len(found),
    }


def boundary_surface(x: float, y: float, z: float) -> float:
    """``E01`` on the canonical boundary sheet as a function of ``E00, E10, E11``."""
    return -math.sin(math.asin(x) + math.asin(y) + math.asin(z))


def boundary_normal(a: AnglePoint, h: float = 1e-6) -> np.ndarray:
    """Unit normal of the boundary sheet at ``a`` by central differences, ordered (00, 01, 10, 11)."""
    e = a.correlations().matrix
    x, y, z = e[0, 0], e[1, 0], e[1, 1]
    d = []
    for k in range(3):
        hi = [x, y, z]
        lo = [x, y, z]
        hi[k] += h
        lo[k] -= h
        d.append((boundary_surface(*hi) - boundary_surface(*lo)) / (2 * h))
    n = np.array([-d[0], 1.0, -d[1], -d[2]])
    return n / np.linalg.norm(n)
