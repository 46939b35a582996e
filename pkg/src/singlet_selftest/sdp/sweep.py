"""Fidelity-bound curves over a grid of tolerances, and their CSV export."""
from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from ..errors import EmptyGrid
from .moments import CriterionConfig, assemble_sdp
from .solver import FidelityBound, solve_lower_bound

CSV_HEADER = "epsilon,bound,primal,gap,status"


@dataclass
class SweepPoint:
    epsilon: float
    result: Union[FidelityBound, None]
    error: Optional[str] = None

    @property
    def status(self) -> str:
        return self.result.status if self.result is not None else "numerical-failure"


def parse_grid(text: str) -> list:
    """``"a:b:step"`` -> ``[a, a+step, ..., b]`` (inclusive, rounded to the step's precision)."""
    try:
        a, b, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise ValueError(f"grid must look like a:b:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise ValueError(f"grid {text!r} is empty or has a nonpositive step")
    n = int(math.floor((b - a) / step + 1e-9))
    digits = max(0, -int(math.floor(math.log10(step))) + 3)
    return [round(a + k * step, digits) for k in range(n + 1)]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SELFTEST_THREADS", "1")))
    except ValueError:
        return 1


def _solve_point(cfg: CriterionConfig, eps: float, backend: str) -> SweepPoint:
    try:
        return SweepPoint(eps, solve_lower_bound(assemble_sdp(cfg.with_epsilon(eps)), backend=backend))
    except Exception as exc:  # one bad point must not abort the curve
        return SweepPoint(eps, None, f"{type(exc).__name__}: {exc}")


def sweep_curve(cfg: CriterionConfig, eps_grid: Iterable[float], backend: str = "ipm") -> list:
    """One :class:`SweepPoint` per grid value, in grid order.

    Points are independent; ``SELFTEST_THREADS`` caps how many are solved at once.
    """
    grid = [float(e) for e in eps_grid]
    if not grid:
        raise EmptyGrid("epsilon grid is empty")
    bad = [e for e in grid if not e >= 0.0]
    if bad:
        raise ValueError(f"epsilon values must be >= 0: {bad}")
    workers = min(_threads(), len(grid))
    if workers == 1:
        return [_solve_point(cfg, e, backend) for e in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda e: _solve_point(cfg, e, backend), grid))


def _fmt(x: float) -> str:
    return "%.12g" % x


def curve_csv(points: list, name: Optional[str] = None) -> str:
    """CSV block for one curve; a ``# name`` line precedes it when ``name`` is given."""
    out = io.StringIO()
    if name is not None:
        out.write(f"# {name}\n")
    out.write(CSV_HEADER + "\n")
    for p in points:
        if p.result is None:
            out.write(f"{_fmt(p.epsilon)},nan,nan,nan,{p.status}\n")
        else:
            r = p.result
            out.write(f"{_fmt(p.epsilon)},{_fmt(r.bound)},{_fmt(r.primal)},{_fmt(r.gap)},{r.status}\n")
    return out.getvalue()


def curves_csv(curves: list) -> str:
    """Several named curves, blank-line separated: ``curves`` is ``[(name, points), ...]``."""
    return "\n".join(curve_csv(points, name) for name, points in curves)
