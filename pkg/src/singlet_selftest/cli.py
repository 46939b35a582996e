"""Command-line front end.

Exit codes: 0 success, 1 the input is valid but the request does not apply
(e.g. the point does not self-test), 2 malformed input, 3 numerical failure.
Errors are printed as ``{"error": {...}}`` JSON on stdout.
"""
from __future__ import annotations

import argparse
import ast
import json
import math
import operator
import sys
from typing import Optional

import numpy as np

from . import __version__
from .errors import SelfTestError
from .games import classical_value, game_coefficients, verify_maximizer
from .geometry import (
    DEFAULT_TOL,
    AnglePoint,
    CorrelationPoint,
    canonicalize,
    classify,
    angles_from_correlations,
)
from .realization import VARIANTS, build_realization, control_operators, verify_selftest_relations
from .sdp.moments import assemble_sdp, criterion_from_angles, fig5_configs
from .sdp.solver import BACKENDS, solve_lower_bound
from .sdp.sweep import curve_csv, curves_csv, parse_grid, sweep_curve
from .simulator import rho_swap_fidelity

EXIT_OK, EXIT_DOMAIN, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_GRID = "0:0.05:0.005"


class InputError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


# ------------------------------------------------------------------ input


_NAMES = {"pi": math.pi, "sqrt2": math.sqrt(2.0), "sqrt3": math.sqrt(3.0)}
_FUNCS = {"sqrt": math.sqrt, "sin": math.sin, "cos": math.cos, "asin": math.asin, "acos": math.acos}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def parse_number(value) -> float:
    """A JSON number, or a string such as ``"1/sqrt2"``, ``"-pi/4"``, ``"sqrt(3)/2"``."""
    if isinstance(value, bool):
        raise InputError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise InputError(f"expected a number or expression string, got {value!r}")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise InputError(f"unsupported expression element in {value!r}")

    try:
        out = ev(ast.parse(value.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError, ValueError, OverflowError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"cannot evaluate {value!r}: {exc}") from None
    if not math.isfinite(out):
        raise InputError(f"{value!r} is not finite")
    return out


def _table(raw, what: str) -> list:
    if not isinstance(raw, list) or len(raw) != 2 or not all(isinstance(r, list) for r in raw):
        raise InputError(f"{what} must be a 2xN nested list")
    if len(raw[0]) != len(raw[1]) or len(raw[0]) < 2:
        raise InputError(f"{what} rows must have equal length >= 2")
    return [[parse_number(v) for v in row] for row in raw]


def load_payload(path: Optional[str]) -> dict:
    if path is None:
        raise InputError("an input file is required (use - for stdin)")
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InputError("top-level JSON must be an object")
    keys = {"correlators", "angles"} & set(data)
    if len(keys) != 1:
        raise InputError('input needs exactly one of "correlators" or "angles"')
    return data


def point_from_payload(data: dict):
    """``(CorrelationPoint, AnglePoint or None)`` from an input object."""
    try:
        if "correlators" in data:
            return CorrelationPoint(_table(data["correlators"], "correlators")), None
        ang = data["angles"]
        if not isinstance(ang, dict) or "alpha" not in ang:
            raise InputError('"angles" must be an object with an "alpha" table')
        a = AnglePoint(_table(ang["alpha"], "angles.alpha"))
        if a.matrix.shape != (2, 2):
            raise InputError("angles.alpha must be 2x2")
        return a.correlations(), a
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(str(exc)) from None


def canonical_point(data: dict, tol: float):
    """Canonical angles plus the relabeling that produced them (None when already canonical)."""
    p, a = point_from_payload(data)
    if a is not None and a.canonical_residual() <= 4 * tol:
        (a00, _), (a10, _) = a.alpha
        return AnglePoint(a.alpha, theta=a00 + a10), None
    relabel, q = canonicalize(p, tol)
    return angles_from_correlations(q, tol), relabel


# ------------------------------------------------------------------ commands


def _angles_dict(a: AnglePoint) -> dict:
    return {"alpha": [list(r) for r in a.alpha], "theta": a.theta}


def cmd_classify(args) -> dict:
    p, _ = point_from_payload(load_payload(args.input))
    if p.n_settings_b != 2:
        raise InputError("classify needs a 2x2 correlator table")
    return classify(p, args.tol).to_dict()


def cmd_realize(args) -> dict:
    a, relabel = canonical_point(load_payload(args.input), args.tol)
    r = build_realization(a, args.tol)
    ma, mb = r.marginals()
    return {
        "relabeling": relabel.to_dict() if relabel is not None else None,
        "angles": _angles_dict(r.angles),
        "state": [float(v) for v in np.real(r.state.amplitudes)],
        "measurement_angles": {"alice": list(r.meas_angle_a), "bob": list(r.meas_angle_b)},
        "correlators": [list(row) for row in r.correlations().e],
        "marginals": {"alice": list(ma), "bob": list(mb)},
    }


def cmd_verify(args) -> dict:
    a, relabel = canonical_point(load_payload(args.input), args.tol)
    r = build_realization(a, args.tol)
    c = control_operators(r.angles, args.variant)
    report = verify_selftest_relations(r, c, args.tol)
    _, fid = rho_swap_fidelity(r.state, c.concrete(r.observables()), c.target())
    out = {"relabeling": relabel.to_dict() if relabel is not None else None, "variant": args.variant}
    out.update(report.to_dict())
    out["controls"] = c.coefficients()
    out["swap_fidelity"] = fid
    out["ok"] = report.ok(args.tol)
    return out


def _bound_row(eps, res) -> dict:
    row = res.row(eps)
    row["diagnostics"] = {
        k: v for k, v in res.diagnostics.items() if isinstance(v, (int, float, str, bool, list)) and k != "blocks"
    }
    return row


def cmd_bound(args):
    a, _ = canonical_point(load_payload(args.input), args.tol)
    cfg = criterion_from_angles(a, args.eps)
    res = solve_lower_bound(assemble_sdp(cfg), backend=args.backend)
    if res.status == "numerical-failure":
        raise NumericalFailure("solver did not produce a verified bound", res.diagnostics)
    if args.format == "csv":
        from .sdp.sweep import SweepPoint

        return curve_csv([SweepPoint(args.eps, res)])
    return _bound_row(args.eps, res)


def cmd_sweep(args):
    grid = parse_grid(args.eps_grid)
    if args.preset == "fig5":
        if args.input is not None:
            raise InputError("--preset fig5 takes no input file")
        configs = fig5_configs()
    else:
        a, _ = canonical_point(load_payload(args.input), args.tol)
        configs = [criterion_from_angles(a)]
    curves = [(cfg.name, sweep_curve(cfg, grid, backend=args.backend)) for cfg in configs]
    failed = [(n, p.epsilon, p.error) for n, pts in curves for p in pts if p.status == "numerical-failure"]
    if args.format == "csv":
        text = curves_csv(curves) if args.preset else curve_csv(curves[0][1])
        out = text
    else:
        out = {
            "curves": [
                {
                    "name": n,
                    "points": [
                        p.result.row(p.epsilon) if p.result is not None else {"epsilon": p.epsilon, "status": p.status, "error": p.error}
                        for p in pts
                    ],
                }
                for n, pts in curves
            ]
        }
    if failed:
        raise NumericalFailure(
            f"{len(failed)} grid point(s) failed",
            {"failed": [{"curve": n, "epsilon": e, "error": err} for n, e, err in failed], "partial": out},
        )
    return out


def cmd_game(args) -> dict:
    a, relabel = canonical_point(load_payload(args.input), args.tol)
    g = game_coefficients(a)
    rep = verify_maximizer(g, a.correlations())
    return {
        "relabeling": relabel.to_dict() if relabel is not None else None,
        "angles": _angles_dict(a),
        "f": [list(r) for r in g.f],
        "classical_value": classical_value(g),
        "quantum_value": rep["quantum_value"],
        "value_at_point": rep["value_at_point"],
        "difference": rep["difference"],
        "maximizer_spread": rep["maximizer_spread"],
    }


COMMANDS = {
    "classify": cmd_classify,
    "realize": cmd_realize,
    "verify": cmd_verify,
    "bound": cmd_bound,
    "sweep": cmd_sweep,
    "game": cmd_game,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="selftest", description="Singlet self-testing toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_format="json"):
        p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="boundary/degeneracy tolerance")
        p.add_argument("--out", help="write the report to this path instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default=default_format)
        return p

    for name, helptext in (
        ("classify", "classify a correlation point"),
        ("realize", "explicit qubit realization of a self-testing point"),
        ("game", "XOR game tangent at a self-testing point"),
    ):
        common(sub.add_parser(name, help=helptext)).add_argument("input", help="JSON file, or - for stdin")
    p = common(sub.add_parser("verify", help="check the self-testing operator relations"))
    p.add_argument("input")
    p.add_argument("--variant", choices=VARIANTS, default="rotated")
    p = common(sub.add_parser("bound", help="certified fidelity lower bound at one epsilon"), "csv")
    p.add_argument("input")
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--backend", choices=sorted(BACKENDS), default="ipm")
    p = common(sub.add_parser("sweep", help="fidelity bound curve(s) over an epsilon grid"), "csv")
    p.add_argument("input", nargs="?")
    p.add_argument("--eps-grid", default=DEFAULT_GRID, help="a:b:step, inclusive")
    p.add_argument("--preset", choices=("fig5",))
    p.add_argument("--backend", choices=sorted(BACKENDS), default="ipm")
    return parser


def _render(obj, fmt: str) -> str:
    if isinstance(obj, str):
        return obj
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, path: Optional[str]):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _error(kind: str, message: str, **details) -> str:
    body = {"type": kind, "message": message}
    if details:
        body["details"] = details
    return json.dumps({"error": body}, indent=2, default=str) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format == "csv" and args.command not in ("bound", "sweep"):
        sys.stdout.write(_error("InputError", "csv output is available for bound and sweep only"))
        return EXIT_INPUT
    if not (args.tol > 0 and math.isfinite(args.tol)):
        sys.stdout.write(_error("InputError", "--tol must be positive"))
        return EXIT_INPUT
    if getattr(args, "eps", 0.0) < 0 or not math.isfinite(getattr(args, "eps", 0.0)):
        sys.stdout.write(_error("InputError", "--eps must be a finite value >= 0"))
        return EXIT_INPUT
    try:
        result = COMMANDS[args.command](args)
    except InputError as exc:
        sys.stdout.write(_error("InputError", str(exc)))
        return EXIT_INPUT
    except NumericalFailure as exc:
        sys.stdout.write(_error("NumericalFailure", str(exc), **exc.diagnostics))
        return EXIT_NUMERIC
    except SelfTestError as exc:
        sys.stdout.write(_error(type(exc).__name__, str(exc)))
        return EXIT_DOMAIN
    _emit(_render(result, args.format), args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
