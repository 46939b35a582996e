"""Explicit qubit realization of canonical self-testing points, and control operators.

All measurement directions lie in the xz-plane of the Bloch sphere with
``A0`` along z, so the state ``|Phi+>`` gives ``E_xy = cos(a_x - b_y)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import Poly
from .errors import NotCanonical, SingularDenominator, TooDegenerate
from .geometry import DEFAULT_TOL, AnglePoint, CorrelationPoint
from .simulator import (
    ControlMatrices,
    StateVector,
    correlator,
    phi_plus,
    plane_observable,
    rotated_target,
)

VARIANTS = ("direct", "rotated")
_SINE_TOL = 1e-12


@dataclass(frozen=True)
class QubitRealization:
    angles: AnglePoint
    state: StateVector
    meas_angle_a: tuple
    meas_angle_b: tuple

    def observables(self) -> dict:
        a0, a1 = self.meas_angle_a
        b0, b1 = self.meas_angle_b
        return {
            "A0": plane_observable(a0),
            "A1": plane_observable(a1),
            "B0": plane_observable(b0),
            "B1": plane_observable(b1),
        }

    def correlations(self) -> CorrelationPoint:
        obs = self.observables()
        e = [[correlator(self.state, obs[f"A{x}"], obs[f"B{y}"]) for y in range(2)] for x in range(2)]
        return CorrelationPoint(np.clip(e, -1.0, 1.0))

    def marginals(self) -> tuple:
        obs = self.observables()
        i2 = np.eye(2)
        ma = tuple(correlator(self.state, obs[f"A{x}"], i2) for x in range(2))
        mb = tuple(correlator(self.state, i2, obs[f"B{y}"]) for y in range(2))
        return ma, mb


def build_realization(a: AnglePoint, tol: float = DEFAULT_TOL, allow_degenerate: bool = False) -> QubitRealization:
    """Two-qubit realization of a canonical angle point.

    Alice measures at ``(0, theta)`` and Bob at ``(alpha00, alpha01)`` on
    ``|Phi+>``.  Points with two or more angles in ``{0, pi}`` are local and
    rejected unless ``allow_degenerate`` is set; the construction itself still
    reproduces their correlators.

    Raises
    ------
    NotCanonical
        ``alpha01 != alpha00 + alpha10 + alpha11``.
    TooDegenerate
        Two or more angles are 0 or pi.
    """
    if a.canonical_residual() > 4 * tol:
        raise NotCanonical(f"alpha01 - (alpha00 + alpha10 + alpha11) = {a.canonical_residual():.3e}")
    deg = a.degenerate_cells(tol)
    if len(deg) >= 2 and not allow_degenerate:
        raise TooDegenerate(f"angles at {sorted(deg)} are 0 or pi")
    (a00, a01), (a10, _) = a.alpha
    theta = a00 + a10
    return QubitRealization(
        AnglePoint(a.alpha, theta=theta), phi_plus(), (0.0, theta), (a00, a01)
    )


@dataclass(frozen=True)
class ControlSet:
    """Control operators as affine combinations of the observables.

    ``bob_rotation`` is the angle by which Bob's controls are rotated away from
    Alice's frame (0 for the direct set, ``alpha00`` for the rotated one); the
    matching target state is :meth:`target`.
    """

    za: Poly
    xa: Poly
    zb: Poly
    xb: Poly
    variant: str
    bob_rotation: float = 0.0

    def target(self) -> StateVector:
        return phi_plus() if self.bob_rotation == 0.0 else rotated_target(self.bob_rotation)

    def concrete(self, letters: dict) -> ControlMatrices:
        a_letters = {k: v for k, v in letters.items() if k[0] == "A"}
        b_letters = {k: v for k, v in letters.items() if k[0] == "B"}
        return ControlMatrices(
            self.za.matrix(a_letters),
            self.xa.matrix(a_letters),
            self.zb.matrix(b_letters),
            self.xb.matrix(b_letters),
        )

    def coefficients(self) -> dict:
        from .algebra import word_str

        return {
            name: {word_str(w): c for w, c in sorted(getattr(self, name).terms.items())}
            for name in ("za", "xa", "zb", "xb")
        }


def _nonzero_sine(label: str, angle: float) -> float:
    s = math.sin(angle)
    if abs(s) <= _SINE_TOL:
        raise SingularDenominator(label, s)
    return s


def control_operators(a: AnglePoint, variant: str = "direct") -> ControlSet:
    """Control operators for a canonical angle point.

    ``direct`` builds all four operators from the plane geometry so that they
    are exactly the Pauli operators on the ideal realization.  ``rotated``
    keeps ``Z'_B = B0`` and builds ``X'_B`` orthogonal to it, so Bob's frame is
    rotated by ``alpha00``.

    Raises
    ------
    SingularDenominator
        Names the sine that vanishes.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    (a00, a01), (a10, a11) = a.alpha
    theta = a00 + a10
    A0, A1, B0, B1 = (Poly.letter(n) for n in ("A0", "A1", "B0", "B1"))

    s_theta = _nonzero_sine("alpha00+alpha10", theta)
    za = A0
    xa = (A1 - math.cos(theta) * A0) / s_theta
    if variant == "direct":
        s = _nonzero_sine("alpha01-alpha00", a01 - a00)
        zb = (math.sin(a01) * B0 - math.sin(a00) * B1) / s
        xb = (math.cos(a00) * B1 - math.cos(a01) * B0) / s
        return ControlSet(za, xa, zb, xb, "direct", 0.0)
    s = _nonzero_sine("alpha10+alpha11", a10 + a11)
    zb = B0
    xb = (B1 - math.cos(a10 + a11) * B0) / s
    return ControlSet(za, xa, zb, xb, "rotated", a00)


@dataclass
class ResidualReport:
    """Vector-norm residual of each checked relation, plus the derivation route used."""

    residuals: dict = field(default_factory=dict)
    routes: dict = field(default_factory=dict)

    def max(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def ok(self, tol: float) -> bool:
        return self.max() <= tol

    def to_dict(self) -> dict:
        return {"residuals": dict(self.residuals), "routes": dict(self.routes), "max": self.max()}


def verify_selftest_relations(
    r: QubitRealization, c: ControlSet, tol: float = DEFAULT_TOL
) -> ResidualReport:
    """Check every operator relation of the self-testing argument on ``r.state``.

    When a relation's usual derivation divides by a vanishing sine the
    alternative route is used and recorded in ``routes``.
    """
    psi = r.state.amplitudes
    obs = r.observables()
    i2 = np.eye(2)

    def on_a(m):
        return np.kron(m, i2)

    def on_b(m):
        return np.kron(i2, m)

    A0, A1 = on_a(obs["A0"]), on_a(obs["A1"])
    B0, B1 = on_b(obs["B0"]), on_b(obs["B1"])
    cm = c.concrete(obs)
    ZA, XA, ZB, XB = on_a(cm.za), on_a(cm.xa), on_b(cm.zb), on_b(cm.xb)
    rot = c.bob_rotation
    # Bob's controls expressed back in Alice's frame
    ZBa = math.cos(rot) * ZB - math.sin(rot) * XB
    XBa = math.sin(rot) * ZB + math.cos(rot) * XB

    (a00, a01), (a10, a11) = r.angles.alpha
    deg = r.angles.degenerate_cells(tol)
    norm = np.linalg.norm
    res: dict = {}
    routes: dict = {}

    res["z_match"] = norm(ZA @ psi - ZBa @ psi)
    res["x_match"] = norm(XA @ psi - XBa @ psi)
    res["anticommute_a"] = norm(XA @ ZA @ psi + ZA @ XA @ psi)
    res["anticommute_b"] = norm(XB @ ZB @ psi + ZB @ XB @ psi)

    res["decompose_b0"] = norm(
        B0 @ psi - (math.sin(a00) * A1 @ psi + math.sin(a10) * A0 @ psi) / math.sin(a00 + a10)
    )
    res["decompose_a1"] = norm(
        A1 @ psi - (math.sin(a10) * B1 @ psi + math.sin(a11) * B0 @ psi) / math.sin(a10 + a11)
    )

    if (0, 0) in deg or (1, 0) in deg:
        routes["anticommutator_a"] = "B1^2"
        coef_a = 2 * math.cos(a01 - a11)
    else:
        routes["anticommutator_a"] = "B0^2"
        coef_a = 2 * math.cos(a00 + a10)
    res["anticommutator_a"] = norm((A1 @ A0 + A0 @ A1) @ psi - coef_a * psi)

    if (1, 0) in deg or (1, 1) in deg:
        routes["anticommutator_b"] = "A0^2"
        coef_b = 2 * math.cos(a01 - a00)
    else:
        routes["anticommutator_b"] = "A1^2"
        coef_b = 2 * math.cos(a11 + a10)
    res["anticommutator_b"] = norm((B1 @ B0 + B0 @ B1) @ psi - coef_b * psi)

    for name, op in (("za", ZA), ("xa", XA), ("zb", ZB), ("xb", XB)):
        res[f"unitary_{name}"] = norm(op.conj().T @ op @ psi - psi)

    res["zz_correlation"] = abs(1.0 - np.real(psi.conj() @ ZA @ ZBa @ psi))
    res["xx_correlation"] = abs(1.0 - np.real(psi.conj() @ XA @ XBa @ psi))

    return ResidualReport({k: float(v) for k, v in res.items()}, routes)


def ideal_letters(r: QubitRealization, c: Optional[ControlSet] = None, extra: tuple = ()) -> dict:
    """Observables of ``r`` plus auxiliary letters set to the ideal controls.

    ``extra`` may contain ``"A2"`` (set to ``X'_A``) and ``"B2"`` (set to ``X'_B``).
    """
    letters = r.observables()
    if extra:
        cm = (c or control_operators(r.angles, "rotated")).concrete(letters)
        if "A2" in extra:
            letters["A2"] = np.real_if_close(cm.xa)
        if "B2" in extra:
            letters["B2"] = np.real_if_close(cm.xb)
    return letters
