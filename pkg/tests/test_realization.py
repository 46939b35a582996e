import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singlet_selftest.algebra import Poly
from singlet_selftest.errors import NotCanonical, SingularDenominator, TooDegenerate
from singlet_selftest.geometry import AnglePoint, classify
from singlet_selftest.realization import (
    QubitRealization,
    build_realization,
    control_operators,
    ideal_letters,
    verify_selftest_relations,
)
from singlet_selftest.simulator import SIGMA_X, SIGMA_Z, rho_swap_fidelity

PI = math.pi


@st.composite
def canonical_points(draw):
    a00, a10, a11 = (draw(st.floats(0.1, PI - 0.1)) for _ in range(3))
    total = a00 + a10 + a11
    if total >= PI - 0.1:
        k = (PI - 0.2) / total
        a00, a10, a11 = a00 * k, a10 * k, a11 * k
    return AnglePoint.from_flat(a00, a00 + a10 + a11, a10, a11)


def test_realization_angles():
    a = AnglePoint.canonical(1.1, 0.4, 2.5)
    r = build_realization(a)
    assert r.meas_angle_a == (0.0, pytest.approx(1.1))
    assert r.meas_angle_b == (0.4, 2.5)
    assert np.allclose(r.correlations().matrix, np.cos(a.matrix), atol=1e-14)


def test_realization_errors():
    with pytest.raises(NotCanonical):
        build_realization(AnglePoint.from_flat(0.3, 0.4, 0.5, 0.6))
    with pytest.raises(TooDegenerate):
        build_realization(AnglePoint.from_flat(0.0, 1.0, 0.0, 1.0))


def test_direct_controls_are_paulis():
    a = AnglePoint.canonical(1.3, 0.5, 2.2)
    r = build_realization(a)
    cm = control_operators(a, "direct").concrete(r.observables())
    for got, want in ((cm.za, SIGMA_Z), (cm.xa, SIGMA_X), (cm.zb, SIGMA_Z), (cm.xb, SIGMA_X)):
        assert np.allclose(got, want, atol=1e-12)


def test_rotated_controls_are_rotated_paulis():
    a = AnglePoint.canonical(1.3, 0.5, 2.2)
    r = build_realization(a)
    c = control_operators(a, "rotated")
    cm = c.concrete(r.observables())
    rot = c.bob_rotation
    assert rot == pytest.approx(0.5)
    assert np.allclose(cm.zb, math.cos(rot) * SIGMA_Z + math.sin(rot) * SIGMA_X, atol=1e-12)
    assert np.allclose(cm.xb, -math.sin(rot) * SIGMA_Z + math.cos(rot) * SIGMA_X, atol=1e-12)


def test_singular_denominators_are_named():
    # theta = pi: alpha00 + alpha10 = pi
    a = AnglePoint.from_flat(PI / 2, PI, PI / 2, 0.0)
    with pytest.raises(SingularDenominator) as err:
        control_operators(a, "rotated")
    assert err.value.which == "alpha00+alpha10"
    b = AnglePoint.from_flat(0.0, PI, PI / 2, PI / 2)
    with pytest.raises(SingularDenominator) as err:
        control_operators(b, "rotated")
    assert err.value.which == "alpha10+alpha11"
    with pytest.raises(SingularDenominator) as err:
        control_operators(AnglePoint.from_flat(0.0, 0.0, 0.5, 0.0), "direct")
    assert err.value.which in ("alpha00+alpha10", "alpha01-alpha00")
    with pytest.raises(ValueError):
        control_operators(AnglePoint.canonical(1.0, 0.5, 2.0), "sideways")


@settings(max_examples=50, deadline=None)
@given(canonical_points(), st.sampled_from(["direct", "rotated"]))
def test_relations_and_fidelity(a, variant):
    r = build_realization(a)
    c = control_operators(a, variant)
    rep = verify_selftest_relations(r, c)
    assert rep.ok(1e-9), rep.residuals
    _, fid = rho_swap_fidelity(r.state, c.concrete(r.observables()), c.target())
    assert fid == pytest.approx(1.0, abs=1e-9)


def test_degenerate_routes():
    a = AnglePoint.from_flat(0.0, 2.0, 1.2, 0.8)
    rep = verify_selftest_relations(build_realization(a), control_operators(a, "rotated"))
    assert rep.routes["anticommutator_a"] == "B1^2"
    assert rep.ok(1e-9)


def test_ideal_letters_auxiliary():
    a = AnglePoint.canonical(PI / 2, PI / 4, PI / 2)
    r = build_realization(a)
    letters = ideal_letters(r, extra=("B2",))
    b2 = letters["B2"]
    assert np.allclose(b2 @ b2, np.eye(2), atol=1e-12)
    assert np.allclose(b2, b2.conj().T)


def test_reference_realization_examples():
    r = build_realization(AnglePoint.from_flat(PI / 4, 3 * PI / 4, PI / 4, PI / 4))
    assert r.meas_angle_b == (PI / 4, 3 * PI / 4)
    s = 1 / math.sqrt(2)
    assert np.allclose(r.correlations().matrix, [[s, -s], [s, s]], atol=1e-14)
    r = build_realization(AnglePoint.from_flat(PI / 4, PI / 2, PI / 4, 0.0))
    assert np.allclose(r.correlations().matrix, [[s, 0], [s, 1]], atol=1e-14)
    # two coinciding directions: local, only built on request
    a = AnglePoint.from_flat(0.0, 1.2, 1.2, 0.0)
    r = build_realization(a, allow_degenerate=True)
    assert r.meas_angle_a == (0.0, pytest.approx(1.2)) and r.meas_angle_b == (0.0, 1.2)
    e = r.correlations().matrix
    assert e[0, 0] == pytest.approx(1.0) and e[1, 1] == pytest.approx(1.0)


def test_direct_singular_alpha01_equals_alpha00():
    with pytest.raises(SingularDenominator) as err:
        control_operators(AnglePoint.from_flat(0.5, 0.5, 0.0, 0.0), "direct")
    assert err.value.which == "alpha01-alpha00"


def test_chsh_control_coefficients():
    a = AnglePoint.from_flat(PI / 4, 3 * PI / 4, PI / 4, PI / 4)
    d = control_operators(a, "direct")
    s = 1 / math.sqrt(2)
    assert d.za == Poly.letter("A0") and d.xa == Poly.letter("A1")
    assert d.zb == s * Poly.letter("B0") - s * Poly.letter("B1")
    assert d.xb == s * Poly.letter("B1") + s * Poly.letter("B0")
    assert control_operators(a, "rotated").xb == Poly.letter("B1")


def test_perturbed_realization_breaks_decomposition():
    a = AnglePoint.from_flat(PI / 4, 3 * PI / 4, PI / 4, PI / 4)
    r = build_realization(a)
    bent = QubitRealization(r.angles, r.state, r.meas_angle_a, (r.meas_angle_b[0] + 0.01, r.meas_angle_b[1]))
    rep = verify_selftest_relations(bent, control_operators(a, "direct"))
    assert rep.residuals["decompose_b0"] > 1e-3


def test_alpha00_zero_uses_alternate_route():
    a = AnglePoint.from_flat(0.0, 2 * PI / 3, PI / 3, PI / 3)
    rep = verify_selftest_relations(build_realization(a), control_operators(a, "rotated"))
    assert rep.routes["anticommutator_a"] == "B1^2"
    assert rep.residuals["anticommutator_a"] <= 1e-10


def test_round_trip_classification_grid():
    s = (np.arange(10) + 0.5) / 10
    for x in s:
        for y in s:
            for z in s:
                a01 = PI * x
                theta = a01 * y
                a = AnglePoint.canonical(theta, theta * z, a01)
                c = classify(build_realization(a).correlations())
                assert c.tag == "SelfTesting"
                assert any((m.i, m.j, m.xi) == (0, 1, 1) for m in c.matches)
