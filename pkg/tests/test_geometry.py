import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singlet_selftest.errors import NotSelfTesting
from singlet_selftest.geometry import (
    AnglePoint,
    CorrelationPoint,
    Relabeling,
    all_relabelings,
    angles_from_correlations,
    canonical_angles,
    canonicalize,
    check_selftest_condition,
    chsh_max,
    classify,
    condition_residual,
    mayers_yao_point,
    nonlocality_witness,
)

R = 1 / math.sqrt(2)
CHSH = CorrelationPoint.from_flat(R, R, R, -R)

angle = st.floats(0.05, math.pi - 0.05)


@st.composite
def canonical_points(draw):
    a00, a10, a11 = draw(angle), draw(angle), draw(angle)
    total = a00 + a10 + a11
    if total >= math.pi - 0.05:
        scale = (math.pi - 0.1) / total
        a00, a10, a11 = a00 * scale, a10 * scale, a11 * scale
    return AnglePoint.from_flat(a00, a00 + a10 + a11, a10, a11)


relabelings = st.sampled_from(all_relabelings())


def arcsin_condition(e, i, j, xi):
    # independent statement of the boundary condition
    s = [[math.asin(e[x][y]) for y in range(2)] for x in range(2)]
    others = sum(s[x][y] for x in range(2) for y in range(2) if (x, y) != (i, j))
    return abs(others - s[i][j] - xi * math.pi)


def test_relabeling_group_shape():
    group = all_relabelings()
    assert len(group) == 64
    assert group[0].is_identity
    assert group == sorted(group)
    assert len(set(group)) == 64


@given(relabelings, st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_relabeling_inverse(r, flat):
    p = CorrelationPoint.from_flat(*flat, marg_a=(0.1, -0.2), marg_b=(0.3, 0.4))
    back = r.inverse().apply(r.apply(p))
    assert np.allclose(back.matrix, p.matrix)
    assert np.allclose(back.marg_a, p.marg_a) and np.allclose(back.marg_b, p.marg_b)


def test_chsh_point_condition():
    matches = check_selftest_condition(CHSH)
    assert [(m.i, m.j, m.xi) for m in matches] == [(1, 1, 1)]
    assert arcsin_condition(CHSH.e, 1, 1, 1) < 1e-12


def test_chsh_canonical_form():
    r, q = canonicalize(CHSH)
    assert r == Relabeling(flip_b=(False, True))
    a = angles_from_correlations(q)
    assert np.allclose(a.matrix, [[math.pi / 4, 3 * math.pi / 4], [math.pi / 4, math.pi / 4]])
    assert a.theta == pytest.approx(math.pi / 2)


@settings(max_examples=60)
@given(canonical_points(), relabelings)
def test_relabeled_points_self_test(a, r):
    p = r.apply(a.correlations())
    c = classify(p)
    assert c.tag == "SelfTesting"
    m = c.condition
    assert arcsin_condition(p.e, m.i, m.j, m.xi) < 1e-8
    back = canonical_angles(p)
    assert back.canonical_residual() < 1e-8


@settings(max_examples=40)
@given(canonical_points())
def test_canonical_points_violate_chsh(a):
    assert chsh_max(a.correlations()) > 2.0
    assert nonlocality_witness(a)


def test_interior_point_is_not_on_boundary():
    p = CorrelationPoint.from_flat(0.9, 0.1, 0.2, 0.3)
    assert classify(p).tag == "NotOnSingletBoundary"
    with pytest.raises(NotSelfTesting):
        canonicalize(p)


def test_all_ones_is_case_vii():
    c = classify(CorrelationPoint.from_flat(1, 1, 1, 1))
    assert (c.tag, c.case) == ("DegenerateLocal", "vii")


def test_condition_residual_matches_arcsin_form():
    rng = np.random.default_rng(3)
    for _ in range(50):
        e = rng.uniform(-1, 1, (2, 2))
        p = CorrelationPoint(e)
        for i, j, xi in [(0, 1, 1), (1, 0, -1), (1, 1, 1)]:
            assert condition_residual(p, i, j, xi) == pytest.approx(arcsin_condition(e, i, j, xi), abs=1e-12)


def test_chsh_values():
    assert chsh_max(CHSH) == pytest.approx(2 * math.sqrt(2), abs=1e-14)
    assert chsh_max(CorrelationPoint.from_flat(1, 1, 1, 1)) == pytest.approx(2.0)
    assert chsh_max(mayers_yao_point()) == pytest.approx(1 + math.sqrt(2), abs=1e-12)


def test_point_validation():
    with pytest.raises(ValueError):
        CorrelationPoint.from_flat(1.2, 0, 0, 0)
    with pytest.raises(ValueError):
        AnglePoint.from_flat(-0.5, 0, 0, 0)
    with pytest.raises(ValueError):
        mayers_yao_point()._require_2x2()


def test_canonical_constructor():
    a = AnglePoint.canonical(1.0, 0.3, 2.0)
    assert a.alpha == ((0.3, 2.0), (0.7, 1.0))
    assert a.canonical_residual() < 1e-15
