import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from wsi.comparison import (
    CurvatureBound,
    closed_form_profile,
    eval_h,
    eval_h_prime,
    invert_h,
    profile_from_json,
    profile_to_json,
    solve_profile,
)
from wsi.errors import OutOfDomainError, OutOfRangeError, UnsupportedVariantError


@pytest.fixture(scope="module")
def unit_profile():
    return solve_profile(CurvatureBound.constant(1.0), 3.0, 1e-3)


def test_zero_curvature_is_identity_and_capped():
    prof = solve_profile(CurvatureBound.zero(), 5.0, 1e-2)
    assert prof.is_capped
    assert prof.r0 == pytest.approx(5.0)
    assert prof.s0 == pytest.approx(5.0, abs=1e-12)
    t = np.linspace(0, 5, 37)
    np.testing.assert_allclose(eval_h(prof, t), t, atol=1e-12)
    np.testing.assert_allclose(eval_h_prime(prof, t), 1.0, atol=1e-12)


@pytest.mark.parametrize("b", [0.5, 1.0, 2.0, 3.0])
def test_constant_curvature_matches_sine(b):
    prof = solve_profile(CurvatureBound.constant(b * b), 10.0, 1e-3)
    assert not prof.is_capped
    # r0 is refined to step**2; s0 is flat there, so it is far more accurate
    assert abs(prof.r0 - math.pi / (2 * b)) <= 1e-6
    assert abs(prof.s0 - 1 / b) < 1e-10
    t = np.linspace(0, prof.r0, 401)
    np.testing.assert_allclose(eval_h(prof, t), np.sin(b * t) / b, atol=1e-10)
    np.testing.assert_allclose(eval_h_prime(prof, t), np.cos(b * t), atol=2e-6)


def test_capped_when_rmax_below_first_critical_point():
    prof = solve_profile(CurvatureBound.constant(1.0), 1.0, 1e-3)
    assert prof.is_capped
    assert prof.r0 == pytest.approx(1.0)
    assert prof.s0 == pytest.approx(math.sin(1.0), abs=1e-10)


def test_tabulated_against_independent_integrator():
    K = CurvatureBound.tabulated([(0.0, 0.5), (1.0, 2.0), (2.0, 1.0)])
    prof = solve_profile(K, 4.0, 1e-3)
    ref = solve_ivp(
        lambda t, y: [y[1], -K(t) * y[0]], (0, 4), [0.0, 1.0],
        rtol=1e-12, atol=1e-12, dense_output=True,
        events=lambda t, y: y[1],
    )
    r0_ref = ref.t_events[0][0]
    assert prof.r0 == pytest.approx(r0_ref, abs=1e-6)
    t = np.linspace(0, prof.r0, 50)
    np.testing.assert_allclose(eval_h(prof, t), ref.sol(t)[0], atol=1e-7)


def test_tabulated_constant_equals_constant():
    a = solve_profile(CurvatureBound.tabulated([(0.0, 4.0), (1.0, 4.0)]), 2.0, 1e-3)
    b = solve_profile(CurvatureBound.constant(4.0), 2.0, 1e-3)
    assert a.r0 == pytest.approx(b.r0, abs=1e-12)
    np.testing.assert_allclose(a.grid, b.grid, atol=1e-14)


def test_ratio_is_half_pi_for_constant(unit_profile):
    assert unit_profile.ratio == pytest.approx(math.pi / 2, abs=1e-6)


def test_domain_and_range_errors(unit_profile):
    with pytest.raises(OutOfDomainError):
        eval_h(unit_profile, -0.1)
    with pytest.raises(OutOfDomainError):
        eval_h_prime(unit_profile, unit_profile.r0 + 0.01)
    with pytest.raises(OutOfRangeError):
        invert_h(unit_profile, unit_profile.s0 * 1.01)
    with pytest.raises(OutOfRangeError):
        invert_h(unit_profile, -1.0)


def test_closed_form_rejects_tabulated():
    with pytest.raises(UnsupportedVariantError):
        closed_form_profile(CurvatureBound.tabulated([(0.0, 1.0)]), 1.0)


def test_closed_form_agrees_with_rk4():
    exact = closed_form_profile(CurvatureBound.constant(2.25), 5.0)
    num = solve_profile(CurvatureBound.constant(2.25), 5.0, 1e-3)
    assert exact.exact and not num.exact
    assert exact.r0 == pytest.approx(num.r0, abs=1e-6)
    t = np.linspace(0, min(exact.r0, num.r0), 33)
    np.testing.assert_allclose(eval_h(exact, t), eval_h(num, t), atol=1e-10)


@pytest.mark.parametrize("bad", [dict(b2=0.0), dict(b2=-1.0)])
def test_invalid_constant(bad):
    with pytest.raises(ValueError):
        CurvatureBound.constant(**bad)


@pytest.mark.parametrize("samples", [[], [(0.5, 1.0)], [(0.0, 1.0), (0.0, 2.0)], [(0.0, -1.0)]])
def test_invalid_tabulated(samples):
    with pytest.raises(ValueError):
        CurvatureBound.tabulated(samples)


def test_solve_rejects_bad_step():
    with pytest.raises(ValueError):
        solve_profile(CurvatureBound.zero(), 1.0, 0.0)
    with pytest.raises(ValueError):
        solve_profile(CurvatureBound.zero(), 1.0, 2.0)


def test_parse():
    assert CurvatureBound.parse("zero").kind == "zero"
    assert CurvatureBound.parse("const:4").b == 2.0
    with pytest.raises(ValueError):
        CurvatureBound.parse("hyperbolic")


def test_json_round_trip(unit_profile):
    text = profile_to_json(unit_profile)
    back = profile_from_json(text)
    assert back.r0 == unit_profile.r0 and back.s0 == unit_profile.s0
    np.testing.assert_array_equal(back.grid, unit_profile.grid)
    assert json.loads(text)["curvature"] == {"kind": "constant", "b2": 1.0}
    tab = solve_profile(CurvatureBound.tabulated([(0.0, 1.0), (1.0, 3.0)]), 2.0, 1e-2)
    assert profile_from_json(profile_to_json(tab)).curvature == tab.curvature


def test_grid_is_read_only(unit_profile):
    with pytest.raises(ValueError):
        unit_profile.grid[0, 0] = 1.0


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 1.0))
def test_invert_round_trip(unit_profile, frac):
    s = frac * unit_profile.s0
    t = invert_h(unit_profile, s)
    assert 0.0 <= t <= unit_profile.r0 + 1e-12
    assert eval_h(unit_profile, t) == pytest.approx(s, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 3.0))
def test_profile_increasing_and_bounded_by_t(b):
    prof = solve_profile(CurvatureBound.constant(b * b), 2 * math.pi / b, 1e-2)
    h = prof.h
    assert np.all(np.diff(h) > 0)
    assert np.all(h <= prof.t + 1e-12)  # K >= 0 comparison with the flat profile
    assert np.all(prof.hp >= -2 * b * prof.step**2)  # h'(r0) = O(b * bisection tol)
