import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar
from scipy.special import gamma

from wsi.comparison import CurvatureBound, closed_form_profile, solve_profile
from wsi.constants import (
    check_hypotheses,
    golden_section_min,
    j_bar,
    optimal_constant,
    optimal_constant_closed_form,
    resolve_kappa,
    sobolev_constant,
    sobolev_constants,
    unit_ball_volume,
)


@pytest.mark.parametrize("m,expected", [(1, 2.0), (2, math.pi), (3, 4 * math.pi / 3), (4, math.pi**2 / 2)])
def test_unit_ball_volume(m, expected):
    assert unit_ball_volume(m) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("m", range(2, 9))
def test_optimum_against_scipy(m):
    k_star, S0 = optimal_constant(m)
    ref = minimize_scalar(lambda k: sobolev_constant(m, k), bounds=(1e-6, 1 - 1e-6), method="bounded",
                          options={"xatol": 1e-12})
    assert k_star == pytest.approx(ref.x, abs=1e-5)
    assert S0 == pytest.approx(ref.fun, rel=1e-9)
    # direct transcription with scipy's gamma
    omega = math.pi ** (m / 2) / gamma(m / 2 + 1)
    direct = 2.0**m * (m + 1) ** ((m + 1) / m) / (m - 1) / omega ** (1 / m)
    assert S0 == pytest.approx(direct, rel=1e-12)


def test_m2_value():
    assert optimal_constant_closed_form(2) == pytest.approx(11.72654, abs=1e-4)
    assert sobolev_constant(2, 2 / 3) == pytest.approx(4 * 3**1.5 / math.sqrt(math.pi), rel=1e-13)


def test_golden_section_on_parabola():
    assert golden_section_min(lambda x: (x - 0.3) ** 2, 0.0, 1.0, 1e-12) == pytest.approx(0.3, abs=1e-10)


@pytest.mark.parametrize("kappa", [0.0, 1.0, -0.1, 1.5])
def test_kappa_out_of_range(kappa):
    with pytest.raises(ValueError):
        sobolev_constant(2, kappa)


def test_dimension_and_ratio_validation():
    with pytest.raises(ValueError):
        sobolev_constant(1, 0.5)
    with pytest.raises(ValueError):
        sobolev_constant(2.5, 0.5)
    with pytest.raises(ValueError):
        sobolev_constant(2, 0.5, 0.9)


def test_ratio_scales_linearly():
    assert sobolev_constant(3, 0.4, math.pi / 2) == pytest.approx(math.pi / 2 * sobolev_constant(3, 0.4))
    c = sobolev_constants(2, "auto", math.pi / 2)
    assert c.S == pytest.approx(c.S0, rel=1e-12)
    assert c.S0 == pytest.approx(math.pi / 2 * optimal_constant_closed_form(2))


def test_resolve_kappa():
    assert resolve_kappa(3, "auto") == pytest.approx(0.75, abs=1e-6)
    assert resolve_kappa(3, 0.2) == 0.2


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 8), st.floats(0.01, 0.99))
def test_constant_never_below_optimum(m, kappa):
    assert sobolev_constant(m, kappa) >= optimal_constant_closed_form(m) * (1 - 1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.0, 3.0), st.floats(1e-3, 100.0))
def test_jbar_closed_form(kappa, fstar, vol):
    assert j_bar(2, kappa, fstar, vol) == pytest.approx(math.sqrt(math.exp(fstar) * vol / (math.pi * (1 - kappa))))


def test_hypotheses_on_sphere_profile():
    prof = closed_form_profile(CurvatureBound.constant(1.0), math.pi / 2)
    ok = check_hypotheses(prof, 0.5, math.pi)
    assert ok.admissible and ok.alpha_bar == pytest.approx(math.asin(0.5))
    bad = check_hypotheses(prof, 1.5, math.pi)
    assert not bad.cond_a_holds and not bad.admissible and bad.alpha_bar is None


def test_hypotheses_capped_flat_profile():
    prof = solve_profile(CurvatureBound.zero(), 10.0, 1e-2)
    rep = check_hypotheses(prof, 3.0, math.inf)
    assert rep.admissible
    assert check_hypotheses(prof, 11.0, math.inf).cond_a_holds is False
    assert check_hypotheses(prof, 3.0, 1.0).cond_b_holds is False


def test_jbar_rejects_negative_volume():
    with pytest.raises(ValueError):
        j_bar(2, 0.5, 0.0, -1.0)
