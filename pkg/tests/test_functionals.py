import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import S0_M2, paraboloid_bump
from wsi.comparison import CurvatureBound, closed_form_profile, solve_profile
from wsi.errors import PreconditionError
from wsi.functionals import (
    ProfileCurves,
    SmoothingSpec,
    hessiana_check,
    integrands,
    isoperimetric_sides,
    lemma41_residual,
    lemma42_witness,
    levelset_identity_check,
    profile_curves,
    radial_f_divergence,
    sobolev_sides,
)
from wsi.geometry import WeightedAmbient, disc, plane_patch, sphere, spherical_cap
from wsi.geometry.ambient import ambient_radial
from wsi.comparison import eval_h

KAPPA = 2 / 3


@pytest.fixture(scope="module")
def big_disc():
    return disc(2.0, 32, 64)


@pytest.fixture(scope="module")
def plateau(big_disc):
    r = np.linalg.norm(big_disc.vertices, axis=1)
    phi = np.clip(2.0 - r, 0.0, 1.0)
    phi[big_disc.boundary_vertices] = 0.0
    return phi


# -- inequality sides --------------------------------------------------------


def test_closed_form_sobolev_p1(unit_disc, unit_disc_bump, euclid, flat_profile):
    rep = sobolev_sides(unit_disc, euclid, unit_disc_bump, 1.0, flat_profile, KAPPA)
    assert rep.lhs == pytest.approx(math.sqrt(math.pi / 3), rel=1e-2)  # (int phi^2)^(1/2)
    assert rep.rhs == pytest.approx(S0_M2 * 4 * math.pi / 3, rel=1e-2)  # S int 2r
    assert rep.hypotheses.admissible and rep.holds and rep.ratio < 0.05


def test_closed_form_sobolev_p15(unit_disc, unit_disc_bump, euclid, flat_profile):
    rep = sobolev_sides(unit_disc, euclid, unit_disc_bump, 1.5, flat_profile, KAPPA)
    assert rep.lhs == pytest.approx((math.pi / 7) ** 0.25, rel=1e-2)
    assert rep.rhs == pytest.approx(S0_M2 * 2 * math.pi * 2**1.5 / 3.5, rel=1e-2)
    assert not rep.warnings


def test_high_exponent_warns(unit_disc, unit_disc_bump, euclid, flat_profile):
    rep = sobolev_sides(unit_disc, euclid, unit_disc_bump, 1.6, flat_profile, KAPPA)
    assert any("> 6" in w for w in rep.warnings)


@pytest.mark.parametrize("p", [0.5, 2.0, 3.0])
def test_exponent_range(unit_disc, unit_disc_bump, euclid, flat_profile, p):
    with pytest.raises(ValueError):
        sobolev_sides(unit_disc, euclid, unit_disc_bump, p, flat_profile)


def test_test_function_validation(unit_disc, euclid, flat_profile):
    with pytest.raises(ValueError, match="boundary"):
        sobolev_sides(unit_disc, euclid, np.ones(unit_disc.n_vertices), 1.0, flat_profile)
    with pytest.raises(ValueError, match="nonnegative"):
        sobolev_sides(unit_disc, euclid, -np.ones(unit_disc.n_vertices), 1.0, flat_profile)
    with pytest.raises(ValueError, match="shape"):
        sobolev_sides(unit_disc, euclid, np.ones(3), 1.0, flat_profile)


def test_isoperimetric_flat_disc(unit_disc, euclid, flat_profile):
    rep = isoperimetric_sides(unit_disc, euclid, flat_profile, KAPPA)
    assert rep.lhs == pytest.approx(math.sqrt(math.pi), rel=1e-2)
    assert rep.rhs == pytest.approx(S0_M2 * 2 * math.pi, rel=1e-2)
    assert rep.ratio <= 1 and rep.hypotheses.admissible


def test_isoperimetric_self_shrinker(flat_profile):
    amb = WeightedAmbient.euclidean(3, "gaussian4")
    rep = isoperimetric_sides(sphere(2.0, 4), amb, flat_profile, KAPPA)
    # vol_f = 16 pi / e, f* = 1, |H_f - grad f| = 1
    vol = 16 * math.pi / math.e
    assert rep.f_star == pytest.approx(1.0, abs=1e-9)
    assert rep.lhs == pytest.approx(math.sqrt(vol), rel=1e-3)
    assert rep.rhs == pytest.approx(S0_M2 * math.exp(0.5) * vol, rel=1e-2)
    assert rep.ratio <= 1


def test_integrand_forms_ordered(unit_disc, unit_disc_bump, euclid):
    _, theorem, lemma = integrands(unit_disc, euclid, unit_disc_bump)
    assert np.all(lemma <= theorem + 1e-12)


def test_report_dict_is_plain(unit_disc, unit_disc_bump, euclid, flat_profile):
    d = sobolev_sides(unit_disc, euclid, unit_disc_bump, 1.0, flat_profile).to_dict()
    assert type(d["lhs"]) is float and type(d["hypotheses"]["s0"]) is float
    assert d["mesh"]["n_vertices"] == unit_disc.n_vertices


# -- smoothing and profile curves -------------------------------------------------


def test_smoothing_family():
    s = SmoothingSpec(0.1)
    np.testing.assert_allclose(s.lam([-1, 0, 0.05, 0.1, 1]), [0, 0, 0.5, 1, 1])
    assert s.delta(-0.1) == 0 and s.delta(0.0) == 1
    h = 1e-6
    assert s.lam_prime(0.03) == pytest.approx((s.lam(0.03 + h) - s.lam(0.03 - h)) / (2 * h), rel=1e-6)
    step = SmoothingSpec(kind="indicator-limit")
    np.testing.assert_array_equal(step.lam([-1, 0, 1]), [0, 0, 1])
    with pytest.raises(ValueError):
        SmoothingSpec(0.0)
    with pytest.raises(ValueError):
        SmoothingSpec(kind="gaussian")


def test_plateau_curves(big_disc, plateau, euclid, flat_profile):
    R = np.linspace(0.05, 0.9, 40)
    c = profile_curves(big_disc, euclid, plateau, 0, SmoothingSpec(kind="indicator-limit"), R, flat_profile)
    # phi = 1 and no gradient inside the unit disc: phi_bar = pi R^2, psi_bar = 0
    # node membership quantizes the ball: error at most a mesh-size band around the circle
    assert np.all(np.abs(c.phi_bar - math.pi * R**2) <= 2 * math.pi * R * big_disc.mesh_size)
    assert np.max(np.abs(c.psi_bar)) < 1e-9
    assert c.phi_integral == pytest.approx(7 * math.pi / 3, rel=1e-3)
    assert c.to_csv().splitlines()[0] == "R,phi,psi,phi_bar,psi_bar"


def test_curves_grid_validation(unit_disc, unit_disc_bump, euclid, flat_profile):
    with pytest.raises(ValueError):
        profile_curves(unit_disc, euclid, unit_disc_bump, 0, SmoothingSpec(), [], flat_profile)
    with pytest.raises(ValueError):
        profile_curves(unit_disc, euclid, unit_disc_bump, 0, SmoothingSpec(), [0.5, 0.4], flat_profile)
    short = closed_form_profile(CurvatureBound.constant(4.0), 5.0)
    with pytest.raises(ValueError):
        profile_curves(unit_disc, euclid, unit_disc_bump, 0, SmoothingSpec(), [0.5, 1.0], short)


@pytest.mark.parametrize("case", ["plateau", "paraboloid", "cap"])
def test_monotonicity_residual(case, big_disc, plateau, unit_disc, unit_disc_bump, euclid, flat_profile):
    if case == "plateau":
        args = (big_disc, euclid, plateau, flat_profile, np.linspace(0.05, 3.0, 120))
    elif case == "paraboloid":
        args = (unit_disc, euclid, unit_disc_bump, flat_profile, np.linspace(0.05, 1.2, 120))
    else:
        amb = WeightedAmbient.sphere(3, 1.0)
        cap = spherical_cap(1.0, 1.2, 24)
        phi = np.clip(1.2 - np.arccos(np.clip(cap.vertices[:, 2], -1, 1)), 0, None)
        phi[cap.boundary_vertices] = 0.0
        args = (cap, amb, phi, closed_form_profile(CurvatureBound.constant(1.0), math.pi / 2),
                np.linspace(0.05, 1.5, 120))
    mesh, amb, phi, prof, R = args
    c = profile_curves(mesh, amb, phi, 0, SmoothingSpec(0.05), R, prof)
    assert lemma41_residual(c, prof).passed


def test_witness_on_plateau(big_disc, plateau, euclid, flat_profile):
    R = np.linspace(0.02, 6.0, 300)
    c = profile_curves(big_disc, euclid, plateau, 0, SmoothingSpec(0.05), R, flat_profile)
    alpha = math.sqrt(c.phi_integral / (math.pi * 0.5))
    w = lemma42_witness(c, flat_profile, 0.5, 2.5)
    assert w is not None and 0 < w < alpha
    # the returned radius satisfies the inequality it claims
    lhs = np.interp(2.5 * w, R, c.phi_bar)
    k = int(np.searchsorted(R, w))
    assert lhs <= 2 * alpha / 0.5 * 2.5 * c.psi_bar[k] + 1e-12


def test_witness_on_self_shrinker(flat_profile):
    mesh = sphere(2.0, 3)
    amb = WeightedAmbient.euclidean(3, "gaussian4")
    R = np.linspace(0.05, 9.0, 200)
    c = profile_curves(mesh, amb, np.ones(mesh.n_vertices), 0, SmoothingSpec(0.05), R, flat_profile)
    assert lemma42_witness(c, flat_profile, 0.5, 1.5) is not None


def _synthetic(psi_bar, phi_at_base=1.0, R=None):
    R = np.linspace(0.1, 10.0, 100) if R is None else R
    ones = np.ones_like(R)
    return ProfileCurves(0, R, ones, 0 * ones, ones, psi_bar * ones, SmoothingSpec(), phi_at_base, 1.0, 0.0, 2, 0.1)


def test_witness_degenerate_returns_none(flat_profile):
    assert lemma42_witness(_synthetic(0.0), flat_profile, 0.5, 2.0) is None


def test_witness_preconditions(flat_profile):
    with pytest.raises(PreconditionError, match="phi"):
        lemma42_witness(_synthetic(1.0, phi_at_base=0.5), flat_profile, 0.5, 2.0)
    with pytest.raises(PreconditionError, match="t ="):
        lemma42_witness(_synthetic(1.0), flat_profile, 0.5, 1.0)
    tiny = closed_form_profile(CurvatureBound.constant(100.0), 1.0)  # s0 = 0.1
    with pytest.raises(PreconditionError, match="J"):
        lemma42_witness(_synthetic(1.0), tiny, 0.5, 2.0)
    with pytest.raises(PreconditionError, match="exceeds"):
        lemma42_witness(_synthetic(1.0), flat_profile, 0.5, 2.0, alpha=1.0, inj=1.5)
    with pytest.raises(PreconditionError, match="grid"):
        lemma42_witness(_synthetic(1.0, R=np.linspace(0.1, 1.0, 10)), flat_profile, 0.5, 2.0, alpha=1.0)


# -- radial field comparison -------------------------------------------------------


def test_equality_case_on_plane(euclid, flat_profile):
    mesh = plane_patch(1.0, 20)
    base = int(np.argmin(np.linalg.norm(mesh.vertices, axis=1)))
    res = hessiana_check(mesh, euclid, base, flat_profile)
    assert abs(res.min_margin) <= 1e-8 and np.max(np.abs(res.margins)) <= 1e-8
    assert res.n_excluded == 0


def test_offset_base_point(unit_disc, euclid, flat_profile):
    res = hessiana_check(unit_disc, euclid, [0.0, 0.0, 0.4], flat_profile)
    assert res.passed()  # h = r makes the comparison an identity
    curved = solve_profile(CurvatureBound.constant(1.0), 3.0, 1e-4)
    assert hessiana_check(unit_disc, euclid, [0.0, 0.0, 0.4], curved).min_margin > 0


@pytest.mark.parametrize("b2", [1.0, 4.0])
def test_curved_profile_in_euclidean_space(unit_disc, euclid, b2):
    prof = solve_profile(CurvatureBound.constant(b2), 3.0, 1e-4)
    res = hessiana_check(disc(0.7, 16, 32), euclid, 0, prof)
    assert res.passed()


@pytest.mark.parametrize("b2", [1.0, 4.0])
def test_sphere_cap(b2):
    amb = WeightedAmbient.sphere(3, 1.0)
    cap = spherical_cap(1.0, 0.7, 16)
    prof = closed_form_profile(CurvatureBound.constant(b2), math.pi / (2 * math.sqrt(b2)))
    res = hessiana_check(cap, amb, 0, prof)
    assert res.passed()
    assert res.n_checked > 0


def test_divergence_matches_finite_differences(euclid, flat_profile):
    # bent surface so the closed form mixes tangent and normal parts of grad r
    mesh = disc(1.0, 6, 12)
    v = mesh.vertices.copy()
    v[:, 2] = 0.3 * v[:, 0] ** 2
    mesh = mesh.with_vertices(v)
    xi = np.array([0.1, -0.2, 0.5])
    prof = solve_profile(CurvatureBound.constant(1.0), 3.0, 1e-4)
    dev = np.zeros_like(v)
    lhs, _, _, valid = radial_f_divergence(mesh, euclid, xi, prof, dev)

    def X(x):
        r, g = ambient_radial(euclid, xi, x[None])
        return eval_h(prof, r[0]) * g[0]

    basis = mesh.face_bases
    c = mesh.vertices[mesh.faces].mean(axis=1)
    eps = 1e-6
    for f in np.flatnonzero(valid)[:40]:
        div = sum(
            np.dot(X(c[f] + eps * basis[f, :, a]) - X(c[f] - eps * basis[f, :, a]), basis[f, :, a]) / (2 * eps)
            for a in range(2)
        )
        assert lhs[f] == pytest.approx(div, abs=1e-6)


# -- layer-cake identity -----------------------------------------------------------------


def test_levelset_identity(unit_disc, unit_disc_bump, euclid):
    rep = levelset_identity_check(unit_disc, euclid, unit_disc_bump)
    assert rep.rhs == pytest.approx(math.pi / 6, rel=1e-2)
    assert rep.rel_error <= 1e-2
    assert np.all(np.diff(rep.level_volumes) <= 0)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 0.8), st.floats(-0.2, 0.2), st.floats(1.0, 3.0))
def test_random_bumps_satisfy_sobolev(rho, cx, power):
    mesh = _DISC
    x = mesh.vertices - np.array([cx, 0.0, 0.0])
    phi = np.maximum(1.0 - np.sum(x**2, axis=1) / rho**2, 0.0) ** power
    phi[mesh.boundary_vertices] = 0.0
    for p in (1.0, 1.5):
        rep = sobolev_sides(mesh, _EUCLID, phi, p, _FLAT)
        assert rep.hypotheses.admissible and rep.ratio <= 1


_DISC = disc(1.0, 16, 32)
_EUCLID = WeightedAmbient.euclidean(3)
_FLAT = closed_form_profile(CurvatureBound.zero(), 20.0)


def test_paraboloid_helper_matches_fixture(unit_disc, unit_disc_bump):
    np.testing.assert_array_equal(paraboloid_bump(unit_disc), unit_disc_bump)
