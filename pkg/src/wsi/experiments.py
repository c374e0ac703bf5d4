"""Scenario runner: self-shrinker bounds, the Gaussian plane, the sphere-ambient
negative test and intrinsic ball growth on flat and cylindrical patches.

Every scenario returns a :class:`ScenarioReport` whose JSON form is
deterministic apart from ``runtime_ms``.
"""

from __future__ import annotations

import configparser
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import quad as scalar_quad
from scipy.special import erf

from .comparison import CurvatureBound, closed_form_profile
from .constants import j_bar, optimal_constant, sobolev_constants
from .errors import ConfigError
from .functionals import isoperimetric_sides
from .geometry import (
    WeightedAmbient,
    ball_f_volume,
    cylinder,
    f_volume,
    geodesic_distance,
    hf_minus_gradf,
    mean_curvature,
    plane_patch,
    quadrature,
    sphere,
    weighted_mean_curvature,
)

__all__ = [
    "Check",
    "ScenarioReport",
    "GrowthCurve",
    "SuiteReport",
    "SCENARIOS",
    "DEFAULT_CONFIG",
    "scenario_self_shrinker",
    "scenario_gaussian_plane",
    "scenario_sphere_ambient_negative",
    "scenario_end_growth",
    "cylinder_ball_area",
    "parse_config",
    "run_all",
]


@dataclass(frozen=True)
class Check:
    """One verdict. ``relation`` is "approx" (|value - reference| <= tol),
    "ge" (value >= reference - tol) or "le" (value <= reference + tol)."""

    name: str
    value: float
    reference: float
    tol: float
    relation: str = "approx"

    def __post_init__(self):
        if self.relation not in ("approx", "ge", "le"):
            raise ValueError(f"unknown relation {self.relation!r}")
        for key in ("value", "reference", "tol"):
            object.__setattr__(self, key, float(getattr(self, key)))

    @property
    def passed(self) -> bool:
        v, r, t = self.value, self.reference, self.tol
        if not (math.isfinite(v) or self.relation != "approx"):
            return False
        if self.relation == "approx":
            return abs(v - r) <= t
        if self.relation == "ge":
            return v >= r - t
        return v <= r + t

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": _num(self.value),
            "reference": _num(self.reference),
            "tol": _num(self.tol),
            "relation": self.relation,
            "pass": self.passed,
        }


def _num(x):
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


@dataclass
class ScenarioReport:
    scenario: str
    params: dict
    checks: list[Check] = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    growth: list["GrowthCurve"] = field(default_factory=list)
    runtime_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self, include_runtime: bool = True) -> dict:
        d = {
            "scenario": self.scenario,
            "params": dict(self.params),
            "constants": {k: _num(v) for k, v in self.constants.items()},
            "checks": [c.to_dict() for c in self.checks],
            "pass": self.passed,
            "warnings": list(self.warnings),
            "notes": list(self.notes),
        }
        if self.growth:
            d["growth"] = [g.to_dict() for g in self.growth]
        if include_runtime:
            d["runtime_ms"] = round(self.runtime_ms, 3)
        return d

    def to_json(self, include_runtime: bool = True) -> str:
        return json.dumps(self.to_dict(include_runtime), indent=2, sort_keys=True)


@dataclass(frozen=True)
class GrowthCurve:
    """Samples of vol_f(B_r(q)) and the least-squares slope of vol^(1/m) over
    the upper half of the radius grid."""

    center: int
    radii: np.ndarray
    volumes: np.ndarray
    slope: float
    residual: float

    @classmethod
    def fit(cls, center: int, radii, volumes, m: int = 2) -> "GrowthCurve":
        r = np.asarray(radii, dtype=float)
        v = np.asarray(volumes, dtype=float)
        upper = slice(len(r) // 2, None)
        y = v[upper] ** (1.0 / m)
        A = np.column_stack([r[upper], np.ones_like(r[upper])])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        res = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
        return cls(center, r, v, float(coef[0]), res)

    @property
    def nondecreasing(self) -> bool:
        return bool(np.all(np.diff(self.volumes) >= 0))

    def to_dict(self) -> dict:
        return {
            "center": self.center,
            "radii": [float(x) for x in self.radii],
            "volumes": [float(x) for x in self.volumes],
            "slope": self.slope,
            "residual": self.residual,
        }


def _timed(fn: Callable[..., ScenarioReport]):
    def run(*args, **kwargs):
        t0 = time.perf_counter()
        rep = fn(*args, **kwargs)
        rep.runtime_ms = 1000.0 * (time.perf_counter() - t0)
        return rep

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    run.__wrapped__ = fn
    return run


# -- scenarios ---------------------------------------------------------------


def _max_hf(subdiv: int, ambient: WeightedAmbient, radius: float) -> tuple[float, object]:
    mesh = sphere(radius, subdiv)
    mc = mean_curvature(mesh, ambient)
    hf = weighted_mean_curvature(mesh, ambient, mc)
    return float(np.nanmax(np.linalg.norm(hf, axis=1))), mesh


@_timed
def scenario_self_shrinker(subdiv: int = 4) -> ScenarioReport:
    """Round sphere of radius 2 in R^3 with f = |x|^2/4, a closed self-shrinker."""
    subdiv = int(subdiv)
    if subdiv < 1:
        raise ValueError("subdiv must be >= 1")
    m, R = 2, 2.0
    rep = ScenarioReport("self_shrinker", {"subdiv": subdiv})
    if subdiv < 3:
        rep.warnings.append(f"subdiv = {subdiv} < 3: mesh is under-resolved")
    amb = WeightedAmbient.euclidean(3, "gaussian4")
    _, S0 = optimal_constant(m)
    rep.constants["S0"] = S0
    hf, mesh = _max_hf(subdiv, amb, R)
    hf_prev, _ = _max_hf(subdiv - 1, amb, R)
    vol = f_volume(mesh, amb)
    rep.checks += [
        Check("max_Hf", hf, 0.0, 1e-2, "approx"),
        Check("max_Hf_decreasing", hf, hf_prev, 0.0, "le"),
        Check("growth_bound", math.exp(R * R / 4) * R, 2.0 / S0, 0.0, "ge"),
        Check("volume_bound", vol ** (1.0 / m), 2.0 * math.exp(-R * R / 4) / (S0 * R), 0.0, "ge"),
        Check("weighted_volume", vol, 16 * math.pi / math.e, 5e-3 * 16 * math.pi / math.e, "approx"),
    ]
    profile = closed_form_profile(CurvatureBound.zero(), 20.0)
    iso = isoperimetric_sides(mesh, amb, profile)
    rep.constants["kappa"] = iso.constants.kappa
    rep.constants["S"] = iso.constants.S
    rep.checks.append(Check("isoperimetric_ratio", iso.ratio, 1.0, 0.0, "le"))
    return rep


@_timed
def scenario_gaussian_plane(L: float = 6.0, n: int = 120) -> ScenarioReport:
    """Flat plane through the origin with f = |x|^2/2: finite f-volume, H_f = 0."""
    L, n = float(L), int(n)
    if not L > 0:
        raise ValueError("L must be positive")
    rep = ScenarioReport("gaussian_plane", {"L": L, "n": n})
    mesh = plane_patch(L, n)
    if mesh.mesh_size > 0.5:
        rep.warnings.append(f"mesh size {mesh.mesh_size:.3g} > 0.5: under-resolved")
    amb = WeightedAmbient.euclidean(3, "gaussian2")
    mc = mean_curvature(mesh, amb)
    hf = np.linalg.norm(weighted_mean_curvature(mesh, amb, mc), axis=1)
    _, dev = hf_minus_gradf(mesh, amb, mc)
    interior = ~mesh.boundary_mask
    radial = np.linalg.norm(mesh.vertices, axis=1)
    vol = f_volume(mesh, amb)
    patch_exact = 2 * math.pi * erf(L / math.sqrt(2)) ** 2
    f_star = float(amb.f(mesh.vertices).max())
    rep.constants["patch_closed_form"] = patch_exact
    rep.checks += [
        Check("weighted_volume", vol, 2 * math.pi, 0.01 * 2 * math.pi, "approx"),
        Check("weighted_volume_patch", vol, patch_exact, 1e-3 * patch_exact, "approx"),
        Check("max_Hf", float(hf[interior].max()), 0.0, 1e-8, "approx"),
        Check("deviation_is_radius", float(np.max(np.abs(dev[interior] - radial[interior]))), 0.0, 1e-8),
        Check("f_star", f_star, L * L, 1e-9 * L * L, "approx"),
    ]
    rep.notes.append(
        f"f* = {f_star:g} grows like L^2 with the patch, so the hypothesis f* < inf fails in the limit"
    )
    return rep


@_timed
def scenario_sphere_ambient_negative(b: float = 1.0, subdiv: int = 4) -> ScenarioReport:
    """Equatorial S^2(1/b) in S^3(1/b), f = 0: closed and minimal, so no kappa is admissible."""
    b, subdiv = float(b), int(subdiv)
    if not b > 0:
        raise ValueError("b must be positive")
    m = 2
    rep = ScenarioReport("sphere_ambient_negative", {"b": b, "subdiv": subdiv})
    if subdiv < 3:
        rep.warnings.append(f"subdiv = {subdiv} < 3: mesh is under-resolved")
    amb = WeightedAmbient.sphere(3, b)
    mesh = sphere(1.0 / b, subdiv).embed(4)
    profile = closed_form_profile(CurvatureBound.constant(b * b), math.pi / (2 * b))
    vol = f_volume(mesh, amb)
    kappas = np.linspace(0.01, 0.99, 99)
    jb = np.array([j_bar(m, k, 0.0, vol) for k in kappas])
    exact = 2.0 / b / np.sqrt(1.0 - kappas)
    n_adm = int(np.sum(jb <= profile.s0))
    H = np.nanmax(mean_curvature(mesh, amb).norm)
    iso = isoperimetric_sides(mesh, amb, profile)
    rep.constants["s0"] = profile.s0
    rep.checks += [
        Check("admissible_kappa_count", n_adm, 0, 0, "approx"),
        Check("min_jbar_times_b", float(jb.min() * b), 2.0, 0.01, "ge"),
        Check("jbar_closed_form", float(np.max(np.abs(jb / exact - 1.0))), 0.0, 0.01),
        Check("max_H", float(H), 0.0, 0.05),
        Check("isoperimetric_ratio", iso.ratio, 1.0, 0.0, "ge"),
    ]
    rep.notes.append("inequality fails without the hypothesis J <= s0, as it must for a closed minimal surface")
    return rep


def cylinder_ball_area(r: float, rho: float = 1.0) -> float:
    """Intrinsic ball area on an infinite cylinder: the unrolled disc clipped to one period."""
    if r <= 0:
        return 0.0
    lim = min(r, math.pi * rho)
    val, _ = scalar_quad(lambda s: 2.0 * math.sqrt(max(r * r - s * s, 0.0)), -lim, lim)
    return val


def _pick_vertex(mesh, point) -> int:
    return int(np.argmin(np.linalg.norm(mesh.vertices - np.asarray(point), axis=1)))


@_timed
def scenario_end_growth(shape: str = "plane", extent: float = 6.0, centers: int = 2, n: int = 0) -> ScenarioReport:
    """Intrinsic ball growth with f = 0; slopes of vol^(1/2) against sqrt(pi) and C/2."""
    extent, centers = float(extent), int(centers)
    if shape not in ("plane", "cylinder"):
        raise ValueError(f"shape must be plane or cylinder, got {shape!r}")
    if centers < 1:
        raise ValueError("need at least one center")
    m = 2
    rep = ScenarioReport("end_growth", {"shape": shape, "extent": extent, "centers": centers})
    amb = WeightedAmbient.euclidean(3, "zero")
    consts = sobolev_constants(m)
    C = 1.0 / (2.0 * consts.S)  # f* = 0
    rep.constants.update(S=consts.S, kappa=consts.kappa, C=C)
    width = 2.0 * extent / centers
    if shape == "plane":
        mesh = plane_patch(extent, n or int(round(20 * extent)))
        lam = 0.45 * min(width, 2.0 * extent)
        targets = [(-extent + (i + 0.5) * width, 0.0, 0.0) for i in range(centers)]
        oracle = lambda r: math.pi * r * r  # noqa: E731
    else:
        rho = 1.0
        mesh = cylinder(rho, 2.0 * extent, n or 64)
        lam = 0.45 * width
        targets = [(rho, 0.0, -extent + (i + 0.5) * width) for i in range(centers)]
        oracle = lambda r: cylinder_ball_area(r, rho)  # noqa: E731
    rep.params["lambda1"] = lam
    radii = np.linspace(lam / 20, lam, 20)
    boundary = mesh.boundary_vertices
    curves, dists = [], []
    for target in targets:
        q = _pick_vertex(mesh, target)
        d = geodesic_distance(mesh, q)
        if len(boundary) and d[boundary].min() < lam:
            rep.notes.append(f"center {q} skipped: boundary within lambda1")
            continue
        vols = [ball_f_volume(mesh, amb, d, r) for r in radii]
        curves.append(GrowthCurve.fit(q, radii, vols, m))
        dists.append(d)
    rep.growth = curves
    if not curves:
        rep.warnings.append("no admissible centers")
        return rep
    slopes = [c.slope for c in curves]
    half = len(radii) // 2  # small balls are dominated by mesh-size error
    worst_oracle = float(max(
        abs(v / oracle(r) - 1.0) for c in curves for r, v in zip(c.radii[half:], c.volumes[half:])
    ))
    rep.checks += [
        Check("nondecreasing", float(all(c.nondecreasing for c in curves)), 1.0, 0.0),
        Check("min_slope_vs_C_over_m", min(slopes), C / m, 0.0, "ge"),
        Check("ball_volume_vs_oracle", worst_oracle, 0.0, 0.02),
    ]
    if shape == "plane":
        rep.checks.append(
            Check("max_slope_error", max(abs(s - math.sqrt(math.pi)) for s in slopes), 0.0, 0.02 * math.sqrt(math.pi))
        )
    # disjointness of the radius-lambda1 balls, measured on quadrature nodes
    quad = quadrature(mesh, amb)
    inside = [quad.interp(d) < lam for d in dists]
    overlap = 0.0
    min_sep = math.inf
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            overlap += float(np.sum(quad.weights[inside[i] & inside[j]]))
            min_sep = min(min_sep, float(dists[i][curves[j].center]))
    rep.checks.append(Check("ball_overlap", overlap, 0.0, 0.0))
    if len(curves) > 1:
        rep.checks.append(Check("center_separation", min_sep, 2 * lam, 0.0, "ge"))
    return rep


SCENARIOS: dict[str, Callable[..., ScenarioReport]] = {
    "self_shrinker": scenario_self_shrinker,
    "gaussian_plane": scenario_gaussian_plane,
    "sphere_ambient_negative": scenario_sphere_ambient_negative,
    "end_growth": scenario_end_growth,
}

DEFAULT_CONFIG = """\
[run]
scenarios = self_shrinker, gaussian_plane, sphere_ambient_negative, end_growth

[self_shrinker]
subdiv = 4

[gaussian_plane]
L = 6
n = 120

[sphere_ambient_negative]
b = 1

[end_growth]
shape = plane
extent = 6
centers = 2
"""


# -- config and suite ---------------------------------------------------------------


def _coerce(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _params_of(fn) -> set[str]:
    code = fn.__wrapped__.__code__
    return set(code.co_varnames[: code.co_argcount])


def parse_config(text: str) -> list[tuple[str, dict]]:
    """INI text -> [(scenario, params)] in the listed order."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep parameter case (L)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    raw = cp.get("run", "scenarios", fallback="") if cp.has_section("run") else ""
    names = [s.strip() for s in raw.split(",") if s.strip()]
    plan = []
    for name in names:
        if name not in SCENARIOS:
            raise ConfigError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
        params = {}
        if cp.has_section(name):
            allowed = _params_of(SCENARIOS[name])
            for key, val in cp.items(name):
                if key not in allowed:
                    raise ConfigError(f"unknown parameter {name}.{key}")
                params[key] = _coerce(val)
        plan.append((name, params))
    for section in cp.sections():
        if section != "run" and section not in SCENARIOS:
            raise ConfigError(f"unknown scenario section [{section}]")
    return plan


@dataclass
class SuiteReport:
    reports: list[ScenarioReport]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def to_json(self, include_runtime: bool = True) -> str:
        body = {
            "pass": self.passed,
            "reports": [r.to_dict(include_runtime) for r in self.reports],
        }
        return json.dumps(body, indent=2, sort_keys=True)


def run_all(config: str | Path | None = None) -> SuiteReport:
    """Run the scenarios named in a config file path or config text."""
    if config is None:
        text = DEFAULT_CONFIG
    elif isinstance(config, Path) or (isinstance(config, str) and "\n" not in config and Path(config).is_file()):
        try:
            text = Path(config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    else:
        text = str(config)
    plan = parse_config(text)
    return SuiteReport([SCENARIOS[name](**params) for name, params in plan])
