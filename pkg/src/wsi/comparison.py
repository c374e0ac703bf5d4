"""Comparison profile h solving h'' + K h = 0, h(0) = 0, h'(0) = 1.

The profile is integrated with a fixed-step classical RK4 scheme. Its
increasing interval (0, r0) and range (0, s0) bound the admissible radii of
the weighted Sobolev inequality. For K = 0 the interval is unbounded and the
profile is capped at a user supplied ``r_max``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import OutOfDomainError, OutOfRangeError, UnsupportedVariantError

__all__ = [
    "CurvatureBound",
    "ComparisonProfile",
    "solve_profile",
    "closed_form_profile",
    "eval_h",
    "eval_h_prime",
    "invert_h",
    "profile_to_json",
    "profile_from_json",
]

_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class CurvatureBound:
    """Nonnegative radial curvature bound K(t), defined for t >= 0.

    Use the constructors :meth:`zero`, :meth:`constant` and :meth:`tabulated`.
    Tabulated bounds interpolate linearly and clamp beyond the last sample.
    """

    kind: str
    b2: float = 0.0
    samples: tuple[tuple[float, float], ...] = ()
    _t: np.ndarray = field(default=None, repr=False, compare=False)
    _k: np.ndarray = field(default=None, repr=False, compare=False)

    @classmethod
    def zero(cls) -> "CurvatureBound":
        return cls("zero")

    @classmethod
    def constant(cls, b2: float) -> "CurvatureBound":
        if not b2 > 0:
            raise ValueError(f"constant curvature must be positive, got {b2}")
        return cls("constant", b2=float(b2))

    @classmethod
    def tabulated(cls, samples: Sequence[tuple[float, float]]) -> "CurvatureBound":
        pts = tuple((float(t), float(k)) for t, k in samples)
        if not pts:
            raise ValueError("tabulated curvature needs at least one sample")
        t = np.array([p[0] for p in pts])
        k = np.array([p[1] for p in pts])
        if t[0] != 0.0:
            raise ValueError("tabulated samples must start at t = 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("tabulated sample abscissae must be strictly increasing")
        if np.any(k < 0):
            raise ValueError("curvature bound must be nonnegative")
        obj = cls("tabulated", samples=pts)
        object.__setattr__(obj, "_t", t)
        object.__setattr__(obj, "_k", k)
        return obj

    @property
    def b(self) -> float:
        return math.sqrt(self.b2)

    def __call__(self, t: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return self.b2
        return float(np.interp(abs(t), self._t, self._k))

    def to_dict(self) -> dict:
        if self.kind == "zero":
            return {"kind": "zero"}
        if self.kind == "constant":
            return {"kind": "constant", "b2": self.b2}
        return {"kind": "tabulated", "samples": [list(p) for p in self.samples]}

    @classmethod
    def from_dict(cls, d: dict) -> "CurvatureBound":
        kind = d["kind"]
        if kind == "zero":
            return cls.zero()
        if kind == "constant":
            return cls.constant(d["b2"])
        if kind == "tabulated":
            return cls.tabulated([tuple(p) for p in d["samples"]])
        raise ValueError(f"unknown curvature kind {kind!r}")

    @classmethod
    def parse(cls, text: str) -> "CurvatureBound":
        """Parse ``zero`` or ``const:B2``."""
        text = text.strip().lower()
        if text == "zero":
            return cls.zero()
        if text.startswith("const:"):
            return cls.constant(float(text.split(":", 1)[1]))
        raise ValueError(f"cannot parse curvature bound {text!r}")


@dataclass(frozen=True)
class ComparisonProfile:
    """Sampled solution of the comparison Cauchy problem.

    ``grid`` is an (n, 3) array of rows (t, h(t), h'(t)) ending at r0.
    ``exact`` marks closed-form profiles, which evaluate analytically.
    """

    curvature: CurvatureBound
    step: float
    grid: np.ndarray
    r0: float
    s0: float
    r_max: float
    is_capped: bool
    exact: bool = False

    @property
    def t(self) -> np.ndarray:
        return self.grid[:, 0]

    @property
    def h(self) -> np.ndarray:
        return self.grid[:, 1]

    @property
    def hp(self) -> np.ndarray:
        return self.grid[:, 2]

    @property
    def ratio(self) -> float:
        """r0 / s0, the factor entering the Sobolev constant."""
        return self.r0 / self.s0


def _rk4(K: CurvatureBound, t: float, h: float, p: float, dt: float) -> tuple[float, float]:
    k1h, k1p = p, -K(t) * h
    km = K(t + 0.5 * dt)
    k2h, k2p = p + 0.5 * dt * k1p, -km * (h + 0.5 * dt * k1h)
    k3h, k3p = p + 0.5 * dt * k2p, -km * (h + 0.5 * dt * k2h)
    k4h, k4p = p + dt * k3p, -K(t + dt) * (h + dt * k3h)
    return (
        h + dt / 6.0 * (k1h + 2 * k2h + 2 * k3h + k4h),
        p + dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p),
    )


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def solve_profile(curvature: CurvatureBound, r_max: float, step: float) -> ComparisonProfile:
    """Integrate the comparison ODE with RK4 and locate r0.

    r0 is the first zero of h', bracketed on the grid and refined by
    bisection over a partial RK4 step to tolerance ``step**2``. When h' stays
    positive up to ``r_max`` the profile is capped there.
    """
    if not (step > 0 and r_max > 0):
        raise ValueError(f"step and r_max must be positive (step={step}, r_max={r_max})")
    if step >= r_max:
        raise ValueError("step must be much smaller than r_max")
    K = curvature
    rows = [(0.0, 0.0, 1.0)]
    h, p = 0.0, 1.0
    n_steps = math.ceil(r_max / step - 1e-9)
    tol = step * step
    for i in range(n_steps):
        t0 = i * step
        dt = min(step, r_max - t0)
        if dt <= 0:
            break
        h1, p1 = _rk4(K, t0, h, p, dt)
        if p1 <= 0.0:
            lo, hi = 0.0, dt
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if _rk4(K, t0, h, p, mid)[1] > 0.0:
                    lo = mid
                else:
                    hi = mid
            tau = 0.5 * (lo + hi)
            hr, pr = _rk4(K, t0, h, p, tau)
            rows.append((t0 + tau, hr, pr))
            grid = _freeze(np.array(rows))
            return ComparisonProfile(K, step, grid, float(t0 + tau), float(hr), r_max, False)
        h, p = h1, p1
        rows.append((t0 + dt, h, p))
    grid = _freeze(np.array(rows))
    return ComparisonProfile(K, step, grid, float(grid[-1, 0]), float(grid[-1, 1]), r_max, True)


def closed_form_profile(
    curvature: CurvatureBound, r_max: float, step: float = 1e-3
) -> ComparisonProfile:
    """Analytic profile: h(t) = t for K = 0, sin(bt)/b for K = b^2."""
    if curvature.kind == "tabulated":
        raise UnsupportedVariantError("closed form exists only for zero and constant curvature")
    if not (step > 0 and r_max > 0):
        raise ValueError("step and r_max must be positive")
    if curvature.kind == "zero":
        r0, capped = r_max, True
    else:
        b = curvature.b
        r0 = math.pi / (2 * b)
        capped = r0 > r_max
        r0 = min(r0, r_max)
    n = max(2, math.ceil(r0 / step) + 1)
    t = np.linspace(0.0, r0, n)
    h, hp = _closed_h(curvature, t), _closed_hp(curvature, t)
    grid = _freeze(np.column_stack([t, h, hp]))
    s0 = float(_closed_h(curvature, np.array([r0]))[0])
    return ComparisonProfile(curvature, step, grid, r0, s0, r_max, capped, exact=True)


def _closed_h(K: CurvatureBound, t):
    if K.kind == "zero":
        return np.asarray(t, dtype=float) * 1.0
    b = K.b
    return np.sin(b * np.asarray(t)) / b


def _closed_hp(K: CurvatureBound, t):
    if K.kind == "zero":
        return np.ones_like(np.asarray(t, dtype=float))
    return np.cos(K.b * np.asarray(t))


def _check_domain(profile: ComparisonProfile, t: np.ndarray) -> None:
    slack = _DOMAIN_SLACK * max(1.0, profile.r0)
    if np.any(t < -slack) or np.any(t > profile.r0 + slack) or np.any(np.isnan(t)):
        raise OutOfDomainError(f"t outside [0, r0={profile.r0}]")


def _locate(profile: ComparisonProfile, t: np.ndarray) -> np.ndarray:
    i = np.searchsorted(profile.t, t, side="right") - 1
    return np.clip(i, 0, len(profile.t) - 2)


def eval_h(profile: ComparisonProfile, t):
    """h(t) by cubic Hermite interpolation of the grid (analytic if exact)."""
    arr = np.asarray(t, dtype=float)
    _check_domain(profile, arr)
    arr = np.clip(arr, 0.0, profile.r0)
    if profile.exact:
        out = _closed_h(profile.curvature, arr)
    else:
        i = _locate(profile, arr)
        t0, t1 = profile.t[i], profile.t[i + 1]
        dt = t1 - t0
        s = (arr - t0) / dt
        s2, s3 = s * s, s * s * s
        out = (
            (2 * s3 - 3 * s2 + 1) * profile.h[i]
            + (s3 - 2 * s2 + s) * dt * profile.hp[i]
            + (-2 * s3 + 3 * s2) * profile.h[i + 1]
            + (s3 - s2) * dt * profile.hp[i + 1]
        )
    return float(out) if np.ndim(out) == 0 else out


def eval_h_prime(profile: ComparisonProfile, t):
    """h'(t) by linear interpolation of the grid (analytic if exact)."""
    arr = np.asarray(t, dtype=float)
    _check_domain(profile, arr)
    arr = np.clip(arr, 0.0, profile.r0)
    if profile.exact:
        out = _closed_hp(profile.curvature, arr)
    else:
        out = np.interp(arr, profile.t, profile.hp)
    return float(out) if np.ndim(out) == 0 else out


def invert_h(profile: ComparisonProfile, s: float) -> float:
    """Return t in [0, r0] with h(t) = s, by bisection on the interpolant."""
    s = float(s)
    if s < 0 or math.isnan(s):
        raise OutOfRangeError(f"cannot invert h at negative value {s}")
    if s > profile.s0:
        raise OutOfRangeError(f"value {s} exceeds s0={profile.s0}")
    if s == 0.0:
        return 0.0
    if profile.exact:
        if profile.curvature.kind == "zero":
            return s
        b = profile.curvature.b
        return math.asin(min(1.0, b * s)) / b
    j = int(np.searchsorted(profile.h, s, side="left"))
    j = min(max(j, 1), len(profile.h) - 1)
    lo, hi = float(profile.t[j - 1]), float(profile.t[j])
    tol = 1e-10 * profile.s0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = eval_h(profile, mid)
        if val < s:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi) and abs(val - s) <= tol:
            break
    return 0.5 * (lo + hi)


def profile_to_json(profile: ComparisonProfile) -> str:
    """Serialize to JSON; float repr is shortest round-trip (at most 17 digits)."""
    doc = {
        "curvature": profile.curvature.to_dict(),
        "step": profile.step,
        "r0": profile.r0,
        "s0": profile.s0,
        "r_max": profile.r_max,
        "is_capped": profile.is_capped,
        "exact": profile.exact,
        "grid": profile.grid.tolist(),
    }
    return json.dumps(doc)


def profile_from_json(text: str) -> ComparisonProfile:
    doc = json.loads(text)
    grid = _freeze(np.array(doc["grid"], dtype=float))
    return ComparisonProfile(
        curvature=CurvatureBound.from_dict(doc["curvature"]),
        step=float(doc["step"]),
        grid=grid,
        r0=float(doc["r0"]),
        s0=float(doc["s0"]),
        r_max=float(doc.get("r_max", doc["r0"])),
        is_capped=bool(doc["is_capped"]),
        exact=bool(doc.get("exact", False)),
    )
