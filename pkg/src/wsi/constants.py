"""Sobolev constants, the normalized volume radius J and hypothesis checks."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

from .comparison import ComparisonProfile, invert_h

__all__ = [
    "SobolevConstants",
    "HypothesisReport",
    "unit_ball_volume",
    "sobolev_constant",
    "optimal_constant",
    "optimal_constant_closed_form",
    "golden_section_min",
    "sobolev_constants",
    "j_bar",
    "check_hypotheses",
    "resolve_kappa",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SobolevConstants:
    """Constants for dimension m at a given kappa.

    ``S0`` is the minimum of S over kappa at the same r0/s0 ratio, so for
    ratio 1 it is the Euclidean optimal constant.
    """

    m: int
    kappa: float
    r0_over_s0: float
    omega_m: float
    S: float
    S0: float
    kappa_star: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class HypothesisReport:
    j_bar: float
    alpha_bar: Optional[float]
    s0: float
    two_inj: float
    cond_a_holds: bool
    cond_b_holds: bool

    @property
    def admissible(self) -> bool:
        return self.cond_a_holds and self.cond_b_holds

    def to_dict(self) -> dict:
        d = asdict(self)
        d["admissible"] = self.admissible
        return d


def unit_ball_volume(m: int) -> float:
    """Volume of the unit ball in R^m, pi^(m/2) / Gamma(m/2 + 1)."""
    if m < 1:
        raise ValueError(f"dimension must be >= 1, got {m}")
    return math.pi ** (m / 2) / math.gamma(m / 2 + 1)


def _check_m(m: int) -> None:
    if int(m) != m or m < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {m}")


def sobolev_constant(m: int, kappa: float, r0_over_s0: float = 1.0) -> float:
    """S = 2^m m / (kappa (m-1)) * (r0/s0) * (omega_m^-1 / (1 - kappa))^(1/m)."""
    _check_m(m)
    if not 0.0 < kappa < 1.0:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    if not r0_over_s0 >= 1.0:
        raise ValueError(f"r0/s0 must be >= 1, got {r0_over_s0}")
    omega = unit_ball_volume(m)
    return (2.0**m * m) / (kappa * (m - 1)) * r0_over_s0 * (1.0 / (omega * (1.0 - kappa))) ** (1.0 / m)


def optimal_constant_closed_form(m: int) -> float:
    """2^m (m+1)^((m+1)/m) / (m-1) * omega_m^(-1/m)."""
    _check_m(m)
    return 2.0**m * (m + 1) ** ((m + 1) / m) / (m - 1) * unit_ball_volume(m) ** (-1.0 / m)


def golden_section_min(
    fn: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10
) -> float:
    """Minimizer of a unimodal function on [lo, hi] to bracket width ``tol``."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def optimal_constant(m: int) -> tuple[float, float]:
    """Return (kappa_star, S0) for the Euclidean ratio r0/s0 = 1.

    kappa_star is located numerically; S0 is the closed form, which the
    searched minimum must reproduce to 1e-9 relative.
    """
    _check_m(m)
    eps = 1e-12
    k_star = golden_section_min(lambda k: sobolev_constant(m, k, 1.0), eps, 1.0 - eps, 1e-10)
    s_min = sobolev_constant(m, k_star, 1.0)
    s0 = optimal_constant_closed_form(m)
    if abs(s_min - s0) > 1e-9 * s0:
        raise RuntimeError(f"numeric minimum {s_min!r} disagrees with closed form {s0!r}")
    return k_star, s0


def resolve_kappa(m: int, kappa) -> float:
    """Accept a number or ``"auto"`` (the optimizer kappa_star)."""
    if kappa is None or (isinstance(kappa, str) and kappa.lower() == "auto"):
        return optimal_constant(m)[0]
    return float(kappa)


def sobolev_constants(m: int, kappa="auto", r0_over_s0: float = 1.0) -> SobolevConstants:
    k_star, s0 = optimal_constant(m)
    k = resolve_kappa(m, kappa)
    return SobolevConstants(
        m=m,
        kappa=k,
        r0_over_s0=r0_over_s0,
        omega_m=unit_ball_volume(m),
        S=sobolev_constant(m, k, r0_over_s0),
        S0=s0 * r0_over_s0,
        kappa_star=k_star,
    )


def j_bar(m: int, kappa: float, f_star: float, weighted_support_volume: float) -> float:
    """(omega_m^-1 e^f* / (1 - kappa) * vol)^(1/m).

    Pass vol_f(supp phi) for the hypothesis radius, or the integral of phi
    for the lemma-level J.
    """
    if weighted_support_volume < 0:
        raise ValueError("volume must be nonnegative")
    if not 0.0 < kappa < 1.0:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    if m < 1:
        raise ValueError(f"dimension must be >= 1, got {m}")
    base = math.exp(f_star) / (unit_ball_volume(m) * (1.0 - kappa)) * weighted_support_volume
    return base ** (1.0 / m)


def check_hypotheses(profile: ComparisonProfile, jbar: float, inj: float) -> HypothesisReport:
    """Evaluate J <= s0 and h^-1(J) <= 2 Inj. Failures are flags, not errors."""
    two_inj = 2.0 * inj
    cond_a = jbar <= profile.s0
    alpha = None
    cond_b = False
    if cond_a:
        alpha = invert_h(profile, jbar)
        if profile.is_capped and math.isinf(inj):
            cond_b = True
        else:
            cond_b = alpha <= two_inj
    return HypothesisReport(
        j_bar=jbar,
        alpha_bar=alpha,
        s0=float(profile.s0),
        two_inj=two_inj,
        cond_a_holds=bool(cond_a),
        cond_b_holds=bool(cond_b),
    )
