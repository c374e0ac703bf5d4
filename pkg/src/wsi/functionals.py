"""Both sides of the weighted Sobolev and isoperimetric inequalities, plus
numerical checks of the radial-field comparison, the monotonicity lemma,
the witness-radius lemma and the layer-cake identity used in the proof.

Two integrands appear. The *theorem form* |grad phi| + phi |H_f - grad f|
enters the reported inequalities; the *lemma form*
|grad phi + phi (H_f - grad f)| (never larger, by the triangle inequality)
enters the radial profile curves.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .comparison import ComparisonProfile, eval_h, eval_h_prime, invert_h
from .constants import (
    HypothesisReport,
    SobolevConstants,
    check_hypotheses,
    j_bar,
    sobolev_constants,
)
from .errors import PreconditionError
from .geometry.ambient import WeightedAmbient, ambient_radial
from .geometry.mesh import (
    ImmersedMesh,
    boundary_f_volume,
    face_gradient,
    fill_undefined,
    hf_minus_gradf,
    mean_curvature,
    quadrature,
)

__all__ = [
    "SmoothingSpec",
    "ProfileCurves",
    "InequalityReport",
    "MonotonicityResult",
    "HessianaResult",
    "LevelSetReport",
    "sobolev_sides",
    "isoperimetric_sides",
    "profile_curves",
    "lemma41_residual",
    "lemma42_witness",
    "hessiana_check",
    "radial_f_divergence",
    "levelset_identity_check",
    "integrands",
]


@dataclass(frozen=True)
class SmoothingSpec:
    """Cut-off family: lam ramps 0 -> 1 on [0, eps], delta on [-eps, 0].

    ``kind="smoothstep"`` uses the C^1 cubic 3u^2 - 2u^3; ``"indicator-limit"``
    is the eps -> 0 limit (a step at 0).
    """

    epsilon: float = 0.05
    kind: str = "smoothstep"

    def __post_init__(self):
        if self.kind not in ("smoothstep", "indicator-limit"):
            raise ValueError(f"unknown smoothing kind {self.kind!r}")
        if self.kind == "smoothstep" and not self.epsilon > 0:
            raise ValueError("smoothstep needs epsilon > 0")

    def lam(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "indicator-limit":
            return (t > 0).astype(float)
        u = np.clip(t / self.epsilon, 0.0, 1.0)
        return u * u * (3.0 - 2.0 * u)

    def lam_prime(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "indicator-limit":
            return np.zeros_like(t)
        u = np.clip(t / self.epsilon, 0.0, 1.0)
        return 6.0 * u * (1.0 - u) / self.epsilon

    def delta(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "indicator-limit":
            return (t >= 0).astype(float)
        return self.lam(t + self.epsilon)


@dataclass
class ProfileCurves:
    """Radial profile curves around a base vertex, sampled on ``R_grid``."""

    base: int
    R_grid: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    phi_bar: np.ndarray
    psi_bar: np.ndarray
    smoothing: SmoothingSpec
    phi_at_base: float
    phi_integral: float
    f_star: float
    m: int
    mesh_size: float

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["R", "phi", "psi", "phi_bar", "psi_bar"])
        for row in zip(self.R_grid, self.phi, self.psi, self.phi_bar, self.psi_bar):
            w.writerow([repr(float(x)) for x in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="ascii") as fh:
                fh.write(text)
        return text


@dataclass
class InequalityReport:
    kind: str
    p: Optional[float]
    lhs: float
    rhs: float
    ratio: float
    constants: SobolevConstants
    hypotheses: HypothesisReport
    f_star: float
    n_vertices: int
    n_faces: int
    mesh_size: float
    warnings: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "p": self.p,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "constants": self.constants.to_dict(),
            "hypotheses": self.hypotheses.to_dict(),
            "f_star": self.f_star,
            "mesh": {
                "n_vertices": self.n_vertices,
                "n_faces": self.n_faces,
                "mesh_size": self.mesh_size,
            },
            "warnings": list(self.warnings),
        }


# -- shared pieces -----------------------------------------------------------


def _deviation(mesh, ambient):
    """Per-vertex H_f - grad f (boundary rows filled from neighbours)."""
    mc = mean_curvature(mesh, ambient)
    vec, _ = hf_minus_gradf(mesh, ambient, mc)
    return fill_undefined(mesh, vec)


def _check_test_function(mesh: ImmersedMesh, phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (mesh.n_vertices,):
        raise ValueError(f"test function must have shape ({mesh.n_vertices},)")
    if np.any(phi < 0):
        raise ValueError("test function must be nonnegative")
    if np.any(phi[mesh.boundary_vertices] != 0):
        raise ValueError("test function must vanish on the boundary")
    return phi


def integrands(mesh, ambient, phi, quad=None, dev=None):
    """Node values (F, 3) of phi, the theorem-form and the lemma-form integrand."""
    quad = quad or quadrature(mesh, ambient)
    dev = _deviation(mesh, ambient) if dev is None else dev
    phi_q = quad.interp(phi)
    grad = face_gradient(mesh, phi)
    dev_q = quad.interp(dev)  # (F, 3, N)
    dev_norm_q = quad.interp(np.linalg.norm(dev, axis=1))
    theorem = np.linalg.norm(grad, axis=1)[:, None] + phi_q * dev_norm_q
    lemma = np.linalg.norm(grad[:, None, :] + phi_q[..., None] * dev_q, axis=2)
    return phi_q, theorem, lemma


def _support_faces(mesh, phi):
    return np.any(phi[mesh.faces] > 0, axis=1)


def _f_star(quad, mesh, ambient, faces_mask):
    if not faces_mask.any():
        return 0.0
    verts = np.unique(mesh.faces[faces_mask])
    fv = ambient.f(ambient.project(mesh.vertices[verts]))
    return float(max(fv.max(), quad.density[faces_mask].max()))


def _ratio(lhs, rhs):
    if rhs == 0.0:
        return 0.0 if lhs == 0.0 else math.inf
    return lhs / rhs


# -- inequalities --------------------------------------------------------------


def sobolev_sides(
    mesh: ImmersedMesh,
    ambient: WeightedAmbient,
    phi,
    p: float,
    profile: ComparisonProfile,
    kappa="auto",
) -> InequalityReport:
    """Evaluate (int phi^(mp/(m-p)))^((m-p)/m) and S e^(f*/m) int (|grad phi| + phi|H_f - grad f|)^p."""
    m = mesh.m
    if not 1.0 <= p < m:
        raise ValueError(f"exponent p must satisfy 1 <= p < m = {m}, got {p}")
    phi = _check_test_function(mesh, phi)
    quad = quadrature(mesh, ambient)
    consts = sobolev_constants(m, kappa, profile.ratio)
    supp = _support_faces(mesh, phi)
    f_star = _f_star(quad, mesh, ambient, supp)
    phi_q, theorem, _ = integrands(mesh, ambient, phi, quad)
    q = m * p / (m - p)
    warn = []
    if q > 6:
        warn.append(f"Sobolev exponent mp/(m-p) = {q:g} > 6: quadrature accuracy degrades")
    lhs = quad.integrate(phi_q**q) ** ((m - p) / m)
    rhs = consts.S * math.exp(f_star / m) * quad.integrate(theorem**p)
    vol_supp = float(quad.weights[supp].sum())
    hyp = check_hypotheses(
        profile, j_bar(m, consts.kappa, f_star, vol_supp), ambient.injectivity_radius
    )
    return InequalityReport(
        kind=f"sobolev(p={p:g})",
        p=float(p),
        lhs=lhs,
        rhs=rhs,
        ratio=_ratio(lhs, rhs),
        constants=consts,
        hypotheses=hyp,
        f_star=f_star,
        n_vertices=mesh.n_vertices,
        n_faces=mesh.n_faces,
        mesh_size=mesh.mesh_size,
        warnings=warn,
    )


def isoperimetric_sides(
    mesh: ImmersedMesh,
    ambient: WeightedAmbient,
    profile: ComparisonProfile,
    kappa="auto",
) -> InequalityReport:
    """Evaluate vol_f(M)^((m-1)/m) and S e^(f*/m) (vol_f(dM) + int |H_f - grad f|)."""
    m = mesh.m
    quad = quadrature(mesh, ambient)
    consts = sobolev_constants(m, kappa, profile.ratio)
    everything = np.ones(mesh.n_faces, dtype=bool)
    f_star = _f_star(quad, mesh, ambient, everything)
    dev = _deviation(mesh, ambient)
    dev_norm_q = quad.interp(np.linalg.norm(dev, axis=1))
    vol = float(quad.weights.sum())
    lhs = vol ** ((m - 1) / m)
    rhs = consts.S * math.exp(f_star / m) * (
        boundary_f_volume(mesh, ambient) + quad.integrate(dev_norm_q)
    )
    hyp = check_hypotheses(profile, j_bar(m, consts.kappa, f_star, vol), ambient.injectivity_radius)
    return InequalityReport(
        kind="isoperimetric",
        p=None,
        lhs=lhs,
        rhs=rhs,
        ratio=_ratio(lhs, rhs),
        constants=consts,
        hypotheses=hyp,
        f_star=f_star,
        n_vertices=mesh.n_vertices,
        n_faces=mesh.n_faces,
        mesh_size=mesh.mesh_size,
    )


# -- radial profile curves --------------------------------------------------------


def _base_point(mesh, base):
    if np.ndim(base) == 0:
        return int(base), mesh.vertices[int(base)]
    return None, np.asarray(base, dtype=float)


def profile_curves(
    mesh: ImmersedMesh,
    ambient: WeightedAmbient,
    phi,
    base: int,
    smoothing: SmoothingSpec,
    R_grid: Sequence[float],
    profile: ComparisonProfile | None = None,
) -> ProfileCurves:
    """Sample the smoothed and sharp radial curves of phi and the lemma integrand.

    Ball membership is decided per quadrature node by the ambient distance to
    the base vertex.
    """
    R = np.asarray(R_grid, dtype=float)
    if R.size == 0:
        raise ValueError("R grid is empty")
    if np.any(R <= 0) or np.any(np.diff(R) <= 0):
        raise ValueError("R grid must be positive and strictly increasing")
    limit = ambient.injectivity_radius
    if profile is not None:
        limit = min(limit, profile.r0)
    if R[-1] > limit:
        raise ValueError(f"R grid exceeds min(Inj, r0) = {limit}")
    phi = _check_test_function(mesh, phi)
    idx, xi = _base_point(mesh, base)
    quad = quadrature(mesh, ambient)
    phi_q, _, lemma = integrands(mesh, ambient, phi, quad)
    r, _ = ambient_radial(ambient, xi, quad.points)
    w = quad.weights.ravel()
    r = r.ravel()
    a = (phi_q.ravel() * w)
    b = (lemma.ravel() * w)
    curves = np.empty((4, len(R)))
    for k, radius in enumerate(R):
        arg = radius - r
        lam = smoothing.lam(arg)
        inside = arg > 0
        curves[:, k] = lam @ a, lam @ b, a[inside].sum(), b[inside].sum()
    supp = _support_faces(mesh, phi)
    return ProfileCurves(
        base=idx if idx is not None else -1,
        R_grid=R,
        phi=curves[0],
        psi=curves[1],
        phi_bar=curves[2],
        psi_bar=curves[3],
        smoothing=smoothing,
        phi_at_base=float(phi[idx]) if idx is not None else float("nan"),
        phi_integral=float(np.sum(a)),
        f_star=_f_star(quad, mesh, ambient, supp),
        m=mesh.m,
        mesh_size=mesh.mesh_size,
    )


@dataclass(frozen=True)
class MonotonicityResult:
    residual: float
    tol: float
    argmax_R: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol


def lemma41_residual(curves: ProfileCurves, profile: ComparisonProfile, m: int | None = None) -> MonotonicityResult:
    """Worst value of -d/dR(h^-m phi) - h^-m psi over interior grid points.

    Uses central differences; the verdict tolerance is
    5 (mesh size + grid spacing) sup(h^-m phi).
    """
    m = curves.m if m is None else m
    R = curves.R_grid
    if len(R) < 3:
        raise ValueError("need at least three grid points for central differences")
    hm = np.asarray(eval_h(profile, R)) ** (-m)
    F = hm * curves.phi
    dF = (F[2:] - F[:-2]) / (R[2:] - R[:-2])
    res = -dF - hm[1:-1] * curves.psi[1:-1]
    k = int(np.argmax(res))
    spacing = float(np.max(np.diff(R)))
    tol = 5.0 * (curves.mesh_size + spacing) * float(np.max(np.abs(F)))
    return MonotonicityResult(float(res[k]), tol, float(R[k + 1]))


def lemma42_witness(
    curves: ProfileCurves,
    profile: ComparisonProfile,
    kappa: float,
    t: float,
    alpha: float | None = None,
    inj: float = math.inf,
) -> float | None:
    """First grid radius R in (0, alpha) with phi_bar(tR) <= (2 alpha / kappa) t^(m-1) psi_bar(R).

    alpha defaults to h^-1(J) with J built from the integral of phi. Returns
    None if no grid radius qualifies.
    """
    m = curves.m
    if not curves.phi_at_base >= 1.0:
        raise PreconditionError(f"phi(base) = {curves.phi_at_base} < 1")
    if not t > 1.0:
        raise PreconditionError(f"t = {t} must exceed 1")
    if alpha is None:
        J = j_bar(m, kappa, curves.f_star, curves.phi_integral)
        if not 0.0 < J < profile.s0:
            raise PreconditionError(f"J = {J} not in (0, s0 = {profile.s0})")
        alpha = invert_h(profile, J)
    R0 = min(inj, profile.r0)
    if t * alpha > R0 * (1 + 1e-12):
        raise PreconditionError(f"t*alpha = {t * alpha} exceeds min(Inj, r0) = {R0}")
    R = curves.R_grid
    if R[-1] < t * alpha * (1 - 1e-12):
        raise PreconditionError(f"R grid ends at {R[-1]} < t*alpha = {t * alpha}")
    factor = 2.0 * alpha / kappa * t ** (m - 1)
    for k in np.flatnonzero(R < alpha):
        lhs = np.interp(t * R[k], R, curves.phi_bar)
        if lhs <= factor * curves.psi_bar[k]:
            return float(R[k])
    return None


# -- radial field comparison ------------------------------------------------------


@dataclass(frozen=True)
class HessianaResult:
    min_margin: float
    n_checked: int
    n_excluded: int
    margins: np.ndarray = field(repr=False, default=None)

    def passed(self, tol: float = 1e-8) -> bool:
        return self.min_margin >= -tol


def radial_f_divergence(
    mesh: ImmersedMesh,
    ambient: WeightedAmbient,
    base,
    profile: ComparisonProfile,
    dev: np.ndarray | None = None,
):
    """f-divergence of X = h(r) grad r per face, and the comparison lower bound.

    Returns (lhs, rhs, r, valid) per face where lhs = div_M X + <H_f - grad f, X>
    with div_M X from the closed-form ambient Jacobian of X restricted to
    the face plane, and rhs = m h'(r) + h(r) <H_f - grad f, grad r>.
    """
    m = mesh.m
    _, xi = _base_point(mesh, base)
    dev = _deviation(mesh, ambient) if dev is None else dev
    x = mesh.vertices[mesh.faces].mean(axis=1)
    c = ambient.project(x)
    basis = mesh.face_bases  # (F, N, 2)
    if ambient.is_sphere:
        u = c / np.linalg.norm(c, axis=1, keepdims=True)
        basis = basis - np.einsum("fi,fia->fa", u, basis)[:, None, :] * u[:, :, None]
        basis, _ = np.linalg.qr(basis)
    R0 = min(ambient.injectivity_radius, profile.r0)
    n = mesh.n_faces
    lhs = np.full(n, np.nan)
    rhs = np.full(n, np.nan)
    r = np.full(n, np.nan)
    d = np.linalg.norm(c - xi, axis=1)
    valid = d > 1e-12
    if ambient.is_sphere:
        anti = np.linalg.norm(c + xi, axis=1) > 1e-12
        valid &= anti
    rr, grad_r = ambient_radial(ambient, xi, c[valid])
    ok = rr < R0
    sel = np.flatnonzero(valid)[ok]
    valid[:] = False
    valid[sel] = True
    rr, grad_r = rr[ok], grad_r[ok]
    h = np.asarray(eval_h(profile, rr))
    hp = np.asarray(eval_h_prime(profile, rr))
    if ambient.is_sphere:
        hess = ambient.b / np.tan(ambient.b * rr)
    else:
        hess = 1.0 / rr
    # ambient Jacobian: DX = h' dr (x) dr + h * hess * (g - dr (x) dr)
    tr = np.einsum("fia,fi->fa", basis[sel], grad_r)
    tan_sq = np.sum(tr * tr, axis=1)
    div = hp * tan_sq + h * hess * (m - tan_sq)
    dev_f = dev[mesh.faces[sel]].mean(axis=1)
    dr_dot = np.einsum("fi,fi->f", dev_f, grad_r)
    lhs[sel] = div + h * dr_dot
    rhs[sel] = m * hp + h * dr_dot
    r[sel] = rr
    return lhs, rhs, r, valid


def hessiana_check(
    mesh: ImmersedMesh,
    ambient: WeightedAmbient,
    base,
    profile: ComparisonProfile,
) -> HessianaResult:
    """Minimum over faces of D_f X - (m h'(r) + h(r) <H_f - grad f, grad r>).

    Faces at the base point, beyond min(Inj, r0) or at the cut locus are
    excluded and counted.
    """
    lhs, rhs, _, valid = radial_f_divergence(mesh, ambient, base, profile)
    margins = (lhs - rhs)[valid]
    n_ok = int(valid.sum())
    return HessianaResult(
        min_margin=float(margins.min()) if n_ok else math.nan,
        n_checked=n_ok,
        n_excluded=int(mesh.n_faces - n_ok),
        margins=margins,
    )


# -- layer-cake identity -------------------------------------------------------------


@dataclass(frozen=True)
class LevelSetReport:
    s_grid: np.ndarray
    level_volumes: np.ndarray  # vol_f(A^s) on s_grid
    lhs: float
    rhs: float

    @property
    def rel_error(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else math.inf
        return abs(self.lhs - self.rhs) / abs(self.rhs)


def levelset_identity_check(
    mesh: ImmersedMesh,
    ambient: WeightedAmbient,
    phi,
    m: int = 2,
    n_levels: int = 2001,
) -> LevelSetReport:
    """Compare int_0^inf s^(1/(m-1)) vol_f({phi >= s}) ds with (m-1)/m int phi^(m/(m-1)).

    The left side integrates the level-set volumes over a uniform s grid with
    the trapezoid rule; membership is decided per quadrature node.
    """
    phi = np.asarray(phi, dtype=float)
    quad = quadrature(mesh, ambient)
    phi_q = quad.interp(phi).ravel()
    w = quad.weights.ravel()
    top = float(phi_q.max()) if phi_q.size else 0.0
    s = np.linspace(0.0, top, n_levels)
    order = np.argsort(phi_q)
    sorted_phi = phi_q[order]
    tail = np.concatenate([np.cumsum(w[order][::-1])[::-1], [0.0]])
    vol = tail[np.searchsorted(sorted_phi, s, side="left")]
    integrand = s ** (1.0 / (m - 1)) * vol
    lhs = float(np.trapezoid(integrand, s)) if top > 0 else 0.0
    rhs = (m - 1) / m * float(np.sum(w * phi_q ** (m / (m - 1))))
    return LevelSetReport(s, vol, lhs, rhs)
