"""Model weighted ambients: Euclidean space or a round sphere with a density."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..comparison import CurvatureBound
from ..errors import SingularPointError

__all__ = [
    "Density",
    "DENSITIES",
    "WeightedAmbient",
    "parse_ambient",
    "ambient_radial",
]


@dataclass(frozen=True)
class Density:
    """Density exponent f (weight e^-f) with its exact Euclidean gradient."""

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]


def _sq(x):
    return np.einsum("...i,...i->...", x, x)


DENSITIES = {
    "zero": Density("zero", lambda x: np.zeros(np.shape(x)[:-1]), lambda x: np.zeros_like(x)),
    "gaussian4": Density("gaussian4", lambda x: _sq(x) / 4.0, lambda x: np.asarray(x) / 2.0),
    "gaussian2": Density("gaussian2", lambda x: _sq(x) / 2.0, lambda x: np.asarray(x) * 1.0),
}


@dataclass(frozen=True)
class WeightedAmbient:
    """Euclidean R^n or the sphere S^n(1/b) in R^(n+1), with density f.

    Points are stored in ambient coordinates of dimension ``coord_dim``.
    """

    model: str
    n: int
    density: Density
    b: float = 0.0

    @classmethod
    def euclidean(cls, n: int = 3, density: str = "zero") -> "WeightedAmbient":
        return cls("euclidean", n, DENSITIES[density])

    @classmethod
    def sphere(cls, n: int = 3, b: float = 1.0, density: str = "zero") -> "WeightedAmbient":
        if not b > 0:
            raise ValueError("sphere inverse radius must be positive")
        return cls("sphere", n, DENSITIES[density], float(b))

    @property
    def is_sphere(self) -> bool:
        return self.model == "sphere"

    @property
    def coord_dim(self) -> int:
        return self.n + 1 if self.is_sphere else self.n

    @property
    def radius(self) -> float:
        return 1.0 / self.b if self.is_sphere else math.inf

    @property
    def injectivity_radius(self) -> float:
        return math.pi / self.b if self.is_sphere else math.inf

    def curvature_bound(self) -> CurvatureBound:
        """The constant radial curvature of the model, valid with equality."""
        return CurvatureBound.constant(self.b**2) if self.is_sphere else CurvatureBound.zero()

    def project(self, x: np.ndarray) -> np.ndarray:
        """Closest point of the model (radial projection for the sphere)."""
        x = np.asarray(x, dtype=float)
        if not self.is_sphere:
            return x
        return x / np.linalg.norm(x, axis=-1, keepdims=True) * self.radius

    def f(self, x: np.ndarray) -> np.ndarray:
        return self.density.value(np.asarray(x, dtype=float))

    def grad_f(self, x: np.ndarray) -> np.ndarray:
        """Ambient gradient of f; tangent to the sphere in the spherical model."""
        x = np.asarray(x, dtype=float)
        g = self.density.grad(x)
        if self.is_sphere:
            u = x / np.linalg.norm(x, axis=-1, keepdims=True)
            g = g - np.einsum("...i,...i->...", g, u)[..., None] * u
        return g

    def check_points(self, x: np.ndarray, rtol: float = 1e-9) -> None:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.coord_dim:
            raise ValueError(
                f"points have {x.shape[-1]} coordinates, ambient expects {self.coord_dim}"
            )
        if self.is_sphere:
            r = np.linalg.norm(x, axis=-1)
            if np.any(np.abs(r - self.radius) > rtol * self.radius):
                raise ValueError("vertices do not lie on the ambient sphere")

    def spec(self) -> str:
        if self.is_sphere:
            return f"sphere{self.n}:{self.b:g}"
        return f"euclid{self.n}"


def parse_ambient(text: str, density: str = "zero") -> WeightedAmbient:
    """Parse ``euclidN`` or ``sphereN:b``."""
    text = text.strip().lower()
    if text.startswith("euclid"):
        return WeightedAmbient.euclidean(int(text[6:] or 3), density)
    if text.startswith("sphere"):
        head, _, b = text.partition(":")
        return WeightedAmbient.sphere(int(head[6:] or 3), float(b or 1.0), density)
    raise ValueError(f"unknown ambient {text!r}")


def ambient_radial(ambient: WeightedAmbient, base, points) -> tuple[np.ndarray, np.ndarray]:
    """Ambient distance r to ``base`` and the unit gradient of r at ``points``.

    Vectorized over the leading axes of ``points``.
    """
    xi = np.asarray(base, dtype=float)
    p = np.asarray(points, dtype=float)
    if not ambient.is_sphere:
        d = p - xi
        r = np.linalg.norm(d, axis=-1)
        if np.any(r == 0):
            raise SingularPointError("distance gradient undefined at the base point")
        return r, d / r[..., None]
    rho = ambient.radius
    u = xi / np.linalg.norm(xi)
    q = p / np.linalg.norm(p, axis=-1, keepdims=True)
    c = np.einsum("...i,i->...", q, u)
    w = u - c[..., None] * q  # tangent at q pointing towards base
    s = np.linalg.norm(w, axis=-1)
    theta = np.arctan2(s, c)
    if np.any(s <= 1e-14):
        raise SingularPointError("point coincides with or is antipodal to the base point")
    return rho * theta, -w / s[..., None]
