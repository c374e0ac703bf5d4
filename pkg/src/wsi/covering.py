"""Greedy layered covering of a finite point set by disjoint balls.

Layer k uses radius R_k = beta^k alpha. Within a layer, centres are picked
greedily (smallest uncovered index first) so that every candidate lies within
t beta R_k of a centre while centres stay more than t beta R_k >= 2 R_k apart.
Points already covered by an earlier, larger layer are removed before a layer
is processed, which keeps balls of different layers disjoint as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InvalidOracleError

__all__ = [
    "CoverInstance",
    "LayeredCover",
    "greedy_disjoint_cover",
    "layered_cover",
    "verify_cover",
    "sphere_distance",
]


@dataclass
class CoverInstance:
    """Finite sites with a distance oracle and the layer parameters.

    ``distance`` is either a callable d(p, q) on individual points or a
    precomputed (n, n) matrix.
    """

    points: np.ndarray
    distance: Callable | np.ndarray
    alpha: float
    t: float
    beta: float
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.points = np.asarray(self.points)
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.t > 2:
            raise ValueError("t must exceed 2")
        if not (2.0 / self.t <= self.beta < 1.0):
            raise ValueError("beta must lie in [2/t, 1)")
        if callable(self.distance):
            n = len(self.points)
            mat = np.zeros((n, n))
            for i in range(n):
                for j in range(n):
                    mat[i, j] = self.distance(self.points[i], self.points[j])
        else:
            mat = np.asarray(self.distance, dtype=float)
        _validate_oracle(mat, len(self.points))
        self.matrix = mat

    @classmethod
    def euclidean(cls, points, alpha: float, t: float = 2.5, beta: float = 0.8) -> "CoverInstance":
        pts = np.asarray(points, dtype=float)
        return cls(pts, cdist(pts, pts), alpha, t, beta)

    def radius(self, k: int) -> float:
        return self.beta**k * self.alpha

    def __len__(self):
        return len(self.points)


def _validate_oracle(mat: np.ndarray, n: int) -> None:
    if mat.shape != (n, n):
        raise InvalidOracleError(f"distance matrix must be {n} x {n}")
    if np.any(mat < 0) or np.any(~np.isfinite(mat)):
        raise InvalidOracleError("distances must be finite and nonnegative")
    if np.any(np.diag(mat) != 0):
        raise InvalidOracleError("distance of a point to itself must be zero")
    if not np.allclose(mat, mat.T, rtol=1e-12, atol=1e-12):
        raise InvalidOracleError("distance oracle is not symmetric")


def sphere_distance(b: float) -> Callable:
    """Great-circle distance on the sphere of radius 1/b (any ambient dimension)."""

    def dist(p, q):
        u = np.asarray(p, float)
        v = np.asarray(q, float)
        u = u / np.linalg.norm(u)
        v = v / np.linalg.norm(v)
        return float(2.0 * np.arctan2(np.linalg.norm(u - v), np.linalg.norm(u + v)) / b)

    return dist


def greedy_disjoint_cover(instance: CoverInstance, candidates: Sequence[int], R: float) -> list[int]:
    """Centres F within ``candidates`` covering them at radius t beta R.

    Each round takes the smallest-index candidate not yet covered.
    """
    cand = np.asarray(sorted(set(int(c) for c in candidates)), dtype=np.int64)
    if len(cand) == 0:
        raise ValueError("candidate set is empty")
    if not R > 0:
        raise ValueError("radius must be positive")
    reach = instance.t * instance.beta * R
    sub = instance.matrix[np.ix_(cand, cand)]
    covered = np.zeros(len(cand), dtype=bool)
    chosen = []
    for k in range(len(cand)):
        if covered[k]:
            continue
        chosen.append(int(cand[k]))
        covered |= sub[k] <= reach
    return chosen


@dataclass
class LayeredCover:
    centers: list[list[int]]
    radii: list[float]
    assignment: dict[int, tuple[int, int]]  # point -> (layer, centre)

    @property
    def all_centers(self) -> list[tuple[int, int]]:
        return [(k, c) for k, layer in enumerate(self.centers) for c in layer]


def layered_cover(instance: CoverInstance, A: Sequence[int], layers: Sequence[int] | dict) -> LayeredCover:
    """Cover the index set ``A`` layer by layer.

    ``layers`` gives each point of A its layer k >= 0, either as a sequence
    aligned with ``A`` or as a mapping point -> layer.
    """
    A = [int(a) for a in A]
    if isinstance(layers, dict):
        missing = [a for a in A if a not in layers or layers[a] is None or layers[a] < 0]
        lay = {a: int(layers[a]) for a in A if a not in missing}
    else:
        layers = list(layers)
        if len(layers) != len(A):
            raise ValueError("layers must align with A")
        missing = [a for a, k in zip(A, layers) if k is None or k < 0]
        lay = {a: int(k) for a, k in zip(A, layers) if not (k is None or k < 0)}
    if missing:
        raise ValueError(f"points without a layer: {missing}")
    n_layers = max(lay.values()) + 1 if lay else 0
    D = instance.matrix
    t_beta = instance.t * instance.beta
    removed = np.zeros(len(instance), dtype=bool)
    assignment: dict[int, tuple[int, int]] = {}
    centers, radii = [], []
    for k in range(n_layers):
        Rk = instance.radius(k)
        radii.append(Rk)
        Dk = [a for a in A if lay[a] == k and not removed[a]]
        Fk = greedy_disjoint_cover(instance, Dk, Rk) if Dk else []
        centers.append(Fk)
        for c in Fk:
            ball = D[c] <= t_beta * Rk
            for a in A:
                if ball[a] and a not in assignment:
                    assignment[a] = (k, c)
            removed |= ball
    return LayeredCover(centers, radii, assignment)


def verify_cover(instance: CoverInstance, A: Sequence[int], cover: LayeredCover) -> dict:
    """Check coverage, pairwise separation and the counting-measure packing bound."""
    D = instance.matrix
    tb = instance.t * instance.beta
    allc = cover.all_centers
    covered = all(
        any(D[a, c] <= tb * cover.radii[k] for k, c in allc) for a in A
    )
    separated = True
    for i, (k, c) in enumerate(allc):
        for kk, cc in allc[i + 1:]:
            if D[c, cc] <= 2 * max(cover.radii[k], cover.radii[kk]):
                separated = False
    packed = sum(int(np.sum(D[c] < cover.radii[k])) for k, c in allc)
    return {
        "covered": covered,
        "separated": separated,
        "packing_ok": packed <= len(instance),
    }
