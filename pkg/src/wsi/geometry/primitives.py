"""Scenario meshes: discs, icospheres, plane patches, cylinders and caps."""

from __future__ import annotations

import math

import numpy as np

from .mesh import ImmersedMesh

__all__ = [
    "build_primitive",
    "disc",
    "sphere",
    "plane_patch",
    "cylinder",
    "spherical_cap",
]


def _ring_counts(n_r: int, n_theta: int) -> list[int]:
    # Outer rings get at least ~2*pi*k points so triangles stay near-equilateral.
    return [max(6, round(n_theta * k / n_r), round(2 * math.pi * k)) for k in range(1, n_r + 1)]


def _polar_topology(counts: list[int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Centre vertex plus concentric rings, stitched counter-clockwise.

    Returns (ring_index, angle, faces) per vertex; vertex 0 is the centre.
    """
    ring = [0]
    ang = [0.0]
    starts = []
    for k, c in enumerate(counts, start=1):
        starts.append(len(ring))
        ring += [k] * c
        ang += list(2 * math.pi * np.arange(c) / c)
    faces = []
    c1, s1 = counts[0], starts[0]
    for i in range(c1):
        faces.append((0, s1 + i, s1 + (i + 1) % c1))
    for k in range(1, len(counts)):
        ci, si = counts[k - 1], starts[k - 1]
        co, so = counts[k], starts[k]
        i = j = 0
        while i < ci or j < co:
            a_in = (i + 1) / ci if i < ci else math.inf
            a_out = (j + 1) / co if j < co else math.inf
            if a_out <= a_in:
                faces.append((si + i % ci, so + j, so + (j + 1) % co))
                j += 1
            else:
                faces.append((si + i % ci, so + (j % co), si + (i + 1) % ci))
                i += 1
    return np.array(ring), np.array(ang), np.array(faces, dtype=np.int64)


def disc(rho: float = 1.0, n_r: int = 32, n_theta: int = 64) -> ImmersedMesh:
    """Flat disc of radius ``rho`` in the z = 0 plane of R^3."""
    if not (rho > 0 and n_r >= 1 and n_theta >= 3):
        raise ValueError("disc needs rho > 0, n_r >= 1, n_theta >= 3")
    ring, ang, faces = _polar_topology(_ring_counts(n_r, n_theta))
    r = rho * ring / n_r
    v = np.column_stack([r * np.cos(ang), r * np.sin(ang), np.zeros_like(r)])
    return ImmersedMesh(v, faces)


def spherical_cap(b: float = 1.0, angle: float = math.pi / 2, n: int = 32) -> ImmersedMesh:
    """Geodesic cap of polar radius ``angle`` on the equatorial S^2(1/b) of S^3(1/b).

    Vertices live in R^4 with last coordinate 0; the pole is (0, 0, 1/b, 0).
    """
    if not (b > 0 and 0 < angle < math.pi and n >= 1):
        raise ValueError("spherical_cap needs b > 0, 0 < angle < pi, n >= 1")
    counts = [max(6, round(2 * math.pi * k * math.sin(angle * k / n) / (angle * k / n)))
              for k in range(1, n + 1)]
    ring, ang, faces = _polar_topology(counts)
    th = angle * ring / n
    rad = 1.0 / b
    v = np.column_stack([
        rad * np.sin(th) * np.cos(ang),
        rad * np.sin(th) * np.sin(ang),
        rad * np.cos(th),
        np.zeros_like(th),
    ])
    return ImmersedMesh(v, faces)


_ICO_V = None


def _icosahedron():
    p = (1 + math.sqrt(5)) / 2
    v = np.array([
        [-1, p, 0], [1, p, 0], [-1, -p, 0], [1, -p, 0],
        [0, -1, p], [0, 1, p], [0, -1, -p], [0, 1, -p],
        [p, 0, -1], [p, 0, 1], [-p, 0, -1], [-p, 0, 1],
    ], dtype=float)
    f = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ], dtype=np.int64)
    return v / np.linalg.norm(v, axis=1, keepdims=True), f


def sphere(r: float = 1.0, subdiv: int = 3) -> ImmersedMesh:
    """Icosphere of radius ``r``: ``subdiv`` midpoint refinements, projected."""
    if not (r > 0 and subdiv >= 0):
        raise ValueError("sphere needs r > 0 and subdiv >= 0")
    v, f = _icosahedron()
    for _ in range(subdiv):
        e = np.sort(np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]]), axis=1)
        uniq, inv = np.unique(e, axis=0, return_inverse=True)
        inv = inv.ravel()
        mid = 0.5 * (v[uniq[:, 0]] + v[uniq[:, 1]])
        mid /= np.linalg.norm(mid, axis=1, keepdims=True)
        nf = len(f)
        m01, m12, m20 = (len(v) + inv[:nf], len(v) + inv[nf:2 * nf], len(v) + inv[2 * nf:])
        v = np.vstack([v, mid])
        a, b, c = f[:, 0], f[:, 1], f[:, 2]
        f = np.concatenate([
            np.column_stack([a, m01, m20]),
            np.column_stack([b, m12, m01]),
            np.column_stack([c, m20, m12]),
            np.column_stack([m01, m12, m20]),
        ])
    return ImmersedMesh(r * v, f)


def plane_patch(L: float = 6.0, n: int = 120) -> ImmersedMesh:
    """Square [-L, L]^2 in the z = 0 plane of R^3 with n x n cells.

    Cells are split along alternating diagonals so the mesh has no preferred
    direction.
    """
    if not (L > 0 and n >= 1):
        raise ValueError("plane_patch needs L > 0 and n >= 1")
    s = np.linspace(-L, L, n + 1)
    xx, yy = np.meshgrid(s, s, indexing="ij")
    v = np.column_stack([xx.ravel(), yy.ravel(), np.zeros(xx.size)])
    idx = np.arange((n + 1) ** 2).reshape(n + 1, n + 1)
    faces = []
    for i in range(n):
        for j in range(n):
            a, b, c, d = idx[i, j], idx[i + 1, j], idx[i + 1, j + 1], idx[i, j + 1]
            if (i + j) % 2 == 0:
                faces += [(a, b, c), (a, c, d)]
            else:
                faces += [(a, b, d), (b, c, d)]
    return ImmersedMesh(v, np.array(faces, dtype=np.int64))


def cylinder(rho: float = 1.0, length: float = 10.0, n: int = 48) -> ImmersedMesh:
    """Open cylinder of radius ``rho`` around the z axis, z in [-length/2, length/2].

    ``n`` is the number of angular segments; the axial spacing is chosen so
    that triangles are close to equilateral, and rows are staggered.
    """
    if not (rho > 0 and length > 0 and n >= 3):
        raise ValueError("cylinder needs rho > 0, length > 0, n >= 3")
    seg = 2 * rho * math.sin(math.pi / n)
    n_z = max(1, round(length / (seg * math.sqrt(3) / 2)))
    z = np.linspace(-length / 2, length / 2, n_z + 1)
    verts = []
    for k, zk in enumerate(z):
        off = 0.5 * (k % 2)
        th = 2 * math.pi * (np.arange(n) + off) / n
        verts.append(np.column_stack([rho * np.cos(th), rho * np.sin(th), np.full(n, zk)]))
    v = np.vstack(verts)
    faces = []
    for k in range(n_z):
        lo, hi = k * n, (k + 1) * n
        for i in range(n):
            i1 = (i + 1) % n
            if k % 2 == 0:
                faces += [(lo + i, lo + i1, hi + i), (lo + i1, hi + i1, hi + i)]
            else:
                faces += [(lo + i, lo + i1, hi + i1), (lo + i, hi + i1, hi + i)]
    return ImmersedMesh(v, np.array(faces, dtype=np.int64))


_BUILDERS = {
    "disc": disc,
    "sphere": sphere,
    "plane_patch": plane_patch,
    "cylinder": cylinder,
    "spherical_cap": spherical_cap,
}


def build_primitive(kind: str, **params) -> ImmersedMesh:
    """Build a named primitive, e.g. ``build_primitive("disc", rho=1, n_r=64, n_theta=128)``."""
    try:
        builder = _BUILDERS[kind]
    except KeyError:
        raise ValueError(f"unknown primitive {kind!r}; choose from {sorted(_BUILDERS)}") from None
    return builder(**params)
