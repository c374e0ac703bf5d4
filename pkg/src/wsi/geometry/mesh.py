"""Triangle meshes immersed in a model ambient, with discrete calculus.

Conventions
-----------
* Mean curvature is the trace of the second fundamental form, H = Delta_M x,
  so a round 2-sphere of radius r has |H| = 2/r with H pointing inward.
* Face integrals use the three-edge-midpoint rule (exact for quadratics).
* Vertex tangent planes come from the area-weighted average of face-plane
  projectors, which reduces to area-weighted face normals in codimension 1
  and also works for surfaces inside S^3 in R^4.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra

from ..errors import DegenerateFaceError
from .ambient import WeightedAmbient

__all__ = [
    "ImmersedMesh",
    "FaceQuadrature",
    "MeanCurvature",
    "quadrature",
    "f_volume",
    "boundary_f_volume",
    "mean_curvature",
    "vertex_tangent_basis",
    "hf_minus_gradf",
    "weighted_mean_curvature",
    "face_gradient",
    "fill_undefined",
    "geodesic_distance",
    "ball_f_volume",
]

# midpoint k of a face lies on the edge opposite vertex k
_NEXT = np.array([1, 2, 0])
_PREV = np.array([2, 0, 1])


def _freeze(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class ImmersedMesh:
    """Oriented triangle mesh of a surface (m = 2) in ambient coordinates.

    Parameters
    ----------
    vertices : array_like, shape (V, N)
        Vertex positions in the ambient coordinate space.
    faces : array_like of int, shape (F, 3)
        Consistently oriented vertex index triples.
    """

    m = 2

    def __init__(self, vertices, faces):
        v = np.array(vertices, dtype=float)
        t = np.array(faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] < 2:
            raise ValueError("vertices must be an array of shape (V, N) with N >= 2")
        if t.ndim != 2 or t.shape[1] != 3:
            raise ValueError("faces must be an array of shape (F, 3)")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise ValueError("face index out of range")
        if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
            raise ValueError("faces must reference three distinct vertices")
        self.vertices = _freeze(v)
        self.faces = _freeze(t)
        counts = self._edge_counts
        if np.any(counts > 2):
            raise ValueError("non-manifold mesh: an edge is shared by more than two faces")

    def __repr__(self):
        return f"ImmersedMesh(V={self.n_vertices}, F={self.n_faces}, dim={self.dim})"

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    # -- topology ---------------------------------------------------------

    @cached_property
    def half_edges(self) -> np.ndarray:
        t = self.faces
        return _freeze(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]))

    @cached_property
    def _edge_table(self):
        keys = np.sort(self.half_edges, axis=1)
        edges, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        return edges, inverse.ravel(), counts

    @property
    def edges(self) -> np.ndarray:
        return self._edge_table[0]

    @property
    def _edge_counts(self) -> np.ndarray:
        return self._edge_table[2]

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        """Boundary edges as directed half-edges (following face orientation)."""
        _, inverse, counts = self._edge_table
        return _freeze(self.half_edges[counts[inverse] == 1])

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        return _freeze(np.unique(self.boundary_edges))

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.boundary_vertices] = True
        return _freeze(mask)

    @property
    def is_closed(self) -> bool:
        return len(self.boundary_edges) == 0

    def is_oriented(self) -> bool:
        """True if every interior edge is traversed in opposite directions."""
        he = self.half_edges
        return len(np.unique(he, axis=0)) == len(he)

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        e = self.edges
        n = self.n_vertices
        w = np.ones(len(e))
        a = sparse.coo_matrix((w, (e[:, 0], e[:, 1])), shape=(n, n))
        return (a + a.T).tocsr()

    # -- metric quantities ------------------------------------------------

    @cached_property
    def _face_edges(self):
        x = self.vertices[self.faces]
        return x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]

    @cached_property
    def face_areas(self) -> np.ndarray:
        e1, e2 = self._face_edges
        g11 = np.einsum("ij,ij->i", e1, e1)
        g22 = np.einsum("ij,ij->i", e2, e2)
        g12 = np.einsum("ij,ij->i", e1, e2)
        return _freeze(0.5 * np.sqrt(np.maximum(g11 * g22 - g12 * g12, 0.0)))

    @property
    def total_area(self) -> float:
        return float(self.face_areas.sum())

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        e = self.edges
        return _freeze(np.linalg.norm(self.vertices[e[:, 1]] - self.vertices[e[:, 0]], axis=1))

    @property
    def mesh_size(self) -> float:
        """Longest edge length."""
        return float(self.edge_lengths.max())

    @cached_property
    def face_cotangents(self) -> np.ndarray:
        """(F, 3) cotangent of the interior angle at each face corner."""
        x = self.vertices[self.faces]
        cots = np.empty((self.n_faces, 3))
        two_area = 2.0 * self.face_areas
        for k in range(3):
            a = x[:, _NEXT[k]] - x[:, k]
            b = x[:, _PREV[k]] - x[:, k]
            with np.errstate(divide="ignore", invalid="ignore"):
                cots[:, k] = np.einsum("ij,ij->i", a, b) / two_area
        return _freeze(cots)

    @cached_property
    def cotan_matrix(self) -> sparse.csr_matrix:
        """Symmetric stiffness matrix L with (L u)_i = 1/2 sum (cot a + cot b)(u_j - u_i)."""
        t = self.faces
        c = self.face_cotangents
        n = self.n_vertices
        rows, cols, vals = [], [], []
        for k in range(3):
            i, j = t[:, _NEXT[k]], t[:, _PREV[k]]
            w = 0.5 * c[:, k]
            rows += [i, j, i, j]
            cols += [j, i, i, j]
            vals += [w, w, -w, -w]
        mat = sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        )
        return mat.tocsr()

    @cached_property
    def lumped_areas(self) -> np.ndarray:
        """Mixed Voronoi vertex areas; obtuse faces split in barycentric thirds."""
        t = self.faces
        x = self.vertices[t]
        c = self.face_cotangents
        areas = self.face_areas
        obtuse = np.any(c < 0, axis=1)
        contrib = np.empty((self.n_faces, 3))
        for k in range(3):
            j, l = _NEXT[k], _PREV[k]
            ekj = np.sum((x[:, j] - x[:, k]) ** 2, axis=1)
            ekl = np.sum((x[:, l] - x[:, k]) ** 2, axis=1)
            contrib[:, k] = (ekj * c[:, l] + ekl * c[:, j]) / 8.0
        contrib[obtuse] = areas[obtuse, None] / 3.0
        out = np.zeros(self.n_vertices)
        np.add.at(out, t.ravel(), contrib.ravel())
        return _freeze(out)

    @cached_property
    def face_bases(self) -> np.ndarray:
        """(F, N, 2) orthonormal basis of each face plane."""
        e1, e2 = self._face_edges
        if np.any(self.face_areas <= 0):
            bad = int(np.flatnonzero(self.face_areas <= 0)[0])
            raise DegenerateFaceError(f"face {bad} has zero area")
        u1 = e1 / np.linalg.norm(e1, axis=1, keepdims=True)
        w = e2 - np.einsum("ij,ij->i", e2, u1)[:, None] * u1
        u2 = w / np.linalg.norm(w, axis=1, keepdims=True)
        return _freeze(np.stack([u1, u2], axis=2))

    @cached_property
    def vertex_faces(self) -> list[np.ndarray]:
        order = np.argsort(self.faces.ravel(), kind="stable")
        vid = self.faces.ravel()[order]
        splits = np.searchsorted(vid, np.arange(1, self.n_vertices))
        return [f // 3 for f in np.split(order, splits)]

    def with_vertices(self, vertices) -> "ImmersedMesh":
        return ImmersedMesh(vertices, self.faces)

    def embed(self, dim: int) -> "ImmersedMesh":
        """Pad vertex coordinates with zeros up to ``dim`` coordinates."""
        if dim < self.dim:
            raise ValueError("cannot embed into fewer coordinates")
        pad = np.zeros((self.n_vertices, dim - self.dim))
        return ImmersedMesh(np.hstack([self.vertices, pad]), self.faces)


# -- quadrature -------------------------------------------------------------


@dataclass(frozen=True)
class FaceQuadrature:
    """Edge-midpoint rule: three nodes per face, each weighted area/3 * e^-f."""

    mesh: ImmersedMesh
    points: np.ndarray  # (F, 3, N), projected onto the model
    density: np.ndarray  # (F, 3) values of f
    weights: np.ndarray  # (F, 3)

    def interp(self, values: np.ndarray) -> np.ndarray:
        """Interpolate a vertex field (V, ...) linearly to the nodes (F, 3, ...)."""
        v = np.asarray(values)[self.mesh.faces]
        return 0.5 * (v[:, _NEXT] + v[:, _PREV])

    def integrate(self, node_values: np.ndarray, faces=None) -> float:
        w = self.weights if faces is None else self.weights[faces]
        vals = node_values if faces is None else node_values[faces]
        return float(np.sum(w * vals))


def quadrature(mesh: ImmersedMesh, ambient: WeightedAmbient) -> FaceQuadrature:
    x = mesh.vertices[mesh.faces]
    mids = 0.5 * (x[:, _NEXT] + x[:, _PREV])
    pts = ambient.project(mids)
    f = ambient.f(pts)
    w = (mesh.face_areas / 3.0)[:, None] * np.exp(-f)
    return FaceQuadrature(mesh, pts, f, w)


def f_volume(mesh: ImmersedMesh, ambient: WeightedAmbient, faces=None) -> float:
    """Weighted area: integral of e^-f over the faces (all, or a subset)."""
    q = quadrature(mesh, ambient)
    w = q.weights if faces is None else q.weights[faces]
    return float(w.sum())


def boundary_f_volume(mesh: ImmersedMesh, ambient: WeightedAmbient) -> float:
    """Weighted boundary length: sum of edge length times e^-f(edge midpoint)."""
    be = mesh.boundary_edges
    if len(be) == 0:
        return 0.0
    a, b = mesh.vertices[be[:, 0]], mesh.vertices[be[:, 1]]
    mid = ambient.project(0.5 * (a + b))
    return float(np.sum(np.linalg.norm(b - a, axis=1) * np.exp(-ambient.f(mid))))


# -- curvature ----------------------------------------------------------------


@dataclass(frozen=True)
class MeanCurvature:
    """Per-vertex mean curvature data; boundary rows of ``H`` are NaN.

    ``ambient_laplacian`` is Delta_M x in ambient coordinates. ``H`` is its
    projection onto the normal space of M inside the model (for the sphere
    this removes the sphere's own contribution -m b^2 x).
    """

    ambient_laplacian: np.ndarray
    H: np.ndarray
    tangent: np.ndarray

    @property
    def norm(self) -> np.ndarray:
        return np.linalg.norm(self.H, axis=1)


def vertex_tangent_basis(mesh: ImmersedMesh, ambient: WeightedAmbient | None = None) -> np.ndarray:
    """(V, N, 2) orthonormal tangent planes at the vertices."""
    q = mesh.face_bases
    proj = np.einsum("fia,fja->fij", q, q) * mesh.face_areas[:, None, None]
    acc = np.zeros((mesh.n_vertices, mesh.dim, mesh.dim))
    for k in range(3):
        np.add.at(acc, mesh.faces[:, k], proj)
    if ambient is not None and ambient.is_sphere:
        u = mesh.vertices / np.linalg.norm(mesh.vertices, axis=1, keepdims=True)
        p = np.eye(mesh.dim)[None] - np.einsum("vi,vj->vij", u, u)
        acc = p @ acc @ p
    _, vecs = np.linalg.eigh(acc)
    return vecs[:, :, -2:]


def _tangent_part(basis: np.ndarray, vec: np.ndarray) -> np.ndarray:
    return np.einsum("via,va->vi", basis, np.einsum("via,vi->va", basis, vec))


def mean_curvature(mesh: ImmersedMesh, ambient: WeightedAmbient) -> MeanCurvature:
    """Cotangent Laplacian of the position over lumped area, projected normally."""
    ambient.check_points(mesh.vertices)
    lap = (mesh.cotan_matrix @ mesh.vertices) / mesh.lumped_areas[:, None]
    basis = vertex_tangent_basis(mesh, ambient)
    H = lap - _tangent_part(basis, lap)
    if ambient.is_sphere:
        u = mesh.vertices / np.linalg.norm(mesh.vertices, axis=1, keepdims=True)
        H = H - np.einsum("vi,vi->v", H, u)[:, None] * u
    H = H.copy()
    H[mesh.boundary_mask] = np.nan
    return MeanCurvature(lap, H, basis)


def weighted_mean_curvature(mesh: ImmersedMesh, ambient: WeightedAmbient, mc: MeanCurvature | None = None):
    """H_f = H + normal part of the ambient gradient of f, per vertex."""
    mc = mc or mean_curvature(mesh, ambient)
    g = ambient.grad_f(mesh.vertices)
    return mc.H + (g - _tangent_part(mc.tangent, g))


def hf_minus_gradf(mesh: ImmersedMesh, ambient: WeightedAmbient, mc: MeanCurvature | None = None):
    """H_f - grad f = H - (grad f)^T per vertex; returns (vectors, norms)."""
    mc = mc or mean_curvature(mesh, ambient)
    g = ambient.grad_f(mesh.vertices)
    vec = mc.H - _tangent_part(mc.tangent, g)
    return vec, np.linalg.norm(vec, axis=1)


def fill_undefined(mesh: ImmersedMesh, values: np.ndarray, max_rounds: int = 50) -> np.ndarray:
    """Replace NaN vertex rows by the mean of defined one-ring neighbours."""
    vals = np.array(values, dtype=float)
    flat = vals.reshape(len(vals), -1)
    adj = mesh.adjacency
    for _ in range(max_rounds):
        bad = np.isnan(flat).any(axis=1)
        if not bad.any():
            break
        good = (~bad).astype(float)
        sums = adj @ np.where(bad[:, None], 0.0, flat)
        cnt = adj @ good
        upd = bad & (cnt > 0)
        if not upd.any():
            break
        flat[upd] = sums[upd] / cnt[upd, None]
    return flat.reshape(vals.shape)


def face_gradient(mesh: ImmersedMesh, field) -> np.ndarray:
    """Gradient of the piecewise-linear interpolant, one ambient vector per face."""
    u = np.asarray(field, dtype=float)
    if u.shape != (mesh.n_vertices,):
        raise ValueError(f"field must have shape ({mesh.n_vertices},)")
    bad = np.flatnonzero(mesh.face_areas <= 0)
    if len(bad):
        raise DegenerateFaceError(f"face {int(bad[0])} has zero area")
    e1, e2 = mesh._face_edges
    g11 = np.einsum("ij,ij->i", e1, e1)
    g22 = np.einsum("ij,ij->i", e2, e2)
    g12 = np.einsum("ij,ij->i", e1, e2)
    det = g11 * g22 - g12 * g12
    uf = u[mesh.faces]
    d1, d2 = uf[:, 1] - uf[:, 0], uf[:, 2] - uf[:, 0]
    a = (g22 * d1 - g12 * d2) / det
    b = (g11 * d2 - g12 * d1) / det
    return a[:, None] * e1 + b[:, None] * e2


# -- geodesic distance ----------------------------------------------------------


def _unfold_update(xv, xa, xb, da, db):
    """Planar update of the distance at v from known distances at a and b."""
    ab = xb - xa
    c = np.linalg.norm(ab)
    av = xv - xa
    vx = av @ ab / c
    vy2 = av @ av - vx * vx
    if vy2 <= 0:
        return np.inf
    vy = np.sqrt(vy2)
    sx = (da * da - db * db + c * c) / (2 * c)
    sy2 = da * da - sx * sx
    if sy2 < 0:
        return np.inf
    sy = -np.sqrt(sy2)
    x_cross = sx + (vx - sx) * (-sy) / (vy - sy)
    if x_cross < 0 or x_cross > c:
        return np.inf
    return float(np.hypot(vx - sx, vy - sy))


def geodesic_distance(mesh: ImmersedMesh, source: int) -> np.ndarray:
    """Approximate intrinsic distance from a vertex to every vertex.

    Shortest edge paths (Dijkstra) followed by one straightening pass: in
    increasing order of the edge-path distance each vertex is relaxed through
    the planar unfolding of its incident faces, which replaces zig-zag edge
    paths by straight segments across triangles.
    """
    w = mesh.adjacency.copy().tocoo()
    w.data = np.linalg.norm(mesh.vertices[w.row] - mesh.vertices[w.col], axis=1)
    d = dijkstra(w.tocsr(), directed=False, indices=int(source))
    order = np.argsort(d, kind="stable")
    done = np.zeros(mesh.n_vertices, dtype=bool)
    x = mesh.vertices
    t = mesh.faces
    vf = mesh.vertex_faces
    for v in order:
        if v != source and np.isfinite(d[v]):
            best = d[v]
            for f in vf[v]:
                tri = t[f]
                k = int(np.flatnonzero(tri == v)[0])
                a, b = tri[_NEXT[k]], tri[_PREV[k]]
                if done[a] and done[b]:
                    cand = _unfold_update(x[v], x[a], x[b], d[a], d[b])
                    if cand < best:
                        best = cand
            d[v] = best
        done[v] = True
    return d


def ball_f_volume(
    mesh: ImmersedMesh, ambient: WeightedAmbient, dist: np.ndarray, radius: float
) -> float:
    """Weighted area of {dist < radius} with dist interpolated linearly on faces.

    Each face contributes its exactly clipped area fraction times the mean
    density weight of its quadrature nodes.
    """
    q = quadrature(mesh, ambient)
    dens = q.weights.sum(axis=1) / np.where(mesh.face_areas > 0, mesh.face_areas, 1.0)
    frac = _clip_fraction(dist[mesh.faces], radius)
    return float(np.sum(frac * mesh.face_areas * dens))


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    # 0 <= num <= den here; split factors so products of tiny gaps never underflow to 0/0
    out = np.zeros_like(num)
    ok = num > 0
    out[ok] = np.minimum(num[ok] / den[ok], 1.0)
    return out


def _clip_fraction(vals: np.ndarray, r: float) -> np.ndarray:
    """Area fraction of each triangle where a linear function is below r."""
    v = np.sort(vals, axis=1)
    d0, d1, d2 = v[:, 0], v[:, 1], v[:, 2]
    frac = np.zeros(len(v))
    frac[d2 < r] = 1.0
    one = (d0 < r) & (d1 >= r)
    frac[one] = _ratio(r - d0[one], d1[one] - d0[one]) * _ratio(r - d0[one], d2[one] - d0[one])
    two = (d1 < r) & (d2 >= r)
    frac[two] = 1.0 - _ratio(d2[two] - r, d2[two] - d0[two]) * _ratio(d2[two] - r, d2[two] - d1[two])
    return np.clip(frac, 0.0, 1.0)
