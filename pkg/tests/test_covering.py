import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wsi.covering import (
    CoverInstance,
    greedy_disjoint_cover,
    layered_cover,
    sphere_distance,
    verify_cover,
)
from wsi.errors import InvalidOracleError


def brute_force(inst, A, cover):
    """Independent check straight from the definitions."""
    pts = inst.points
    tb = inst.t * inst.beta
    centres = [(k, c) for k, layer in enumerate(cover.centers) for c in layer]
    for a in A:
        assert any(np.linalg.norm(pts[a] - pts[c]) <= tb * cover.radii[k] + 1e-12 for k, c in centres)
    for i, (k, c) in enumerate(centres):
        for k2, c2 in centres[i + 1:]:
            assert np.linalg.norm(pts[c] - pts[c2]) > 2 * max(cover.radii[k], cover.radii[k2])


def test_single_point():
    inst = CoverInstance.euclidean([[0.0, 0.0]], 1.0)
    assert greedy_disjoint_cover(inst, [0], 0.5) == [0]


def test_two_far_points_both_selected():
    inst = CoverInstance.euclidean([[0.0, 0.0], [3.0, 0.0]], 1.0)
    assert greedy_disjoint_cover(inst, [0, 1], 1.0) == [0, 1]  # 3 > t beta R = 2


def test_close_points_collapse():
    inst = CoverInstance.euclidean([[0.0, 0.0], [1.5, 0.0], [3.9, 0.0]], 1.0)
    assert greedy_disjoint_cover(inst, [2, 1, 0], 1.0) == [0, 2]


def test_random_square_instance():
    rng = np.random.default_rng(7)
    pts = rng.random((200, 2))
    inst = CoverInstance.euclidean(pts, 0.05)
    F = greedy_disjoint_cover(inst, range(200), 0.05)
    d = inst.matrix
    assert all(d[i, F].min() <= 2.5 * 0.8 * 0.05 for i in range(200))
    sub = d[np.ix_(F, F)] + np.eye(len(F)) * 10
    assert sub.min() > 0.1


def test_single_layer_matches_greedy():
    rng = np.random.default_rng(1)
    inst = CoverInstance.euclidean(rng.random((60, 2)), 0.1)
    cover = layered_cover(inst, range(60), [0] * 60)
    assert cover.centers == [greedy_disjoint_cover(inst, range(60), 0.1)]


def test_two_clusters_two_layers():
    rng = np.random.default_rng(2)
    a = rng.normal(0, 0.05, (30, 2))
    b = rng.normal(0, 0.05, (30, 2)) + [5.0, 0.0]
    inst = CoverInstance.euclidean(np.vstack([a, b]), 0.5)
    cover = layered_cover(inst, range(60), [0] * 30 + [1] * 30)
    assert len(cover.centers[0]) >= 1 and len(cover.centers[1]) >= 1
    brute_force(inst, range(60), cover)
    assert all(verify_cover(inst, range(60), cover).values())


def test_earlier_layers_remove_points():
    inst = CoverInstance.euclidean([[0.0, 0.0], [0.1, 0.0]], 1.0)
    cover = layered_cover(inst, [0, 1], [0, 1])
    assert cover.centers == [[0], []]
    assert cover.assignment[1] == (0, 0)


def test_unassigned_points_listed():
    inst = CoverInstance.euclidean(np.zeros((3, 2)) + np.arange(3)[:, None], 1.0)
    with pytest.raises(ValueError, match=r"\[1\]"):
        layered_cover(inst, [0, 1, 2], {0: 0, 2: 1})
    with pytest.raises(ValueError, match=r"\[2\]"):
        layered_cover(inst, [0, 1, 2], [0, 0, -1])


def test_mesh_vertices_with_bucketed_layers(unit_disc):
    pts = unit_disc.vertices[::7]
    inst = CoverInstance.euclidean(pts, 0.4)
    r = np.linalg.norm(pts, axis=1)
    layers = np.minimum((r * 4).astype(int), 5)
    cover = layered_cover(inst, range(len(pts)), layers)
    brute_force(inst, range(len(pts)), cover)


@pytest.mark.parametrize(
    "kwargs",
    [dict(alpha=0.0, t=2.5, beta=0.8), dict(alpha=1.0, t=2.0, beta=0.9), dict(alpha=1.0, t=2.5, beta=0.7),
     dict(alpha=1.0, t=2.5, beta=1.0)],
)
def test_parameter_validation(kwargs):
    with pytest.raises(ValueError):
        CoverInstance.euclidean([[0.0, 0.0]], **kwargs)


def test_invalid_oracles():
    pts = np.zeros((2, 1))
    with pytest.raises(InvalidOracleError):
        CoverInstance(pts, np.array([[0.0, 1.0], [2.0, 0.0]]), 1.0, 2.5, 0.8)
    with pytest.raises(InvalidOracleError):
        CoverInstance(pts, np.array([[0.0, -1.0], [-1.0, 0.0]]), 1.0, 2.5, 0.8)
    with pytest.raises(InvalidOracleError):
        CoverInstance(pts, np.array([[1.0, 1.0], [1.0, 0.0]]), 1.0, 2.5, 0.8)
    with pytest.raises(InvalidOracleError):
        CoverInstance(pts, lambda p, q: float(p[0] - q[0]) + 1.0, 1.0, 2.5, 0.8)


def test_empty_candidates_and_radius():
    inst = CoverInstance.euclidean([[0.0, 0.0]], 1.0)
    with pytest.raises(ValueError):
        greedy_disjoint_cover(inst, [], 1.0)
    with pytest.raises(ValueError):
        greedy_disjoint_cover(inst, [0], 0.0)


def test_callable_sphere_oracle():
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(40, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    inst = CoverInstance(pts, sphere_distance(1.0), 0.6, 2.5, 0.8)
    np.testing.assert_allclose(inst.matrix, np.arccos(np.clip(pts @ pts.T, -1, 1)), atol=1e-7)
    cover = layered_cover(inst, range(40), rng.integers(0, 3, 40))
    assert all(verify_cover(inst, range(40), cover).values())


@settings(max_examples=40, deadline=None)
@given(
    st.integers(0, 10_000),
    st.integers(1, 80),
    st.floats(2.1, 4.0),
    st.floats(0.0, 1.0),
    st.integers(1, 4),
)
def test_cover_properties(seed, n, t, bfrac, n_layers):
    rng = np.random.default_rng(seed)
    beta = 2 / t + bfrac * (1 - 2 / t) * 0.999
    inst = CoverInstance.euclidean(rng.random((n, 2)), 0.2, t, beta)
    layers = rng.integers(0, n_layers, n)
    cover = layered_cover(inst, range(n), layers)
    brute_force(inst, range(n), cover)
    checks = verify_cover(inst, range(n), cover)
    assert all(checks.values())
    again = layered_cover(inst, range(n), layers)
    assert again.centers == cover.centers
    for k, layer in enumerate(cover.centers):
        assert all(layers[c] == k for c in layer)  # F_k is a subset of D_k
