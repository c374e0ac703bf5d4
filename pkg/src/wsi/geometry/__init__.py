"""Weighted ambients, immersed triangle meshes and discrete calculus on them."""

from .ambient import DENSITIES, Density, WeightedAmbient, ambient_radial, parse_ambient
from .mesh import (
    FaceQuadrature,
    ImmersedMesh,
    MeanCurvature,
    ball_f_volume,
    boundary_f_volume,
    f_volume,
    face_gradient,
    fill_undefined,
    geodesic_distance,
    hf_minus_gradf,
    mean_curvature,
    quadrature,
    vertex_tangent_basis,
    weighted_mean_curvature,
)
from .offio import format_off, parse_off, read_off, write_off
from .primitives import build_primitive, cylinder, disc, plane_patch, sphere, spherical_cap

__all__ = [
    "DENSITIES",
    "Density",
    "WeightedAmbient",
    "ambient_radial",
    "parse_ambient",
    "FaceQuadrature",
    "ImmersedMesh",
    "MeanCurvature",
    "ball_f_volume",
    "boundary_f_volume",
    "f_volume",
    "face_gradient",
    "fill_undefined",
    "geodesic_distance",
    "hf_minus_gradf",
    "mean_curvature",
    "quadrature",
    "vertex_tangent_basis",
    "weighted_mean_curvature",
    "format_off",
    "parse_off",
    "read_off",
    "write_off",
    "build_primitive",
    "cylinder",
    "disc",
    "plane_patch",
    "sphere",
    "spherical_cap",
]
