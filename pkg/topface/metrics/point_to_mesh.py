"""Exact unsigned point-to-triangle-mesh distance.

Closest points follow the Voronoi-region classification of a triangle
(three vertex regions, three edge regions, the face interior). Candidate
triangles for each point are those whose bounding box lies within the
distance to the nearest mesh vertex, which bounds the true answer.
"""

from __future__ import annotations

from typing import Union

import numpy as np

from common.errors import ArgumentError
from topface.pointcloud import PointCloud

from .grid_index import SpatialGridIndex
from .mesh import TriangleMesh

# Point rows processed against the face bounding boxes at once.
CHUNK = 64


def _dot(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (u * v).sum(axis=-1)


def closest_points_on_triangles(p: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Closest point on triangle (a_k, b_k, c_k) to p_k for every row k."""
    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = _dot(ab, ap), _dot(ac, ap)
    bp = p - b
    d3, d4 = _dot(ab, bp), _dot(ac, bp)
    cp = p - c
    d5, d6 = _dot(ab, cp), _dot(ac, cp)
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    regions = [
        (d1 <= 0) & (d2 <= 0),
        (d3 >= 0) & (d4 <= d3),
        (vc <= 0) & (d1 >= 0) & (d3 <= 0),
        (d6 >= 0) & (d5 <= d6),
        (vb <= 0) & (d2 >= 0) & (d6 <= 0),
        (va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0),
    ]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        t_ab = d1 / (d1 - d3)
        t_ac = d2 / (d2 - d6)
        t_bc = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        denom = 1.0 / (va + vb + vc)
        v, w = vb * denom, vc * denom
        choices = [
            a,
            b,
            a + t_ab[:, None] * ab,
            c,
            a + t_ac[:, None] * ac,
            b + t_bc[:, None] * (c - b),
        ]
        out = a + v[:, None] * ab + w[:, None] * ac
    for mask, choice in reversed(list(zip(regions, choices))):
        out = np.where(mask[:, None], choice, out)
    return out


def point_triangle_distances(p: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    diff = p - closest_points_on_triangles(p, a, b, c)
    return np.sqrt(_dot(diff, diff))


def distances_to_mesh(points: np.ndarray, mesh: TriangleMesh) -> np.ndarray:
    """Per-point unsigned distance to the nearest triangle."""
    if mesh.n_faces == 0:
        raise ArgumentError("mesh has no faces")
    points = np.asarray(points, dtype=np.float64)
    tri = mesh.triangles()
    box_lo, box_hi = tri.min(axis=1), tri.max(axis=1)
    used = np.unique(mesh.faces)
    d2_vertex, _ = SpatialGridIndex(mesh.vertices[used]).nearest(points)
    upper = np.sqrt(d2_vertex)

    result = np.empty(points.shape[0])
    for start in range(0, points.shape[0], CHUNK):
        p = points[start : start + CHUNK]
        gap = np.maximum(0.0, np.maximum(box_lo[None] - p[:, None], p[:, None] - box_hi[None]))
        box_d2 = _dot(gap, gap)
        bound = upper[start : start + CHUNK, None]
        rows, faces = np.nonzero(box_d2 <= bound * bound * (1 + 1e-12) + 1e-300)
        dist = point_triangle_distances(p[rows], tri[faces, 0], tri[faces, 1], tri[faces, 2])
        best = np.full(p.shape[0], np.inf)
        np.minimum.at(best, rows, dist)
        result[start : start + CHUNK] = best
    return result


def point_to_mesh(pc: Union[PointCloud, np.ndarray], mesh: TriangleMesh) -> float:
    """Mean over points of the distance to the nearest triangle."""
    points = pc.points if isinstance(pc, PointCloud) else np.asarray(pc, dtype=np.float64)
    if points.shape[0] == 0:
        raise ArgumentError("point_to_mesh needs a non-empty cloud")
    return float(np.mean(distances_to_mesh(points, mesh)))
