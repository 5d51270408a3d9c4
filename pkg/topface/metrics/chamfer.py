"""Chamfer distance: mean squared nearest-neighbour distance, both directions."""

from __future__ import annotations

from typing import Union

import numpy as np

from common.errors import ArgumentError
from topface.pointcloud import PointCloud

from .grid_index import SpatialGridIndex

CloudLike = Union[PointCloud, np.ndarray]


def _points(cloud: CloudLike) -> np.ndarray:
    points = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ArgumentError("chamfer needs two non-empty clouds")
    return points


def directed_chamfer(a: CloudLike, b: CloudLike) -> float:
    """(1/|a|)·Σ_{p∈a} min_{q∈b} ‖p−q‖²"""
    d2, _ = SpatialGridIndex(_points(b)).nearest(_points(a))
    return float(np.mean(d2))


def chamfer(a: CloudLike, b: CloudLike) -> float:
    return directed_chamfer(a, b) + directed_chamfer(b, a)
