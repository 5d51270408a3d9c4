"""Structured-to-sparse inverse: plane grids back to per-point coordinates."""

from __future__ import annotations

from typing import Mapping, Optional

import numpy as np

from common.errors import DimensionError
from topface.pointcloud import PointCloud
from topface.tensor import Tensor, concat

from .plane import Axis, PlaneImage, TopProjection


def unproject(plane: PlaneImage, denoised_grid: np.ndarray) -> np.ndarray:
    """Give every source point the value of its cell in ``denoised_grid``."""
    grid = np.asarray(denoised_grid, dtype=np.float64)
    if grid.shape != plane.resolution:
        raise DimensionError(f"denoised grid {grid.shape} does not match plane {plane.resolution}")
    return grid.reshape(-1)[plane.cell_of_point]


def unproject_tensor(plane: PlaneImage, image: Tensor) -> Tensor:
    """Differentiable ``unproject`` for a (1, H, W) or (H, W) generator output."""
    h, w = plane.resolution
    if image.shape not in ((h, w), (1, h, w)):
        raise DimensionError(f"image {image.shape} does not match plane {plane.resolution}")
    return image.reshape(h * w).take_rows(plane.cell_of_point)


def combine(
    x_vals: np.ndarray,
    y_vals: np.ndarray,
    z_vals: np.ndarray,
    source: Optional[PointCloud] = None,
) -> PointCloud:
    """Stack per-point x (y-z plane), y (z-x plane) and z (x-y plane) into a cloud."""
    columns = [np.asarray(v, dtype=np.float64) for v in (x_vals, y_vals, z_vals)]
    lengths = {c.shape for c in columns}
    if len(lengths) != 1 or columns[0].ndim != 1:
        raise DimensionError(f"combine needs three equal-length vectors, got {[c.shape for c in columns]}")
    points = np.stack(columns, axis=1)
    if source is None:
        return PointCloud(points=points)
    if source.n_points != points.shape[0]:
        raise DimensionError(f"source has {source.n_points} points, values have {points.shape[0]}")
    return source.with_points(points)


def combine_tensor(x_vals: Tensor, y_vals: Tensor, z_vals: Tensor) -> Tensor:
    """Differentiable ``combine``: three (N,) tensors to one (N, 3) tensor."""
    shapes = {t.shape for t in (x_vals, y_vals, z_vals)}
    if len(shapes) != 1 or x_vals.ndim != 1:
        raise DimensionError(f"combine needs three equal-length vectors, got {sorted(shapes)}")
    n = x_vals.shape[0]
    return concat([t.reshape(n, 1) for t in (x_vals, y_vals, z_vals)], axis=1)


def reconstruct(
    projection: TopProjection,
    grids: Mapping[Axis, np.ndarray],
    source: Optional[PointCloud] = None,
) -> PointCloud:
    """unproject every plane's grid and combine into a cloud."""
    values = {axis: unproject(projection.plane(axis), grids[axis]) for axis in projection.planes}
    return combine(values[Axis.X], values[Axis.Y], values[Axis.Z], source=source)
