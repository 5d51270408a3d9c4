"""Sparse-to-structured mapping of a cloud onto its three orthogonal planes.

Each plane takes two coordinates as (column, row) and the remaining one as
gray value. Quantization is ``floor((c − lo) / (hi − lo) · n)`` with the
maximum clamped into the last cell, so the inverse can replay it exactly.
Several points in one cell share the mean of their gray values; empty cells
carry a sentinel one cell-extent below the smallest occupied gray value.
"""

from __future__ import annotations

import logging
from typing import Dict, Tuple

import numpy as np

from common.errors import ArgumentError, DegenerateInputError, DimensionError
from topface.pointcloud import PointCloud

from .plane import GRAY_COORD, IN_PLANE, PLANE_ORDER, Axis, PlaneImage, TopProjection

logger = logging.getLogger(__name__)

MIN_RESOLUTION = 8


def _range(values: np.ndarray) -> Tuple[float, float]:
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return lo - 0.5, hi + 0.5
    return lo, hi


def quantize(values: np.ndarray, lo: float, hi: float, cells: int) -> np.ndarray:
    """Cell index of every value over [lo, hi] split into ``cells`` bins."""
    idx = np.floor((np.asarray(values, dtype=np.float64) - lo) / (hi - lo) * cells).astype(np.intp)
    return np.clip(idx, 0, cells - 1)


def cell_means(cells: np.ndarray, values: np.ndarray, n_cells: int) -> Tuple[np.ndarray, np.ndarray]:
    """Per-cell mean of ``values`` and the occupancy mask, both flat.

    Summation runs in (cell, value) order, so the means do not depend on the
    order of the input points.
    """
    values = np.asarray(values, dtype=np.float64)
    order = np.lexsort((values, cells))
    cells, values = cells[order], values[order]
    counts = np.bincount(cells, minlength=n_cells)
    sums = np.bincount(cells, weights=values, minlength=n_cells)
    occupied = counts > 0
    means = np.zeros(n_cells)
    means[occupied] = sums[occupied] / counts[occupied]
    return means, occupied


def _check_resolution(resolution: Tuple[int, int]) -> Tuple[int, int]:
    if len(resolution) != 2:
        raise ArgumentError(f"resolution must be (H, W), got {resolution}")
    h, w = int(resolution[0]), int(resolution[1])
    if h < MIN_RESOLUTION or w < MIN_RESOLUTION:
        raise ArgumentError(f"resolution must be at least {MIN_RESOLUTION}x{MIN_RESOLUTION}, got {h}x{w}")
    return h, w


def project_plane(points: np.ndarray, axis: Axis, resolution: Tuple[int, int]) -> PlaneImage:
    h, w = resolution
    col_coord, row_coord = IN_PLANE[axis]
    cols_src, rows_src = points[:, col_coord], points[:, row_coord]
    gray = points[:, GRAY_COORD[axis]]

    if points.shape[0] >= 2 and np.ptp(cols_src) == 0 and np.ptp(rows_src) == 0:
        raise DegenerateInputError(
            f"all points share the same in-plane coordinates on the {axis.value}-gray plane"
        )
    col_range, row_range = _range(cols_src), _range(rows_src)
    cols = quantize(cols_src, *col_range, w)
    rows = quantize(rows_src, *row_range, h)
    cells = rows * w + cols

    means, occupied = cell_means(cells, gray, h * w)
    cell_extent = max((col_range[1] - col_range[0]) / w, (row_range[1] - row_range[0]) / h)
    fill = float(means[occupied].min() - cell_extent)
    grid = np.where(occupied, means, fill).reshape(h, w)
    return PlaneImage(
        axis=axis,
        grid=grid,
        occupancy=occupied.reshape(h, w),
        cell_of_point=cells,
        in_plane_ranges=(col_range, row_range),
        fill_value=fill,
    )


def project(pc: PointCloud, resolution: Tuple[int, int] = (64, 64)) -> TopProjection:
    """Build the x-y, y-z and z-x plane images of ``pc``."""
    h, w = _check_resolution(resolution)
    planes: Dict[Axis, PlaneImage] = {
        axis: project_plane(pc.points, axis, (h, w)) for axis in PLANE_ORDER
    }
    logger.debug(
        "TOP_PROJECTED n=%d res=%dx%d occupied=%s",
        pc.n_points,
        h,
        w,
        ",".join(f"{a.value}:{int(planes[a].occupancy.sum())}" for a in PLANE_ORDER),
    )
    return TopProjection(planes=planes, n_points=pc.n_points, resolution=(h, w))


def aggregate_onto(plane: PlaneImage, values: np.ndarray) -> np.ndarray:
    """Mean of per-point ``values`` in the plane's cells; empty cells get the fill value.

    Used to build clean training targets on a noisy cloud's cell layout.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (plane.n_points,):
        raise DimensionError(f"expected {plane.n_points} per-point values, got shape {values.shape}")
    h, w = plane.resolution
    means, occupied = cell_means(plane.cell_of_point, values, h * w)
    return np.where(occupied, means, plane.fill_value).reshape(h, w)
