"""Plane images of the three-orthogonal-plane (TOP) mapping."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Tuple

import numpy as np

from common.errors import DimensionError


class Axis(str, Enum):
    """The coordinate that serves as gray value on a plane."""

    X = "x"
    Y = "y"
    Z = "z"


# Plane order: x-y (gray z), y-z (gray x), z-x (gray y).
PLANE_ORDER: Tuple[Axis, Axis, Axis] = (Axis.Z, Axis.X, Axis.Y)

# Coordinate column feeding (grid column, grid row) for each plane.
IN_PLANE: Dict[Axis, Tuple[int, int]] = {
    Axis.Z: (0, 1),
    Axis.X: (1, 2),
    Axis.Y: (2, 0),
}

GRAY_COORD: Dict[Axis, int] = {Axis.X: 0, Axis.Y: 1, Axis.Z: 2}


@dataclass(frozen=True)
class PlaneImage:
    """Structured H×W image of one plane.

    ``cell_of_point[i]`` is the flat cell (row·W + col) holding source point i;
    it is the compact form of the per-cell index map. Empty cells carry
    ``fill_value`` in ``grid``.
    """

    axis: Axis
    grid: np.ndarray
    occupancy: np.ndarray
    cell_of_point: np.ndarray
    in_plane_ranges: Tuple[Tuple[float, float], Tuple[float, float]]
    fill_value: float

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=np.float64)
        occupancy = np.asarray(self.occupancy, dtype=bool)
        cells = np.asarray(self.cell_of_point, dtype=np.intp)
        if grid.ndim != 2 or occupancy.shape != grid.shape:
            raise DimensionError(f"grid {grid.shape} and occupancy {occupancy.shape} must be equal H×W")
        if cells.ndim != 1:
            raise DimensionError("cell_of_point must be one-dimensional")
        if cells.size and (cells.min() < 0 or cells.max() >= grid.size):
            raise DimensionError("cell_of_point references a cell outside the grid")
        counts = np.bincount(cells, minlength=grid.size)
        if not np.array_equal(counts.reshape(grid.shape) > 0, occupancy):
            raise DimensionError("occupancy must be set exactly on cells that hold points")
        object.__setattr__(self, "axis", Axis(self.axis))
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "occupancy", occupancy)
        object.__setattr__(self, "cell_of_point", cells)

    @property
    def resolution(self) -> Tuple[int, int]:
        return tuple(self.grid.shape)

    @property
    def n_points(self) -> int:
        return int(self.cell_of_point.size)

    def cell_rows_cols(self) -> Tuple[np.ndarray, np.ndarray]:
        width = self.grid.shape[1]
        return self.cell_of_point // width, self.cell_of_point % width

    def points_in_cell(self, row: int, col: int) -> np.ndarray:
        flat = row * self.grid.shape[1] + col
        return np.flatnonzero(self.cell_of_point == flat)

    @property
    def index_map(self) -> List[List[List[int]]]:
        """H×W nested lists of the source point indices in every cell."""
        h, w = self.grid.shape
        cells: List[List[List[int]]] = [[[] for _ in range(w)] for _ in range(h)]
        rows, cols = self.cell_rows_cols()
        for idx, (r, c) in enumerate(zip(rows, cols)):
            cells[r][c].append(idx)
        return cells


@dataclass(frozen=True)
class TopProjection:
    """The three plane images of one cloud, keyed by gray axis."""

    planes: Dict[Axis, PlaneImage]
    n_points: int
    resolution: Tuple[int, int]

    def __post_init__(self) -> None:
        if set(self.planes) != set(PLANE_ORDER):
            raise DimensionError(f"a TOP projection needs planes {PLANE_ORDER}, got {tuple(self.planes)}")
        for plane in self.planes.values():
            if plane.n_points != self.n_points or plane.resolution != tuple(self.resolution):
                raise DimensionError("all planes must index the same points at the same resolution")

    def plane(self, axis: Axis) -> PlaneImage:
        return self.planes[Axis(axis)]

    def ordered(self) -> List[PlaneImage]:
        return [self.planes[a] for a in PLANE_ORDER]
