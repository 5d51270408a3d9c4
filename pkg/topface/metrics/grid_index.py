"""Exact nearest-neighbour queries through a uniform grid hash.

Points are bucketed into cubic cells of side ``cell_size``. A query scans
Chebyshev shells of cells around its own cell; once the best squared
distance is at most (r·cell_size)² after shell r, no point outside the
scanned block can be closer, so the answer is exact.
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from common.errors import ArgumentError, DimensionError


class SpatialGridIndex:
    def __init__(self, points: np.ndarray, cell_size: Optional[float] = None):
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 3:
            raise DimensionError(f"points must be (M, 3), got {points.shape}")
        if points.shape[0] == 0:
            raise ArgumentError("cannot index an empty point set")
        self.points = points
        extent = float(np.ptp(points, axis=0).max())
        if cell_size is None:
            # about four points per cell on a surface-like set
            cell_size = 2.0 * extent / np.sqrt(points.shape[0]) if extent > 0 else 1.0
        if cell_size <= 0:
            raise ArgumentError(f"cell size must be > 0, got {cell_size}")
        self.cell_size = float(cell_size)
        self.origin = points.min(axis=0)
        keys = self._keys(points)
        self.dims = keys.max(axis=0) + 1
        flat = np.ravel_multi_index(keys.T, self.dims)
        self.order = np.argsort(flat, kind="stable")
        self.sorted_cells = flat[self.order]

    def _keys(self, points: np.ndarray) -> np.ndarray:
        return np.floor((points - self.origin) / self.cell_size).astype(np.int64)

    def _block(self, center: np.ndarray, radius: int) -> np.ndarray:
        """Original indices of every point in cells within ``radius`` of ``center``, ascending."""
        lo = np.maximum(center - radius, 0)
        hi = np.minimum(center + radius, self.dims - 1)
        if (lo > hi).any():
            return np.empty(0, dtype=np.int64)
        axes = [np.arange(lo[d], hi[d] + 1) for d in range(3)]
        cells = np.ravel_multi_index(
            [g.ravel() for g in np.meshgrid(*axes, indexing="ij")], self.dims
        )
        starts = np.searchsorted(self.sorted_cells, cells, side="left")
        ends = np.searchsorted(self.sorted_cells, cells, side="right")
        counts = ends - starts
        if counts.sum() == 0:
            return np.empty(0, dtype=np.int64)
        offsets = np.repeat(starts - np.cumsum(counts) + counts, counts) + np.arange(counts.sum())
        return np.sort(self.order[offsets])

    def _covers_all(self, center: np.ndarray, radius: int) -> bool:
        return bool(((center - radius) <= 0).all() and ((center + radius) >= self.dims - 1).all())

    def nearest(self, queries: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Squared distance to, and index of, the nearest indexed point for every query.

        Ties go to the lower index.
        """
        queries = np.asarray(queries, dtype=np.float64)
        if queries.ndim != 2 or queries.shape[1] != 3:
            raise DimensionError(f"queries must be (Q, 3), got {queries.shape}")
        best_d = np.full(queries.shape[0], np.inf)
        best_i = np.full(queries.shape[0], -1, dtype=np.int64)
        keys = self._keys(queries)
        groups, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        for g, center in enumerate(groups):
            members = np.flatnonzero(inverse == g)
            q = queries[members]
            radius = int(np.maximum(0, np.maximum(-center, center - (self.dims - 1))).max())
            while True:
                cand = self._block(center, radius)
                if cand.size:
                    diff = q[:, None, :] - self.points[None, cand, :]
                    d2 = (diff * diff).sum(axis=-1)
                    arg = np.argmin(d2, axis=1)
                    best_d[members] = d2[np.arange(members.size), arg]
                    best_i[members] = cand[arg]
                    bound = (radius * self.cell_size) ** 2
                    if (best_d[members] <= bound).all():
                        break
                if self._covers_all(center, radius):
                    break
                radius += 1
        return best_d, best_i
