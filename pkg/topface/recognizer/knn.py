"""Exact k-nearest-neighbour graphs over per-point feature rows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from common.errors import ArgumentError, DimensionError

# Upper bound on the (rows, N, D) difference block evaluated at once.
_BLOCK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class KnnGraph:
    k: int
    neighbors: np.ndarray
    built_from: str = "coordinates"

    def __post_init__(self) -> None:
        nbrs = np.asarray(self.neighbors, dtype=np.intp)
        if nbrs.ndim != 2 or nbrs.shape[1] != self.k:
            raise DimensionError(f"neighbors must be (N, {self.k}), got {nbrs.shape}")
        n = nbrs.shape[0]
        if nbrs.size and (nbrs.min() < 0 or nbrs.max() >= n):
            raise DimensionError("neighbour index out of range")
        if (nbrs == np.arange(n)[:, None]).any():
            raise ArgumentError("a point cannot be its own neighbour")
        nbrs.setflags(write=False)
        object.__setattr__(self, "neighbors", nbrs)

    @property
    def n_points(self) -> int:
        return int(self.neighbors.shape[0])


def squared_distances(features: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """(len(rows), N) squared Euclidean distances from ``features[rows]`` to every row."""
    diff = features[None, :, :] - features[rows, None, :]
    return (diff * diff).sum(axis=-1)


def knn(features: np.ndarray, k: int, built_from: str = "coordinates") -> KnnGraph:
    """k nearest neighbours of every row, self excluded, ties to the lower index."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise DimensionError(f"features must be (N, D), got {features.shape}")
    n, d = features.shape
    if k < 1:
        raise ArgumentError(f"k must be >= 1, got {k}")
    if k >= n:
        raise ArgumentError(f"k ({k}) must be smaller than the number of points ({n})")

    neighbors = np.empty((n, k), dtype=np.intp)
    step = max(1, _BLOCK_ELEMENTS // max(n * d, 1))
    for start in range(0, n, step):
        rows = np.arange(start, min(start + step, n))
        dist = squared_distances(features, rows)
        dist[np.arange(rows.size), rows] = np.inf
        order = np.argsort(dist, axis=1, kind="stable")
        neighbors[rows] = order[:, :k]
    return KnnGraph(k=k, neighbors=neighbors, built_from=built_from)
