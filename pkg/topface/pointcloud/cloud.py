"""Point-cloud value types."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from common.errors import ArgumentError, DimensionError


class ExpressionTag(str, Enum):
    NEUTRAL = "neutral"
    NON_NEUTRAL = "non_neutral"


@dataclass(frozen=True)
class PointCloud:
    """N unordered 3-D points in model units, optionally labelled.

    ``points`` is stored as a read-only (N, 3) float64 array.
    """

    points: np.ndarray
    identity: Optional[int] = None
    expression_tag: Optional[ExpressionTag] = None

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 3:
            raise DimensionError(f"points must be (N, 3), got {points.shape}")
        if points.shape[0] < 1:
            raise ArgumentError("a point cloud needs at least one point")
        if not np.isfinite(points).all():
            raise ArgumentError("point coordinates must be finite")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)
        if self.expression_tag is not None and not isinstance(self.expression_tag, ExpressionTag):
            object.__setattr__(self, "expression_tag", ExpressionTag(self.expression_tag))
        if self.identity is not None and int(self.identity) < 0:
            raise ArgumentError(f"identity must be a non-negative index, got {self.identity}")

    @property
    def n_points(self) -> int:
        return int(self.points.shape[0])

    def with_points(self, points: np.ndarray) -> "PointCloud":
        """Same labels, new coordinates."""
        return PointCloud(points=points, identity=self.identity, expression_tag=self.expression_tag)

    def subset(self, indices: np.ndarray) -> "PointCloud":
        return self.with_points(self.points[np.asarray(indices, dtype=np.intp)])


@dataclass(frozen=True)
class NoiseSpec:
    """Per-axis Gaussian variance σ² (model units²) and the stream seed."""

    variance: float
    seed: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.variance) or self.variance < 0:
            raise ArgumentError(f"noise variance must be >= 0, got {self.variance}")
        if not 0 <= int(self.seed) < 2**64:
            raise ArgumentError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
