"""Unit-box normalization: centroid to origin, longest bounding-box edge to a fixed extent."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from common.errors import ArgumentError, DegenerateInputError

from .cloud import PointCloud

DEFAULT_EXTENT = 100.0


@dataclass(frozen=True)
class NormalizationRecord:
    """normalized = (p − centroid) · scale"""

    centroid: Tuple[float, float, float]
    scale: float
    extent: float

    def apply(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=np.float64) - np.asarray(self.centroid)) * self.scale

    def invert(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=np.float64) / self.scale + np.asarray(self.centroid)


def normalize_unit_box(pc: PointCloud, extent: float = DEFAULT_EXTENT) -> Tuple[PointCloud, NormalizationRecord]:
    if extent <= 0:
        raise ArgumentError(f"extent must be > 0, got {extent}")
    points = pc.points
    edges = points.max(axis=0) - points.min(axis=0)
    longest = float(edges.max())
    if pc.n_points < 2 or longest == 0.0:
        raise DegenerateInputError("cannot normalize a cloud whose points all coincide")
    centroid = points.mean(axis=0)
    record = NormalizationRecord(
        centroid=tuple(float(c) for c in centroid),
        scale=extent / longest,
        extent=float(extent),
    )
    return pc.with_points(record.apply(points)), record


def denormalize(pc: PointCloud, record: NormalizationRecord) -> PointCloud:
    return pc.with_points(record.invert(pc.points))
