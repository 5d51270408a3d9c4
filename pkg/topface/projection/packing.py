"""Plane images as 2-channel generator inputs: gray values and occupancy."""

from __future__ import annotations

import numpy as np

from common.errors import DimensionError
from topface.tensor import Tensor

from .plane import PlaneImage


def plane_to_tensor(plane: PlaneImage) -> Tensor:
    """(2, H, W): channel 0 gray (fill value where empty), channel 1 occupancy 0/1."""
    return Tensor(np.stack([plane.grid, plane.occupancy.astype(np.float64)]))


def tensor_to_grid(image: Tensor) -> np.ndarray:
    """Gray channel of a (C, H, W) image, or a (H, W) image, as a fresh array."""
    if image.ndim == 2:
        return image.values.copy()
    if image.ndim != 3:
        raise DimensionError(f"expected (C, H, W) or (H, W), got {image.shape}")
    return image.values[0].copy()
