"""Denoise a cloud: project, run each plane's generator, unproject, combine."""

from __future__ import annotations

import logging
from typing import Dict, Optional, Tuple

import numpy as np

from common.errors import StateError
from topface.pointcloud import PointCloud
from topface.projection import PLANE_ORDER, Axis, TopProjection, plane_to_tensor, project, reconstruct, tensor_to_grid
from topface.tensor import no_grad

from .bundle import DenoiserBundle

logger = logging.getLogger(__name__)


def denoise_planes(
    pc_noisy: PointCloud,
    bundle: Optional[DenoiserBundle],
    resolution: Optional[int] = None,
) -> Tuple[TopProjection, Dict[Axis, np.ndarray]]:
    """Projection of the noisy cloud and the denoised grid of every plane."""
    if bundle is None:
        raise StateError("no denoiser weights loaded", stage="denoiser")
    missing = [a.value for a in PLANE_ORDER if a not in bundle.generators]
    if missing:
        raise StateError(f"denoiser has no generator for planes {missing}", stage="denoiser")
    res = resolution or bundle.config.resolution
    projection = project(pc_noisy, (res, res))
    grids: Dict[Axis, np.ndarray] = {}
    with no_grad():
        for axis in PLANE_ORDER:
            out = bundle.generators[axis](plane_to_tensor(projection.plane(axis)))
            grids[axis] = tensor_to_grid(out)
    return projection, grids


def denoise(pc_noisy: PointCloud, bundle: Optional[DenoiserBundle], resolution: Optional[int] = None) -> PointCloud:
    """Denoised cloud, index-aligned with ``pc_noisy`` and carrying its labels."""
    projection, grids = denoise_planes(pc_noisy, bundle, resolution)
    result = reconstruct(projection, grids, source=pc_noisy)
    logger.debug("CLOUD_DENOISED n=%d", result.n_points)
    return result
