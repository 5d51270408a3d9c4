"""PGM (gray) and PBM (occupancy) dumps of plane images for visual inspection."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .plane import PlaneImage, TopProjection

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def gray_levels(plane: PlaneImage, max_level: int = 255) -> np.ndarray:
    """Occupied cells scaled linearly to [1, max_level]; empty cells are 0."""
    levels = np.zeros(plane.resolution, dtype=np.int64)
    if not plane.occupancy.any():
        return levels
    occupied = plane.grid[plane.occupancy]
    lo, hi = occupied.min(), occupied.max()
    span = hi - lo if hi > lo else 1.0
    scaled = 1 + np.round((plane.grid - lo) / span * (max_level - 1)).astype(np.int64)
    levels[plane.occupancy] = scaled[plane.occupancy]
    return levels


def _ascii_rows(values: np.ndarray) -> str:
    return "\n".join(" ".join(str(int(v)) for v in row) for row in values)


def write_plane_images(plane: PlaneImage, directory: PathLike, cloud_name: str) -> Tuple[Path, Path]:
    """Write ``<cloud>_<axis>.pgm`` and ``<cloud>_<axis>.pbm``; row 0 is written first."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    h, w = plane.resolution
    stem = f"{cloud_name}_{plane.axis.value}"

    pgm = directory / f"{stem}.pgm"
    pgm.write_text(f"P2\n{w} {h}\n255\n{_ascii_rows(gray_levels(plane))}\n", encoding="ascii")
    pbm = directory / f"{stem}.pbm"
    pbm.write_text(f"P1\n{w} {h}\n{_ascii_rows(plane.occupancy.astype(np.int64))}\n", encoding="ascii")
    logger.debug("PLANE_DUMPED stem=%s dir=%s", stem, directory)
    return pgm, pbm


def dump_projection(projection: TopProjection, directory: PathLike, cloud_name: str) -> list:
    paths = []
    for plane in projection.ordered():
        paths.extend(write_plane_images(plane, directory, cloud_name))
    return paths
