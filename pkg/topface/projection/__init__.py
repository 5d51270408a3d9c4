"""TOP mapping: a cloud as three orthogonal plane images and back."""

from .plane import GRAY_COORD, IN_PLANE, PLANE_ORDER, Axis, PlaneImage, TopProjection
from .rasterizer import aggregate_onto, project, project_plane, quantize
from .inverse import combine, combine_tensor, reconstruct, unproject, unproject_tensor
from .packing import plane_to_tensor, tensor_to_grid
from .debug_dump import dump_projection, write_plane_images

__all__ = [
    "Axis",
    "PLANE_ORDER",
    "IN_PLANE",
    "GRAY_COORD",
    "PlaneImage",
    "TopProjection",
    "project",
    "project_plane",
    "quantize",
    "aggregate_onto",
    "unproject",
    "unproject_tensor",
    "combine",
    "combine_tensor",
    "reconstruct",
    "plane_to_tensor",
    "tensor_to_grid",
    "write_plane_images",
    "dump_projection",
]
