from .cloud import ExpressionTag, NoiseSpec, PointCloud
from .noise import add_gaussian_noise, derive_seed, level_key, standard_normals, uniform_stream
from .normalize import DEFAULT_EXTENT, NormalizationRecord, denormalize, normalize_unit_box
from .xyz_io import load_xyz, save_xyz

__all__ = [
    "PointCloud",
    "NoiseSpec",
    "ExpressionTag",
    "add_gaussian_noise",
    "standard_normals",
    "uniform_stream",
    "derive_seed",
    "level_key",
    "normalize_unit_box",
    "denormalize",
    "NormalizationRecord",
    "DEFAULT_EXTENT",
    "load_xyz",
    "save_xyz",
]
