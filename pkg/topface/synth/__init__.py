"""Synthetic face-like surfaces standing in for scanned faces."""

from .faces import (
    HALF_EXTENT,
    MIN_POINTS,
    ExpressionField,
    SyntheticIdentity,
    generate_face,
    generate_mesh,
    jittered_grid,
    surface,
)
from .splits import build_splits, make_identities, mesh_path, n_train_per_identity, resplit, sample_path
from .dataset import (
    MANIFEST_NAME,
    eval_samples,
    identities_of,
    load_clouds,
    load_manifest,
    load_split,
    reference_mesh,
    render_sample,
    write_dataset,
    write_manifest,
)

__all__ = [
    "HALF_EXTENT",
    "MIN_POINTS",
    "ExpressionField",
    "SyntheticIdentity",
    "generate_face",
    "generate_mesh",
    "jittered_grid",
    "surface",
    "build_splits",
    "make_identities",
    "mesh_path",
    "n_train_per_identity",
    "resplit",
    "sample_path",
    "MANIFEST_NAME",
    "eval_samples",
    "identities_of",
    "load_clouds",
    "load_manifest",
    "load_split",
    "reference_mesh",
    "render_sample",
    "write_dataset",
    "write_manifest",
]
