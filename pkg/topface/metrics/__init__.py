"""Cleanness and recognition metrics, evaluation runs and report files."""

from .grid_index import SpatialGridIndex
from .chamfer import chamfer, directed_chamfer
from .mesh import TriangleMesh, load_off, save_off
from .point_to_mesh import closest_points_on_triangles, distances_to_mesh, point_to_mesh
from .accuracy import accuracy
from .evaluation import (
    EvalSample,
    SampleOutcome,
    accuracy_by_level,
    as_denoiser,
    evaluate_pipeline,
    identity_denoiser,
    noisy_copy,
    run_level,
)
from .report_io import (
    ABLATION_COLUMNS,
    DENOISER_LOG_COLUMNS,
    METRIC_COLUMNS,
    RECOGNIZER_LOG_COLUMNS,
    read_metric_csv,
    write_ablation_report,
    write_csv,
    write_json,
    write_metric_report,
    write_training_log,
)

__all__ = [
    "SpatialGridIndex",
    "chamfer",
    "directed_chamfer",
    "TriangleMesh",
    "load_off",
    "save_off",
    "point_to_mesh",
    "distances_to_mesh",
    "closest_points_on_triangles",
    "accuracy",
    "EvalSample",
    "SampleOutcome",
    "evaluate_pipeline",
    "accuracy_by_level",
    "as_denoiser",
    "identity_denoiser",
    "noisy_copy",
    "run_level",
    "METRIC_COLUMNS",
    "ABLATION_COLUMNS",
    "RECOGNIZER_LOG_COLUMNS",
    "DENOISER_LOG_COLUMNS",
    "write_csv",
    "write_json",
    "write_metric_report",
    "write_ablation_report",
    "write_training_log",
    "read_metric_csv",
]
