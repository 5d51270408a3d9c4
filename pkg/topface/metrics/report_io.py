"""CSV and JSON writers for reports and training logs."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

import pandas as pd
from pydantic import BaseModel

from topface.schemas import AblationReport, MetricReport

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FLOAT_FORMAT = "%.10g"
METRIC_COLUMNS = ["sigma2", "noisy_accuracy", "accuracy", "gain", "cd", "p2m", "noisy_cd", "noisy_p2m"]
ABLATION_COLUMNS = ["sigma2", "vad_only", "rfd_only", "full"]
RECOGNIZER_LOG_COLUMNS = ["epoch", "loss", "accuracy"]
DENOISER_LOG_COLUMNS = ["epoch", "l_d", "l_v", "l_r", "generator_loss", "recon", "holdout_recon"]


def write_csv(rows: Iterable[dict], columns: Sequence[str], path: PathLike) -> None:
    frame = pd.DataFrame(list(rows), columns=list(columns))
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("CSV_WRITTEN path=%s rows=%d", path, len(frame))


def write_json(model: BaseModel, path: PathLike) -> None:
    text = json.dumps(model.model_dump(mode="json"), sort_keys=True, indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")


def write_metric_report(report: MetricReport, csv_path: PathLike, json_path: PathLike) -> None:
    rows = sorted((row.model_dump() for row in report.levels), key=lambda r: r["sigma2"])
    write_csv(rows, METRIC_COLUMNS, csv_path)
    write_json(report, json_path)
    logger.info("METRIC_REPORT_WRITTEN csv=%s json=%s levels=%d", csv_path, json_path, len(rows))


def write_ablation_report(report: AblationReport, csv_path: PathLike, json_path: PathLike) -> None:
    rows = sorted((row.model_dump() for row in report.rows), key=lambda r: r["sigma2"])
    write_csv(rows, ABLATION_COLUMNS, csv_path)
    write_json(report, json_path)
    logger.info("ABLATION_REPORT_WRITTEN csv=%s json=%s levels=%d", csv_path, json_path, len(rows))


def write_training_log(records: Sequence, columns: Sequence[str], path: PathLike) -> None:
    """One row per epoch record (dataclass instances or dicts)."""
    rows = [asdict(r) if is_dataclass(r) else dict(r) for r in records]
    write_csv(rows, columns, path)


def read_metric_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path)
