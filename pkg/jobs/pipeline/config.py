"""Run configuration: JSON file, then command-line overrides, then validation."""

from __future__ import annotations

import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from common.errors import ConfigError
from topface.schemas import DEFAULT_NOISE_LEVELS, DenoiserTrainingConfig, RecognizerTrainingConfig, Setting


class SettingChoice(str, Enum):
    NEUTRAL = "neutral"
    RANDOM = "random"
    BOTH = "both"


class RunConfig(BaseModel):
    """Everything one command needs; unknown keys are rejected."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    dataset_dir: str = "data/synth"
    output_dir: str = "runs/default"
    setting: SettingChoice = SettingChoice.RANDOM
    noise_levels: Tuple[float, ...] = DEFAULT_NOISE_LEVELS

    # synthesis
    identities: int = Field(20, ge=2)
    samples_per_identity: int = Field(10, ge=2)
    neutral_per_identity: int = Field(6, ge=0)
    n_points: int = Field(1024, ge=64)
    mesh_grid: int = Field(64, ge=2)
    expression_amplitude: float = Field(1.0, ge=0)

    # training
    resolution: int = Field(64, ge=8)
    k: int = Field(16, ge=1)
    lambda1: float = Field(0.67, ge=0)
    lambda2: float = Field(0.33, ge=0)
    mu: float = Field(10.0, ge=0)
    recognizer_epochs: int = Field(30, ge=0)
    denoiser_epochs: int = Field(5, ge=0)
    finetune_epochs: int = Field(5, ge=0)
    batch: int = Field(8, ge=1)
    lr: float = Field(1e-3, gt=0)
    point_budget: int = Field(512, ge=2)
    seed: int = Field(0, ge=0)

    workers: Optional[int] = Field(None, ge=1)

    @field_validator("noise_levels")
    @classmethod
    def levels_non_negative(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if not v:
            raise ValueError("at least one noise level is required")
        if any(level < 0 for level in v):
            raise ValueError(f"noise levels must be >= 0, got {list(v)}")
        return tuple(sorted(set(float(level) for level in v)))

    def settings(self) -> List[Setting]:
        if self.setting == SettingChoice.BOTH:
            return [Setting.NEUTRAL, Setting.RANDOM]
        return [Setting(self.setting.value)]

    def single_setting(self) -> Setting:
        if self.setting == SettingChoice.BOTH:
            raise ConfigError("this command needs --setting neutral or random, not both")
        return Setting(self.setting.value)

    def recognizer_config(self, epochs: Optional[int] = None) -> RecognizerTrainingConfig:
        return RecognizerTrainingConfig(
            epochs=self.recognizer_epochs if epochs is None else epochs,
            batch=self.batch,
            lr=self.lr,
            k=self.k,
            point_budget=self.point_budget,
            seed=self.seed,
        )

    def denoiser_config(self, lambda1: Optional[float] = None, lambda2: Optional[float] = None) -> DenoiserTrainingConfig:
        return DenoiserTrainingConfig(
            epochs=self.denoiser_epochs,
            batch=self.batch,
            lr=self.lr,
            lambda1=self.lambda1 if lambda1 is None else lambda1,
            lambda2=self.lambda2 if lambda2 is None else lambda2,
            mu=self.mu,
            resolution=self.resolution,
            point_budget=self.point_budget,
            seed=self.seed,
        )


def parse_levels(text: str) -> List[float]:
    """``"4,8,16"`` → [4.0, 8.0, 16.0]."""
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"noise levels must be comma-separated numbers, got {text!r}") from exc


def _read_json(path: Path) -> Dict[str, Any]:
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return data


def _describe(exc: ValidationError) -> str:
    first = exc.errors()[0]
    where = ".".join(str(p) for p in first.get("loc", ())) or "config"
    return f"{where}: {first['msg']}"


def load_run_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Build a RunConfig from an optional JSON file plus non-None overrides.

    The per-stage training configurations are derived once here so that an
    invalid combination (e.g. a resolution the generator cannot pool) fails
    before any command touches the filesystem.
    """
    data: Dict[str, Any] = _read_json(Path(path)) if path else {}
    data.update({key: value for key, value in (overrides or {}).items() if value is not None})
    try:
        cfg = RunConfig.model_validate(data)
        cfg.recognizer_config()
        cfg.denoiser_config()
    except ValidationError as exc:
        raise ConfigError(f"invalid run configuration: {_describe(exc)}") from exc
    if cfg.neutral_per_identity > cfg.samples_per_identity:
        raise ConfigError(
            f"neutral_per_identity ({cfg.neutral_per_identity}) exceeds samples_per_identity "
            f"({cfg.samples_per_identity})"
        )
    return cfg
