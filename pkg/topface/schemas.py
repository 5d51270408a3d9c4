from __future__ import annotations

from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from topface.pointcloud import ExpressionTag

DEFAULT_NOISE_LEVELS: Tuple[float, ...] = (4.0, 8.0, 16.0, 32.0, 64.0)


class Setting(str, Enum):
    NEUTRAL = "neutral"
    RANDOM = "random"


class Split(str, Enum):
    TRAIN = "train"
    TEST = "test"


# ----------------------------------------------------------------------
# Training configuration
# ----------------------------------------------------------------------


class RecognizerTrainingConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    epochs: int = Field(30, ge=0)
    batch: int = Field(8, ge=1)
    lr: float = Field(1e-3, gt=0)
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    k: int = Field(16, ge=1)
    widths: Tuple[int, ...] = (64, 64, 128, 256)
    global_width: int = Field(256, ge=1)
    dropout: float = Field(0.5, ge=0, lt=1)
    coordinate_scale: float = Field(50.0, gt=0)
    point_budget: int = Field(512, ge=2)
    seed: int = Field(0, ge=0)

    @field_validator("widths")
    @classmethod
    def widths_non_decreasing(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if not v:
            raise ValueError("at least one edge-conv layer is required")
        if any(w < 1 for w in v):
            raise ValueError("layer widths must be positive")
        if any(b < a for a, b in zip(v, v[1:])):
            raise ValueError(f"layer widths must be non-decreasing, got {v}")
        return v

    @model_validator(mode="after")
    def budget_exceeds_k(self) -> "RecognizerTrainingConfig":
        if self.point_budget <= self.k:
            raise ValueError(f"point_budget ({self.point_budget}) must exceed k ({self.k})")
        return self


class DenoiserTrainingConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    epochs: int = Field(5, ge=0)
    batch: int = Field(8, ge=1)
    lr: float = Field(1e-3, gt=0)
    beta1: float = Field(0.5, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    lambda1: float = Field(0.67, ge=0)
    lambda2: float = Field(0.33, ge=0)
    mu: float = Field(10.0, ge=0)
    resolution: int = Field(64, ge=8)
    channels: Tuple[int, ...] = (16, 32, 64)
    vad_channels: Tuple[int, ...] = (16, 32, 64)
    rfd_widths: Tuple[int, ...] = (256, 64)
    value_scale: float = Field(50.0, gt=0)
    point_budget: int = Field(512, ge=2)
    holdout_fraction: float = Field(0.1, gt=0, lt=1)
    seed: int = Field(0, ge=0)

    @field_validator("channels", "vad_channels", "rfd_widths")
    @classmethod
    def positive_widths(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if not v or any(c < 1 for c in v):
            raise ValueError(f"channel plan must be non-empty and positive, got {v}")
        return v

    @model_validator(mode="after")
    def resolution_poolable(self) -> "DenoiserTrainingConfig":
        factor = 2 ** len(self.channels)
        if self.resolution % factor:
            raise ValueError(
                f"resolution {self.resolution} must be divisible by {factor} for {len(self.channels)} pooling stages"
            )
        return self


# ----------------------------------------------------------------------
# Dataset manifest
# ----------------------------------------------------------------------


class IdentityEntry(BaseModel):
    id: int = Field(..., ge=0)
    seed: int = Field(..., ge=0)
    mesh_path: str


class SampleEntry(BaseModel):
    path: str
    identity: int = Field(..., ge=0)
    sample_index: int = Field(..., ge=0)
    sample_seed: int = Field(..., ge=0)
    expression_tag: ExpressionTag
    expression_amplitude: float = Field(..., ge=0)
    split: Split


class DatasetManifest(BaseModel):
    setting: Setting
    seed: int = Field(..., ge=0)
    n_points: int = Field(..., ge=1)
    mesh_grid: int = Field(..., ge=2)
    identities: List[IdentityEntry] = Field(default_factory=list)
    samples: List[SampleEntry] = Field(default_factory=list)

    def split(self, which: Split) -> List[SampleEntry]:
        return [s for s in self.samples if s.split == which]

    @property
    def n_identities(self) -> int:
        return len(self.identities)


# ----------------------------------------------------------------------
# Reports
# ----------------------------------------------------------------------


class LevelMetrics(BaseModel):
    sigma2: float = Field(..., ge=0)
    noisy_accuracy: float = Field(..., ge=0, le=1)
    accuracy: float = Field(..., ge=0, le=1)
    gain: float
    cd: float = Field(..., ge=0)
    p2m: float = Field(..., ge=0)
    noisy_cd: float = Field(..., ge=0)
    noisy_p2m: float = Field(..., ge=0)


class MetricReport(BaseModel):
    setting: Setting
    seed: int
    recognizer: str = "base"
    levels: List[LevelMetrics] = Field(default_factory=list)
    max_gain: Optional[float] = None
    max_gain_sigma2: Optional[float] = None

    def by_level(self) -> Dict[float, LevelMetrics]:
        return {row.sigma2: row for row in self.levels}


class AblationRow(BaseModel):
    sigma2: float = Field(..., ge=0)
    vad_only: float = Field(..., ge=0, le=1)
    rfd_only: float = Field(..., ge=0, le=1)
    full: float = Field(..., ge=0, le=1)


class AblationReport(BaseModel):
    setting: Setting
    seed: int
    rows: List[AblationRow] = Field(default_factory=list)
