"""Noise → denoise → recognize evaluation per noise level."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import partial
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from common.concurrency import map_ordered
from common.errors import ArgumentError, StateError
from topface.denoiser import DenoiserBundle, denoise
from topface.pointcloud import NoiseSpec, PointCloud, add_gaussian_noise, derive_seed, level_key
from topface.recognizer import RecognizerNet, classify
from topface.schemas import LevelMetrics, MetricReport, Setting

from .accuracy import accuracy
from .chamfer import chamfer
from .mesh import TriangleMesh
from .point_to_mesh import point_to_mesh

logger = logging.getLogger(__name__)

Denoiser = Callable[[PointCloud], PointCloud]


def identity_denoiser(pc: PointCloud) -> PointCloud:
    return pc


@dataclass(frozen=True)
class EvalSample:
    """A labelled clean test cloud and its reference surface."""

    clean: PointCloud
    mesh: Optional[TriangleMesh]
    sample_index: int

    @property
    def label(self) -> int:
        return int(self.clean.identity)


@dataclass(frozen=True)
class SampleOutcome:
    noisy_prediction: int
    prediction: int
    cd: float = 0.0
    p2m: float = 0.0
    noisy_cd: float = 0.0
    noisy_p2m: float = 0.0


def as_denoiser(denoiser: Union[DenoiserBundle, Denoiser, None]) -> Denoiser:
    if denoiser is None:
        raise StateError("no denoiser weights available", stage="denoiser")
    if isinstance(denoiser, DenoiserBundle):
        return partial(denoise, bundle=denoiser)
    return denoiser


def noisy_copy(sample: EvalSample, sigma2: float, seed: int) -> PointCloud:
    """The sample's clean cloud with the level's fixed noise draw."""
    spec = NoiseSpec(variance=sigma2, seed=derive_seed(seed, level_key(sigma2), sample.sample_index))
    return add_gaussian_noise(sample.clean, spec)


def _run_sample(
    sample: EvalSample,
    denoise_fn: Denoiser,
    recognizer: RecognizerNet,
    sigma2: float,
    seed: int,
    point_budget: int,
    geometry: bool,
) -> SampleOutcome:
    noisy = noisy_copy(sample, sigma2, seed)
    denoised = denoise_fn(noisy)
    outcome = dict(
        noisy_prediction=classify(recognizer, noisy, point_budget, seed),
        prediction=classify(recognizer, denoised, point_budget, seed),
    )
    if geometry:
        if sample.mesh is None:
            raise StateError(f"sample {sample.sample_index} has no reference mesh", stage="synth")
        outcome.update(
            cd=chamfer(denoised, sample.clean),
            p2m=point_to_mesh(denoised, sample.mesh),
            noisy_cd=chamfer(noisy, sample.clean),
            noisy_p2m=point_to_mesh(noisy, sample.mesh),
        )
    return SampleOutcome(**outcome)


def run_level(
    samples: Sequence[EvalSample],
    denoise_fn: Denoiser,
    recognizer: RecognizerNet,
    sigma2: float,
    seed: int,
    point_budget: int,
    geometry: bool = True,
    workers: int = 1,
) -> List[SampleOutcome]:
    """Outcomes in sample order, whatever order the workers finish in."""
    task = partial(
        _run_sample,
        denoise_fn=denoise_fn,
        recognizer=recognizer,
        sigma2=sigma2,
        seed=seed,
        point_budget=point_budget,
        geometry=geometry,
    )
    return map_ordered(task, samples, workers)


def _check_inputs(samples: Sequence[EvalSample], recognizer: Optional[RecognizerNet], levels: Sequence[float]) -> List[float]:
    if recognizer is None:
        raise StateError("no recognizer weights available", stage="recognizer")
    if not samples:
        raise ArgumentError("evaluation set is empty")
    if not levels:
        raise ArgumentError("at least one noise level is required")
    if any(level < 0 for level in levels):
        raise ArgumentError(f"noise levels must be >= 0, got {list(levels)}")
    return sorted({float(level) for level in levels})


def evaluate_pipeline(
    samples: Sequence[EvalSample],
    denoiser: Union[DenoiserBundle, Denoiser, None],
    recognizer: Optional[RecognizerNet],
    noise_levels: Sequence[float],
    seed: int = 0,
    point_budget: int = 512,
    setting: Setting = Setting.RANDOM,
    recognizer_tag: str = "base",
    workers: int = 1,
) -> MetricReport:
    """Accuracy before/after denoising and CD/P2M of noisy and denoised clouds per σ²."""
    levels = _check_inputs(samples, recognizer, noise_levels)
    denoise_fn = as_denoiser(denoiser)
    truth = [s.label for s in samples]
    rows: List[LevelMetrics] = []
    for sigma2 in levels:
        outcomes = run_level(samples, denoise_fn, recognizer, sigma2, seed, point_budget, True, workers)
        noisy_acc = accuracy([o.noisy_prediction for o in outcomes], truth)
        acc = accuracy([o.prediction for o in outcomes], truth)
        row = LevelMetrics(
            sigma2=sigma2,
            noisy_accuracy=noisy_acc,
            accuracy=acc,
            gain=acc - noisy_acc,
            cd=float(np.mean([o.cd for o in outcomes])),
            p2m=float(np.mean([o.p2m for o in outcomes])),
            noisy_cd=float(np.mean([o.noisy_cd for o in outcomes])),
            noisy_p2m=float(np.mean([o.noisy_p2m for o in outcomes])),
        )
        rows.append(row)
        logger.info(
            "EVAL_LEVEL sigma2=%g noisy_acc=%.3f acc=%.3f cd=%.4f noisy_cd=%.4f p2m=%.4f",
            sigma2,
            noisy_acc,
            acc,
            row.cd,
            row.noisy_cd,
            row.p2m,
        )
    best = max(rows, key=lambda r: r.gain)
    return MetricReport(
        setting=setting,
        seed=seed,
        recognizer=recognizer_tag,
        levels=rows,
        max_gain=best.gain,
        max_gain_sigma2=best.sigma2,
    )


def accuracy_by_level(
    samples: Sequence[EvalSample],
    denoiser: Union[DenoiserBundle, Denoiser, None],
    recognizer: Optional[RecognizerNet],
    noise_levels: Sequence[float],
    seed: int = 0,
    point_budget: int = 512,
    workers: int = 1,
) -> Dict[float, float]:
    """Denoised recognition accuracy per σ², without the geometry metrics."""
    levels = _check_inputs(samples, recognizer, noise_levels)
    denoise_fn = as_denoiser(denoiser)
    truth = [s.label for s in samples]
    result: Dict[float, float] = {}
    for sigma2 in levels:
        outcomes = run_level(samples, denoise_fn, recognizer, sigma2, seed, point_budget, False, workers)
        result[sigma2] = accuracy([o.prediction for o in outcomes], truth)
    return result
