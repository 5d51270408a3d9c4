"""Alternating discriminator/generator training of the per-plane denoiser.

For every batch the three VADs and the RFD are updated first on
l_D = λ1·l_r + λ2·l_v computed from detached generator outputs; the three
generators are then updated on λ1·adv_r + λ2·adv_v + μ·recon. Planes are
processed in Z, X, Y order. The recognizer stays frozen: its gradients are
discarded after every generator step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from common.errors import ArgumentError, DimensionError
from topface.pointcloud import PointCloud
from topface.projection import (
    GRAY_COORD,
    PLANE_ORDER,
    Axis,
    PlaneImage,
    aggregate_onto,
    combine_tensor,
    plane_to_tensor,
    project,
    unproject_tensor,
)
from topface.recognizer import RecognizerNet, subsample_indices
from topface.schemas import DenoiserTrainingConfig
from topface.tensor import Adam, Tensor, concat, masked_l1, no_grad

from .bundle import DenoiserBundle
from .losses import LossWeights, discriminator_loss, generator_loss, rfd_loss, vad_loss

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DenoisingPair:
    """Index-aligned noisy and clean versions of one cloud."""

    noisy: PointCloud
    clean: PointCloud

    def __post_init__(self) -> None:
        if self.noisy.n_points != self.clean.n_points:
            raise DimensionError(
                f"noisy ({self.noisy.n_points}) and clean ({self.clean.n_points}) clouds must be index-aligned"
            )


@dataclass
class _PlaneSample:
    plane: PlaneImage
    image: Tensor
    target: np.ndarray
    real_image: Tensor
    occupancy: np.ndarray
    fill_offset: np.ndarray


@dataclass
class _PairSample:
    planes: Dict[Axis, _PlaneSample]
    subset: np.ndarray
    clean_features: Optional[np.ndarray]


@dataclass(frozen=True)
class DenoiserEpoch:
    epoch: int
    l_d: float
    l_v: float
    l_r: float
    generator_loss: float
    recon: float
    holdout_recon: float


@dataclass
class DenoiserTrainingResult:
    bundle: DenoiserBundle
    log: List[DenoiserEpoch] = field(default_factory=list)
    holdout_size: int = 0


def _prepare(
    pair: DenoisingPair,
    config: DenoiserTrainingConfig,
    recognizer: Optional[RecognizerNet],
    subset_seed: int,
) -> _PairSample:
    projection = project(pair.noisy, (config.resolution, config.resolution))
    planes: Dict[Axis, _PlaneSample] = {}
    for axis in PLANE_ORDER:
        plane = projection.plane(axis)
        target = aggregate_onto(plane, pair.clean.points[:, GRAY_COORD[axis]])
        occupancy = plane.occupancy.astype(np.float64)
        planes[axis] = _PlaneSample(
            plane=plane,
            image=plane_to_tensor(plane),
            target=target,
            real_image=Tensor(np.stack([target, occupancy])),
            occupancy=occupancy,
            fill_offset=plane.fill_value * (1.0 - occupancy),
        )
    subset = subsample_indices(pair.noisy.n_points, config.point_budget, subset_seed)
    clean_features = None
    if recognizer is not None:
        with no_grad():
            clean_features = recognizer.trace(pair.clean.points[subset], training=False).global_features.values
    return _PairSample(planes=planes, subset=subset, clean_features=clean_features)


def _fake_image(sample: _PlaneSample, output: Tensor) -> Tensor:
    """Generator output with empty cells forced to the fill value, plus occupancy."""
    h, w = sample.plane.resolution
    gray = output.reshape(h, w) * sample.occupancy + sample.fill_offset
    return concat([gray.reshape(1, h, w), Tensor(sample.occupancy[None])], axis=0)


def _recon(sample: _PlaneSample, output: Tensor) -> Tensor:
    h, w = sample.plane.resolution
    return masked_l1(output.reshape(h, w), sample.target, sample.plane.occupancy)


def _denoised_features(
    sample: _PairSample, outputs: Dict[Axis, Tensor], recognizer: RecognizerNet
) -> Tensor:
    vals = {axis: unproject_tensor(sample.planes[axis].plane, outputs[axis]) for axis in PLANE_ORDER}
    points = combine_tensor(vals[Axis.X], vals[Axis.Y], vals[Axis.Z]).take_rows(sample.subset)
    return recognizer.trace(points, training=False).global_features


def holdout_recon(bundle: DenoiserBundle, samples: Sequence[_PairSample]) -> float:
    """Mean masked L1 of the generators over held-out pairs and planes."""
    values = []
    with no_grad():
        for sample in samples:
            for axis in PLANE_ORDER:
                out = bundle.generators[axis](sample.planes[axis].image)
                values.append(_recon(sample.planes[axis], out).item())
    return float(np.mean(values))


def _split_holdout(n_pairs: int, fraction: float) -> int:
    if n_pairs < 2:
        return 0
    return min(n_pairs - 1, max(1, int(np.floor(fraction * n_pairs))))


def train_denoiser(
    pairs: Sequence[DenoisingPair],
    recognizer: RecognizerNet,
    config: DenoiserTrainingConfig,
    bundle: Optional[DenoiserBundle] = None,
) -> DenoiserTrainingResult:
    """Train the generators and discriminators; the recognizer is only read.

    The last ``holdout_fraction`` of pairs (at least one when there are two or
    more) is never trained on and reports the held-out reconstruction; a
    single pair serves as its own hold-out.
    """
    if not pairs:
        raise ArgumentError("denoiser training set is empty")
    weights = LossWeights(config.lambda1, config.lambda2)
    use_rfd, use_vad = weights.lambda1 > 0, weights.lambda2 > 0
    bundle = bundle or DenoiserBundle(config, feature_width=recognizer.global_width)

    samples = [
        _prepare(p, config, recognizer if use_rfd else None, subset_seed=config.seed + i)
        for i, p in enumerate(pairs)
    ]
    n_hold = _split_holdout(len(samples), config.holdout_fraction)
    train = samples[: len(samples) - n_hold]
    held = samples[len(samples) - n_hold :] if n_hold else train

    gen_opt = Adam(bundle.generator_parameters(), lr=config.lr, beta1=config.beta1, beta2=config.beta2)
    disc_opt = Adam(bundle.discriminator_parameters(), lr=config.lr, beta1=config.beta1, beta2=config.beta2)
    rng = np.random.default_rng([config.seed, 3])

    result = DenoiserTrainingResult(bundle=bundle, holdout_size=n_hold)
    start_recon = holdout_recon(bundle, train)
    start_holdout = holdout_recon(bundle, held)
    result.log.append(DenoiserEpoch(0, np.nan, np.nan, np.nan, np.nan, start_recon, start_holdout))
    logger.info("DENOISER_EPOCH epoch=0 recon=%.4f holdout_recon=%.4f", start_recon, start_holdout)

    for epoch in range(1, config.epochs + 1):
        sums = dict(l_d=0.0, l_v=0.0, l_r=0.0, generator_loss=0.0, recon=0.0)
        order = rng.permutation(len(train))
        for start in range(0, len(order), config.batch):
            batch = [train[i] for i in order[start : start + config.batch]]
            stats = _train_batch(bundle, recognizer, batch, weights, config.mu, use_rfd, use_vad, gen_opt, disc_opt)
            for key, value in stats.items():
                sums[key] += value * len(batch)
            logger.debug("DENOISER_BATCH epoch=%d start=%d l_d=%.4f", epoch, start, stats["l_d"])
        means = {key: value / len(train) for key, value in sums.items()}
        held_value = holdout_recon(bundle, held)
        result.log.append(DenoiserEpoch(epoch=epoch, holdout_recon=held_value, **means))
        logger.info(
            "DENOISER_EPOCH epoch=%d l_d=%.4f g=%.4f recon=%.4f holdout_recon=%.4f",
            epoch,
            means["l_d"],
            means["generator_loss"],
            means["recon"],
            held_value,
        )
    return result


def _train_batch(
    bundle: DenoiserBundle,
    recognizer: RecognizerNet,
    batch: Sequence[_PairSample],
    weights: LossWeights,
    mu: float,
    use_rfd: bool,
    use_vad: bool,
    gen_opt: Adam,
    disc_opt: Adam,
) -> Dict[str, float]:
    scale = 1.0 / len(batch)
    totals = dict(l_d=0.0, l_v=0.0, l_r=0.0, generator_loss=0.0, recon=0.0)

    # discriminators on detached generator outputs
    disc_opt.zero_grad()
    for sample in batch:
        with no_grad():
            outputs = {a: bundle.generators[a](sample.planes[a].image) for a in PLANE_ORDER}
            fakes = {a: _fake_image(sample.planes[a], outputs[a]) for a in PLANE_ORDER}
            denoised = _denoised_features(sample, outputs, recognizer) if use_rfd else None
        l_v = l_r = 0.0
        if use_vad:
            l_v = sum(
                (vad_loss(bundle.vads[a], sample.planes[a].real_image, fakes[a])[0] for a in PLANE_ORDER),
                Tensor(0.0),
            ) * (1.0 / len(PLANE_ORDER))
        if use_rfd:
            l_r = rfd_loss(bundle.rfd, sample.clean_features, denoised.values)[0]
        l_d = discriminator_loss(l_r, l_v, weights)
        if isinstance(l_d, Tensor) and l_d.requires_grad:
            l_d.backward()
        totals["l_d"] += float(Tensor.lift(l_d).item()) * scale
        totals["l_v"] += float(Tensor.lift(l_v).item()) * scale
        totals["l_r"] += float(Tensor.lift(l_r).item()) * scale
    if use_vad or use_rfd:
        disc_opt.step(scale=scale)

    # generators against the updated discriminators
    gen_opt.zero_grad()
    for sample in batch:
        outputs = {a: bundle.generators[a](sample.planes[a].image) for a in PLANE_ORDER}
        recon = sum((_recon(sample.planes[a], outputs[a]) for a in PLANE_ORDER), Tensor(0.0)) * (
            1.0 / len(PLANE_ORDER)
        )
        adv_v = adv_r = 0.0
        if use_vad:
            adv_v = sum(
                (
                    vad_loss(bundle.vads[a], sample.planes[a].real_image, _fake_image(sample.planes[a], outputs[a]))[1]
                    for a in PLANE_ORDER
                ),
                Tensor(0.0),
            ) * (1.0 / len(PLANE_ORDER))
        if use_rfd:
            denoised = _denoised_features(sample, outputs, recognizer)
            adv_r = rfd_loss(bundle.rfd, sample.clean_features, denoised)[1]
        g_loss = generator_loss(adv_v, adv_r, recon, weights, mu)
        g_loss.backward()
        totals["generator_loss"] += g_loss.item() * scale
        totals["recon"] += recon.item() * scale
    gen_opt.step(scale=scale)
    disc_opt.zero_grad()
    recognizer.zero_grads()
    return totals
