"""Adversarial and reconstruction losses.

All adversarial terms are the non-saturating logistic form written with
softplus: −log σ(t) = softplus(−t) and −log(1 − σ(t)) = softplus(t).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, TypeVar, Union

import numpy as np

from common.errors import ArgumentError, DimensionError
from topface.tensor import Tensor, softplus

from .discriminators import RecognitionFeatureDiscriminator, VisualAppearanceDiscriminator

Scalar = TypeVar("Scalar", float, Tensor)


@dataclass(frozen=True)
class LossWeights:
    lambda1: float = 0.67
    lambda2: float = 0.33

    def __post_init__(self) -> None:
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ArgumentError(f"loss weights must be >= 0, got ({self.lambda1}, {self.lambda2})")


def gan_losses(real_logit: Tensor, fake_logit: Tensor) -> Tuple[Tensor, Tensor]:
    """(discriminator loss, generator loss) for one real/fake logit pair."""
    disc = softplus(-real_logit).sum() + softplus(fake_logit).sum()
    gen = softplus(-fake_logit).sum()
    return disc, gen


def vad_loss(
    vad: VisualAppearanceDiscriminator,
    real_image: Tensor,
    fake_image: Tensor,
) -> Tuple[Tensor, Tensor]:
    if real_image.shape != fake_image.shape:
        raise DimensionError(f"real {real_image.shape} and fake {fake_image.shape} images differ in shape")
    return gan_losses(vad(real_image), vad(fake_image))


def rfd_loss(
    rfd: RecognitionFeatureDiscriminator,
    clean_features: Union[Tensor, np.ndarray],
    denoised_features: Union[Tensor, np.ndarray],
) -> Tuple[Tensor, Tensor]:
    clean, denoised = Tensor.lift(clean_features), Tensor.lift(denoised_features)
    if clean.size == 0 or denoised.size == 0:
        raise ArgumentError("linked features must be non-empty")
    if clean.shape != denoised.shape:
        raise DimensionError(f"feature widths differ: {clean.shape} vs {denoised.shape}")
    return gan_losses(rfd(clean), rfd(denoised))


def discriminator_loss(l_r: Scalar, l_v: Scalar, w: LossWeights) -> Scalar:
    """l_D = λ1·l_r + λ2·l_v"""
    return w.lambda1 * l_r + w.lambda2 * l_v


def generator_loss(adv_v: Scalar, adv_r: Scalar, recon: Scalar, w: LossWeights, mu: float) -> Scalar:
    """λ1·adv_r + λ2·adv_v + μ·recon"""
    if mu < 0:
        raise ArgumentError(f"reconstruction weight must be >= 0, got {mu}")
    return w.lambda1 * adv_r + w.lambda2 * adv_v + mu * recon
