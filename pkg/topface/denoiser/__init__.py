"""Per-plane adversarial denoiser."""

from .generator import GeneratorNet, generator_forward
from .discriminators import RecognitionFeatureDiscriminator, VisualAppearanceDiscriminator
from .losses import LossWeights, discriminator_loss, gan_losses, generator_loss, rfd_loss, vad_loss
from .bundle import DenoiserBundle, generator_prefix, vad_prefix
from .trainer import DenoiserEpoch, DenoiserTrainingResult, DenoisingPair, holdout_recon, train_denoiser
from .inference import denoise, denoise_planes

__all__ = [
    "GeneratorNet",
    "generator_forward",
    "VisualAppearanceDiscriminator",
    "RecognitionFeatureDiscriminator",
    "LossWeights",
    "gan_losses",
    "vad_loss",
    "rfd_loss",
    "discriminator_loss",
    "generator_loss",
    "DenoiserBundle",
    "generator_prefix",
    "vad_prefix",
    "DenoisingPair",
    "DenoiserEpoch",
    "DenoiserTrainingResult",
    "train_denoiser",
    "holdout_recon",
    "denoise",
    "denoise_planes",
]
