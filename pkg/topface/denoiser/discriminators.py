"""Visual appearance (per plane image) and recognition feature discriminators."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from common.errors import ArgumentError, DimensionError
from topface.tensor import Conv2d, Linear, Module, ModuleList, Tensor, leaky_relu

KERNEL = 5
SLOPE = 0.2


def _strided_size(size: int) -> int:
    # conv 5×5, stride 2, padding 2
    return (size + 2 * 2 - KERNEL) // 2 + 1


class VisualAppearanceDiscriminator(Module):
    """Strided conv stack on a (gray, occupancy) image, then a linear logit."""

    def __init__(
        self,
        resolution: int,
        channels: Sequence[int],
        rng: np.random.Generator,
        value_scale: float = 50.0,
    ):
        super().__init__()
        self.resolution = int(resolution)
        self.value_scale = float(value_scale)
        convs, in_ch, size = [], 2, self.resolution
        for out_ch in channels:
            convs.append(Conv2d(in_ch, out_ch, KERNEL, rng, stride=2, padding=2))
            in_ch, size = out_ch, _strided_size(size)
        self.convs = ModuleList(convs)
        self.head = Linear(in_ch * size * size, 1, rng)

    def __call__(self, image: Tensor) -> Tensor:
        if image.shape != (2, self.resolution, self.resolution):
            raise DimensionError(
                f"VAD expects (2, {self.resolution}, {self.resolution}), got {image.shape}"
            )
        x = image * np.array([1.0 / self.value_scale, 1.0])[:, None, None]
        for conv in self.convs:
            x = leaky_relu(conv(x), SLOPE)
        return self.head(x.reshape(x.size))


class RecognitionFeatureDiscriminator(Module):
    """MLP on the recognizer's global linked-feature vector."""

    def __init__(self, feature_width: int, widths: Sequence[int], rng: np.random.Generator):
        super().__init__()
        if feature_width < 1:
            raise ArgumentError(f"feature width must be >= 1, got {feature_width}")
        self.feature_width = int(feature_width)
        layers, in_w = [], self.feature_width
        for w in widths:
            layers.append(Linear(in_w, w, rng))
            in_w = w
        self.layers = ModuleList(layers)
        self.head = Linear(in_w, 1, rng)

    def __call__(self, features: Tensor) -> Tensor:
        if features.shape != (self.feature_width,):
            raise DimensionError(f"RFD expects ({self.feature_width},) features, got {features.shape}")
        x = features
        for layer in self.layers:
            x = leaky_relu(layer(x), SLOPE)
        return self.head(x)
