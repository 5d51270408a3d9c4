"""UNet-like per-plane generator.

Encoder stage: conv 5×5 → ReLU → (skip) → max-pool ×2.
Decoder stage: upsample ×2 → concat skip → conv 5×5 → ReLU.
The raw 2-channel input joins the last decoder output before the final
conv 5×5 → 1 channel. Gray values enter divided by ``value_scale`` and
leave multiplied by it.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from common.errors import DimensionError
from topface.tensor import Conv2d, Module, ModuleList, Tensor, concat, max_pool2d, relu, upsample_nearest2d

KERNEL = 5
PAD = KERNEL // 2
INPUT_CHANNELS = 2


class GeneratorNet(Module):
    def __init__(self, channels: Sequence[int], rng: np.random.Generator, value_scale: float = 50.0):
        super().__init__()
        self.channels = tuple(channels)
        self.value_scale = float(value_scale)

        encoders, in_ch = [], INPUT_CHANNELS
        for out_ch in self.channels:
            encoders.append(Conv2d(in_ch, out_ch, KERNEL, rng, padding=PAD))
            in_ch = out_ch
        self.encoders = ModuleList(encoders)

        decoders, cur = [], self.channels[-1]
        for s in reversed(range(len(self.channels))):
            out_ch = self.channels[s - 1] if s > 0 else self.channels[0]
            decoders.append(Conv2d(cur + self.channels[s], out_ch, KERNEL, rng, padding=PAD))
            cur = out_ch
        self.decoders = ModuleList(decoders)
        self.output = Conv2d(cur + INPUT_CHANNELS, 1, KERNEL, rng, padding=PAD)

    @property
    def pool_factor(self) -> int:
        return 2 ** len(self.channels)

    def __call__(self, image: Tensor) -> Tensor:
        return generator_forward(self, image)


def generator_forward(g: GeneratorNet, image: Tensor) -> Tensor:
    """(2, H, W) plane image to a (1, H, W) denoised gray image."""
    if image.ndim != 3 or image.shape[0] != INPUT_CHANNELS:
        raise DimensionError(f"generator expects a (2, H, W) image, got {image.shape}")
    _, h, w = image.shape
    if h % g.pool_factor or w % g.pool_factor:
        raise DimensionError(f"image {h}x{w} is not divisible by the pooling factor {g.pool_factor}")

    scale = np.array([1.0 / g.value_scale, 1.0])[:, None, None]
    x_in = image * scale
    x, skips = x_in, []
    for conv in g.encoders:
        x = relu(conv(x))
        skips.append(x)
        x, _ = max_pool2d(x, 2)
    for conv, skip in zip(g.decoders, reversed(skips)):
        x = upsample_nearest2d(x, 2)
        x = relu(conv(concat([x, skip], axis=0)))
    out = g.output(concat([x, x_in], axis=0))
    return out * g.value_scale
