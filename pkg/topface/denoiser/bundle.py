"""The full set of denoiser networks and their checkpoint layout."""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Union

import numpy as np

from common.errors import StateError
from topface.projection import PLANE_ORDER, Axis
from topface.schemas import DenoiserTrainingConfig
from topface.tensor import Module, Parameter, load_checkpoint, save_modules

from .discriminators import RecognitionFeatureDiscriminator, VisualAppearanceDiscriminator
from .generator import GeneratorNet

RFD_PREFIX = "rfd/"


def generator_prefix(axis: Axis) -> str:
    return f"gen.{Axis(axis).value}/"


def vad_prefix(axis: Axis) -> str:
    return f"vad.{Axis(axis).value}/"


class DenoiserBundle:
    """Three generators, three VADs and one RFD; planes in Z, X, Y order."""

    def __init__(self, config: DenoiserTrainingConfig, feature_width: int):
        self.config = config
        self.feature_width = int(feature_width)
        rng = np.random.default_rng([config.seed, 2])
        self.generators: Dict[Axis, GeneratorNet] = {
            axis: GeneratorNet(config.channels, rng, config.value_scale) for axis in PLANE_ORDER
        }
        self.vads: Dict[Axis, VisualAppearanceDiscriminator] = {
            axis: VisualAppearanceDiscriminator(config.resolution, config.vad_channels, rng, config.value_scale)
            for axis in PLANE_ORDER
        }
        self.rfd = RecognitionFeatureDiscriminator(self.feature_width, config.rfd_widths, rng)

    def generator_parameters(self) -> List[Parameter]:
        return [p for axis in PLANE_ORDER for p in self.generators[axis].parameters()]

    def discriminator_parameters(self) -> List[Parameter]:
        params = [p for axis in PLANE_ORDER for p in self.vads[axis].parameters()]
        return params + self.rfd.parameters()

    def modules(self) -> Dict[str, Module]:
        named: Dict[str, Module] = {}
        for axis in PLANE_ORDER:
            named[generator_prefix(axis)] = self.generators[axis]
        for axis in PLANE_ORDER:
            named[vad_prefix(axis)] = self.vads[axis]
        named[RFD_PREFIX] = self.rfd
        return named

    def state_dict(self) -> Dict[str, np.ndarray]:
        state: Dict[str, np.ndarray] = {}
        for prefix, module in self.modules().items():
            state.update(module.state_dict(prefix))
        return state

    def save(self, path: Union[str, Path]) -> None:
        save_modules(self.modules(), path)

    @classmethod
    def load(cls, path: Union[str, Path], config: DenoiserTrainingConfig) -> "DenoiserBundle":
        if not Path(path).is_file():
            raise StateError(f"denoiser checkpoint not found: {path}", stage="denoiser")
        arrays = load_checkpoint(path)
        key = RFD_PREFIX + "layers.0.weight"
        if key not in arrays:
            raise StateError(f"{path} holds no RFD weights", stage="denoiser")
        bundle = cls(config, feature_width=int(arrays[key].shape[1]))
        for prefix, module in bundle.modules().items():
            try:
                module.load_state_dict(arrays, prefix=prefix)
            except StateError as exc:
                raise StateError(f"{path}: {exc}", stage="denoiser") from exc
        return bundle
