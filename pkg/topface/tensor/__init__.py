"""Minimal reverse-mode differentiation engine (float64, single-sample images)."""

from .tensor import Parameter, Tensor, concat, is_grad_enabled, no_grad
from .functional import (
    conv2d,
    dropout,
    leaky_relu,
    linear,
    masked_l1,
    max_pool2d,
    relu,
    softmax_cross_entropy,
    softplus,
    upsample_nearest2d,
)
from .module import Conv2d, Linear, Module, ModuleList
from .optim import Adam, AdamState, adam_step
from .checkpoint import load_checkpoint, save_checkpoint, save_modules

__all__ = [
    "Tensor",
    "Parameter",
    "concat",
    "no_grad",
    "is_grad_enabled",
    "conv2d",
    "max_pool2d",
    "upsample_nearest2d",
    "relu",
    "leaky_relu",
    "softplus",
    "linear",
    "dropout",
    "softmax_cross_entropy",
    "masked_l1",
    "Module",
    "ModuleList",
    "Conv2d",
    "Linear",
    "Adam",
    "AdamState",
    "adam_step",
    "save_checkpoint",
    "load_checkpoint",
    "save_modules",
]
