"""Adam with bias-corrected first/second moments."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from common.errors import ArgumentError, DimensionError

from .tensor import Parameter


@dataclass
class AdamState:
    step: int = 0
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: Sequence[Parameter]) -> "AdamState":
        return cls(
            step=0,
            m=[np.zeros_like(p.values) for p in params],
            v=[np.zeros_like(p.values) for p in params],
        )


def adam_step(
    params: Sequence[Parameter],
    grads: Sequence[np.ndarray],
    lr: float,
    beta1: float,
    beta2: float,
    eps: float,
    state: AdamState,
) -> None:
    """One in-place Adam update of ``params``."""
    if lr <= 0:
        raise ArgumentError(f"learning rate must be > 0, got {lr}")
    if not (0.0 <= beta1 < 1.0 and 0.0 <= beta2 < 1.0):
        raise ArgumentError(f"betas must lie in [0, 1), got ({beta1}, {beta2})")
    if len(params) != len(grads) or len(state.m) != len(params):
        raise DimensionError(
            f"adam_step got {len(params)} params, {len(grads)} grads, {len(state.m)} state slots"
        )

    state.step += 1
    bias1 = 1.0 - beta1**state.step
    bias2 = 1.0 - beta2**state.step
    for i, (param, grad) in enumerate(zip(params, grads)):
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad * grad
        m_hat = state.m[i] / bias1
        v_hat = state.v[i] / bias2
        param.values -= lr * m_hat / (np.sqrt(v_hat) + eps)


class Adam:
    """Optimizer bound to a fixed parameter list."""

    def __init__(
        self,
        params: Sequence[Parameter],
        lr: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        if lr <= 0:
            raise ArgumentError(f"learning rate must be > 0, got {lr}")
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state = AdamState.for_params(self.params)

    def step(self, scale: float = 1.0) -> None:
        """Apply one update; ``scale`` multiplies gradients (batch averaging)."""
        grads = [p.grad * scale for p in self.params]
        adam_step(self.params, grads, self.lr, self.beta1, self.beta2, self.eps, self.state)

    def zero_grad(self) -> None:
        for param in self.params:
            param.zero_grad()
