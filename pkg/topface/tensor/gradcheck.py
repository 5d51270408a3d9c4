"""Central finite-difference gradient checking."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor


def numerical_gradient(f: Callable[[], float], array: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Central differences of ``f`` w.r.t. every entry of ``array`` (perturbed in place)."""
    grad = np.zeros_like(array)
    flat = array.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        plus = f()
        flat[i] = original - h
        minus = f()
        flat[i] = original
        out[i] = (plus - minus) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-3) -> float:
    """Max over entries of |a − n| / max(|a|, |n|, floor)."""
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    if analytic.size == 0:
        return 0.0
    return float(np.max(np.abs(analytic - numeric) / denom))


def gradient_check(
    loss_fn: Callable[[], Tensor],
    tensors: Sequence[Tensor],
    h: float = 1e-4,
    floor: float = 1e-3,
) -> float:
    """Largest relative error between backward() and central differences.

    ``loss_fn`` must rebuild the graph from the current tensor values on every
    call; every tensor in ``tensors`` must require grad.
    """
    for t in tensors:
        t.zero_grad()
    loss_fn().backward()
    analytic = [t.grad.copy() for t in tensors]

    def value() -> float:
        return loss_fn().item()

    worst = 0.0
    for t, a in zip(tensors, analytic):
        numeric = numerical_gradient(value, t.values, h)
        worst = max(worst, relative_error(a, numeric, floor))
    for t in tensors:
        t.zero_grad()
    return worst
