"""Differentiable ops used by the generator, discriminators and recognizer.

Images are single samples laid out as (C, H, W). Convolution follows the
cross-correlation convention (the kernel is not flipped).
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from common.errors import ArgumentError, DimensionError

from .tensor import Tensor


# ----------------------------------------------------------------------
# Convolution / pooling / resampling
# ----------------------------------------------------------------------


def conv2d(
    input: Tensor,
    kernel: Tensor,
    stride: int = 1,
    padding: int = 0,
    bias: Optional[Tensor] = None,
) -> Tensor:
    """2-D cross-correlation of a (C_in, H, W) image with a (C_out, C_in, kH, kW) kernel.

    Output spatial size is floor((H + 2·padding − kH) / stride) + 1 (same for W).
    """
    if input.ndim != 3 or kernel.ndim != 4:
        raise DimensionError(f"conv2d expects (C,H,W) and (O,C,kH,kW), got {input.shape} and {kernel.shape}")
    if stride < 1:
        raise ArgumentError(f"stride must be >= 1, got {stride}")
    if padding < 0:
        raise ArgumentError(f"padding must be >= 0, got {padding}")
    c_in, h, w = input.shape
    c_out, k_c, kh, kw = kernel.shape
    if k_c != c_in:
        raise DimensionError(f"conv2d channel mismatch: input has {c_in}, kernel expects {k_c}")
    hp, wp = h + 2 * padding, w + 2 * padding
    if kh > hp or kw > wp:
        raise DimensionError(f"kernel {kh}x{kw} larger than padded input {hp}x{wp}")
    if bias is not None and bias.shape != (c_out,):
        raise DimensionError(f"conv2d bias must have shape ({c_out},), got {bias.shape}")

    x_pad = np.pad(input.values, ((0, 0), (padding, padding), (padding, padding)))
    windows = sliding_window_view(x_pad, (kh, kw), axis=(1, 2))[:, ::stride, ::stride]
    h_out, w_out = windows.shape[1], windows.shape[2]
    k = kernel.values
    out = np.tensordot(k, windows, axes=([1, 2, 3], [0, 3, 4]))
    if bias is not None:
        out = out + bias.values[:, None, None]

    def backward(g: np.ndarray):
        grad_k = np.tensordot(g, windows, axes=([1, 2], [1, 2]))
        cols = np.tensordot(k, g, axes=([0], [0]))  # (C, kH, kW, H', W')
        grad_pad = np.zeros_like(x_pad)
        span_h = stride * (h_out - 1) + 1
        span_w = stride * (w_out - 1) + 1
        for i in range(kh):
            for j in range(kw):
                grad_pad[:, i : i + span_h : stride, j : j + span_w : stride] += cols[:, i, j]
        grad_x = grad_pad[:, padding : padding + h, padding : padding + w]
        grad_b = g.sum(axis=(1, 2)) if bias is not None else None
        return grad_x, grad_k, grad_b

    parents = (input, kernel) if bias is None else (input, kernel, bias)
    return Tensor._from_op(out, parents, backward, "conv2d")


def max_pool2d(input: Tensor, window: int) -> Tuple[Tensor, np.ndarray]:
    """Non-overlapping max pooling.

    Odd trailing rows/columns are padded with −inf so every input is poolable.
    Ties resolve to the lowest linear index in the window. Returns the pooled
    tensor and the argmax as flat indices into each (H, W) channel plane.
    """
    if window <= 0:
        raise ArgumentError(f"window must be > 0, got {window}")
    if input.ndim != 3:
        raise DimensionError(f"max_pool2d expects (C,H,W), got {input.shape}")
    c, h, w = input.shape
    h_out, w_out = -(-h // window), -(-w // window)
    padded = np.full((c, h_out * window, w_out * window), -np.inf)
    padded[:, :h, :w] = input.values
    blocks = (
        padded.reshape(c, h_out, window, w_out, window)
        .transpose(0, 1, 3, 2, 4)
        .reshape(c, h_out, w_out, window * window)
    )
    local = np.argmax(blocks, axis=-1)
    out = np.take_along_axis(blocks, local[..., None], axis=-1)[..., 0]

    rows = np.arange(h_out)[None, :, None] * window + local // window
    cols = np.arange(w_out)[None, None, :] * window + local % window
    argmax = rows * w + cols

    def backward(g: np.ndarray):
        grad = np.zeros((c, h * w))
        np.put_along_axis(grad, argmax.reshape(c, -1), g.reshape(c, -1), axis=1)
        return (grad.reshape(c, h, w),)

    return Tensor._from_op(out, (input,), backward, "max_pool2d"), argmax


def upsample_nearest2d(input: Tensor, factor: int) -> Tensor:
    """Replicate every value into a factor×factor block."""
    if factor < 1:
        raise ArgumentError(f"factor must be >= 1, got {factor}")
    if input.ndim != 3:
        raise DimensionError(f"upsample_nearest2d expects (C,H,W), got {input.shape}")
    c, h, w = input.shape
    out = np.repeat(np.repeat(input.values, factor, axis=1), factor, axis=2)

    def backward(g: np.ndarray):
        return (g.reshape(c, h, factor, w, factor).sum(axis=(2, 4)),)

    return Tensor._from_op(out, (input,), backward, "upsample_nearest2d")


# ----------------------------------------------------------------------
# Activations
# ----------------------------------------------------------------------


def relu(input: Tensor) -> Tensor:
    mask = input.values > 0
    return Tensor._from_op(np.where(mask, input.values, 0.0), (input,), lambda g: (g * mask,), "relu")


def leaky_relu(input: Tensor, slope: float = 0.2) -> Tensor:
    scale = np.where(input.values > 0, 1.0, slope)
    return Tensor._from_op(input.values * scale, (input,), lambda g: (g * scale,), "leaky_relu")


def softplus(input: Tensor) -> Tensor:
    """log(1 + e^x), computed without overflow."""
    x = input.values
    sigmoid = np.exp(-np.logaddexp(0.0, -x))
    return Tensor._from_op(np.logaddexp(0.0, x), (input,), lambda g: (g * sigmoid,), "softplus")


def dropout(input: Tensor, p: float, rng: Optional[np.random.Generator], training: bool) -> Tensor:
    """Inverted dropout; identity unless ``training``."""
    if not 0.0 <= p < 1.0:
        raise ArgumentError(f"dropout probability must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return input
    if rng is None:
        raise ArgumentError("dropout in training mode needs a random generator")
    keep = (rng.random(input.shape) >= p) / (1.0 - p)
    return input * keep


# ----------------------------------------------------------------------
# Affine map and losses
# ----------------------------------------------------------------------


def linear(input: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """Apply x·Wᵀ + b to every leading index of a (..., F_in) input."""
    if weight.ndim != 2:
        raise DimensionError(f"linear weight must be (F_out, F_in), got {weight.shape}")
    f_out, f_in = weight.shape
    if input.ndim < 1 or input.shape[-1] != f_in:
        raise DimensionError(f"linear expects trailing dim {f_in}, got input shape {input.shape}")
    if bias is not None and bias.shape != (f_out,):
        raise DimensionError(f"linear bias must have shape ({f_out},), got {bias.shape}")

    x = input.values
    out = x @ weight.values.T
    if bias is not None:
        out = out + bias.values

    def backward(g: np.ndarray):
        grad_x = g @ weight.values
        flat_g = g.reshape(-1, f_out)
        grad_w = flat_g.T @ x.reshape(-1, f_in)
        grad_b = flat_g.sum(axis=0) if bias is not None else None
        return grad_x, grad_w, grad_b

    parents = (input, weight) if bias is None else (input, weight, bias)
    return Tensor._from_op(out, parents, backward, "linear")


def softmax_cross_entropy(logits: Tensor, label: int) -> Tensor:
    """−log softmax(logits)[label] for a single (C,) logit vector."""
    if logits.ndim != 1:
        raise DimensionError(f"softmax_cross_entropy expects (C,) logits, got {logits.shape}")
    n_classes = logits.shape[0]
    if not 0 <= label < n_classes:
        raise ArgumentError(f"label {label} outside [0, {n_classes})")
    z = logits.values
    shifted = z - z.max()
    log_norm = np.log(np.exp(shifted).sum())
    probs = np.exp(shifted - log_norm)
    loss = log_norm - shifted[label]

    def backward(g: np.ndarray):
        grad = probs.copy()
        grad[label] -= 1.0
        return (grad * g,)

    return Tensor._from_op(np.asarray(loss), (logits,), backward, "softmax_cross_entropy")


def masked_l1(prediction: Tensor, target: np.ndarray, mask: np.ndarray) -> Tensor:
    """Mean absolute difference over cells where ``mask`` is set."""
    mask = np.asarray(mask, dtype=np.float64)
    if prediction.shape != np.shape(target) or prediction.shape != mask.shape:
        raise DimensionError(
            f"masked_l1 shape mismatch: {prediction.shape}, {np.shape(target)}, {mask.shape}"
        )
    count = mask.sum()
    if count == 0:
        return (prediction * 0.0).sum()
    return ((prediction - target).abs() * mask).sum() * (1.0 / count)
