"""Seeded additive Gaussian noise.

Uniforms come from numpy's counter-based Philox generator keyed by the seed.
Point i, axis a consumes the uniform pair at stream positions 2j and 2j+1
with j = 3i + a, and Box–Muller turns the pair into one standard normal:

    z = sqrt(−2·ln(1 − u1)) · cos(2π·u2)

so every value is a pure function of (seed, point index, axis).
"""

from __future__ import annotations

import logging

import numpy as np

from .cloud import NoiseSpec, PointCloud

logger = logging.getLogger(__name__)


def uniform_stream(seed: int, count: int) -> np.ndarray:
    """First ``count`` uniform doubles in [0, 1) of the Philox stream for ``seed``."""
    return np.random.Generator(np.random.Philox(key=int(seed))).random(count)


def standard_normals(seed: int, n_points: int) -> np.ndarray:
    """(n_points, 3) standard normals via Box–Muller over the Philox stream."""
    u = uniform_stream(seed, 6 * n_points).reshape(n_points, 3, 2)
    radius = np.sqrt(-2.0 * np.log(1.0 - u[..., 0]))
    return radius * np.cos(2.0 * np.pi * u[..., 1])


def add_gaussian_noise(pc: PointCloud, spec: NoiseSpec) -> PointCloud:
    """Perturb every coordinate by an independent Normal(0, σ²) draw."""
    if spec.variance == 0:
        return pc.with_points(pc.points.copy())
    noise = np.sqrt(spec.variance) * standard_normals(spec.seed, pc.n_points)
    logger.debug("NOISE_APPLIED n=%d sigma2=%g seed=%d", pc.n_points, spec.variance, spec.seed)
    return pc.with_points(pc.points + noise)


def derive_seed(base_seed: int, *keys: int) -> int:
    """64-bit seed that depends only on ``base_seed`` and the integer ``keys``."""
    sequence = np.random.SeedSequence([int(base_seed), *[int(k) for k in keys]])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def level_key(variance: float) -> int:
    """Integer key of a noise level (σ² in thousandths) for seed derivation."""
    return int(round(float(variance) * 1000))
