"""Face-like heightfields over the parameter square [−50, 50]².

An identity is a shared dome plus twelve Gaussian bumps whose centres,
widths and amplitudes come from the identity seed. An expression is a
smooth cosine field bounded by its amplitude, drawn from the sample seed.
Clouds sample the surface on a jittered grid, one point per chosen cell, so
no two points share (x, y).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from common.errors import ArgumentError
from topface.metrics import TriangleMesh
from topface.pointcloud import ExpressionTag, PointCloud

HALF_EXTENT = 50.0
N_BUMPS = 12
N_EXPRESSION_TERMS = 3
MIN_POINTS = 64
DOME_HEIGHT = 30.0
DOME_WIDTH = 35.0
JITTER = 0.8


@dataclass(frozen=True)
class SyntheticIdentity:
    """``basis_coefficients`` rows are (centre x, centre y, width, amplitude)."""

    id: int
    basis_coefficients: np.ndarray
    seed: int

    @classmethod
    def from_seed(cls, identity_id: int, seed: int) -> "SyntheticIdentity":
        rng = np.random.default_rng([int(seed), int(identity_id)])
        centres = rng.uniform(-0.8 * HALF_EXTENT, 0.8 * HALF_EXTENT, size=(N_BUMPS, 2))
        widths = rng.uniform(8.0, 16.0, size=N_BUMPS)
        amplitudes = rng.uniform(6.0, 14.0, size=N_BUMPS) * rng.choice([-1.0, 1.0], size=N_BUMPS)
        coefficients = np.column_stack([centres, widths, amplitudes])
        coefficients.setflags(write=False)
        return cls(id=int(identity_id), basis_coefficients=coefficients, seed=int(seed))

    def height(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
        z = DOME_HEIGHT * np.exp(-(x * x + y * y) / (2.0 * DOME_WIDTH**2))
        for cx, cy, width, amplitude in self.basis_coefficients:
            z = z + amplitude * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * width**2))
        return z


@dataclass(frozen=True)
class ExpressionField:
    """amplitude · mean of cosine waves; |field| ≤ amplitude everywhere."""

    amplitude: float
    frequencies: np.ndarray
    phases: np.ndarray

    @classmethod
    def from_seed(cls, amplitude: float, sample_seed: int) -> "ExpressionField":
        if amplitude < 0:
            raise ArgumentError(f"expression amplitude must be >= 0, got {amplitude}")
        rng = np.random.default_rng([int(sample_seed), 7])
        frequencies = rng.uniform(0.5, 1.5, size=(N_EXPRESSION_TERMS, 2)) / (2.0 * HALF_EXTENT)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=N_EXPRESSION_TERMS)
        return cls(amplitude=float(amplitude), frequencies=frequencies, phases=phases)

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
        field = np.zeros(np.broadcast(x, y).shape)
        for (fx, fy), phase in zip(self.frequencies, self.phases):
            field = field + np.cos(2.0 * np.pi * (fx * x + fy * y) + phase)
        return self.amplitude * field / N_EXPRESSION_TERMS


def surface(identity: SyntheticIdentity, expression: Optional[ExpressionField] = None):
    """z(x, y) of an identity, with the expression field added when given."""

    def z(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        base = identity.height(x, y)
        return base if expression is None else base + expression(x, y)

    return z


def jittered_grid(n_points: int, rng: np.random.Generator) -> np.ndarray:
    """(n_points, 2) parameter samples, one per randomly chosen grid cell."""
    side = int(np.ceil(np.sqrt(n_points)))
    cell = 2.0 * HALF_EXTENT / side
    chosen = np.sort(rng.choice(side * side, size=n_points, replace=False))
    rows, cols = np.divmod(chosen, side)
    offsets = rng.uniform(-0.5 * JITTER, 0.5 * JITTER, size=(n_points, 2))
    x = -HALF_EXTENT + (cols + 0.5 + offsets[:, 0]) * cell
    y = -HALF_EXTENT + (rows + 0.5 + offsets[:, 1]) * cell
    return np.column_stack([x, y])


def generate_face(
    identity: SyntheticIdentity,
    expression_amplitude: float,
    sample_seed: int,
    n_points: int,
) -> PointCloud:
    if n_points < MIN_POINTS:
        raise ArgumentError(f"a synthetic face needs at least {MIN_POINTS} points, got {n_points}")
    expression = ExpressionField.from_seed(expression_amplitude, sample_seed)
    xy = jittered_grid(n_points, np.random.default_rng([int(sample_seed), 1]))
    z = surface(identity, expression)(xy[:, 0], xy[:, 1])
    tag = ExpressionTag.NEUTRAL if expression_amplitude == 0 else ExpressionTag.NON_NEUTRAL
    return PointCloud(points=np.column_stack([xy, z]), identity=identity.id, expression_tag=tag)


def generate_mesh(
    identity: SyntheticIdentity,
    grid: int = 64,
    expression: Optional[ExpressionField] = None,
) -> TriangleMesh:
    """``grid``×``grid`` vertices over the parameter square, two triangles per cell."""
    if grid < 2:
        raise ArgumentError(f"mesh grid needs at least 2 vertices per side, got {grid}")
    ticks = np.linspace(-HALF_EXTENT, HALF_EXTENT, grid)
    xx, yy = np.meshgrid(ticks, ticks, indexing="xy")
    zz = surface(identity, expression)(xx, yy)
    vertices = np.column_stack([xx.ravel(), yy.ravel(), zz.ravel()])
    idx = np.arange(grid * grid).reshape(grid, grid)
    v00, v01 = idx[:-1, :-1].ravel(), idx[:-1, 1:].ravel()
    v10, v11 = idx[1:, :-1].ravel(), idx[1:, 1:].ravel()
    faces = np.concatenate([np.column_stack([v00, v01, v11]), np.column_stack([v00, v11, v10])])
    return TriangleMesh(vertices=vertices, faces=faces)
