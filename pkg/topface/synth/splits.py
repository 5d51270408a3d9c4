"""Stratified 60/40 train/test splits in the neutral and random settings."""

from __future__ import annotations

from typing import List, Sequence

import numpy as np

from common.errors import ArgumentError
from topface.pointcloud import ExpressionTag, derive_seed
from topface.schemas import DatasetManifest, IdentityEntry, SampleEntry, Setting, Split

from .faces import SyntheticIdentity

TRAIN_FRACTION = 0.6
DEFAULT_AMPLITUDE = 1.0


def sample_path(identity: int, sample_index: int) -> str:
    return f"id_{identity}/sample_{sample_index}.xyz"


def mesh_path(identity: int) -> str:
    return f"id_{identity}/mesh.off"


def n_train_per_identity(samples_per_identity: int) -> int:
    """round(0.6 · n), halves rounded up."""
    return int(np.floor(TRAIN_FRACTION * samples_per_identity + 0.5))


def _train_indices(
    tags: Sequence[ExpressionTag], n_train: int, setting: Setting, rng: np.random.Generator, identity: int
) -> set:
    if setting == Setting.NEUTRAL:
        pool = [j for j, tag in enumerate(tags) if tag == ExpressionTag.NEUTRAL]
        if len(pool) < n_train:
            raise ArgumentError(
                f"identity {identity} has {len(pool)} neutral samples, the neutral setting needs {n_train}"
            )
    else:
        pool = list(range(len(tags)))
    return {int(j) for j in rng.choice(pool, size=n_train, replace=False)}


def build_splits(
    identities: Sequence[SyntheticIdentity],
    samples_per_identity: int,
    setting: Setting,
    seed: int,
    neutral_per_identity: int = 6,
    n_points: int = 1024,
    mesh_grid: int = 64,
    expression_amplitude: float = DEFAULT_AMPLITUDE,
) -> DatasetManifest:
    """Manifest listing every sample with its seed, expression and split.

    Samples ``0 .. neutral_per_identity - 1`` of each identity are neutral,
    the rest carry an expression of ``expression_amplitude``. Train/test
    assignment is drawn per identity from ``seed``.
    """
    setting = Setting(setting)
    if not identities:
        raise ArgumentError("at least one identity is required")
    if samples_per_identity < 2:
        raise ArgumentError(f"need at least 2 samples per identity, got {samples_per_identity}")
    if not 0 <= neutral_per_identity <= samples_per_identity:
        raise ArgumentError(
            f"neutral_per_identity must lie in [0, {samples_per_identity}], got {neutral_per_identity}"
        )
    if expression_amplitude < 0:
        raise ArgumentError(f"expression amplitude must be >= 0, got {expression_amplitude}")
    n_train = n_train_per_identity(samples_per_identity)

    samples: List[SampleEntry] = []
    for identity in identities:
        tags = [
            ExpressionTag.NEUTRAL if j < neutral_per_identity else ExpressionTag.NON_NEUTRAL
            for j in range(samples_per_identity)
        ]
        rng = np.random.default_rng([int(seed), identity.id])
        train = _train_indices(tags, n_train, setting, rng, identity.id)
        for j, tag in enumerate(tags):
            samples.append(
                SampleEntry(
                    path=sample_path(identity.id, j),
                    identity=identity.id,
                    sample_index=j,
                    sample_seed=derive_seed(seed, identity.id, j),
                    expression_tag=tag,
                    expression_amplitude=0.0 if tag == ExpressionTag.NEUTRAL else expression_amplitude,
                    split=Split.TRAIN if j in train else Split.TEST,
                )
            )
    return DatasetManifest(
        setting=setting,
        seed=seed,
        n_points=n_points,
        mesh_grid=mesh_grid,
        identities=[IdentityEntry(id=i.id, seed=i.seed, mesh_path=mesh_path(i.id)) for i in identities],
        samples=samples,
    )


def resplit(manifest: DatasetManifest, setting: Setting) -> DatasetManifest:
    """The same samples split under another setting."""
    setting = Setting(setting)
    if setting == manifest.setting:
        return manifest
    n_train = n_train_per_identity(len(manifest.samples) // max(1, manifest.n_identities))
    by_identity = {}
    for entry in manifest.samples:
        by_identity.setdefault(entry.identity, []).append(entry)
    samples: List[SampleEntry] = []
    for identity_id in sorted(by_identity):
        entries = sorted(by_identity[identity_id], key=lambda s: s.sample_index)
        rng = np.random.default_rng([manifest.seed, identity_id])
        train = _train_indices([e.expression_tag for e in entries], n_train, setting, rng, identity_id)
        samples.extend(
            e.model_copy(update={"split": Split.TRAIN if e.sample_index in train else Split.TEST}) for e in entries
        )
    return manifest.model_copy(update={"setting": setting, "samples": samples})


def make_identities(n_identities: int, seed: int) -> List[SyntheticIdentity]:
    if n_identities < 1:
        raise ArgumentError(f"at least one identity is required, got {n_identities}")
    return [SyntheticIdentity.from_seed(k, derive_seed(seed, k)) for k in range(n_identities)]
