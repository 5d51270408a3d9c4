"""Dataset directories: ``id_<K>/sample_<J>.xyz``, ``id_<K>/mesh.off``, ``manifest.json``."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Union

from pydantic import ValidationError

from common.concurrency import map_ordered
from common.errors import ParseError, StateError
from topface.metrics import EvalSample, TriangleMesh, save_off
from topface.pointcloud import PointCloud, load_xyz, save_xyz
from topface.schemas import DatasetManifest, SampleEntry, Setting, Split

from .faces import ExpressionField, SyntheticIdentity, generate_face, generate_mesh
from .splits import DEFAULT_AMPLITUDE, build_splits, make_identities

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
MANIFEST_NAME = "manifest.json"


def identities_of(manifest: DatasetManifest) -> Dict[int, SyntheticIdentity]:
    return {e.id: SyntheticIdentity.from_seed(e.id, e.seed) for e in manifest.identities}


def render_sample(identity: SyntheticIdentity, entry: SampleEntry, n_points: int) -> PointCloud:
    return generate_face(identity, entry.expression_amplitude, entry.sample_seed, n_points)


def reference_mesh(identity: SyntheticIdentity, entry: SampleEntry, grid: int) -> TriangleMesh:
    """The exact surface one sample was drawn from, expression included."""
    expression = ExpressionField.from_seed(entry.expression_amplitude, entry.sample_seed)
    return generate_mesh(identity, grid, expression if entry.expression_amplitude > 0 else None)


def write_manifest(manifest: DatasetManifest, path: PathLike) -> None:
    text = json.dumps(manifest.model_dump(mode="json"), sort_keys=True, indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")


def write_dataset(
    out_dir: PathLike,
    n_identities: int = 20,
    samples_per_identity: int = 10,
    setting: Setting = Setting.RANDOM,
    seed: int = 0,
    n_points: int = 1024,
    mesh_grid: int = 64,
    neutral_per_identity: int = 6,
    expression_amplitude: float = DEFAULT_AMPLITUDE,
    workers: int = 1,
) -> DatasetManifest:
    """Generate and write a full synthetic dataset into ``out_dir``."""
    out = Path(out_dir)
    identities = make_identities(n_identities, seed)
    manifest = build_splits(
        identities,
        samples_per_identity,
        setting,
        seed,
        neutral_per_identity=neutral_per_identity,
        n_points=n_points,
        mesh_grid=mesh_grid,
        expression_amplitude=expression_amplitude,
    )
    by_id = {i.id: i for i in identities}
    for entry in manifest.identities:
        (out / entry.mesh_path).parent.mkdir(parents=True, exist_ok=True)

    def write_sample(entry: SampleEntry) -> str:
        save_xyz(render_sample(by_id[entry.identity], entry, n_points), out / entry.path)
        return entry.path

    def write_mesh(identity: SyntheticIdentity) -> str:
        path = out / manifest.identities[identity.id].mesh_path
        save_off(generate_mesh(identity, mesh_grid), path)
        return str(path)

    map_ordered(write_sample, manifest.samples, workers)
    map_ordered(write_mesh, identities, workers)
    write_manifest(manifest, out / MANIFEST_NAME)
    logger.info(
        "DATASET_WRITTEN dir=%s identities=%d samples=%d setting=%s seed=%d",
        out,
        n_identities,
        len(manifest.samples),
        manifest.setting.value,
        seed,
    )
    return manifest


def load_manifest(dataset_dir: PathLike) -> DatasetManifest:
    path = Path(dataset_dir) / MANIFEST_NAME
    if not path.is_file():
        raise StateError(f"no dataset manifest at {path}", stage="synth")
    try:
        return DatasetManifest.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as exc:
        raise ParseError(f"invalid manifest: {exc.errors()[0]['msg']}", path=path) from exc


def load_clouds(dataset_dir: PathLike, entries: Sequence[SampleEntry], workers: int = 1) -> List[PointCloud]:
    root = Path(dataset_dir)
    return map_ordered(lambda e: load_xyz(root / e.path), entries, workers)


def load_split(dataset_dir: PathLike, manifest: DatasetManifest, which: Split, workers: int = 1) -> List[PointCloud]:
    return load_clouds(dataset_dir, manifest.split(which), workers)


def eval_samples(
    dataset_dir: PathLike,
    manifest: DatasetManifest,
    which: Split = Split.TEST,
    workers: int = 1,
    meshes: bool = True,
) -> List[EvalSample]:
    """Test clouds paired with the exact surfaces they were drawn from.

    With ``meshes=False`` the surfaces are skipped (recognition-only runs).
    """
    entries = manifest.split(which)
    identities = identities_of(manifest)
    clouds = load_clouds(dataset_dir, entries, workers)
    if meshes:
        surfaces = map_ordered(
            lambda e: reference_mesh(identities[e.identity], e, manifest.mesh_grid), entries, workers
        )
    else:
        surfaces = [None] * len(entries)
    # sample_index keys the noise stream; make it unique across identities
    per_identity = max(e.sample_index for e in manifest.samples) + 1
    return [
        EvalSample(clean=c, mesh=m, sample_index=e.identity * per_identity + e.sample_index)
        for c, m, e in zip(clouds, surfaces, entries)
    ]
