"""Pipeline commands.

Each command validates its inputs, loads what it needs, and writes its
outputs through a staging directory that is merged into the output
directory only when the command succeeds.
"""

from __future__ import annotations

import logging
from functools import partial
from pathlib import Path
from typing import Dict, List, Sequence

from common.concurrency import map_ordered
from common.errors import ArgumentError, ConfigError, StateError
from topface.denoiser import DenoiserBundle, DenoisingPair, denoise, train_denoiser
from topface.metrics import (
    DENOISER_LOG_COLUMNS,
    RECOGNIZER_LOG_COLUMNS,
    EvalSample,
    accuracy_by_level,
    evaluate_pipeline,
    noisy_copy,
    write_ablation_report,
    write_metric_report,
    write_training_log,
)
from topface.pointcloud import NoiseSpec, PointCloud, add_gaussian_noise, derive_seed, level_key, save_xyz
from topface.projection import dump_projection, project
from topface.recognizer import RecognizerNet, load_recognizer, save_recognizer, train_recognizer
from topface.schemas import AblationReport, AblationRow, DatasetManifest, Setting, Split
from topface.synth import eval_samples, load_manifest, load_split, resplit, write_dataset

from .config import RunConfig, SettingChoice
from .workspace import RunLayout, output_lock, staged, staged_replacement

logger = logging.getLogger(__name__)

# Keeps training noise draws apart from the evaluation draws.
TRAIN_NOISE_KEY = 1

ABLATION_VARIANTS = ("vad_only", "rfd_only", "full")


class Stage:
    RECOGNIZER = "recognizer"
    DENOISER = "denoiser"
    FINETUNE = "finetune"

    ALL = (RECOGNIZER, DENOISER, FINETUNE)


def _layout(cfg: RunConfig) -> RunLayout:
    return RunLayout(root=Path(cfg.output_dir))


def _manifest_for(cfg: RunConfig, setting: Setting) -> DatasetManifest:
    manifest = load_manifest(cfg.dataset_dir)
    try:
        return resplit(manifest, setting)
    except ArgumentError as exc:
        raise ConfigError(f"the {setting.value} setting is infeasible for {cfg.dataset_dir}: {exc}") from exc


def _entry_stem(entry_path: str) -> str:
    return entry_path.rsplit(".", 1)[0].replace("/", "_")


def training_pairs(clouds: Sequence[PointCloud], noise_levels: Sequence[float], seed: int) -> List[DenoisingPair]:
    """One noisy/clean pair per training cloud and noise level."""
    pairs = []
    for sigma2 in noise_levels:
        for i, pc in enumerate(clouds):
            spec = NoiseSpec(variance=sigma2, seed=derive_seed(seed, TRAIN_NOISE_KEY, level_key(sigma2), i))
            pairs.append(DenoisingPair(noisy=add_gaussian_noise(pc, spec), clean=pc))
    return pairs


def require_stage(path: Path, stage: str) -> None:
    if not Path(path).is_file():
        raise StateError(f"{stage} stage output missing: {path}", stage=stage)


def _base_recognizer(cfg: RunConfig, setting: Setting) -> RecognizerNet:
    return load_recognizer(_layout(cfg).recognizer(setting), cfg.recognizer_config())


def _denoiser(cfg: RunConfig, setting: Setting) -> DenoiserBundle:
    return DenoiserBundle.load(_layout(cfg).denoiser(setting), cfg.denoiser_config())


# ----------------------------------------------------------------------
# synth / noise
# ----------------------------------------------------------------------


def cmd_synth(cfg: RunConfig, force: bool = False, workers: int = 1) -> DatasetManifest:
    """Write a synthetic dataset to ``cfg.dataset_dir``."""
    dataset = Path(cfg.dataset_dir)
    setting = Setting.RANDOM if cfg.setting == SettingChoice.BOTH else cfg.single_setting()
    with output_lock(dataset.parent, name=f".{dataset.name}.lock"):
        with staged_replacement(dataset, force) as scratch:
            try:
                manifest = write_dataset(
                    scratch,
                    n_identities=cfg.identities,
                    samples_per_identity=cfg.samples_per_identity,
                    setting=setting,
                    seed=cfg.seed,
                    n_points=cfg.n_points,
                    mesh_grid=cfg.mesh_grid,
                    neutral_per_identity=cfg.neutral_per_identity,
                    expression_amplitude=cfg.expression_amplitude,
                    workers=workers,
                )
            except ArgumentError as exc:
                raise ConfigError(f"cannot synthesize dataset: {exc}") from exc
    logger.info(
        "SYNTH_DONE dir=%s identities=%d samples=%d train=%d test=%d",
        dataset,
        manifest.n_identities,
        len(manifest.samples),
        len(manifest.split(Split.TRAIN)),
        len(manifest.split(Split.TEST)),
    )
    return manifest


def cmd_noise(cfg: RunConfig, workers: int = 1) -> Path:
    """Write the evaluation noise draws of the test split, one tree per σ²."""
    setting = cfg.single_setting()
    manifest = _manifest_for(cfg, setting)
    entries = manifest.split(Split.TEST)
    samples = eval_samples(cfg.dataset_dir, manifest, Split.TEST, workers, meshes=False)
    layout = _layout(cfg)
    with output_lock(layout.root), staged(layout.root) as scratch:
        out = layout.rebased(scratch)
        for sigma2 in cfg.noise_levels:

            def write(item):
                sample, entry = item
                path = out.noisy_cloud(setting, sigma2, entry.path)
                path.parent.mkdir(parents=True, exist_ok=True)
                save_xyz(noisy_copy(sample, sigma2, cfg.seed), path)

            map_ordered(write, list(zip(samples, entries)), workers)
            logger.info("NOISE_WRITTEN setting=%s sigma2=%g clouds=%d", setting.value, sigma2, len(samples))
    return layout.root / "noisy" / setting.value


# ----------------------------------------------------------------------
# train
# ----------------------------------------------------------------------


def cmd_train(stage: str, cfg: RunConfig, workers: int = 1) -> List[Path]:
    """Run one training stage; returns the checkpoint and log paths written."""
    if stage not in Stage.ALL:
        raise ConfigError(f"unknown training stage {stage!r}; choose from {', '.join(Stage.ALL)}")
    setting = cfg.single_setting()
    layout = _layout(cfg)

    # prerequisites first, before any data is loaded
    base = _base_recognizer(cfg, setting) if stage in (Stage.DENOISER, Stage.FINETUNE) else None
    bundle = _denoiser(cfg, setting) if stage == Stage.FINETUNE else None

    manifest = _manifest_for(cfg, setting)
    clouds = load_split(cfg.dataset_dir, manifest, Split.TRAIN, workers)
    logger.info("TRAIN_START stage=%s setting=%s clouds=%d", stage, setting.value, len(clouds))

    with output_lock(layout.root), staged(layout.root) as scratch:
        out = layout.rebased(scratch)
        if stage == Stage.RECOGNIZER:
            result = train_recognizer(clouds, cfg.recognizer_config(), n_classes=manifest.n_identities)
            save_recognizer(result.net, out.recognizer(setting))
            write_training_log(result.log, RECOGNIZER_LOG_COLUMNS, out.recognizer_log(setting))
            written = [layout.recognizer(setting), layout.recognizer_log(setting)]
        elif stage == Stage.DENOISER:
            pairs = training_pairs(clouds, cfg.noise_levels, cfg.seed)
            result = train_denoiser(pairs, base, cfg.denoiser_config())
            result.bundle.save(out.denoiser(setting))
            write_training_log(result.log, DENOISER_LOG_COLUMNS, out.denoiser_log(setting))
            written = [layout.denoiser(setting), layout.denoiser_log(setting)]
        else:
            pairs = training_pairs(clouds, cfg.noise_levels, cfg.seed)
            denoised = map_ordered(partial(denoise, bundle=bundle), [p.noisy for p in pairs], workers)
            result = train_recognizer(
                list(clouds) + denoised, cfg.recognizer_config(epochs=cfg.finetune_epochs), net=base
            )
            save_recognizer(result.net, out.finetuned(setting))
            write_training_log(result.log, RECOGNIZER_LOG_COLUMNS, out.finetune_log(setting))
            written = [layout.finetuned(setting), layout.finetune_log(setting)]
    logger.info("TRAIN_DONE stage=%s setting=%s", stage, setting.value)
    return written


# ----------------------------------------------------------------------
# denoise
# ----------------------------------------------------------------------


def cmd_denoise(cfg: RunConfig, dump_planes: bool = False, workers: int = 1) -> Path:
    """Denoise the test split at every σ²; optionally dump plane images."""
    setting = cfg.single_setting()
    bundle = _denoiser(cfg, setting)
    manifest = _manifest_for(cfg, setting)
    entries = manifest.split(Split.TEST)
    samples = eval_samples(cfg.dataset_dir, manifest, Split.TEST, workers, meshes=False)
    layout = _layout(cfg)
    resolution = (cfg.resolution, cfg.resolution)
    with output_lock(layout.root), staged(layout.root) as scratch:
        out = layout.rebased(scratch)
        for sigma2 in cfg.noise_levels:

            def run(item):
                sample, entry = item
                noisy = noisy_copy(sample, sigma2, cfg.seed)
                cleaned = denoise(noisy, bundle, cfg.resolution)
                path = out.denoised_cloud(setting, sigma2, entry.path)
                path.parent.mkdir(parents=True, exist_ok=True)
                save_xyz(cleaned, path)
                if dump_planes:
                    stem = _entry_stem(entry.path)
                    planes = out.planes_dir(setting, sigma2)
                    dump_projection(project(noisy, resolution), planes, f"{stem}_noisy")
                    dump_projection(project(cleaned, resolution), planes, f"{stem}_denoised")

            map_ordered(run, list(zip(samples, entries)), workers)
            logger.info("DENOISE_WRITTEN setting=%s sigma2=%g clouds=%d", setting.value, sigma2, len(samples))
    return layout.root / "denoised" / setting.value


# ----------------------------------------------------------------------
# eval / ablate
# ----------------------------------------------------------------------


def cmd_eval(cfg: RunConfig, use_finetuned: bool = False, workers: int = 1) -> List[Path]:
    """Metric report (CSV + JSON) per requested setting."""
    layout = _layout(cfg)
    tag = "finetuned" if use_finetuned else "base"
    models = {}
    for setting in cfg.settings():
        if use_finetuned:
            require_stage(layout.finetuned(setting), Stage.FINETUNE)
            recognizer = load_recognizer(layout.finetuned(setting), cfg.recognizer_config())
        else:
            recognizer = _base_recognizer(cfg, setting)
        models[setting] = (recognizer, _denoiser(cfg, setting))

    written: List[Path] = []
    with output_lock(layout.root), staged(layout.root) as scratch:
        out = layout.rebased(scratch)
        for setting, (recognizer, bundle) in models.items():
            manifest = _manifest_for(cfg, setting)
            samples = eval_samples(cfg.dataset_dir, manifest, Split.TEST, workers)
            report = evaluate_pipeline(
                samples,
                bundle,
                recognizer,
                cfg.noise_levels,
                seed=cfg.seed,
                point_budget=cfg.point_budget,
                setting=setting,
                recognizer_tag=tag,
                workers=workers,
            )
            out.eval_report(setting, "csv").parent.mkdir(parents=True, exist_ok=True)
            write_metric_report(report, out.eval_report(setting, "csv"), out.eval_report(setting, "json"))
            written += [layout.eval_report(setting, "csv"), layout.eval_report(setting, "json")]
    return written


def _ablation_bundles(
    cfg: RunConfig,
    setting: Setting,
    recognizer: RecognizerNet,
    clouds: Sequence[PointCloud],
) -> Dict[str, DenoiserBundle]:
    """VAD-only (λ1 = 0), RFD-only (λ2 = 0) and the full denoiser.

    The full variant reuses the denoiser stage checkpoint when one exists.
    """
    pairs = training_pairs(clouds, cfg.noise_levels, cfg.seed)
    variants = {
        "vad_only": cfg.denoiser_config(lambda1=0.0),
        "rfd_only": cfg.denoiser_config(lambda2=0.0),
    }
    bundles = {}
    for name, config in variants.items():
        logger.info("ABLATION_TRAIN setting=%s variant=%s", setting.value, name)
        bundles[name] = train_denoiser(pairs, recognizer, config).bundle
    full_path = _layout(cfg).denoiser(setting)
    if full_path.is_file():
        bundles["full"] = DenoiserBundle.load(full_path, cfg.denoiser_config())
    else:
        logger.info("ABLATION_TRAIN setting=%s variant=full", setting.value)
        bundles["full"] = train_denoiser(pairs, recognizer, cfg.denoiser_config()).bundle
    return bundles


def cmd_ablate(cfg: RunConfig, workers: int = 1) -> List[Path]:
    """Accuracy per σ² of the three discriminator variants, per setting."""
    layout = _layout(cfg)
    recognizers = {setting: _base_recognizer(cfg, setting) for setting in cfg.settings()}
    written: List[Path] = []
    with output_lock(layout.root), staged(layout.root) as scratch:
        out = layout.rebased(scratch)
        for setting, recognizer in recognizers.items():
            manifest = _manifest_for(cfg, setting)
            clouds = load_split(cfg.dataset_dir, manifest, Split.TRAIN, workers)
            samples: List[EvalSample] = eval_samples(cfg.dataset_dir, manifest, Split.TEST, workers, meshes=False)
            bundles = _ablation_bundles(cfg, setting, recognizer, clouds)
            scores = {
                name: accuracy_by_level(
                    samples, bundle, recognizer, cfg.noise_levels, cfg.seed, cfg.point_budget, workers
                )
                for name, bundle in bundles.items()
            }
            for name in ("vad_only", "rfd_only"):
                path = out.ablation_variant(setting, name)
                path.parent.mkdir(parents=True, exist_ok=True)
                bundles[name].save(path)
            rows = [
                AblationRow(sigma2=s, **{name: scores[name][s] for name in ABLATION_VARIANTS})
                for s in cfg.noise_levels
            ]
            report = AblationReport(setting=setting, seed=cfg.seed, rows=rows)
            out.ablation_report(setting, "csv").parent.mkdir(parents=True, exist_ok=True)
            write_ablation_report(report, out.ablation_report(setting, "csv"), out.ablation_report(setting, "json"))
            written += [layout.ablation_report(setting, "csv"), layout.ablation_report(setting, "json")]
    return written
