"""CLI entry point for the denoise-and-recognize pipeline."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from common.config import get_settings
from common.errors import ConfigError, StateError, TopFaceError
from topface.schemas import Split

from .config import SettingChoice, load_run_config, parse_levels
from .stages import Stage, cmd_ablate, cmd_denoise, cmd_eval, cmd_noise, cmd_synth, cmd_train

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_STATE = 3

# flag dest -> RunConfig field
_OVERRIDES = (
    "dataset_dir",
    "output_dir",
    "setting",
    "identities",
    "samples_per_identity",
    "neutral_per_identity",
    "n_points",
    "mesh_grid",
    "expression_amplitude",
    "resolution",
    "k",
    "lambda1",
    "lambda2",
    "mu",
    "recognizer_epochs",
    "denoiser_epochs",
    "finetune_epochs",
    "batch",
    "lr",
    "point_budget",
    "seed",
    "workers",
)


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="run-config JSON (default: $TOPFACE_CONFIG)")
    p.add_argument("--dataset-dir")
    p.add_argument("--output-dir")
    p.add_argument("--setting", choices=[c.value for c in SettingChoice])
    p.add_argument("--noise-levels", help="comma-separated variances, e.g. 4,8,16")
    p.add_argument("--identities", type=int)
    p.add_argument("--samples-per-identity", type=int)
    p.add_argument(
        "--neutral-per-identity",
        type=int,
        help="neutral samples per identity (default 6 of 10, enough for the neutral setting's 60%% train share)",
    )
    p.add_argument("--n-points", type=int)
    p.add_argument("--mesh-grid", type=int)
    p.add_argument("--expression-amplitude", type=float)
    p.add_argument("--resolution", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--lambda1", type=float)
    p.add_argument("--lambda2", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--recognizer-epochs", type=int)
    p.add_argument("--denoiser-epochs", type=int)
    p.add_argument("--finetune-epochs", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--point-budget", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="topface", description="Point-cloud face denoising and recognition pipeline")
    sub = p.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate a synthetic face dataset")
    _add_run_flags(synth)
    synth.add_argument("--force", action="store_true", help="replace a non-empty dataset directory")

    noise = sub.add_parser("noise", help="write noisy copies of the test split")
    _add_run_flags(noise)

    train = sub.add_parser("train", help="run one training stage")
    train.add_argument("stage", choices=list(Stage.ALL))
    _add_run_flags(train)

    den = sub.add_parser("denoise", help="denoise the test split at every noise level")
    _add_run_flags(den)
    den.add_argument("--dump-planes", action="store_true", help="also write PGM/PBM plane images")

    ev = sub.add_parser("eval", help="write accuracy/CD/P2M reports")
    _add_run_flags(ev)
    ev.add_argument("--use-finetuned", action="store_true", help="recognize with the fine-tuned recognizer")

    ablate = sub.add_parser("ablate", help="compare VAD-only, RFD-only and full denoisers")
    _add_run_flags(ablate)
    return p


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    values = {name: getattr(args, name, None) for name in _OVERRIDES}
    if args.noise_levels is not None:
        values["noise_levels"] = parse_levels(args.noise_levels)
    return values


def run(args: argparse.Namespace, default_workers: int, default_config: Optional[str]) -> None:
    cfg = load_run_config(args.config or default_config, _overrides(args))
    workers = cfg.workers or default_workers
    logger.info("COMMAND_START command=%s seed=%d workers=%d", args.command, cfg.seed, workers)

    if args.command == "synth":
        manifest = cmd_synth(cfg, force=args.force, workers=workers)
        print(
            f"dataset {cfg.dataset_dir}: {manifest.n_identities} identities, {len(manifest.samples)} samples "
            f"({len(manifest.split(Split.TRAIN))} train / {len(manifest.split(Split.TEST))} test), "
            f"setting={manifest.setting.value}"
        )
    elif args.command == "noise":
        print(cmd_noise(cfg, workers=workers))
    elif args.command == "train":
        for path in cmd_train(args.stage, cfg, workers=workers):
            print(path)
    elif args.command == "denoise":
        print(cmd_denoise(cfg, dump_planes=args.dump_planes, workers=workers))
    elif args.command == "eval":
        for path in cmd_eval(cfg, use_finetuned=args.use_finetuned, workers=workers):
            print(path)
    elif args.command == "ablate":
        for path in cmd_ablate(cfg, workers=workers):
            print(path)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        settings = get_settings()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    logging.basicConfig(
        level=getattr(logging, settings.log_level, logging.INFO),
        format="%(asctime)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler()],
    )
    args = build_parser().parse_args(argv)

    try:
        run(args, settings.workers, settings.config_path)
    except ConfigError as exc:
        logger.error("CONFIG_ERROR %s", exc)
        return EXIT_CONFIG
    except StateError as exc:
        logger.error("STATE_ERROR stage=%s %s", exc.stage or "-", exc)
        return EXIT_STATE
    except TopFaceError as exc:
        logger.error("FAILED %s: %s", type(exc).__name__, exc)
        return EXIT_FAILURE
    logger.info("COMMAND_DONE command=%s", args.command)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
