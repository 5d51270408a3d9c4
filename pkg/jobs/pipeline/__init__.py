"""Pipeline package: the command-line surface over ``topface``.

Modules:
- config: RunConfig (JSON file + flag overrides, validated up front)
- workspace: output layout, lock file, staged writes
- stages: synth, noise, train, denoise, eval, ablate
- cli: argparse entry point (main) and exit codes
"""

from .config import RunConfig, load_run_config
from .stages import cmd_ablate, cmd_denoise, cmd_eval, cmd_noise, cmd_synth, cmd_train
from .cli import main

__all__ = [
    "RunConfig",
    "load_run_config",
    "cmd_synth",
    "cmd_noise",
    "cmd_train",
    "cmd_denoise",
    "cmd_eval",
    "cmd_ablate",
    "main",
]
