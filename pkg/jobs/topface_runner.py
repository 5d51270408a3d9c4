"""Entry point for the face pipeline; the commands live in ``jobs/pipeline``.

  jobs/pipeline/config.py     RunConfig
  jobs/pipeline/workspace.py  output layout, lock, staging
  jobs/pipeline/stages.py     the six commands
  jobs/pipeline/cli.py        argparse entry point

Run with ``python -m jobs.topface_runner <command> ...``.
"""

import sys

from .pipeline import RunConfig, load_run_config, main

__all__ = ["RunConfig", "load_run_config", "main"]

if __name__ == "__main__":
    sys.exit(main())
