from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv

from .errors import ConfigError


def _default_env_file() -> str:
    # A .env next to the working directory, so local runs need no exports.
    return str(Path.cwd() / ".env")


@dataclass(frozen=True)
class Settings:
    # Run-config JSON used when --config is not given
    config_path: str | None = None

    log_level: str = "INFO"

    # Thread fan-out for synthesis/evaluation (1 = sequential)
    workers: int = 1


def get_settings() -> Settings:
    # Load env file (if present) but still allow overriding via real environment variables.
    env_file = os.getenv("TOPFACE_ENV_FILE", _default_env_file())
    if env_file and Path(env_file).exists():
        load_dotenv(env_file, override=False)

    config_path = os.getenv("TOPFACE_CONFIG") or None
    log_level = os.getenv("TOPFACE_LOG_LEVEL", "INFO").upper()
    raw_workers = os.getenv("TOPFACE_WORKERS", "1")
    try:
        workers = max(1, int(raw_workers))
    except ValueError as exc:
        raise ConfigError(f"TOPFACE_WORKERS must be an integer, got {raw_workers!r}") from exc

    return Settings(
        config_path=config_path,
        log_level=log_level,
        workers=workers,
    )
