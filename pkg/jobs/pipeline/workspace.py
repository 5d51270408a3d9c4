"""Output directory handling: layout, single-writer lock, staged writes."""

from __future__ import annotations

import logging
import os
import shutil
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Union

from common.errors import ConfigError
from topface.schemas import Setting

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
LOCK_NAME = ".topface.lock"
STAGING_PREFIX = ".staging-"


def _level_dir(sigma2: float) -> str:
    return f"sigma2_{sigma2:g}"


@dataclass(frozen=True)
class RunLayout:
    """File names inside an output directory, relative to its root."""

    root: Path

    def recognizer(self, setting: Setting) -> Path:
        return self.root / f"recognizer_{Setting(setting).value}.tdnz"

    def recognizer_log(self, setting: Setting) -> Path:
        return self.root / f"recognizer_{Setting(setting).value}_log.csv"

    def denoiser(self, setting: Setting) -> Path:
        return self.root / f"denoiser_{Setting(setting).value}.tdnz"

    def denoiser_log(self, setting: Setting) -> Path:
        return self.root / f"denoiser_{Setting(setting).value}_log.csv"

    def finetuned(self, setting: Setting) -> Path:
        return self.root / f"recognizer_{Setting(setting).value}_finetuned.tdnz"

    def finetune_log(self, setting: Setting) -> Path:
        return self.root / f"recognizer_{Setting(setting).value}_finetune_log.csv"

    def eval_report(self, setting: Setting, suffix: str) -> Path:
        return self.root / "reports" / f"eval_{Setting(setting).value}.{suffix}"

    def ablation_report(self, setting: Setting, suffix: str) -> Path:
        return self.root / "reports" / f"ablation_{Setting(setting).value}.{suffix}"

    def ablation_variant(self, setting: Setting, variant: str) -> Path:
        return self.root / "ablation" / Setting(setting).value / f"denoiser_{variant}.tdnz"

    def noisy_cloud(self, setting: Setting, sigma2: float, sample_path: str) -> Path:
        return self.root / "noisy" / Setting(setting).value / _level_dir(sigma2) / sample_path

    def denoised_cloud(self, setting: Setting, sigma2: float, sample_path: str) -> Path:
        return self.root / "denoised" / Setting(setting).value / _level_dir(sigma2) / sample_path

    def planes_dir(self, setting: Setting, sigma2: float) -> Path:
        return self.root / "planes" / Setting(setting).value / _level_dir(sigma2)

    def rebased(self, root: Path) -> "RunLayout":
        return RunLayout(root=Path(root))


@contextmanager
def output_lock(directory: PathLike, name: str = LOCK_NAME) -> Iterator[Path]:
    """Hold ``<directory>/<name>`` for the duration of one command."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lock = directory / name
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ConfigError(f"{directory} is locked by another run (remove {lock} if stale)") from None
    try:
        os.write(fd, str(os.getpid()).encode("ascii"))
        os.close(fd)
        yield lock
    finally:
        lock.unlink(missing_ok=True)


def _merge_into(src: Path, dst: Path) -> None:
    for item in sorted(src.iterdir()):
        target = dst / item.name
        if item.is_dir():
            target.mkdir(parents=True, exist_ok=True)
            _merge_into(item, target)
        else:
            os.replace(item, target)


@contextmanager
def staged(directory: PathLike) -> Iterator[Path]:
    """A scratch directory inside ``directory`` whose contents move in on success."""
    directory = Path(directory)
    scratch = Path(tempfile.mkdtemp(prefix=STAGING_PREFIX, dir=directory))
    try:
        yield scratch
        _merge_into(scratch, directory)
        logger.debug("STAGED_COMMIT dir=%s", directory)
    finally:
        shutil.rmtree(scratch, ignore_errors=True)


def check_fresh_dir(directory: PathLike, force: bool) -> None:
    directory = Path(directory)
    if directory.exists() and not directory.is_dir():
        raise ConfigError(f"{directory} exists and is not a directory")
    if directory.is_dir() and any(directory.iterdir()) and not force:
        raise ConfigError(f"{directory} is not empty; pass --force to replace it")


@contextmanager
def staged_replacement(directory: PathLike, force: bool) -> Iterator[Path]:
    """A sibling scratch directory that replaces ``directory`` on success."""
    directory = Path(directory)
    check_fresh_dir(directory, force)
    directory.parent.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=f".{directory.name}{STAGING_PREFIX}", dir=directory.parent))
    try:
        yield scratch
        if directory.exists():
            shutil.rmtree(directory)
        os.replace(scratch, directory)
        logger.debug("STAGED_REPLACE dir=%s", directory)
    finally:
        shutil.rmtree(scratch, ignore_errors=True)
