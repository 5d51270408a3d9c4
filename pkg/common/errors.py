"""Error hierarchy shared by the library and the command-line runner.

Each class maps to one failure family; the CLI turns them into exit codes
(ConfigError → 2, StateError → 3, everything else → 1).
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union


class TopFaceError(Exception):
    """Base class for every error raised by topface."""


class ArgumentError(TopFaceError, ValueError):
    """An argument value is outside its documented domain."""


class DimensionError(ArgumentError):
    """Shapes, widths or lengths do not line up."""


class DegenerateInputError(ArgumentError):
    """Input geometry collapses (coincident points, zero-area ranges)."""


class NumericalError(TopFaceError, ArithmeticError):
    """A forward op produced NaN/Inf from finite input."""


class ParseError(TopFaceError):
    """Malformed file content."""

    def __init__(
        self,
        message: str,
        path: Optional[Union[str, Path]] = None,
        line: Optional[int] = None,
    ):
        self.path = str(path) if path is not None else None
        self.line = line
        where = ""
        if self.path is not None:
            where = f"{self.path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(f"{where}{message}")


class StateError(TopFaceError, RuntimeError):
    """A prerequisite (weights, checkpoint, training stage) is missing."""

    def __init__(self, message: str, stage: Optional[str] = None):
        self.stage = stage
        super().__init__(message)


class ConfigError(TopFaceError):
    """Run configuration is invalid or the output location is refused."""
