"""XYZ text files: one ``x y z`` per line, optional ``# identity=K expression=E`` header."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from common.errors import ParseError

from .cloud import ExpressionTag, PointCloud

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _parse_header(text: str, path: PathLike, line_no: int, labels: dict) -> None:
    for token in text.split():
        if "=" not in token:
            continue
        key, _, value = token.partition("=")
        try:
            if key == "identity":
                labels["identity"] = int(value)
            elif key == "expression":
                labels["expression_tag"] = ExpressionTag(value)
        except ValueError as exc:
            raise ParseError(f"bad header field '{token}'", path=path, line=line_no) from exc


def load_xyz(path: PathLike) -> PointCloud:
    labels: dict = {}
    rows: List[List[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                _parse_header(line[1:], path, line_no, labels)
                continue
            fields = line.split()
            if len(fields) != 3:
                raise ParseError(f"expected 3 coordinates, found {len(fields)}", path=path, line=line_no)
            try:
                row = [float(v) for v in fields]
            except ValueError as exc:
                raise ParseError(f"non-numeric coordinate in '{line}'", path=path, line=line_no) from exc
            if not all(np.isfinite(row)):
                raise ParseError("non-finite coordinate", path=path, line=line_no)
            rows.append(row)
    if not rows:
        raise ParseError("file contains no points", path=path)
    return PointCloud(points=np.array(rows), **labels)


def format_header(identity: Optional[int], expression: Optional[ExpressionTag]) -> Optional[str]:
    parts = []
    if identity is not None:
        parts.append(f"identity={int(identity)}")
    if expression is not None:
        parts.append(f"expression={ExpressionTag(expression).value}")
    return "# " + " ".join(parts) if parts else None


def save_xyz(pc: PointCloud, path: PathLike) -> None:
    lines = []
    header = format_header(pc.identity, pc.expression_tag)
    if header:
        lines.append(header)
    lines.extend(f"{x:.17g} {y:.17g} {z:.17g}" for x, y, z in pc.points)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.debug("XYZ_SAVED path=%s n=%d", path, pc.n_points)
