"""Triangle meshes and the OFF text format."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Union

import numpy as np

from common.errors import DegenerateInputError, DimensionError, ParseError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Relative area below which a face counts as degenerate.
AREA_TOLERANCE = 1e-12


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self) -> None:
        vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if faces.size and (faces.min() < 0 or faces.max() >= vertices.shape[0]):
            raise DimensionError(f"face index outside [0, {vertices.shape[0]})")
        if faces.size:
            areas = self._double_areas(vertices, faces)
            scale = max(float(np.ptp(vertices, axis=0).max()) ** 2, 1e-300)
            bad = np.flatnonzero(areas <= AREA_TOLERANCE * scale)
            if bad.size:
                raise DegenerateInputError(f"{bad.size} zero-area faces, first at index {bad[0]}")
        vertices.setflags(write=False)
        faces.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "faces", faces)

    @staticmethod
    def _double_areas(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
        a, b, c = (vertices[faces[:, i]] for i in range(3))
        return np.linalg.norm(np.cross(b - a, c - a), axis=1)

    @property
    def n_faces(self) -> int:
        return int(self.faces.shape[0])

    def triangles(self) -> np.ndarray:
        """(T, 3, 3) corner coordinates."""
        return self.vertices[self.faces]


def _content_lines(path: PathLike):
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield line_no, line


def load_off(path: PathLike) -> TriangleMesh:
    lines = _content_lines(path)
    try:
        line_no, header = next(lines)
    except StopIteration:
        raise ParseError("empty OFF file", path=path) from None
    tokens = header.split()
    if tokens[0] != "OFF":
        raise ParseError(f"expected 'OFF' header, found '{tokens[0]}'", path=path, line=line_no)
    counts = tokens[1:]
    if not counts:
        try:
            line_no, count_line = next(lines)
        except StopIteration:
            raise ParseError("missing vertex/face counts", path=path) from None
        counts = count_line.split()
    try:
        n_vertices, n_faces = int(counts[0]), int(counts[1])
    except (IndexError, ValueError) as exc:
        raise ParseError(f"bad count line '{' '.join(counts)}'", path=path, line=line_no) from exc

    vertices: List[List[float]] = []
    faces: List[List[int]] = []
    for line_no, line in lines:
        fields = line.split()
        try:
            if len(vertices) < n_vertices:
                if len(fields) < 3:
                    raise ParseError("vertex needs 3 coordinates", path=path, line=line_no)
                vertices.append([float(v) for v in fields[:3]])
            elif len(faces) < n_faces:
                if int(fields[0]) != 3 or len(fields) < 4:
                    raise ParseError("only triangular faces are supported", path=path, line=line_no)
                faces.append([int(v) for v in fields[1:4]])
            else:
                raise ParseError("unexpected content after the last face", path=path, line=line_no)
        except ValueError as exc:
            raise ParseError(f"non-numeric field in '{line}'", path=path, line=line_no) from exc
    if len(vertices) != n_vertices or len(faces) != n_faces:
        raise ParseError(
            f"expected {n_vertices} vertices and {n_faces} faces, found {len(vertices)} and {len(faces)}",
            path=path,
        )
    try:
        return TriangleMesh(vertices=np.array(vertices).reshape(-1, 3), faces=np.array(faces).reshape(-1, 3))
    except (DimensionError, DegenerateInputError) as exc:
        raise ParseError(str(exc), path=path) from exc


def save_off(mesh: TriangleMesh, path: PathLike) -> None:
    lines = ["OFF", f"{mesh.vertices.shape[0]} {mesh.n_faces} 0"]
    lines.extend(f"{x:.17g} {y:.17g} {z:.17g}" for x, y, z in mesh.vertices)
    lines.extend(f"3 {a} {b} {c}" for a, b, c in mesh.faces)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.debug("OFF_SAVED path=%s vertices=%d faces=%d", path, mesh.vertices.shape[0], mesh.n_faces)
