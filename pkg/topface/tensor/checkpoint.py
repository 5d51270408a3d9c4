"""Flat binary parameter container.

Layout: magic ``TDNZ1`` followed by records until end of file. Each record is
name length (uint32 LE), UTF-8 name bytes, rank (uint32 LE), rank dims
(uint64 LE each) and the float64 LE payload in row-major order.
"""

from __future__ import annotations

import logging
import struct
from pathlib import Path
from typing import Dict, Mapping, Union

import numpy as np

from common.errors import ParseError

from .module import Module

logger = logging.getLogger(__name__)

MAGIC = b"TDNZ1"

PathLike = Union[str, Path]


def encode_checkpoint(arrays: Mapping[str, np.ndarray]) -> bytes:
    chunks = [MAGIC]
    for name, array in arrays.items():
        array = np.ascontiguousarray(array, dtype="<f8")
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<I", array.ndim))
        chunks.append(struct.pack(f"<{array.ndim}Q", *array.shape))
        chunks.append(array.tobytes())
    return b"".join(chunks)


def decode_checkpoint(blob: bytes, source: str = "<bytes>") -> Dict[str, np.ndarray]:
    if not blob.startswith(MAGIC):
        raise ParseError("missing TDNZ1 header", path=source)
    arrays: Dict[str, np.ndarray] = {}
    pos = len(MAGIC)
    try:
        while pos < len(blob):
            (name_len,) = struct.unpack_from("<I", blob, pos)
            pos += 4
            name = blob[pos : pos + name_len].decode("utf-8")
            if len(name.encode("utf-8")) != name_len:
                raise ParseError("truncated parameter name", path=source)
            pos += name_len
            (rank,) = struct.unpack_from("<I", blob, pos)
            pos += 4
            dims = struct.unpack_from(f"<{rank}Q", blob, pos)
            pos += 8 * rank
            count = int(np.prod(dims, dtype=np.int64)) if rank else 1
            end = pos + 8 * count
            if end > len(blob):
                raise ParseError(f"truncated payload for '{name}'", path=source)
            arrays[name] = np.frombuffer(blob[pos:end], dtype="<f8").astype(np.float64).reshape(dims)
            pos = end
    except struct.error as exc:
        raise ParseError(f"truncated record: {exc}", path=source) from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"parameter name is not UTF-8: {exc}", path=source) from exc
    return arrays


def save_checkpoint(arrays: Mapping[str, np.ndarray], path: PathLike) -> None:
    Path(path).write_bytes(encode_checkpoint(arrays))
    logger.info("CHECKPOINT_SAVED path=%s params=%d", path, len(arrays))


def load_checkpoint(path: PathLike) -> Dict[str, np.ndarray]:
    arrays = decode_checkpoint(Path(path).read_bytes(), source=str(path))
    logger.info("CHECKPOINT_LOADED path=%s params=%d", path, len(arrays))
    return arrays


def save_modules(modules: Mapping[str, Module], path: PathLike) -> None:
    """Save several networks into one container under their name prefixes."""
    arrays: Dict[str, np.ndarray] = {}
    for prefix, module in modules.items():
        arrays.update(module.state_dict(prefix))
    save_checkpoint(arrays, path)
