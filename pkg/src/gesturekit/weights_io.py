"""Bit-exact binary weight files.

Layout: magic "GKW1"; u32 LE format version; u32 LE config-JSON byte length;
the UTF-8 config JSON; then each parameter in canonical order as
(u32 name length, name bytes, u32 rank, rank x u32 dims, raw little-endian
float64 values). No padding anywhere, so save -> load round-trips every bit.
"""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path
from typing import IO

import numpy as np

from gesturekit.model import (
    ModelConfig,
    RecognizerModel,
    WEIGHT_FORMAT_VERSION,
    parameter_shapes,
)

MAGIC = b"GKW1"


class WeightFormatError(ValueError):
    """Base for unreadable or inconsistent weight files."""


class MagicError(WeightFormatError):
    pass


class VersionMismatchError(WeightFormatError):
    pass


class TruncationError(WeightFormatError):
    pass


class ShapeMismatchError(WeightFormatError):
    pass


def save_weights(model: RecognizerModel, dest: str | Path | IO[bytes]) -> None:
    if hasattr(dest, "write"):
        _write(model, dest)
        return
    with open(dest, "wb") as fh:
        _write(model, fh)


def _write(model: RecognizerModel, fh: IO[bytes]) -> None:
    config_blob = json.dumps(
        model.config.to_dict(), separators=(",", ":")
    ).encode("utf-8")
    fh.write(MAGIC)
    fh.write(struct.pack("<I", model.version))
    fh.write(struct.pack("<I", len(config_blob)))
    fh.write(config_blob)
    for name, shape in parameter_shapes(model.config):
        tensor = model.params[name]
        if tensor.shape != shape:
            raise ShapeMismatchError(
                f"parameter {name} has shape {tensor.shape}, expected {shape}"
            )
        name_bytes = name.encode("utf-8")
        fh.write(struct.pack("<I", len(name_bytes)))
        fh.write(name_bytes)
        fh.write(struct.pack("<I", tensor.ndim))
        fh.write(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
        fh.write(np.ascontiguousarray(tensor, dtype="<f8").tobytes())


def load_weights(src: str | Path | IO[bytes]) -> RecognizerModel:
    if hasattr(src, "read"):
        return _read(src)
    with open(src, "rb") as fh:
        return _read(fh)


def _take(fh: IO[bytes], n: int, what: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise TruncationError(f"file truncated while reading {what}")
    return buf


def _read(fh: IO[bytes]) -> RecognizerModel:
    magic = fh.read(4)
    if magic != MAGIC:
        raise MagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    (version,) = struct.unpack("<I", _take(fh, 4, "format version"))
    if version != WEIGHT_FORMAT_VERSION:
        raise VersionMismatchError(
            f"format version {version} unsupported (expected "
            f"{WEIGHT_FORMAT_VERSION})"
        )
    (config_len,) = struct.unpack("<I", _take(fh, 4, "config length"))
    config_blob = _take(fh, config_len, "config JSON")
    try:
        config = ModelConfig.from_dict(json.loads(config_blob.decode("utf-8")))
    except (ValueError, UnicodeDecodeError) as exc:
        raise WeightFormatError(f"bad config blob: {exc}") from exc
    params: dict[str, np.ndarray] = {}
    for expected_name, expected_shape in parameter_shapes(config):
        (name_len,) = struct.unpack(
            "<I", _take(fh, 4, f"name length of tensor {expected_name!r}")
        )
        name = _take(fh, name_len, f"name of tensor {expected_name!r}").decode(
            "utf-8"
        )
        if name != expected_name:
            raise ShapeMismatchError(
                f"tensor {name!r} out of order, expected {expected_name!r}"
            )
        (rank,) = struct.unpack("<I", _take(fh, 4, f"rank of tensor {name!r}"))
        if rank != len(expected_shape):
            raise ShapeMismatchError(
                f"tensor {name!r} has rank {rank}, expected {len(expected_shape)}"
            )
        dims = struct.unpack(f"<{rank}I", _take(fh, 4 * rank, f"dims of {name!r}"))
        if dims != expected_shape:
            raise ShapeMismatchError(
                f"tensor {name!r} has dims {dims}, config implies {expected_shape}"
            )
        count = int(np.prod(expected_shape))
        raw = _take(fh, 8 * count, f"values of tensor {name!r}")
        params[name] = (
            np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(expected_shape)
        )
    trailing = fh.read(1)
    if trailing:
        raise WeightFormatError("trailing bytes after the last tensor")
    return RecognizerModel(config=config, params=params, version=version)


def weights_bytes(model: RecognizerModel) -> bytes:
    buf = io.BytesIO()
    _write(model, buf)
    return buf.getvalue()
