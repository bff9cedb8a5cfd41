"""Low-level helpers for the little-endian binary model/feature files."""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np


def write_i32(fh, *values: int) -> None:
    fh.write(struct.pack("<" + "i" * len(values), *values))


def read_i32(fh, count: int) -> tuple[int, ...]:
    raw = fh.read(4 * count)
    if len(raw) != 4 * count:
        raise OSError("truncated file: expected %d bytes of header" % (4 * count))
    return struct.unpack("<" + "i" * count, raw)


def write_f64(fh, array) -> None:
    fh.write(np.ascontiguousarray(array, dtype="<f8").tobytes())


def read_f64(fh, count: int) -> np.ndarray:
    raw = fh.read(8 * count)
    if len(raw) != 8 * count:
        raise OSError("truncated file: expected %d float64 values" % count)
    return np.frombuffer(raw, dtype="<f8", count=count).astype(np.float64)


def expect_magic(fh, magic: bytes, path) -> None:
    got = fh.read(len(magic))
    if got != magic:
        raise OSError(f"{path}: bad magic {got!r}, expected {magic!r}")


def atomic_write(path, writer) -> None:
    """Write a file via a temp sibling and rename, so failures leave no partial file."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "wb") as fh:
            writer(fh)
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()
