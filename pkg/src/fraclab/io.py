"""Binary file formats for grid functions and dyadic sets.

Grid function file: 8-byte magic "FRACGRID", J as unsigned 32-bit
little-endian, then 2**J little-endian float64 values.  Dyadic set file:
magic "FRACDSET", J, cell count (both uint32 LE), then the sorted cell
indices as uint32 LE.  Writes are atomic (temp file in the target
directory, then rename).
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .grid import DyadicSet, GridFunction

GRID_MAGIC = b"FRACGRID"
SET_MAGIC = b"FRACDSET"


def write_bytes_atomic(path: str | Path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text_atomic(path: str | Path, text: str) -> None:
    write_bytes_atomic(path, text.encode("utf-8"))


def grid_function_bytes(f: GridFunction) -> bytes:
    payload = np.asarray(f.values, dtype="<f8").tobytes()
    return GRID_MAGIC + struct.pack("<I", f.resolution) + payload


def write_grid_function(path: str | Path, f: GridFunction) -> None:
    write_bytes_atomic(path, grid_function_bytes(f))


def read_grid_function(path: str | Path, is_density: bool = False) -> GridFunction:
    raw = Path(path).read_bytes()
    if raw[:8] != GRID_MAGIC:
        raise ConfigError(f"{path}: bad magic, expected FRACGRID")
    (J,) = struct.unpack("<I", raw[8:12])
    n = 1 << J
    expected = 12 + 8 * n
    if len(raw) != expected:
        raise ConfigError(f"{path}: expected {expected} bytes for J={J}, got {len(raw)}")
    values = np.frombuffer(raw[12:], dtype="<f8").astype(np.float64)
    return GridFunction(J, values, is_density=is_density)


def dyadic_set_bytes(E: DyadicSet) -> bytes:
    payload = np.asarray(E.cells, dtype="<u4").tobytes()
    return SET_MAGIC + struct.pack("<II", E.resolution, E.count) + payload


def write_dyadic_set(path: str | Path, E: DyadicSet) -> None:
    write_bytes_atomic(path, dyadic_set_bytes(E))


def read_dyadic_set(path: str | Path) -> DyadicSet:
    raw = Path(path).read_bytes()
    if raw[:8] != SET_MAGIC:
        raise ConfigError(f"{path}: bad magic, expected FRACDSET")
    J, count = struct.unpack("<II", raw[8:16])
    expected = 16 + 4 * count
    if len(raw) != expected:
        raise ConfigError(f"{path}: expected {expected} bytes for count={count}, got {len(raw)}")
    cells = np.frombuffer(raw[16:], dtype="<u4").astype(np.int64)
    return DyadicSet(J, cells)
