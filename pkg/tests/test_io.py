import struct

import numpy as np
import pytest

from fraclab.errors import ConfigError
from fraclab.grid import DyadicSet, GridFunction
from fraclab.io import (
    GRID_MAGIC,
    SET_MAGIC,
    grid_function_bytes,
    read_dyadic_set,
    read_grid_function,
    write_dyadic_set,
    write_grid_function,
)


def test_grid_function_round_trip(tmp_path):
    f = GridFunction(8, np.random.default_rng(0).random(256))
    path = tmp_path / "f.grid"
    write_grid_function(path, f)
    g = read_grid_function(path)
    assert g.resolution == 8
    assert np.array_equal(g.values, f.values)


def test_grid_function_byte_layout():
    f = GridFunction(4, np.arange(16, dtype=float))
    raw = grid_function_bytes(f)
    assert raw[:8] == GRID_MAGIC == b"FRACGRID"
    assert struct.unpack("<I", raw[8:12]) == (4,)
    assert struct.unpack("<d", raw[12:20]) == (0.0,)
    assert len(raw) == 12 + 16 * 8


def test_dyadic_set_round_trip(tmp_path):
    E = DyadicSet.random(10, 0.2, 5)
    path = tmp_path / "E.dset"
    write_dyadic_set(path, E)
    F = read_dyadic_set(path)
    assert F.resolution == 10
    assert np.array_equal(F.cells, E.cells)
    raw = path.read_bytes()
    assert raw[:8] == SET_MAGIC == b"FRACDSET"
    assert struct.unpack("<II", raw[8:16]) == (10, E.count)


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "junk.grid"
    path.write_bytes(b"NOTMAGIC" + b"\x00" * 100)
    with pytest.raises(ConfigError):
        read_grid_function(path)
    with pytest.raises(ConfigError):
        read_dyadic_set(path)


def test_truncated_payload_rejected(tmp_path):
    f = GridFunction(6, np.zeros(64))
    path = tmp_path / "f.grid"
    write_grid_function(path, f)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ConfigError):
        read_grid_function(path)
