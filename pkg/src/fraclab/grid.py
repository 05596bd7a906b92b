"""Real-valued functions and cell sets on the dyadic torus grid.

Everything downstream works at a fixed resolution J: the circle R/Z is cut
into 2**J half-open cells [j/2**J, (j+1)/2**J), and a function is the vector
of its cell values, with the value at index j standing for the whole cell
(left-endpoint convention, shared by every module).  All displacements are
periodized, so sampling at x - P(t) wraps around the circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import PreconditionError, RangeError

MIN_RESOLUTION = 4
MAX_RESOLUTION = 22
DEFAULT_RESOLUTION = 14


def check_resolution(J: int) -> None:
    if not isinstance(J, (int, np.integer)) or not MIN_RESOLUTION <= J <= MAX_RESOLUTION:
        raise RangeError(
            f"core-grid: resolution J={J} outside [{MIN_RESOLUTION}, {MAX_RESOLUTION}]"
        )


@dataclass(frozen=True)
class GridFunction:
    """Cell values of a function on the grid of 2**resolution torus cells."""

    resolution: int
    values: np.ndarray
    is_density: bool = False

    def __post_init__(self):
        check_resolution(self.resolution)
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        n = 1 << self.resolution
        if vals.shape != (n,):
            raise PreconditionError(
                f"core-grid: expected {n} cell values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise PreconditionError("core-grid: grid values must be finite")
        if self.is_density and float(vals.min(initial=0.0)) < 0.0:
            raise PreconditionError("core-grid: a density must be nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return 1 << self.resolution

    def points(self) -> np.ndarray:
        """Left endpoints j * 2**-J of the grid cells."""
        return np.arange(self.n) / self.n

    def with_values(self, values: np.ndarray, is_density: bool = False) -> "GridFunction":
        return GridFunction(self.resolution, values, is_density)

    @classmethod
    def constant(cls, J: int, value: float = 1.0) -> "GridFunction":
        return cls(J, np.full(1 << J, float(value)), is_density=value >= 0)


@dataclass(frozen=True)
class DyadicSet:
    """Union of grid cells at resolution 2**-J, stored as sorted cell indices."""

    resolution: int
    cells: np.ndarray

    def __post_init__(self):
        check_resolution(self.resolution)
        cells = np.ascontiguousarray(self.cells, dtype=np.int64)
        if cells.ndim != 1:
            raise PreconditionError("core-grid: cell indices must be a flat array")
        if cells.size:
            if cells.min() < 0 or cells.max() >= (1 << self.resolution):
                raise PreconditionError("core-grid: cell index out of range")
            if np.any(np.diff(cells) <= 0):
                raise PreconditionError("core-grid: cell indices must be strictly increasing")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def n(self) -> int:
        return 1 << self.resolution

    @property
    def count(self) -> int:
        return int(self.cells.size)

    def density(self) -> float:
        return self.count / self.n

    def member_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.cells] = True
        return mask

    def indicator(self) -> GridFunction:
        return GridFunction(self.resolution, self.member_mask().astype(np.float64))

    @classmethod
    def from_mask(cls, J: int, mask: np.ndarray) -> "DyadicSet":
        return cls(J, np.flatnonzero(np.asarray(mask, dtype=bool)))

    @classmethod
    def random(cls, J: int, density: float, seed: int) -> "DyadicSet":
        """Uniformly random set of ceil(density * 2**J) cells; reproducible."""
        check_resolution(J)
        if not 0.0 < density <= 1.0:
            raise RangeError(f"core-grid: density {density} outside (0, 1]")
        n = 1 << J
        count = min(n, math.ceil(density * n))
        rng = np.random.default_rng(seed)
        cells = np.sort(rng.choice(n, size=count, replace=False))
        return cls(J, cells)


def integrate(f: GridFunction) -> float:
    """Riemann sum 2**-J * sum(values); exact up to one correctly-rounded sum."""
    return math.fsum(f.values) / f.n


def grid_norm(f: GridFunction, p: float) -> float:
    """L^p norm on the torus: (2**-J * sum |v|^p)^(1/p); p = inf gives the sup."""
    if p == math.inf:
        return float(np.max(np.abs(f.values), initial=0.0))
    if p <= 0:
        raise RangeError(f"core-grid: norm order p={p} must be positive")
    return float((np.sum(np.abs(f.values) ** p) / f.n) ** (1.0 / p))


def conditional_expectation(f: GridFunction, k: int) -> GridFunction:
    """Replace f on each dyadic block of 2**(J-k) cells by the block mean."""
    J = f.resolution
    if not isinstance(k, (int, np.integer)) or k < 0 or k > J:
        raise RangeError(f"core-grid: conditional expectation scale k={k} outside [0, {J}]")
    if k == J:
        return f
    block = 1 << (J - k)
    means = f.values.reshape(1 << k, block).sum(axis=1) / block
    return GridFunction(f.resolution, np.repeat(means, block), f.is_density)


def cyclic_shift(f: GridFunction, cells: int) -> GridFunction:
    """Shift the graph of f to the right by `cells` grid cells (periodized)."""
    return GridFunction(f.resolution, np.roll(f.values, cells), f.is_density)


def sample_displaced(f: GridFunction, t: float, P: Callable[[float], float]) -> GridFunction:
    """Values of x -> f((x - P(t)) mod 1) on the grid.

    The displaced point is looked up by its cell: index = floor(((x - P(t))
    mod 1) * 2**J), which for grid x reduces to a cyclic shift by
    floor(-P(t) * 2**J) cells.
    """
    shift = displacement_cells(float(P(t)), f.resolution)
    return GridFunction(f.resolution, np.roll(f.values, -shift), f.is_density)


def displacement_cells(s: float, J: int) -> int:
    """Cell offset D with f((x_j - s) mod 1) = values[(j + D) mod 2**J]."""
    return int(math.floor(-s * (1 << J)))
