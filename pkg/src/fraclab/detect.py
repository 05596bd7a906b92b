"""Direct search for polynomial-pattern witnesses inside dyadic sets.

A witness is a pair (x, t) with every point x - P_i(t), and x itself,
landing in cells of the set; t is kept away from 0 by scanning only
t in [kappa, 1], so every reported pattern is nontrivial by construction.
The scan is exhaustive and returns the lexicographically first hit in
(x, t); every returned witness is re-verified by an independent scalar
membership check before it leaves the module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .averages import truncated_average
from .errors import PreconditionError, RangeError
from .families import PolynomialFamily
from .grid import DyadicSet, GridFunction, integrate

__all__ = ["Witness", "detect", "average_certificate", "default_kappa", "margin_in_cells"]


def default_kappa(J: int) -> float:
    """Truncation 2**(-J/2): excludes trivial near-zero t at the grid's own
    separation scale."""
    return 2.0 ** (-J / 2)


@dataclass(frozen=True)
class Witness:
    x: float
    t: float
    points: tuple[float, ...]
    resolution: int
    margin: float  # distance from the witness cells to the set's complement, in cells

    def cells(self) -> tuple[int, ...]:
        n = 1 << self.resolution
        return tuple(int(math.floor((p % 1.0) * n)) for p in self.points)

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "t": self.t,
            "points": list(self.points),
            "resolution": self.resolution,
            "margin": self.margin,
        }


def _scalar_membership(
    E: DyadicSet, fam: PolynomialFamily, x: float, t: float
) -> tuple[bool, tuple[float, ...]]:
    """Pure-scalar recheck of the witness cells, independent of the scan path."""
    n = 1 << E.resolution
    members = set(int(c) for c in E.cells)
    points = [x % 1.0]
    for p in fam.polys:
        points.append((x - p(t)) % 1.0)
    ok = all(int(math.floor(pt * n)) % n in members for pt in points)
    return ok, tuple(points)


def margin_in_cells(E: DyadicSet, cell: int) -> int:
    """Circular distance from a member cell to the nearest complement cell,
    minus one; a set filling the whole circle gets the full circumference."""
    n = E.n
    mask = E.member_mask()
    if mask.all():
        return n
    non_members = np.flatnonzero(~mask)
    idx = np.searchsorted(non_members, cell)
    right = non_members[idx % non_members.size]
    left = non_members[idx - 1]
    d_right = (right - cell) % n
    d_left = (cell - left) % n
    return int(min(d_right, d_left)) - 1


def detect(
    E: DyadicSet,
    fam: PolynomialFamily,
    kappa: float,
    t_grid: int,
) -> Witness | None:
    """Exhaustive scan over x in E's cells and t on a uniform t_grid-point
    grid over [kappa, 1]; first witness in lexicographic (x, t) order."""
    if not 0.0 < kappa < 1.0:
        raise RangeError(f"progression-detect: kappa={kappa} outside (0, 1)")
    if t_grid < 1:
        raise RangeError(f"progression-detect: t_grid={t_grid} must be >= 1")
    n = E.n
    if E.count == 0:
        return None
    if t_grid == 1:
        ts = np.array([kappa])
    else:
        ts = kappa + (1.0 - kappa) * np.arange(t_grid) / (t_grid - 1)
    shifts = np.floor(-fam.evaluate(ts) * n).astype(np.int64)  # (m, t_grid)
    # Nodes where every displacement wraps to a whole number of turns are the
    # periodized image of the trivial t = 0 slice; they cannot witness anything.
    admissible = (shifts % n != 0).any(axis=0)
    mask = E.member_mask()
    for cell in E.cells:
        hit = mask[(int(cell) + shifts) % n].all(axis=0) & admissible
        if hit.any():
            r = int(np.argmax(hit))
            x = float(cell) / n
            t = float(ts[r])
            ok, points = _scalar_membership(E, fam, x, t)
            if not ok:
                raise AssertionError(
                    "progression-detect: witness failed independent re-verification"
                )
            witness_cells = [int(cell)] + [
                int(math.floor(p * n)) % n for p in points[1:]
            ]
            margin = min(margin_in_cells(E, c) for c in witness_cells)
            return Witness(
                x=x, t=t, points=points, resolution=E.resolution, margin=float(margin)
            )
    return None


def average_certificate(
    E: DyadicSet,
    fam: PolynomialFamily,
    kappa: float,
    Q: int | None = None,
) -> float:
    """Pairing of the normalized set density f against its own truncated
    average: a strictly positive value certifies detectable patterns."""
    if E.count == 0:
        raise PreconditionError("progression-detect: certificate needs a nonempty set")
    n = E.n
    density = E.member_mask().astype(np.float64) * (n / E.count)
    f = GridFunction(E.resolution, density, is_density=True)
    B = truncated_average(fam, [f] * fam.m, kappa, Q, skip_wrap_degenerate=True)
    return integrate(GridFunction(E.resolution, f.values * B.values))
