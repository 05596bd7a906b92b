"""Cantor-type and randomized fractal measures with mass-distribution certificates.

Constructions keep exact integer bookkeeping for the cylinder structure
(base-b digit strings) and rasterize onto the dyadic grid by exact overlap:
a grid cell receives the mass of its intersection with the surviving
cylinder set, with mass uniform on that set.  Certification scans every
dyadic interval down to the grid scale; a factor-2 padding of the scanned
constant covers arbitrary intervals, since any interval is contained in
two dyadic ones of comparable length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConstructionError,
    NormalizationError,
    RangeError,
    ResourceError,
)
from .grid import DyadicSet, GridFunction, check_resolution, integrate

MAX_CYLINDERS = 1 << 22
INTEGER_BUDGET_BITS = 62


@dataclass(frozen=True)
class DigitConstruction:
    """Base-b digit restriction: keep the cylinders whose first `depth` digits
    all lie in `digits`; mass is uniform on the survivors."""

    base: int
    digits: tuple[int, ...]
    depth: int
    seed: int | None = None

    def __post_init__(self):
        if self.base < 2:
            raise ConstructionError(f"fractal-measures: base {self.base} must be >= 2")
        digits = tuple(sorted(set(int(d) for d in self.digits)))
        if not digits:
            raise ConstructionError("fractal-measures: empty digit set")
        if digits[0] < 0 or digits[-1] >= self.base:
            raise ConstructionError(
                f"fractal-measures: digits {digits} outside [0, {self.base - 1}]"
            )
        if self.depth < 1:
            raise ConstructionError(f"fractal-measures: depth {self.depth} must be >= 1")
        object.__setattr__(self, "digits", digits)

    @property
    def dimension(self) -> float:
        """Closed-form similarity dimension log|digits| / log b."""
        return math.log(len(self.digits)) / math.log(self.base)


@dataclass(frozen=True)
class FrostmanEstimate:
    """Certified pair: mu(I) <= lam * |I|^beta over all dyadic I down to 2**-J.

    `padded_lambda` (2 * lam) certifies arbitrary subintervals of the circle,
    because any interval is covered by two dyadic intervals of at most twice
    its length.
    """

    beta: float
    lam: float
    resolution: int

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise RangeError(f"fractal-measures: beta={self.beta} outside (0, 1]")

    @property
    def padded_lambda(self) -> float:
        return 2.0 * self.lam


def _check_digit_budget(base: int, depth: int, J: int) -> None:
    if depth * math.log2(base) + J > INTEGER_BUDGET_BITS:
        raise ResourceError(
            f"fractal-measures: base**depth * 2**J exceeds the {INTEGER_BUDGET_BITS}-bit "
            f"integer budget (base={base}, depth={depth}, J={J})"
        )


def cantor_measure(c: DigitConstruction, J: int) -> GridFunction:
    """Rasterized digit-restriction measure as a probability density on the grid."""
    check_resolution(J)
    b, depth = c.base, c.depth
    if len(c.digits) == b:
        return GridFunction(J, np.ones(1 << J), is_density=True)
    _check_digit_budget(b, depth, J)

    n = 1 << J
    nd = len(c.digits)
    member = np.zeros(b, dtype=bool)
    member[list(c.digits)] = True
    below = np.cumsum(member) - member  # allowed digits strictly less than d

    # Cumulative mass F(j/n) by walking the base-b digits of each boundary.
    js = np.arange(n, dtype=np.int64)  # j = n handled separately: F(1) = 1
    F = np.zeros(n + 1)
    alive = np.ones(n, dtype=bool)
    t_prev = np.zeros(n, dtype=np.int64)
    scale = 1.0
    power = np.int64(1)
    for _level in range(1, depth + 1):
        power = power * b
        t_cur = js * power // n
        d = (t_cur - t_prev * b).astype(np.int64)
        F[:n][alive] += (scale / nd) * below[d[alive]]
        alive = alive & member[d]
        scale /= nd
        t_prev = t_cur
    frac = (js * power - t_prev * n).astype(np.float64) / n
    F[:n][alive] += scale * frac[alive]
    F[n] = 1.0
    values = np.diff(F) * n
    np.maximum(values, 0.0, out=values)  # guard float dust at gap boundaries
    return GridFunction(J, values, is_density=True)


def random_digit_measure(b: int, keep: int, depth: int, seed: int, J: int) -> GridFunction:
    """At each level every surviving interval keeps a uniformly random
    `keep`-subset of its b children; mass renormalized to 1; seeded."""
    check_resolution(J)
    if b < 2:
        raise ConstructionError(f"fractal-measures: base {b} must be >= 2")
    if not 1 <= keep <= b:
        raise ConstructionError(f"fractal-measures: keep={keep} outside [1, {b}]")
    if depth < 1:
        raise ConstructionError(f"fractal-measures: depth {depth} must be >= 1")
    if keep == b:
        return GridFunction(J, np.ones(1 << J), is_density=True)
    _check_digit_budget(b, depth, J)
    if keep**depth > MAX_CYLINDERS:
        raise ResourceError(
            f"fractal-measures: keep**depth = {keep**depth} cylinders exceed {MAX_CYLINDERS}"
        )

    rng = np.random.default_rng(seed)
    starts = np.zeros(1, dtype=np.int64)
    for _level in range(depth):
        subsets = np.argsort(rng.random((starts.size, b)), axis=1)[:, :keep]
        starts = np.sort((starts[:, None] * b + subsets).ravel())
    return _rasterize_cylinders(starts, b**depth, J)


def _rasterize_cylinders(starts: np.ndarray, denom: int, J: int) -> GridFunction:
    """Uniform probability on the union of intervals [s/denom, (s+1)/denom)."""
    n = 1 << J
    count = starts.size
    js = np.arange(n + 1, dtype=np.int64)
    A = js * np.int64(denom)  # boundary positions scaled by n * denom
    ends_scaled = (starts + 1) * np.int64(n)
    starts_scaled = starts * np.int64(n)
    full = np.searchsorted(ends_scaled, A, side="right").astype(np.float64)
    pos = np.searchsorted(starts_scaled, A, side="right") - 1
    frac = np.zeros(n + 1)
    hit = pos >= 0
    inside = np.zeros(n + 1, dtype=bool)
    inside[hit] = A[hit] < ends_scaled[pos[hit]]
    frac[inside] = (A[inside] - starts_scaled[pos[inside]]) / n
    F = (full + frac) / count
    values = np.diff(F) * n
    np.maximum(values, 0.0, out=values)
    return GridFunction(J, values, is_density=True)


def frostman_constant(mu: GridFunction, beta: float) -> FrostmanEstimate:
    """Smallest constant with mu(I) <= lam |I|^beta over dyadic I at scales
    2**-1 .. 2**-J, by exhaustive scan."""
    if not 0.0 < beta <= 1.0:
        raise RangeError(f"fractal-measures: beta={beta} outside (0, 1]")
    if float(np.min(mu.values)) < 0.0:
        raise NormalizationError("fractal-measures: density must be nonnegative")
    total = integrate(mu)
    if abs(total - 1.0) > 1e-9:
        raise NormalizationError(
            f"fractal-measures: density integrates to {total!r}, expected 1"
        )
    J = mu.resolution
    n = mu.n
    lam = 0.0
    for k in range(1, J + 1):
        block = n >> k
        masses = mu.values.reshape(1 << k, block).sum(axis=1) / n
        lam = max(lam, float(masses.max()) * 2.0 ** (k * beta))
    return FrostmanEstimate(beta=beta, lam=lam, resolution=J)


def estimate_dimension(mu: GridFunction, lam_cap: float = 8.0, tol: float = 1e-4) -> FrostmanEstimate:
    """Largest beta whose padded Frostman constant stays within lam_cap
    (bisection; the scanned constant is monotone in beta)."""
    lo, hi = 0.0, 1.0
    if frostman_constant(mu, 1.0).padded_lambda <= lam_cap:
        return frostman_constant(mu, 1.0)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if frostman_constant(mu, mid).padded_lambda <= lam_cap:
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise RangeError(f"fractal-measures: no beta certifies within lam_cap={lam_cap}")
    return frostman_constant(mu, lo)


def hausdorff_content(E: DyadicSet, s: float) -> float:
    """Exact dyadic-restricted s-content by bottom-up tree dynamic programming.

    Each cell is covered either by itself or merged into an ancestor; the
    returned infimum over dyadic covers is within a constant factor of the
    unrestricted content.
    """
    if not 0.0 < s <= 1.0:
        raise RangeError(f"fractal-measures: content exponent s={s} outside (0, 1]")
    J = E.resolution
    if E.count == 0:
        return 0.0
    cost = np.where(E.member_mask(), 2.0 ** (-J * s), 0.0)
    for level in range(J - 1, -1, -1):
        merged = cost[0::2] + cost[1::2]
        own = 2.0 ** (-level * s)
        cost = np.minimum(own, merged)
        cost[merged == 0.0] = 0.0
    return float(cost[0])


def support_set(mu: GridFunction, threshold: float = 0.0) -> DyadicSet:
    """Cells carrying mass above the threshold."""
    return DyadicSet.from_mask(mu.resolution, mu.values > threshold)
