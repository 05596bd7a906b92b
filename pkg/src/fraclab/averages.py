"""Multilinear polynomial averaging operators on the torus grid.

The basic object sends f_1, ..., f_m to the grid function

    x -> (1/Q) * sum_q  prod_i  f_i(x - P_i(2**-k * t_q)),   t_q = (q + 1/2)/Q,

a midpoint-rule discretization of the t-integral over [0, 1].  Sampling at a
displaced point is a cyclic cell shift, so each quadrature node contributes a
product of rolled value arrays; identical shift vectors are grouped and
weighted, which keeps the reduction order fixed and the output reproducible.

The decay probe measures how fast the L^1 size of the average collapses when
one input has no spectrum inside a ball whose radius grows like the cutoff
2**n, and fits the geometric rate.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ArityError, FitError, PreconditionError, RangeError
from .families import PolynomialFamily
from .fourier import (
    DEFAULT_KERNEL,
    KernelPair,
    fit_log2_slope,
    frequencies,
    highpass_project,
    lp_low,
    transform,
)
from .grid import GridFunction, grid_norm

logger = logging.getLogger(__name__)


def default_quadrature(J: int) -> int:
    """Default node count 4 * 2**J: the integrand is piecewise constant in t
    at grid scale, so O(1/Q) accuracy suffices."""
    return 4 << J


def _check_inputs(fam: PolynomialFamily, fs: list[GridFunction]) -> int:
    if len(fs) != fam.m:
        raise ArityError(
            f"poly-averages: family has {fam.m} polynomials but {len(fs)} inputs given"
        )
    J = fs[0].resolution
    if any(f.resolution != J for f in fs):
        raise PreconditionError("poly-averages: inputs must share one resolution")
    return J


def _accumulate(shifts: np.ndarray, values: list[np.ndarray], n: int) -> np.ndarray:
    """Sum over quadrature nodes of the product of rolled inputs.

    Nodes with identical shift vectors are merged; the merged columns are
    visited in sorted order, so the float reduction order is fixed.
    """
    cols, counts = np.unique(shifts, axis=1, return_counts=True)
    acc = np.zeros(n)
    for idx in range(cols.shape[1]):
        prod = np.roll(values[0], -int(cols[0, idx]))
        for i in range(1, len(values)):
            prod = prod * np.roll(values[i], -int(cols[i, idx]))
        acc += counts[idx] * prod
    return acc


def _shift_table(fam: PolynomialFamily, taus: np.ndarray, n: int) -> np.ndarray:
    disp = fam.evaluate(taus)  # (m, Q)
    return np.floor(-disp * n).astype(np.int64)


def average(
    fam: PolynomialFamily,
    fs: list[GridFunction],
    k: int,
    Q: int | None = None,
) -> GridFunction:
    """Midpoint-rule average over t in [0, 1] at dilation scale 2**-k.

    Parameters
    ----------
    fam : PolynomialFamily
        Displacement polynomials P_1 .. P_m.
    fs : list of GridFunction
        One input per polynomial, all at the same resolution.
    k : int
        Dilation exponent; displacements are P_i(2**-k t).
    Q : int, optional
        Quadrature nodes, default 4 * 2**J.
    """
    J = _check_inputs(fam, fs)
    if k < 0:
        raise RangeError(f"poly-averages: dilation scale k={k} must be >= 0")
    n = 1 << J
    Q = default_quadrature(J) if Q is None else int(Q)
    taus = (np.arange(Q) + 0.5) / Q * 2.0**-k
    shifts = _shift_table(fam, taus, n)
    acc = _accumulate(shifts, [f.values for f in fs], n)
    return GridFunction(J, acc / Q)


def truncated_average(
    fam: PolynomialFamily,
    fs: list[GridFunction],
    kappa: float,
    Q: int | None = None,
    skip_wrap_degenerate: bool = False,
) -> GridFunction:
    """Average over t restricted to [kappa, 1], normalized by (1 - kappa).

    With skip_wrap_degenerate, quadrature nodes where every displacement wraps
    to a whole number of turns (all cell offsets 0 mod 2**J) are dropped;
    those nodes are the periodized image of the trivial t = 0 slice.
    """
    if not 0.0 < kappa < 1.0:
        raise RangeError(f"poly-averages: truncation kappa={kappa} outside (0, 1)")
    J = _check_inputs(fam, fs)
    n = 1 << J
    Q = default_quadrature(J) if Q is None else int(Q)
    taus = kappa + (1.0 - kappa) * (np.arange(Q) + 0.5) / Q
    shifts = _shift_table(fam, taus, n)
    if skip_wrap_degenerate:
        live = (shifts % n != 0).any(axis=0)
        shifts = shifts[:, live]
    acc = _accumulate(shifts, [f.values for f in fs], n)
    return GridFunction(J, acc / Q)


def maximal_average(
    fam: PolynomialFamily,
    fs: list[GridFunction],
    K: int,
    Q: int | None = None,
) -> GridFunction:
    """Pointwise max over k = 1..K of |average at scale k|."""
    if K < 1:
        raise RangeError(f"poly-averages: maximal truncation K={K} must be >= 1")
    J = _check_inputs(fam, fs)
    out = np.zeros(1 << J)
    for k in range(1, K + 1):
        out = np.maximum(out, np.abs(average(fam, fs, k, Q).values))
    return GridFunction(J, out)


def lowfreq_factorization_error(
    fam: PolynomialFamily,
    fs: list[GridFunction],
    i: int,
    k: int,
    l: int,
    Q: int | None = None,
    support_tol: float = 1e-12,
) -> float:
    """Sup distance between the full average and the factored form that pulls
    the band-limited input i out of the integral.

    Requires the spectrum of fs[i] to vanish (below support_tol) outside
    |xi| <= 2**(k e_i - l); the error then decays like 2**-l.
    """
    J = _check_inputs(fam, fs)
    if not 0 <= i < fam.m:
        raise RangeError(f"poly-averages: input index {i} outside [0, {fam.m - 1}]")
    radius = 2.0 ** (k * fam.e[i] - l)
    s = transform(fs[i])
    outside = np.abs(frequencies(J)) > radius
    bad = np.abs(s.coeffs) > support_tol
    if np.any(outside & bad):
        offender = int(frequencies(J)[outside & bad][np.argmax(np.abs(s.coeffs[outside & bad]))])
        raise PreconditionError(
            f"poly-averages: input {i} has spectrum at xi={offender}, "
            f"outside the allowed ball |xi| <= {radius:g}"
        )
    full = average(fam, fs, k, Q)
    if fam.m == 1:
        factored = fs[i].values  # empty-product average is identically 1
    else:
        rest = average(fam.drop(i), fs[:i] + fs[i + 1 :], k, Q)
        factored = fs[i].values * rest.values
    return float(np.max(np.abs(full.values - factored)))


@dataclass(frozen=True)
class SobolevProbeResult:
    """Measured L^1 sizes of the average against the high-pass cutoff, with
    the fitted geometric decay exponent."""

    family: PolynomialFamily
    cutoffs: list[int]
    l1_norms: list[float]
    sigma_fit: float
    c_fit: float
    r_squared: float
    scale: int
    hipass_slot: int
    trials: int
    inputs: str

    def to_dict(self) -> dict:
        return {
            "family": str(self.family),
            "cutoffs": list(self.cutoffs),
            "l1_norms": list(self.l1_norms),
            "sigma_fit": self.sigma_fit,
            "c_fit": self.c_fit,
            "r_squared": self.r_squared,
            "scale": self.scale,
            "hipass_slot": self.hipass_slot,
            "trials": self.trials,
            "inputs": self.inputs,
        }


def random_test_function(J: int, rng: np.random.Generator, kernel: KernelPair = DEFAULT_KERNEL) -> GridFunction:
    """Random +-1 cell signs mollified by the scale J-2 low pass, clamped to [-1, 1]."""
    signs = rng.choice((-1.0, 1.0), size=1 << J)
    smooth = lp_low(GridFunction(J, signs), J - 2, kernel)
    return GridFunction(J, np.clip(smooth.values, -1.0, 1.0))


def _proportional_pair(fam: PolynomialFamily) -> Fraction:
    if fam.m != 2:
        raise PreconditionError(
            "poly-averages: modulated probe inputs need a two-member family"
        )
    ratio = fam.polys[1].ratio_to(fam.polys[0])
    if ratio is None:
        raise PreconditionError(
            "poly-averages: modulated probe inputs need proportional polynomials"
        )
    return ratio


def _tone_pools(fam: PolynomialFamily, J: int, radius: float, slot: int):
    """Deterministic worst-case candidates: a tone just past the cutoff in the
    high-passed slot, paired with constant or fixed low-tone companions.

    These witness the boundary decay of the averaging multiplier, which the
    max-over-trials aggregation is meant to capture; random draws alone sit
    on a flat decorrelation floor at desk resolutions.
    """
    n = 1 << J
    x = np.arange(n) / n
    half = n >> 1
    companions = [None, 8, -16]
    for offset in (1, 2, 3):
        xi = int(math.floor(radius)) + offset
        if xi >= half:
            continue
        tone = GridFunction(J, np.cos(2.0 * np.pi * xi * x))
        for comp in companions[: 1 if fam.m == 1 else len(companions)]:
            fs = []
            for i in range(fam.m):
                if i == slot:
                    fs.append(tone)
                elif comp is None:
                    fs.append(GridFunction.constant(J, 1.0))
                else:
                    fs.append(GridFunction(J, np.cos(2.0 * np.pi * comp * x)))
            yield fs


def _modulated_inputs(fam: PolynomialFamily, J: int, radius: float) -> list[GridFunction] | None:
    """Tone pair cos(2 pi xi_1 x), cos(2 pi xi_2 x) with xi_1 P_1 + xi_2 P_2 = 0.

    The product's t-free cross term survives every average unchanged, so the
    measured size cannot decay with the cutoff.  Returns None when the tones
    would not fit in the spectrum.
    """
    ratio = _proportional_pair(fam)  # P_2 = ratio * P_1
    p, q = ratio.numerator, ratio.denominator
    r = int(math.floor(radius / abs(p))) + 1
    xi1, xi2 = p * r, -q * r
    half = 1 << (J - 1)
    if abs(xi1) <= radius or max(abs(xi1), abs(xi2)) >= half:
        return None
    x = np.arange(1 << J) / (1 << J)
    f1 = GridFunction(J, np.cos(2.0 * np.pi * xi1 * x))
    f2 = GridFunction(J, np.cos(2.0 * np.pi * xi2 * x))
    return [f1, f2]


def sobolev_probe(
    fam: PolynomialFamily,
    J: int,
    cutoffs: list[int],
    trials: int,
    seed: int,
    scale: int = 1,
    hipass_slot: int | None = None,
    inputs: str = "random",
    Q: int | None = None,
    kernel: KernelPair = DEFAULT_KERNEL,
) -> SobolevProbeResult:
    """Fit the decay of max-over-trials ||average||_1 against the cutoff.

    For each cutoff exponent n the probe zeroes the spectrum of one input on
    the ball |xi| <= 2**n * 2**(scale * e_i), evaluates the scale-`scale`
    average, and records the worst L^1 size over the trials;
    sigma_fit is minus the fitted slope of log2(size) against n.

    inputs = "random" draws clamped mollified sign patterns; "tone" probes the
    deterministic boundary-tone pool; "modulated" builds the adversarial tone
    pair for a non-curved proportional family.
    """
    if not fam.relatively_curved():
        logger.warning(
            "probe family {%s} is not relatively curved; decay may be absent", fam
        )
    if inputs not in ("random", "tone", "modulated"):
        raise RangeError(f"poly-averages: unknown probe input mode {inputs!r}")
    slot = int(np.argmin(fam.e)) if hipass_slot is None else hipass_slot
    if not 0 <= slot < fam.m:
        raise RangeError(f"poly-averages: high-pass slot {slot} outside [0, {fam.m - 1}]")
    half = 1 << (J - 1)
    usable, skipped = [], []
    for n_cut in cutoffs:
        radius = 2.0**n_cut * 2.0 ** (scale * fam.e[slot])
        (usable if radius <= half / 2 else skipped).append(int(n_cut))
    if skipped:
        logger.warning("probe cutoffs %s skipped: high-pass ball leaves no spectrum", skipped)
    if len(usable) < 3:
        raise FitError(
            f"poly-averages: only {len(usable)} usable cutoffs at J={J}; need >= 3"
        )

    rng = np.random.default_rng(seed)
    norms = []
    effective_trials = trials if inputs == "random" else 1
    for n_cut in usable:
        radius = 2.0**n_cut * 2.0 ** (scale * fam.e[slot])
        worst = 0.0
        if inputs == "tone":
            pools = list(_tone_pools(fam, J, radius, slot))
            if not pools:
                raise FitError(
                    f"poly-averages: no boundary tone fits at cutoff 2**{n_cut}, J={J}"
                )
            for fs in pools:
                worst = max(worst, grid_norm(average(fam, fs, scale, Q), 1))
        else:
            for _ in range(effective_trials):
                if inputs == "random":
                    fs = [random_test_function(J, rng, kernel) for _ in range(fam.m)]
                    fs[slot] = highpass_project(fs[slot], radius)
                else:
                    fs = _modulated_inputs(fam, J, radius)
                    if fs is None:
                        raise FitError(
                            f"poly-averages: modulated tones do not fit at cutoff 2**{n_cut}, J={J}"
                        )
                B = average(fam, fs, scale, Q)
                worst = max(worst, grid_norm(B, 1))
        norms.append(worst)

    xs = np.asarray(usable, dtype=float)
    ys = np.log2(np.maximum(norms, 1e-300))
    slope, intercept, r2 = fit_log2_slope(xs, ys)
    return SobolevProbeResult(
        family=fam,
        cutoffs=usable,
        l1_norms=norms,
        sigma_fit=-slope,
        c_fit=intercept,
        r_squared=r2,
        scale=scale,
        hipass_slot=slot,
        trials=effective_trials,
        inputs=inputs,
    )
