"""Trilinear counting forms for generalized three-term progressions
{x, x - theta_1 t, x - theta_2 t} with rational dilates.

The central form is

    T(h, g, g') = integral integral h((theta_2 x - theta_1 t)/(theta_2 -
                  theta_1)) g(x) g'(t) dx dt,

evaluated two independent ways: a physical-side double Riemann sum over the
grid, and a frequency-side sum.  Writing theta_2/(theta_2-theta_1) = A2/D
and theta_1/(theta_2-theta_1) = A1/D in lowest common-denominator form, the
argument of h at grid points lands on the refined grid of D * 2**J points,
so with h expanded in the refined spectrum and g, g' as zero-padded
exponential sums, the two sides agree to rounding:

    T = sum_{xi'} h_hat_D(xi') * G((-A2 xi') mod DN) * G'((A1 xi') mod DN).

Level decompositions, diagonal-mass sweeps, and the combined certificate are
built from this one evaluation path.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import (
    DegeneratePairError,
    NormalizationError,
    PreconditionError,
    RangeError,
    ResourceError,
)
from .fourier import (
    DEFAULT_KERNEL,
    DecayProfile,
    KernelPair,
    Spectrum,
    decay_profile,
    fit_log2_slope,
    frequencies,
    inverse,
    lowpass_extended,
    lp_piece,
)
from .grid import GridFunction, integrate
from .measures import FrostmanEstimate

logger = logging.getLogger(__name__)

MAX_REFINED_POINTS = 1 << 22
DEFAULT_DELTAS = tuple(2.0**-a for a in range(3, 10))


@dataclass(frozen=True)
class ThetaPair:
    """Two distinct nonzero rationals from Q_M = (union_{q <= M} Z/q) cap [-M, M]."""

    theta1: Fraction
    theta2: Fraction
    M: int = 4

    def __post_init__(self):
        t1, t2 = Fraction(self.theta1), Fraction(self.theta2)
        object.__setattr__(self, "theta1", t1)
        object.__setattr__(self, "theta2", t2)
        if self.M < 1:
            raise RangeError(f"roth-forms: M={self.M} must be >= 1")
        if t1 == t2:
            raise DegeneratePairError("roth-forms: theta1 = theta2 degenerates the pattern")
        for name, t in (("theta1", t1), ("theta2", t2)):
            if t == 0:
                raise PreconditionError(f"roth-forms: {name} must be nonzero")
            if t.denominator > self.M or abs(t) > self.M:
                raise PreconditionError(
                    f"roth-forms: {name}={t} outside Q_M for M={self.M}"
                )

    @property
    def refinement(self) -> tuple[int, int, int]:
        """(D, A1, A2) with theta_i/(theta2-theta1) = A_i/D in lowest terms."""
        spread = self.theta2 - self.theta1
        r1 = self.theta1 / spread
        r2 = self.theta2 / spread
        D = math.lcm(r1.denominator, r2.denominator)
        return D, int(r1 * D), int(r2 * D)

    @classmethod
    def parse(cls, text: str, M: int = 4) -> "ThetaPair":
        parts = text.split(",")
        if len(parts) != 2:
            raise PreconditionError(f"roth-forms: expected 'a,b' rationals, got {text!r}")
        return cls(Fraction(parts[0].strip()), Fraction(parts[1].strip()), M)


def _refined_length(J: int, D: int) -> int:
    length = D << J
    if length > MAX_REFINED_POINTS:
        needed = J + math.ceil(math.log2(D))
        raise ResourceError(
            f"roth-forms: refinement needs a 2**{needed}-point spectrum, "
            f"over the {MAX_REFINED_POINTS}-point budget"
        )
    return length


def _fine_spectrum(h: GridFunction, D: int) -> np.ndarray:
    """DFT over D * 2**J points of h viewed on the refined grid."""
    length = _refined_length(h.resolution, D)
    up = np.repeat(h.values, D)
    return np.fft.fft(up) / length


def _padded_exponential_sum(g: GridFunction, D: int) -> np.ndarray:
    """2**-J sum_j g_j e(-m j / (D 2**J)) for m = 0 .. D*2**J - 1."""
    length = _refined_length(g.resolution, D)
    buf = np.zeros(length)
    buf[: g.n] = g.values
    return np.fft.fft(buf) / g.n


def lambda_trilinear(h: GridFunction, g2: GridFunction, g3: GridFunction, th: ThetaPair) -> float:
    """Frequency-side evaluation of T(h, g2, g3); exact dual of the grid sum."""
    if not (h.resolution == g2.resolution == g3.resolution):
        raise PreconditionError("roth-forms: slots must share one resolution")
    D, A1, A2 = th.refinement
    length = _refined_length(h.resolution, D)
    H = _fine_spectrum(h, D)
    M2 = _padded_exponential_sum(g2, D)
    M3 = _padded_exponential_sum(g3, D)
    xi = np.arange(length, dtype=np.int64)
    val = np.sum(H * M2[(-A2 * xi) % length] * M3[(A1 * xi) % length])
    if abs(val.imag) > 1e-8 * max(1.0, abs(val.real)):
        raise AssertionError(f"roth-forms: trilinear sum has imaginary dust {val.imag:g}")
    return float(val.real)


def _check_probability(mu: GridFunction) -> None:
    if float(np.min(mu.values)) < 0.0:
        raise NormalizationError("roth-forms: measure density must be nonnegative")
    total = integrate(mu)
    if abs(total - 1.0) > 1e-9:
        raise NormalizationError(f"roth-forms: density integrates to {total!r}, expected 1")


def lambda_physical(
    h: GridFunction, mu: GridFunction, th: ThetaPair, chunk: int = 256
) -> float:
    """Double Riemann sum of h((theta2 x - theta1 t)/(theta2 - theta1)) d mu d mu.

    The lookup index is computed in exact integer arithmetic on the refined
    grid, so the value is bit-reproducible and dual to `lambda_fourier`.
    """
    if h.resolution != mu.resolution:
        raise PreconditionError("roth-forms: h and mu must share one resolution")
    _check_probability(mu)
    D, A1, A2 = th.refinement
    n = mu.n
    length = _refined_length(mu.resolution, D)
    hv, mv = h.values, mu.values
    ks = np.arange(n, dtype=np.int64)
    col = (-A1 * ks) % length
    total = 0.0
    for start in range(0, n, chunk):
        rows = np.arange(start, min(start + chunk, n), dtype=np.int64)
        fine = ((A2 * rows)[:, None] + col[None, :]) % length
        cells = fine // D
        # elementwise product + pairwise sum: reduction order is fixed,
        # independent of any BLAS threading
        row_sums = (hv[cells] * mv[None, :]).sum(axis=1)
        total += float((mv[rows] * row_sums).sum())
    return total / (n * n)


def lambda_fourier(
    mu: GridFunction,
    th: ThetaPair,
    l: int | None = None,
    kernel: KernelPair = DEFAULT_KERNEL,
) -> float:
    """Frequency-side form with h = mu, or mu's level-l annulus piece."""
    _check_probability(mu)
    if l is None:
        h = mu
    else:
        if not 1 <= l <= mu.resolution - 1:
            raise RangeError(
                f"roth-forms: level l={l} outside [1, {mu.resolution - 1}]"
            )
        h = lp_piece(mu, l - 1, kernel)
    return lambda_trilinear(h, mu, mu, th)


def lambda_level(
    mu: GridFunction, th: ThetaPair, l: int, kernel: KernelPair = DEFAULT_KERNEL
) -> float:
    """Sum of the trilinear form over piece triples whose top level equals l.

    Levels label annuli |xi| ~ 2**l (piece index l-1); level sums telescope
    exactly: T(mu,mu,mu) = T(low_l0 cubes) + sum_{l > l0} lambda_level(l).
    """
    if not 1 <= l <= mu.resolution - 1:
        raise RangeError(f"roth-forms: level l={l} outside [1, {mu.resolution - 1}]")
    q = lp_piece(mu, l - 1, kernel)
    S_cur = lowpass_extended(mu, l, kernel)
    S_prev = lowpass_extended(mu, l - 1, kernel)
    return (
        lambda_trilinear(q, S_cur, S_cur, th)
        + lambda_trilinear(S_prev, q, S_cur, th)
        + lambda_trilinear(S_prev, S_prev, q, th)
    )


@lru_cache(maxsize=8)
def _chi_hat_table(samples: int = 4097) -> tuple[np.ndarray, np.ndarray]:
    """Autocorrelation of the low-pass profile on a fine grid of arguments.

    chi is the squared inverse transform of the profile, so chi >= 0 and
    chi_hat = profile (*) profile is supported on |eta| <= 4.
    """
    s = np.linspace(-2.0, 2.0, samples)
    phi = DEFAULT_KERNEL.phi_hat(s)
    eta = np.linspace(-4.0, 4.0, 2 * samples - 1)
    ds = s[1] - s[0]
    vals = np.convolve(phi, phi) * ds
    return eta, vals


def default_chi_hat(eta) -> np.ndarray:
    """Compactly supported nonnegative-profile transform, |eta| <= 4."""
    grid, vals = _chi_hat_table()
    eta = np.asarray(eta, dtype=np.float64)
    out = np.interp(eta, grid, vals, left=0.0, right=0.0)
    out[np.abs(eta) >= 4.0] = 0.0
    return out


def chi_bump(J: int, delta: float, chi_hat=None) -> GridFunction:
    """Periodized bump concentrated at width delta around t = 0 (== 1), with
    spectrum delta * chi_hat(delta xi), compactly supported."""
    if not 0.0 < delta < 0.25:
        raise RangeError(f"roth-forms: delta={delta} outside (0, 1/4)")
    chi_hat = default_chi_hat if chi_hat is None else chi_hat
    half = 1 << (J - 1)
    if delta * half < 4.0:
        raise RangeError(
            f"roth-forms: delta={delta} too small for J={J}; "
            f"the bump spectrum needs |xi| up to {4.0 / delta:g}"
        )
    xi = frequencies(J).astype(np.float64)
    coeffs = delta * np.asarray(chi_hat(delta * xi), dtype=np.complex128)
    vals = inverse(Spectrum(J, coeffs)).values
    return GridFunction(J, np.maximum(vals, 0.0))


@dataclass(frozen=True)
class DiagonalMassSplit:
    total: float
    low: float
    tail: list[tuple[int, float]]
    l0: int
    kappa: float


def diagonal_mass_split(
    mu: GridFunction,
    th: ThetaPair,
    delta: float,
    beta: float,
    kernel: KernelPair = DEFAULT_KERNEL,
    chi_hat=None,
) -> DiagonalMassSplit:
    """T(chi_delta * mu, mu, mu) with the low/tail split at the scale
    2**-l0 = delta**((beta - kappa)/(1 - beta)), kappa = min(0.1, 2 beta - 1 - 0.01)."""
    _check_probability(mu)
    if beta <= 0.5:
        raise PreconditionError(
            f"roth-forms: diagonal split needs beta > 1/2, got beta={beta}"
        )
    J = mu.resolution
    chi = chi_bump(J, delta, chi_hat)
    kappa = min(0.1, 2.0 * beta - 1.0 - 0.01)
    if beta >= 1.0:
        l0 = J - 1
    else:
        l0 = math.ceil((beta - kappa) / (1.0 - beta) * math.log2(1.0 / delta))
        l0 = min(max(l0, 1), J - 1)
    total = lambda_trilinear(
        GridFunction(J, chi.values * mu.values), mu, mu, th
    )
    low_part = lowpass_extended(mu, l0, kernel)
    low = lambda_trilinear(GridFunction(J, chi.values * low_part.values), mu, mu, th)
    tail = []
    for l in range(l0 + 1, J):
        piece = lp_piece(mu, l - 1, kernel)
        tail.append(
            (l, lambda_trilinear(GridFunction(J, chi.values * piece.values), mu, mu, th))
        )
    logger.debug(
        "diagonal mass at delta=%.3g: total %.3e = low %.3e + tail %.3e (l0=%d)",
        delta, total, low, sum(v for _, v in tail), l0,
    )
    return DiagonalMassSplit(total=total, low=low, tail=tail, l0=l0, kappa=kappa)


def diagonal_mass(
    mu: GridFunction,
    th: ThetaPair,
    delta: float,
    beta: float,
    kernel: KernelPair = DEFAULT_KERNEL,
    chi_hat=None,
) -> float:
    return diagonal_mass_split(mu, th, delta, beta, kernel, chi_hat).total


@dataclass(frozen=True)
class CertificateChecks:
    decay_ok: bool          # fitted c0 exceeds (1 - beta)/4
    tail_ok: bool           # sum |level terms| below half the total
    diagonal_ok: bool       # smallest-delta diagonal mass below half the total
    c0_fit: float
    c0_threshold: float
    diag_slope: float | None

    @property
    def passed(self) -> bool:
        return self.decay_ok and self.tail_ok and self.diagonal_ok


@dataclass(frozen=True)
class RothReport:
    lambda_total: float
    lambda_low: float
    low_sup: float
    l0: int
    tail: list[tuple[int, float]]
    diagonal: list[tuple[float, float]]
    checks: CertificateChecks
    profile: DecayProfile

    @property
    def certificate(self) -> bool:
        return self.checks.passed

    def to_dict(self) -> dict:
        return {
            "lambda_total": self.lambda_total,
            "lambda_low": self.lambda_low,
            "low_sup": self.low_sup,
            "l0": self.l0,
            "tail": [[l, v] for l, v in self.tail],
            "diagonal": [[d, v] for d, v in self.diagonal],
            "certificate": {
                "passed": self.checks.passed,
                "decay_ok": self.checks.decay_ok,
                "tail_ok": self.checks.tail_ok,
                "diagonal_ok": self.checks.diagonal_ok,
                "c0_fit": self.checks.c0_fit,
                "c0_threshold": self.checks.c0_threshold,
                "diag_slope": self.checks.diag_slope,
            },
        }


def roth_certificate(
    mu: GridFunction,
    frost: FrostmanEstimate,
    th: ThetaPair,
    l0: int = 4,
    deltas: tuple[float, ...] = DEFAULT_DELTAS,
    kernel: KernelPair = DEFAULT_KERNEL,
) -> RothReport:
    """Combined empirical witness that the support holds a nontrivial pattern.

    Passes iff (a) the fitted annulus decay clears (1 - beta)/4, (b) the
    level tail sums to under half the total form, and (c) the diagonal mass
    at the smallest tested delta stays under half the total.
    """
    _check_probability(mu)
    J = mu.resolution
    if not 1 <= l0 <= J - 2:
        raise RangeError(f"roth-forms: l0={l0} outside [1, {J - 2}]")
    total = lambda_fourier(mu, th, kernel=kernel)
    low_part = lowpass_extended(mu, l0, kernel)
    # Low-cubes main term; the level sums above l0 telescope up to the total.
    lambda_low = lambda_trilinear(low_part, low_part, low_part, th)
    tail = [(l, lambda_level(mu, th, l, kernel)) for l in range(l0 + 1, J)]
    usable_deltas = [d for d in deltas if d * (1 << (J - 1)) >= 4.0]
    diag = [(d, diagonal_mass(mu, th, d, frost.beta, kernel)) for d in usable_deltas]
    diag_slope = None
    positives = [(d, v) for d, v in diag if v > 1e-300]
    if len(positives) >= 2:
        xs = np.log2([d for d, _ in positives])
        ys = np.log2([v for _, v in positives])
        diag_slope, _, _ = fit_log2_slope(xs, ys)

    profile = decay_profile(mu, J - 2, frost)
    threshold = (1.0 - frost.beta) / 4.0
    decay_ok = profile.c0_l4 > threshold
    tail_ok = sum(abs(v) for _, v in tail) < 0.5 * total if total > 0 else False
    diagonal_ok = bool(diag) and diag[-1][1] < 0.5 * total
    checks = CertificateChecks(
        decay_ok=decay_ok,
        tail_ok=tail_ok,
        diagonal_ok=diagonal_ok,
        c0_fit=profile.c0_l4,
        c0_threshold=threshold,
        diag_slope=diag_slope,
    )
    return RothReport(
        lambda_total=total,
        lambda_low=lambda_low,
        low_sup=float(np.max(low_part.values)),
        l0=l0,
        tail=tail,
        diagonal=diag,
        checks=checks,
        profile=profile,
    )
