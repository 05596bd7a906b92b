"""Discrete Fourier analysis on the torus grid.

Conventions.  Frequencies are the integers xi in {-2**(J-1), ...,
2**(J-1)-1}; the coefficient at xi is 2**-J * sum_j f(x_j) e^{-2 pi i xi
x_j}, so a probability density has coefficient 1 at xi = 0, and Plancherel
reads 2**-J sum |f|^2 = sum |coeff|^2.

The smooth dyadic partition is generated by a single even profile
``low_hat`` with low_hat(xi) = 1 for |xi| <= 1, 0 for |xi| >= 2, and a
smooth monotone exponential join in between.  The annulus profile is
ann_hat(xi) = low_hat(xi/2) - low_hat(xi), supported on 1 <= |xi| <= 4, so
the rescaled copies telescope exactly:

    low_hat(xi) + sum_{l=0}^{L-1} ann_hat(xi / 2**l) = low_hat(xi / 2**L).

Consequently a grid function is recovered exactly from its low piece at
scale 0 plus the annulus pieces l = 0 .. J-2 (the final low-pass multiplier
low_hat(xi / 2**(J-1)) is identically 1 on the representable spectrum).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FitError, PreconditionError, RangeError
from .grid import GridFunction

FIT_FLOOR = 1e-13  # annulus norms below this are treated as exact zeros in fits


def frequencies(J: int) -> np.ndarray:
    n = 1 << J
    return np.arange(-(n >> 1), n >> 1, dtype=np.int64)


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients indexed by signed frequency (ascending order)."""

    resolution: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        if c.shape != (1 << self.resolution,):
            raise PreconditionError(
                f"fourier: expected {1 << self.resolution} coefficients, got {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return 1 << self.resolution

    def freqs(self) -> np.ndarray:
        return frequencies(self.resolution)

    def coeff(self, xi: int) -> complex:
        half = self.n >> 1
        if not -half <= xi < half:
            raise RangeError(f"fourier: frequency {xi} not representable at J={self.resolution}")
        return complex(self.coeffs[xi + half])


def transform(f: GridFunction) -> Spectrum:
    c = np.fft.fftshift(np.fft.fft(f.values)) / f.n
    return Spectrum(f.resolution, c)


def inverse(s: Spectrum) -> GridFunction:
    v = np.fft.ifft(np.fft.ifftshift(s.coeffs)) * s.n
    return GridFunction(s.resolution, v.real)


def _smooth_step(u: np.ndarray) -> np.ndarray:
    """0 for u <= 0, 1 for u >= 1, exp(-1/u)-based smooth join in between."""
    u = np.asarray(u, dtype=np.float64)
    out = np.zeros(u.shape)
    out[u >= 1.0] = 1.0
    mid = (u > 0.0) & (u < 1.0)
    if np.any(mid):
        um = u[mid]
        qa = np.exp(-1.0 / um)
        qb = np.exp(-1.0 / (1.0 - um))
        out[mid] = qa / (qa + qb)
    return out


@dataclass(frozen=True)
class KernelPair:
    """The (low_hat, ann_hat) multiplier pair generating the dyadic partition."""

    def phi_hat(self, xi) -> np.ndarray:
        return _smooth_step(2.0 - np.abs(np.asarray(xi, dtype=np.float64)))

    def psi_hat(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=np.float64)
        return self.phi_hat(xi / 2.0) - self.phi_hat(xi)


DEFAULT_KERNEL = KernelPair()


def _apply_multiplier(f: GridFunction, mult: np.ndarray) -> GridFunction:
    s = transform(f)
    return inverse(Spectrum(f.resolution, s.coeffs * mult))


def _check_piece_scale(f: GridFunction, l: int) -> None:
    if not 0 <= l <= f.resolution - 2:
        raise RangeError(
            f"fourier: piece scale l={l} outside [0, {f.resolution - 2}] at J={f.resolution}"
        )


def lp_low(f: GridFunction, l: int, kernel: KernelPair = DEFAULT_KERNEL) -> GridFunction:
    """Low-pass piece: multiply the spectrum by low_hat(xi / 2**l)."""
    _check_piece_scale(f, l)
    return _apply_multiplier(f, kernel.phi_hat(frequencies(f.resolution) / 2.0**l))


def lp_piece(f: GridFunction, l: int, kernel: KernelPair = DEFAULT_KERNEL) -> GridFunction:
    """Annulus piece supported on 2**l <= |xi| <= 2**(l+2)."""
    _check_piece_scale(f, l)
    return _apply_multiplier(f, kernel.psi_hat(frequencies(f.resolution) / 2.0**l))


def lowpass_extended(f: GridFunction, l: int, kernel: KernelPair = DEFAULT_KERNEL) -> GridFunction:
    """lp_low for l <= J-2; the identity for l >= J-1 (multiplier is 1)."""
    if l >= f.resolution - 1:
        return f
    return lp_low(f, l, kernel)


def square_function(f: GridFunction, kernel: KernelPair = DEFAULT_KERNEL) -> GridFunction:
    """Pointwise l^2 aggregate of all representable annulus pieces."""
    acc = np.zeros(f.n)
    for l in range(0, f.resolution - 1):
        piece = lp_piece(f, l, kernel)
        acc += piece.values**2
    return GridFunction(f.resolution, np.sqrt(acc))


def annulus_norm(f: GridFunction, l: int, p: float) -> float:
    """l^p norm of the coefficients on the closed annulus 2**(l-1) <= |xi| <= 2**(l+1)."""
    if l < 1:
        raise RangeError(f"fourier: annulus level l={l} must be >= 1")
    if p not in (2, 4, math.inf):
        raise RangeError(f"fourier: annulus norm order p={p} not in {{2, 4, inf}}")
    lo, hi = 2.0 ** (l - 1), 2.0 ** (l + 1)
    freqs = frequencies(f.resolution)
    mask = (np.abs(freqs) >= lo) & (np.abs(freqs) <= hi)
    if not np.any(mask):
        raise RangeError(f"fourier: annulus level l={l} is empty at J={f.resolution}")
    mags = np.abs(transform(f).coeffs[mask])
    if p == math.inf:
        return float(mags.max())
    return float((mags**p).sum() ** (1.0 / p))


@dataclass(frozen=True)
class DecayProfile:
    """Per-annulus norm table with the fitted decay exponent of the l^4 column."""

    levels: list[int]
    sup_norms: list[float]
    l2_norms: list[float]
    l4_norms: list[float]
    c0_l4: float
    threshold: float | None = None  # (1 - beta)/4 when a Frostman estimate is supplied

    @property
    def uniform_ok(self) -> bool | None:
        if self.threshold is None:
            return None
        return self.c0_l4 > self.threshold

    def rows(self) -> list[tuple[int, float, float, float]]:
        return list(zip(self.levels, self.sup_norms, self.l2_norms, self.l4_norms))


def fit_log2_slope(xs: np.ndarray, ys_log2: np.ndarray) -> tuple[float, float, float]:
    """OLS fit ys_log2 ~ slope * xs + intercept; returns (slope, intercept, r^2)."""
    if len(xs) < 2:
        raise FitError("fourier: need at least two points for a slope fit")
    slope, intercept = np.polyfit(xs, ys_log2, 1)
    pred = slope * xs + intercept
    ss_res = float(np.sum((ys_log2 - pred) ** 2))
    ss_tot = float(np.sum((ys_log2 - np.mean(ys_log2)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def decay_profile(
    mu: GridFunction,
    lmax: int,
    frost=None,
) -> DecayProfile:
    """Annulus norms for l = 1..lmax and the fitted decay rate of the l^4 column.

    The fitted c0 is minus the least-squares slope of log2(l^4 norm) against
    l, discarding levels whose norm is below FIT_FLOOR.  If fewer than two
    levels survive, the measure has no annulus content at this resolution
    and c0 is reported as +inf.
    """
    if lmax > mu.resolution - 2:
        raise RangeError(f"fourier: lmax={lmax} exceeds J-2={mu.resolution - 2}")
    if lmax < 3:
        raise FitError(f"fourier: need lmax >= 3 annuli for a decay fit, got {lmax}")
    levels = list(range(1, lmax + 1))
    sup_col, l2_col, l4_col = [], [], []
    for l in levels:
        sup_col.append(annulus_norm(mu, l, math.inf))
        l2_col.append(annulus_norm(mu, l, 2))
        l4_col.append(annulus_norm(mu, l, 4))
    keep = [i for i, v in enumerate(l4_col) if v > FIT_FLOOR]
    if len(keep) < 2:
        c0 = math.inf
    else:
        xs = np.asarray([levels[i] for i in keep], dtype=float)
        ys = np.log2(np.asarray([l4_col[i] for i in keep]))
        slope, _, _ = fit_log2_slope(xs, ys)
        c0 = -slope
    threshold = None if frost is None else (1.0 - frost.beta) / 4.0
    return DecayProfile(levels, sup_col, l2_col, l4_col, c0, threshold)


def highpass_project(f: GridFunction, radius: float) -> GridFunction:
    """Zero every coefficient with |xi| <= radius (hard spectral projection)."""
    s = transform(f)
    keep = np.abs(frequencies(f.resolution)) > radius
    return inverse(Spectrum(f.resolution, s.coeffs * keep))


def spectral_support_radius(f: GridFunction, tol: float = 1e-12) -> float:
    """Largest |xi| carrying a coefficient above tol (0.0 if none)."""
    mags = np.abs(transform(f).coeffs)
    freqs = np.abs(frequencies(f.resolution))
    live = freqs[mags > tol]
    return float(live.max()) if live.size else 0.0
