"""Figure rendering for experiment outputs.

Figures are written straight to image files next to the delimited output;
nothing here touches the CSV/JSON contracts.  All panels share a small
uniform style suitable for quick inspection rather than publication.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .averages import SobolevProbeResult
from .fourier import DecayProfile
from .pigeonhole import PigeonholeReport
from .roth import RothReport

_FIGSIZE = (6.0, 3.6)


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_decay_figure(profile: DecayProfile, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ls = np.asarray(profile.levels)
    for col, label, marker in (
        (profile.sup_norms, "sup", "o"),
        (profile.l2_norms, "l2", "s"),
        (profile.l4_norms, "l4", "^"),
    ):
        vals = np.asarray(col)
        live = vals > 0
        ax.semilogy(ls[live], vals[live], marker=marker, ms=3.5, lw=1, label=label)
    if math.isfinite(profile.c0_l4):
        ax.set_title(f"annulus norms, fitted c0 = {profile.c0_l4:.3f}")
    else:
        ax.set_title("annulus norms (no annulus content)")
    ax.set_xlabel("annulus level l")
    ax.set_ylabel("norm")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(frameon=False)
    return _finish(fig, path)


def save_probe_figure(result: SobolevProbeResult, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    xs = np.asarray(result.cutoffs, dtype=float)
    ys = np.log2(np.maximum(result.l1_norms, 1e-300))
    ax.plot(xs, ys, "o", ms=4, label="measured")
    ax.plot(
        xs,
        result.c_fit - result.sigma_fit * xs,
        "--",
        lw=1,
        label=f"fit: sigma = {result.sigma_fit:.3f}",
    )
    ax.set_title(f"decay probe for {{{result.family}}} (R^2 = {result.r_squared:.3f})")
    ax.set_xlabel("cutoff exponent n")
    ax.set_ylabel("log2 ||B||_1")
    ax.grid(True, alpha=0.3)
    ax.legend(frameon=False)
    return _finish(fig, path)


def save_pigeonhole_figure(report: PigeonholeReport, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ks = [k for k, _ in report.scan_trace]
    vals = [v for _, v in report.scan_trace]
    ax.semilogy(ks, np.maximum(vals, 1e-300), "o-", ms=4, lw=1, label="pairing")
    threshold = report.constants["c_suite"] * report.epsilon ** (report.m + 1)
    ax.axhline(threshold, color="crimson", lw=1, ls="--", label="threshold")
    if report.k_found is not None:
        ax.axvline(report.k_found, color="seagreen", lw=1, ls=":", label=f"k = {report.k_found}")
    ax.set_title(f"scale scan, epsilon = {report.epsilon}")
    ax.set_xlabel("scale k")
    ax.set_ylabel("pairing")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(frameon=False)
    return _finish(fig, path)


def save_roth_figure(report: RothReport, path: str | Path) -> Path:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.5, 3.4))
    if report.tail:
        ls = [l for l, _ in report.tail]
        vals = [abs(v) for _, v in report.tail]
        ax1.semilogy(ls, np.maximum(vals, 1e-300), "o-", ms=4, lw=1)
    ax1.set_title(f"|level terms|, total = {report.lambda_total:.4f}")
    ax1.set_xlabel("level l")
    ax1.grid(True, which="both", alpha=0.3)
    if report.diagonal:
        ds = [d for d, _ in report.diagonal]
        vals = [max(v, 1e-300) for _, v in report.diagonal]
        ax2.loglog(ds, vals, "s-", ms=4, lw=1, base=2)
    slope = report.checks.diag_slope
    ax2.set_title("diagonal mass" + ("" if slope is None else f", slope = {slope:.2f}"))
    ax2.set_xlabel("delta")
    ax2.grid(True, which="both", alpha=0.3)
    return _finish(fig, path)
