"""Render report figures to files next to the CSV outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import AmCurve, ChannelPlan, Spectrum
from .pamodel import PolyPaCoeffs

__all__ = ["save_curves_figure", "save_identify_figure", "save_spectra_figure"]

_LABELS = {"bpsk": "BPSK", "qpsk": "QPSK", "psk8": "8-PSK", "qam16": "16-QAM"}


def save_spectra_figure(
    path: Path, spectra: dict[str, tuple[Spectrum, Spectrum]], plan: ChannelPlan | None
) -> None:
    """One panel per modulation with before/after PSDs and the channel edges."""
    n = len(spectra)
    ncols = 2 if n > 1 else 1
    nrows = -(-n // ncols)
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(6.0 * ncols, 3.6 * nrows), squeeze=False, sharex=True
    )
    for ax, (kind, (before, after)) in zip(axes.flat, spectra.items()):
        ax.plot(before.freqs, before.psd_db, label="before", lw=0.8)
        ax.plot(after.freqs, after.psd_db, label="after", lw=0.8)
        if plan is not None:
            half = plan.channel_width / 2.0
            for edge in (
                plan.main_center - half,
                plan.main_center + half,
                plan.main_center - plan.adjacent_offset - half,
                plan.main_center + plan.adjacent_offset + half,
            ):
                ax.axvline(edge, color="gray", ls=":", lw=0.7)
        ax.set_title(_LABELS.get(kind, kind))
        ax.set_xlabel("frequency (symbol rates)")
        ax.set_ylabel("PSD (dB)")
        ax.grid(True, alpha=0.3)
        ax.legend(loc="upper right", fontsize=8)
    for ax in axes.flat[n:]:
        ax.set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_curves_figure(
    path: Path, pa: AmCurve, pd: AmCurve, cascade: AmCurve
) -> None:
    """Gain and phase-shift curves of the amplifier, predistorter and cascade."""
    fig, (ax_g, ax_p) = plt.subplots(1, 2, figsize=(10.0, 3.8))
    for curve, label in ((pa, "amplifier"), (pd, "predistorter"), (cascade, "cascade")):
        ok = curve.counts > 0
        ax_g.plot(curve.bin_centers[ok], curve.mean_gain[ok], marker=".", ms=3, label=label)
        ax_p.plot(
            curve.bin_centers[ok],
            np.rad2deg(curve.mean_phase_shift[ok]),
            marker=".",
            ms=3,
            label=label,
        )
    ax_g.set_xlabel("input amplitude")
    ax_g.set_ylabel("mean gain")
    ax_p.set_xlabel("input amplitude")
    ax_p.set_ylabel("mean phase shift (deg)")
    for ax in (ax_g, ax_p):
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_identify_figure(path: Path, truth: PolyPaCoeffs, estimate: PolyPaCoeffs) -> None:
    """True vs estimated coefficient magnitudes per odd order."""
    n = max(truth.a.size, estimate.a.size)
    orders = 2 * np.arange(n) + 1
    t = np.abs(np.pad(truth.a, (0, n - truth.a.size)))
    e = np.abs(np.pad(estimate.a, (0, n - estimate.a.size)))
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    width = 0.35
    ax.bar(orders - width / 2, t, width, label="true")
    ax.bar(orders + width / 2, e, width, label="estimated")
    ax.set_yscale("log")
    ax.set_xticks(orders)
    ax.set_xlabel("envelope order")
    ax.set_ylabel("|coefficient|")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
