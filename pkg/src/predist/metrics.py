"""Spectrum estimation, adjacent-channel power, AM curves and EVM.

Frequencies are in symbol-rate units throughout (sample rate = sps). PSD
levels are relative dB; adjacent-channel power is the ratio of the mean of
the two adjacent-band powers to the main-band power, so it is invariant
under any uniform dB offset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sp_signal

from .sigcore import ComplexEnvelope

__all__ = [
    "AcpReport",
    "AmCurve",
    "ChannelPlan",
    "Spectrum",
    "WelchConfig",
    "extract_am_curves",
    "measure_acp",
    "measure_evm",
    "welch_psd",
]

#: Linear PSD values are floored here before taking logs.
_PSD_FLOOR = 1e-300


@dataclass(frozen=True)
class WelchConfig:
    """Averaged-periodogram settings (Hann window)."""

    segment_len: int = 4096
    overlap_fraction: float = 0.5
    window: str = "hann"

    def __post_init__(self):
        n = self.segment_len
        if n < 64 or n & (n - 1) != 0:
            raise ValueError(f"segment_len must be a power of two >= 64, got {n}")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise ValueError(f"overlap_fraction must lie in [0, 1), got {self.overlap_fraction}")
        if self.window != "hann":
            raise ValueError(f"only the 'hann' window is supported, got {self.window!r}")


@dataclass(frozen=True)
class Spectrum:
    """Two-sided PSD in relative dB on a strictly increasing frequency grid."""

    freqs: np.ndarray
    psd_db: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=np.float64)
        psd_db = np.asarray(self.psd_db, dtype=np.float64)
        if freqs.shape != psd_db.shape or freqs.ndim != 1:
            raise ValueError("freqs and psd_db must be 1-D arrays of equal length")
        if freqs.size >= 2 and not np.all(np.diff(freqs) > 0):
            raise ValueError("frequency grid must be strictly increasing")
        freqs = freqs.copy()
        psd_db = psd_db.copy()
        freqs.flags.writeable = False
        psd_db.flags.writeable = False
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "psd_db", psd_db)


@dataclass(frozen=True)
class ChannelPlan:
    """Main/adjacent channel geometry in symbol-rate units.

    All three bands share ``channel_width``; the adjacent bands sit at
    ``main_center +/- adjacent_offset``. The conventional plan for a
    root-raised-cosine signal is width (1 + rolloff) with the adjacent
    offset equal to the width (contiguous channels).
    """

    main_center: float = 0.0
    channel_width: float = 1.35
    adjacent_offset: float | None = None

    def __post_init__(self):
        if self.channel_width <= 0:
            raise ValueError(f"channel_width must be positive, got {self.channel_width}")
        offset = self.adjacent_offset if self.adjacent_offset is not None else self.channel_width
        if offset <= 0:
            raise ValueError(f"adjacent_offset must be positive, got {offset}")
        object.__setattr__(self, "adjacent_offset", float(offset))


@dataclass(frozen=True)
class AcpReport:
    """Integrated band powers (dB) and their adjacent/main ratio."""

    p_main_db: float
    p_lower_db: float
    p_upper_db: float
    acp_db: float


@dataclass(frozen=True)
class AmCurve:
    """Amplitude-binned mean gain and mean phase shift.

    Bins with no samples carry NaN means and a zero count; they are empty,
    not zero.
    """

    bin_centers: np.ndarray
    mean_gain: np.ndarray
    mean_phase_shift: np.ndarray
    counts: np.ndarray


def welch_psd(env: ComplexEnvelope, cfg: WelchConfig | None = None) -> Spectrum:
    """Hann-windowed, overlap-averaged two-sided PSD of a complex envelope.

    Density-scaled so that the integral over frequency equals the
    time-domain mean power (up to estimator variance). The grid ascends
    through 0 and spans (-sps/2, sps/2].
    """
    cfg = cfg if cfg is not None else WelchConfig()
    if len(env) < cfg.segment_len:
        raise ValueError(
            f"envelope of {len(env)} samples is shorter than one segment ({cfg.segment_len})"
        )
    fs = float(env.sps)
    freqs, psd = sp_signal.welch(
        env.samples,
        fs=fs,
        window=cfg.window,
        nperseg=cfg.segment_len,
        noverlap=int(round(cfg.overlap_fraction * cfg.segment_len)),
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    order = np.argsort(freqs)
    freqs, psd = freqs[order], psd[order]
    # Move the -fs/2 bin to +fs/2 (they alias) so the grid is (-fs/2, fs/2].
    freqs = np.append(freqs[1:], -freqs[0])
    psd = np.append(psd[1:], psd[0])
    return Spectrum(freqs=freqs, psd_db=10.0 * np.log10(np.maximum(psd, _PSD_FLOOR)))


def _band_power(freqs: np.ndarray, psd_lin: np.ndarray, lo: float, hi: float) -> float:
    """Trapezoidal integral of the linear PSD over [lo, hi], edges interpolated."""
    inside = (freqs > lo) & (freqs < hi)
    f = np.concatenate(([lo], freqs[inside], [hi]))
    p = np.concatenate(
        ([np.interp(lo, freqs, psd_lin)], psd_lin[inside], [np.interp(hi, freqs, psd_lin)])
    )
    return float(np.sum(0.5 * (p[1:] + p[:-1]) * np.diff(f)))


def measure_acp(spec: Spectrum, plan: ChannelPlan | None = None) -> AcpReport:
    """Integrate the main and both adjacent bands and form their ratio in dB."""
    plan = plan if plan is not None else ChannelPlan()
    half = plan.channel_width / 2.0
    bands = {
        "main": (plan.main_center - half, plan.main_center + half),
        "lower adjacent": (
            plan.main_center - plan.adjacent_offset - half,
            plan.main_center - plan.adjacent_offset + half,
        ),
        "upper adjacent": (
            plan.main_center + plan.adjacent_offset - half,
            plan.main_center + plan.adjacent_offset + half,
        ),
    }
    f = spec.freqs
    for name, (lo, hi) in bands.items():
        if lo < f[0] or hi > f[-1]:
            raise ValueError(
                f"{name} band [{lo:g}, {hi:g}] lies outside the sampled span "
                f"[{f[0]:g}, {f[-1]:g}]"
            )
    psd_lin = 10.0 ** (spec.psd_db / 10.0)
    p_main = _band_power(f, psd_lin, *bands["main"])
    p_lower = _band_power(f, psd_lin, *bands["lower adjacent"])
    p_upper = _band_power(f, psd_lin, *bands["upper adjacent"])
    return AcpReport(
        p_main_db=10.0 * np.log10(max(p_main, _PSD_FLOOR)),
        p_lower_db=10.0 * np.log10(max(p_lower, _PSD_FLOOR)),
        p_upper_db=10.0 * np.log10(max(p_upper, _PSD_FLOOR)),
        acp_db=10.0 * np.log10(max(0.5 * (p_lower + p_upper), _PSD_FLOOR))
        - 10.0 * np.log10(max(p_main, _PSD_FLOOR)),
    )


def extract_am_curves(
    env_in: ComplexEnvelope, env_out: ComplexEnvelope, n_bins: int
) -> AmCurve:
    """Bin samples by input amplitude and average gain and phase shift per bin.

    Bins are uniform over (0, max|in|]; zero-amplitude inputs are excluded.
    The phase shift is arg(out) - arg(in), computed as arg(out * conj(in))
    so it stays in (-pi, pi].
    """
    if len(env_in) != len(env_out):
        raise ValueError(
            f"input and output envelopes differ in length ({len(env_in)} vs {len(env_out)})"
        )
    if n_bins < 2:
        raise ValueError(f"n_bins must be >= 2, got {n_bins}")
    r = np.abs(env_in.samples)
    nz = r > 0
    if not np.any(nz):
        raise ValueError("input envelope has no nonzero samples")
    r_max = float(r.max())
    width = r_max / n_bins
    rr = r[nz]
    idx = np.clip(np.ceil(rr / width).astype(np.int64) - 1, 0, n_bins - 1)
    gain = np.abs(env_out.samples[nz]) / rr
    phase = np.angle(env_out.samples[nz] * np.conj(env_in.samples[nz]))

    counts = np.bincount(idx, minlength=n_bins)
    with np.errstate(invalid="ignore"):
        mean_gain = np.bincount(idx, weights=gain, minlength=n_bins) / counts
        mean_phase = np.bincount(idx, weights=phase, minlength=n_bins) / counts
    return AmCurve(
        bin_centers=(np.arange(n_bins) + 0.5) * width,
        mean_gain=mean_gain,
        mean_phase_shift=mean_phase,
        counts=counts,
    )


def measure_evm(ref_symbols: np.ndarray, rx_symbols: np.ndarray) -> float:
    """RMS error vector magnitude in percent of the reference RMS.

    Deliberately scale-aware: a pure gain error of c reads as 100*|c - 1|.
    """
    ref = np.asarray(ref_symbols, dtype=np.complex128)
    rx = np.asarray(rx_symbols, dtype=np.complex128)
    if ref.size == 0:
        raise ValueError("cannot compute EVM of empty symbol sequences")
    if ref.shape != rx.shape:
        raise ValueError(f"symbol sequences differ in length ({ref.size} vs {rx.size})")
    return float(
        100.0 * np.sqrt(np.mean(np.abs(rx - ref) ** 2) / np.mean(np.abs(ref) ** 2))
    )
