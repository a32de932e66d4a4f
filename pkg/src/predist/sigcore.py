"""Complex-baseband signal containers and deterministic bit utilities.

The symbol rate is normalized to 1 throughout, so a :class:`ComplexEnvelope`
with ``sps`` samples per symbol has sample rate ``sps`` in symbol-rate units.
Amplitudes are dimensionless; the drive level presented to an amplifier model
is set explicitly with :func:`scale_to_peak`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BitStream",
    "ComplexEnvelope",
    "EnvelopeStats",
    "envelope_stats",
    "gen_bits",
    "scale_to_peak",
]


@dataclass(frozen=True)
class ComplexEnvelope:
    """A 1-D complex baseband sample sequence plus samples-per-symbol metadata."""

    samples: np.ndarray
    sps: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.ndim != 1:
            raise ValueError(f"envelope samples must be 1-D, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("envelope samples must be finite (no NaN/Inf)")
        sps = self.sps
        if not float(sps).is_integer() or sps < 1:
            raise ValueError(f"sps must be an integer >= 1, got {sps!r}")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sps", int(sps))

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class EnvelopeStats:
    """RMS amplitude, peak amplitude and peak-to-average power ratio in dB."""

    rms: float
    peak: float
    papr_db: float


@dataclass(frozen=True)
class BitStream:
    """A 0/1 sequence and the seed that generated it (None for derived streams)."""

    bits: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1:
            raise ValueError(f"bits must be 1-D, got shape {bits.shape}")
        if bits.size and bits.max() > 1:
            raise ValueError("bit stream may only contain 0 and 1")
        bits = bits.copy()
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)

    def __len__(self) -> int:
        return self.bits.size


def gen_bits(seed: int, n: int) -> BitStream:
    """Generate ``n`` equiprobable bits, fully determined by ``seed``.

    Uses a PCG64 generator, so identical seeds give identical streams on
    every platform and run.
    """
    if seed < 0:
        raise ValueError(f"seed must be a nonnegative integer, got {seed}")
    if n < 0:
        raise ValueError(f"bit count must be nonnegative, got {n}")
    rng = np.random.default_rng(seed)
    return BitStream(bits=rng.integers(0, 2, size=n, dtype=np.uint8), seed=int(seed))


def envelope_stats(env: ComplexEnvelope) -> EnvelopeStats:
    """Compute rms = sqrt(mean |x|^2), peak = max |x| and PAPR in dB."""
    if len(env) == 0:
        raise ValueError("cannot compute statistics of an empty envelope")
    mag = np.abs(env.samples)
    rms = float(np.sqrt(np.mean(mag**2)))
    peak = float(mag.max())
    papr_db = 20.0 * np.log10(peak / rms) if rms > 0.0 else float("nan")
    return EnvelopeStats(rms=rms, peak=peak, papr_db=papr_db)


def scale_to_peak(env: ComplexEnvelope, target_peak: float) -> ComplexEnvelope:
    """Rescale so the peak amplitude equals ``target_peak``; phases unchanged."""
    if target_peak <= 0.0:
        raise ValueError(f"target peak must be positive, got {target_peak}")
    if len(env) == 0:
        raise ValueError("cannot scale an empty envelope")
    peak = float(np.abs(env.samples).max())
    if peak == 0.0:
        raise ValueError("cannot scale an all-zero envelope to a nonzero peak")
    return ComplexEnvelope(env.samples * (target_peak / peak), env.sps)
