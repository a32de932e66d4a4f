"""Bits-to-baseband transmit chain and receive utilities.

Supports BPSK, QPSK, 8-PSK and 16-QAM with Gray-labeled, unit-average-power
constellations, root-raised-cosine pulse shaping, and the matched-filter /
symbol-decision receive path. Bits enter symbol labels most-significant-first.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .sigcore import BitStream, ComplexEnvelope

__all__ = [
    "BPSK",
    "Constellation",
    "ModulationScheme",
    "PSK8",
    "PulseShapeConfig",
    "QAM16",
    "QPSK",
    "SCHEMES",
    "build_constellation",
    "demap_symbols",
    "map_symbols",
    "matched_filter_downsample",
    "pulse_shape",
    "rrc_taps",
]


@dataclass(frozen=True)
class ModulationScheme:
    """One of the four supported digital modulations.

    ``bandwidth_factor`` is the occupied bandwidth as a multiple of the bit
    rate: 1 for BPSK, 1/2 for QPSK, 1/3 for 8-PSK, 1/4 for 16-QAM.
    """

    kind: str
    bits_per_symbol: int
    bandwidth_factor: Fraction

    def __post_init__(self):
        if self.kind not in _BITS_PER_SYMBOL:
            raise ValueError(f"unknown modulation kind {self.kind!r}")
        if self.bits_per_symbol != _BITS_PER_SYMBOL[self.kind]:
            raise ValueError(
                f"{self.kind} carries {_BITS_PER_SYMBOL[self.kind]} bits/symbol, "
                f"got {self.bits_per_symbol}"
            )
        if self.bandwidth_factor != Fraction(1, self.bits_per_symbol):
            raise ValueError("bandwidth_factor must equal 1 / bits_per_symbol")

    @classmethod
    def from_kind(cls, kind: str) -> "ModulationScheme":
        k = kind.lower().replace("-", "")
        aliases = {"8psk": "psk8", "16qam": "qam16"}
        k = aliases.get(k, k)
        if k not in _BITS_PER_SYMBOL:
            raise ValueError(
                f"unknown modulation {kind!r}; expected one of bpsk, qpsk, psk8, qam16"
            )
        bps = _BITS_PER_SYMBOL[k]
        return cls(kind=k, bits_per_symbol=bps, bandwidth_factor=Fraction(1, bps))


_BITS_PER_SYMBOL = {"bpsk": 1, "qpsk": 2, "psk8": 3, "qam16": 4}

BPSK = ModulationScheme.from_kind("bpsk")
QPSK = ModulationScheme.from_kind("qpsk")
PSK8 = ModulationScheme.from_kind("psk8")
QAM16 = ModulationScheme.from_kind("qam16")

#: The four schemes in decreasing spectral-efficiency order.
SCHEMES = (QAM16, PSK8, QPSK, BPSK)


@dataclass(frozen=True)
class Constellation:
    """Unit-average-power constellation indexed by symbol label.

    ``points[label]`` is the point whose Gray-coded bit tuple, read
    most-significant-first, equals ``label`` in binary.
    """

    points: np.ndarray
    bits_per_symbol: int

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.complex128)
        if points.size != 2**self.bits_per_symbol:
            raise ValueError("constellation size must be 2**bits_per_symbol")
        points = points.copy()
        points.flags.writeable = False
        object.__setattr__(self, "points", points)


# Per-axis Gray map for 16-QAM: two bits -> amplitude level.
_QAM16_LEVELS = {(0, 0): -3.0, (0, 1): -1.0, (1, 1): 1.0, (1, 0): 3.0}


def build_constellation(scheme: ModulationScheme) -> Constellation:
    """Return the Gray-labeled unit-power constellation for ``scheme``."""
    kind = scheme.kind
    if kind == "bpsk":
        points = np.array([1.0, -1.0], dtype=np.complex128)
    elif kind == "qpsk":
        # b0 selects the I sign, b1 the Q sign; 00 -> (1+1j)/sqrt(2).
        points = np.empty(4, dtype=np.complex128)
        for label in range(4):
            i = 1.0 if (label >> 1) & 1 == 0 else -1.0
            q = 1.0 if label & 1 == 0 else -1.0
            points[label] = (i + 1j * q) / np.sqrt(2.0)
    elif kind == "psk8":
        # Position p on the circle carries label gray(p) = p ^ (p >> 1),
        # so neighboring points differ in exactly one bit.
        points = np.empty(8, dtype=np.complex128)
        for pos in range(8):
            label = pos ^ (pos >> 1)
            points[label] = np.exp(1j * (np.pi / 4.0) * pos)
    elif kind == "qam16":
        points = np.empty(16, dtype=np.complex128)
        for label in range(16):
            b = [(label >> s) & 1 for s in (3, 2, 1, 0)]
            i = _QAM16_LEVELS[(b[0], b[1])]
            q = _QAM16_LEVELS[(b[2], b[3])]
            points[label] = (i + 1j * q) / np.sqrt(10.0)
    else:  # pragma: no cover - guarded by ModulationScheme
        raise ValueError(f"unknown modulation kind {kind!r}")
    return Constellation(points=points, bits_per_symbol=scheme.bits_per_symbol)


def map_symbols(bits: BitStream, scheme: ModulationScheme) -> np.ndarray:
    """Map a bit stream to constellation symbols, MSB-first per label."""
    bps = scheme.bits_per_symbol
    n = len(bits)
    if n % bps != 0:
        raise ValueError(
            f"bit count {n} is not a multiple of {bps} (bits per {scheme.kind} symbol)"
        )
    const = build_constellation(scheme)
    groups = bits.bits.reshape(-1, bps).astype(np.int64)
    weights = 2 ** np.arange(bps - 1, -1, -1, dtype=np.int64)
    labels = groups @ weights
    return const.points[labels]


def demap_symbols(symbols: np.ndarray, scheme: ModulationScheme) -> BitStream:
    """Decide each symbol to its nearest constellation point and emit its bits.

    Ties go to the lowest label index (np.argmin convention).
    """
    symbols = np.asarray(symbols, dtype=np.complex128)
    const = build_constellation(scheme)
    d2 = np.abs(symbols[:, None] - const.points[None, :]) ** 2
    labels = np.argmin(d2, axis=1)
    bps = scheme.bits_per_symbol
    shifts = np.arange(bps - 1, -1, -1)
    bits = ((labels[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
    return BitStream(bits=bits.reshape(-1), seed=None)


@dataclass(frozen=True)
class PulseShapeConfig:
    """Root-raised-cosine shaping parameters (filter length = span*sps + 1).

    The default span of 12 symbols keeps the truncation ISI of the
    shape/matched-filter cascade near 0.2% EVM; a span of 10 roughly
    quadruples it.
    """

    rolloff: float = 0.35
    sps: int = 8
    span_symbols: int = 12

    def __post_init__(self):
        if not 0.0 < self.rolloff <= 1.0:
            raise ValueError(f"rolloff must be in (0, 1], got {self.rolloff}")
        if self.sps < 2:
            raise ValueError(f"sps must be >= 2, got {self.sps}")
        if self.span_symbols <= 0 or self.span_symbols % 2 != 0:
            raise ValueError(
                f"span_symbols must be an even positive integer, got {self.span_symbols}"
            )

    @property
    def num_taps(self) -> int:
        return self.span_symbols * self.sps + 1


def rrc_taps(cfg: PulseShapeConfig) -> np.ndarray:
    """Unit-energy root-raised-cosine impulse response.

    The closed form

        h(t) = [sin(pi t (1-b)) + 4 b t cos(pi t (1+b))] / [pi t (1 - (4 b t)^2)]

    (t in symbol units) has removable singularities at t = 0 and
    |t| = 1/(4b); both are evaluated by their analytic limits. The result is
    exactly symmetric (built from one half) and normalized so sum(h^2) = 1.
    """
    b = cfg.rolloff
    half = cfg.span_symbols * cfg.sps // 2
    t = np.arange(half + 1) / cfg.sps
    h = np.empty(half + 1)

    at_zero = t == 0.0
    at_break = np.isclose(np.abs(4.0 * b * t), 1.0, rtol=1e-10, atol=0.0)
    regular = ~(at_zero | at_break)

    h[at_zero] = 1.0 - b + 4.0 * b / np.pi
    h[at_break] = (b / np.sqrt(2.0)) * (
        (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * b))
        + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * b))
    )
    tr = t[regular]
    h[regular] = (
        np.sin(np.pi * tr * (1.0 - b)) + 4.0 * b * tr * np.cos(np.pi * tr * (1.0 + b))
    ) / (np.pi * tr * (1.0 - (4.0 * b * tr) ** 2))

    taps = np.concatenate([h[:0:-1], h])
    return taps / np.sqrt(np.sum(taps**2))


def pulse_shape(symbols: np.ndarray, cfg: PulseShapeConfig) -> ComplexEnvelope:
    """Upsample by zero insertion and convolve with the RRC taps.

    Output length is n_symbols*sps + num_taps - 1 (full convolution, so the
    first and last symbols keep their complete pulse).
    """
    symbols = np.asarray(symbols, dtype=np.complex128)
    if symbols.size == 0:
        raise ValueError("cannot pulse-shape an empty symbol sequence")
    up = np.zeros(symbols.size * cfg.sps, dtype=np.complex128)
    up[:: cfg.sps] = symbols
    return ComplexEnvelope(np.convolve(up, rrc_taps(cfg)), cfg.sps)


def matched_filter_downsample(
    env: ComplexEnvelope, cfg: PulseShapeConfig, n_symbols: int
) -> np.ndarray:
    """Matched-filter with the RRC taps and sample at symbol centers.

    Assumes ``env`` came from :func:`pulse_shape` with the same config; the
    combined group delay of the two filters is num_taps - 1 samples, so symbol
    k sits at index k*sps + num_taps - 1 of the filtered sequence.
    """
    if n_symbols < 1:
        raise ValueError(f"n_symbols must be positive, got {n_symbols}")
    n_taps = cfg.num_taps
    if (n_symbols - 1) * cfg.sps + 1 > len(env):
        raise ValueError(
            f"envelope of {len(env)} samples is too short for {n_symbols} symbols "
            f"at sps={cfg.sps}"
        )
    filtered = np.convolve(env.samples, rrc_taps(cfg))
    idx = (n_taps - 1) + cfg.sps * np.arange(n_symbols)
    return filtered[idx]
