"""Memoryless nonlinear power-amplifier models.

Two behavioral models of the complex-baseband kind y = G(|x|) * x * exp(j*P(|x|)):

- The Ghorbani model of a solid-state power amplifier, a four-parameter
  rational-power law for both the AM/AM gain and the AM/PM phase shift.
- An odd-order complex polynomial, y = sum_k a_k x |x|^(2(k-1)), used as a
  synthetic identification target and as a stand-in linear amplifier.

Both are static sample-wise maps; memory effects are out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sigcore import ComplexEnvelope

__all__ = [
    "GhorbaniParams",
    "PolyPaCoeffs",
    "apply_poly_pa",
    "apply_sspa",
    "ghorbani_am_am",
    "ghorbani_am_pm",
]


@dataclass(frozen=True)
class GhorbaniParams:
    """Parameters of the Ghorbani SSPA model.

    AM/AM:  G(h) = x1 h^x2 / (1 + x3 h^x2) + x4 h
    AM/PM:  P(h) = y1 h^y2 / (1 + y3 h^y2) + y4 h

    with input amplitude h >= 0. ``phase_unit`` states the unit of P; the
    default parameter set below describes a solid-state amplifier with phase
    shift in degrees. The AM/AM curve is strictly increasing up to roughly
    h = 1.65 with these defaults, which bounds the invertible operating range.
    """

    x: tuple[float, float, float, float] = (8.1081, 1.5413, 6.502, -0.0718)
    y: tuple[float, float, float, float] = (4.6645, 2.0965, 10.88, -0.003)
    phase_unit: str = "degrees"

    def __post_init__(self):
        if len(self.x) != 4 or len(self.y) != 4:
            raise ValueError("x and y must each hold exactly four parameters")
        if self.x[1] <= 0 or self.y[1] <= 0:
            raise ValueError("the exponents x2 and y2 must be positive")
        if self.phase_unit not in ("degrees", "radians"):
            raise ValueError(f"phase_unit must be 'degrees' or 'radians', got {self.phase_unit!r}")
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))


@dataclass(frozen=True)
class PolyPaCoeffs:
    """Odd-order polynomial coefficients (a1, a3, a5, ...).

    Entry k multiplies x |x|^(2(k-1)), i.e. the odd power 2k-1 of the
    envelope amplitude.
    """

    a: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=np.complex128))
        if a.size == 0:
            raise ValueError("coefficient vector must be nonempty")
        if a[0] == 0:
            raise ValueError("the linear coefficient a1 must be nonzero")
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "a", a)

    @property
    def order(self) -> int:
        """Highest envelope power, 2*len(a) - 1."""
        return 2 * self.a.size - 1


def _rational_power(h, c1: float, c2: float, c3: float, c4: float):
    hp = np.power(h, c2)
    return c1 * hp / (1.0 + c3 * hp) + c4 * h


def ghorbani_am_am(h, p: GhorbaniParams | None = None):
    """AM/AM response x1 h^x2 / (1 + x3 h^x2) + x4 h for amplitude h >= 0.

    Accepts scalars or arrays (evaluated elementwise).
    """
    p = p if p is not None else GhorbaniParams()
    h = np.asarray(h, dtype=np.float64)
    if np.any(h < 0):
        raise ValueError("amplitude must be nonnegative")
    out = _rational_power(h, *p.x)
    return float(out) if out.ndim == 0 else out


def ghorbani_am_pm(h, p: GhorbaniParams | None = None):
    """AM/PM response y1 h^y2 / (1 + y3 h^y2) + y4 h, in ``p.phase_unit``."""
    p = p if p is not None else GhorbaniParams()
    h = np.asarray(h, dtype=np.float64)
    if np.any(h < 0):
        raise ValueError("amplitude must be nonnegative")
    out = _rational_power(h, *p.y)
    return float(out) if out.ndim == 0 else out


def apply_sspa(env: ComplexEnvelope, p: GhorbaniParams | None = None) -> ComplexEnvelope:
    """Pass an envelope through the Ghorbani SSPA.

    Each sample x maps to G(|x|) * exp(j*(arg(x) + phi)) with phi the AM/PM
    shift converted to radians; zero samples map to zero. The model does not
    clip: callers keep peak |x| inside the monotone AM/AM range.
    """
    p = p if p is not None else GhorbaniParams()
    x = env.samples
    r = np.abs(x)
    gain_out = _rational_power(r, *p.x)
    phi = _rational_power(r, *p.y)
    if p.phase_unit == "degrees":
        phi = np.deg2rad(phi)
    # x/r carries the input phase; define 0/0 -> 0 so silence stays silent.
    unit = np.divide(x, r, out=np.zeros_like(x), where=r > 0)
    return ComplexEnvelope(gain_out * unit * np.exp(1j * phi), env.sps)


def apply_poly_pa(env: ComplexEnvelope, c: PolyPaCoeffs) -> ComplexEnvelope:
    """Evaluate y = sum_k a_k x |x|^(2(k-1)) sample-wise (Horner in |x|^2)."""
    x = env.samples
    m = np.abs(x) ** 2
    acc = np.full_like(x, c.a[-1])
    for ak in c.a[-2::-1]:
        acc = acc * m + ak
    return ComplexEnvelope(x * acc, env.sps)
