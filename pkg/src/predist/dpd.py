"""NLMS adaptive filtering, amplifier identification and predistorter training.

The adaptive engine is a normalized LMS filter over the odd-order polynomial
regressor basis [x, x|x|^2, x|x|^4, ...]. It runs in two modes:

- ``identify``: fit the polynomial coefficients of an amplifier from its
  input/output record (weights start at zero).
- ``indirect``: indirect-learning predistorter training — fit a postdistorter
  that maps the amplifier output (scaled by 1/G) back to the amplifier input,
  then use its coefficients as the predistorter (weights start at identity).

The trained predistorter is applied multiplicatively:
B_p = x * sum_k w_k |x|^(2(k-1)).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .pamodel import PolyPaCoeffs
from .sigcore import ComplexEnvelope

__all__ = [
    "DivergenceError",
    "DpdTrainConfig",
    "NlmsState",
    "PredistorterCoeffs",
    "apply_predistorter",
    "identify_pa",
    "nlms_step",
    "poly_basis",
    "train_predistorter",
]

#: Abort training when the weight norm exceeds this bound.
_DIVERGENCE_NORM = 1e6


class DivergenceError(RuntimeError):
    """NLMS weights grew without bound during training."""


@dataclass(frozen=True)
class NlmsState:
    """Weights and step-size state of a normalized LMS filter."""

    w: np.ndarray
    mu: float
    eps: float
    n_updates: int = 0

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.w, dtype=np.complex128))
        if w.size == 0:
            raise ValueError("weight vector must be nonempty")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if not 0.0 < self.mu <= 2.0:
            raise ValueError(f"step size mu must lie in (0, 2], got {self.mu}")
        if self.eps <= 0.0:
            raise ValueError(f"regularizer eps must be positive, got {self.eps}")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "w", w)


@dataclass(frozen=True)
class PredistorterCoeffs:
    """Complex weights of the multiplicative predistortion function.

    F(x) = sum_k w_k |x|^(2(k-1)); the predistorted sample is x * F(x).
    """

    w: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.w, dtype=np.complex128))
        if w.size == 0:
            raise ValueError("predistorter weights must be nonempty")
        if w[0] == 0:
            raise ValueError("the linear weight w1 must be nonzero")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "w", w)


@dataclass(frozen=True)
class DpdTrainConfig:
    """Training configuration for identification or indirect learning.

    Identification converges in a couple of passes; indirect learning runs
    many passes over a small amplitude-equalized subset (see
    :func:`train_predistorter`), so its default pass count is much higher.
    """

    mode: str = "indirect"
    order_k: int = 4
    mu: float = 0.05
    eps: float = 1e-8
    target_gain: float = 1.0
    passes: int = 300

    def __post_init__(self):
        if self.mode not in ("identify", "indirect"):
            raise ValueError(f"mode must be 'identify' or 'indirect', got {self.mode!r}")
        if self.order_k < 1:
            raise ValueError(f"order_k must be >= 1, got {self.order_k}")
        if not 0.0 < self.mu <= 2.0:
            raise ValueError(f"step size mu must lie in (0, 2], got {self.mu}")
        if self.eps <= 0.0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.target_gain <= 0.0:
            raise ValueError(f"target_gain must be positive, got {self.target_gain}")
        if self.passes < 1:
            raise ValueError(f"passes must be >= 1, got {self.passes}")


def poly_basis(x: complex, order_k: int) -> np.ndarray:
    """Odd-order regressor vector [x, x|x|^2, ..., x|x|^(2(order_k-1))]."""
    if order_k < 1:
        raise ValueError(f"order_k must be >= 1, got {order_k}")
    m = abs(x) ** 2
    return complex(x) * np.power(m, np.arange(order_k))


def _basis_matrix(x: np.ndarray, order_k: int) -> np.ndarray:
    """Row n holds poly_basis(x[n], order_k)."""
    m = (np.abs(x) ** 2)[:, None]
    return x[:, None] * m ** np.arange(order_k)[None, :]


def nlms_step(state: NlmsState, u: np.ndarray, d: complex) -> tuple[NlmsState, complex]:
    """One normalized-LMS update.

    The error uses the pre-update weights with the conjugate-transpose inner
    product, e = d - w^H u, and the update w' = w + mu conj(e) u / (eps + ||u||^2)
    contracts the a-posteriori error for mu <= 1.
    """
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != state.w.shape:
        raise ValueError(f"regressor length {u.size} != filter length {state.w.size}")
    e = complex(d) - complex(np.vdot(state.w, u))
    denom = state.eps + float(np.real(np.vdot(u, u)))
    w_next = state.w + (state.mu * np.conj(e) / denom) * u
    return replace(state, w=w_next, n_updates=state.n_updates + 1), e


def _nlms_run(
    basis: np.ndarray,
    desired: np.ndarray,
    w0_direct: np.ndarray,
    mu: float,
    eps: float,
    passes: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Sequential NLMS sweeps over a fixed record, in record order.

    Iterates in the direct-coefficient convention v = conj(w), i.e.
    e = d - v . u and v' = v + mu e conj(u) / (eps + ||u||^2), which is the
    exact conjugate mirror of :func:`nlms_step` and keeps the coefficients
    ready for direct polynomial evaluation.

    Returns (final weights, final-sweep average). With a constant step the
    weights settle into a small limit cycle around the filter's equilibrium
    whenever the target is not exactly in the model class; the average over
    the last sweep sits at the center of that cycle and is the better
    operating point. For in-class targets the two coincide.
    """
    basis_c = np.conj(basis)
    norms = np.einsum("ij,ij->i", basis, basis_c).real
    v = w0_direct.astype(np.complex128).copy()
    n = basis.shape[0]
    for _ in range(passes - 1):
        for i in range(n):
            e = desired[i] - v @ basis[i]
            v += (mu * e / (eps + norms[i])) * basis_c[i]
            if i % 4096 == 0:
                _check_divergence(v, mu)
        _check_divergence(v, mu)
    acc = np.zeros_like(v)
    for i in range(n):
        e = desired[i] - v @ basis[i]
        v += (mu * e / (eps + norms[i])) * basis_c[i]
        acc += v
        if i % 4096 == 0:
            _check_divergence(v, mu)
    _check_divergence(v, mu)
    return v, acc / n


def _equalize_amplitudes(
    mag: np.ndarray, n_strata: int = 48, cap: int = 32, floor_frac: float = 0.15
) -> np.ndarray:
    """Indices of an amplitude-equalized training subset, in record order.

    Amplitudes are split into uniform strata over (0, max]; each stratum
    contributes at most ``cap`` samples (the earliest in the record) and
    strata below ``floor_frac`` of the maximum are dropped entirely. This
    flattens the amplitude histogram so the adaptive fit weights the whole
    operating range about evenly instead of the dense mid-amplitude bulk,
    and it excludes the near-zero region where no finite polynomial tracks
    the amplifier inverse.
    """
    zmax = float(mag.max())
    if zmax == 0.0:
        raise ValueError("cannot train on an all-zero record")
    strata = np.minimum((mag / zmax * n_strata).astype(np.int64), n_strata - 1)
    keep = np.zeros(mag.size, dtype=bool)
    for k in range(int(np.floor(floor_frac * n_strata)), n_strata):
        keep[np.nonzero(strata == k)[0][:cap]] = True
    return np.nonzero(keep)[0]


def _check_divergence(v: np.ndarray, mu: float) -> None:
    norm = float(np.linalg.norm(v))
    if not norm < _DIVERGENCE_NORM:
        raise DivergenceError(
            f"adaptive weights diverged (||w|| = {norm:.3g}); reduce the step size mu={mu}"
        )


def identify_pa(
    env_in: ComplexEnvelope, env_out: ComplexEnvelope, cfg: DpdTrainConfig
) -> PolyPaCoeffs:
    """Estimate odd-order amplifier coefficients from an input/output record.

    Runs NLMS over u = poly_basis(env_in[n]), d = env_out[n] for cfg.passes
    sweeps, starting from zero weights; the first returned coefficient is the
    linear gain, the rest are the intermodulation terms.
    """
    if cfg.mode != "identify":
        raise ValueError(f"identify_pa requires mode='identify', got {cfg.mode!r}")
    if len(env_in) == 0:
        raise ValueError("cannot identify from an empty record")
    if len(env_in) != len(env_out):
        raise ValueError(
            f"input and output records differ in length ({len(env_in)} vs {len(env_out)})"
        )
    basis = _basis_matrix(env_in.samples, cfg.order_k)
    w0 = np.zeros(cfg.order_k, dtype=np.complex128)
    v_final, _ = _nlms_run(basis, env_out.samples, w0, cfg.mu, cfg.eps, cfg.passes)
    return PolyPaCoeffs(a=v_final)


def train_predistorter(
    env_in: ComplexEnvelope,
    pa: Callable[[ComplexEnvelope], ComplexEnvelope],
    cfg: DpdTrainConfig,
) -> PredistorterCoeffs:
    """Indirect-learning predistorter training against an opaque amplifier.

    Sends ``env_in`` through ``pa`` once, then adapts a postdistorter with
    regressors poly_basis(y[n]/G) and desired env_in[n]; the converged
    coefficients double as the predistorter. Deterministic given its inputs;
    raises :class:`DivergenceError` if the weights blow up.

    The sweeps run over an amplitude-equalized subset of the record (see
    :func:`_equalize_amplitudes`) and the returned coefficients are the
    final sweep's trajectory average. On the raw record the filter
    equilibrium is dominated by the dense low/mid-amplitude samples, where
    the amplifier inverse is not polynomial, and the cascade ends up several
    dB off; equalization plus averaging lands on the least-squares floor of
    the basis.
    """
    if cfg.mode != "indirect":
        raise ValueError(f"train_predistorter requires mode='indirect', got {cfg.mode!r}")
    if len(env_in) == 0:
        raise ValueError("cannot train on an empty record")
    y = pa(env_in)
    if len(y) != len(env_in):
        raise ValueError("amplifier changed the record length")
    z = y.samples / cfg.target_gain
    idx = _equalize_amplitudes(np.abs(z))
    if idx.size < cfg.order_k:
        idx = np.arange(z.size)
    basis = _basis_matrix(z[idx], cfg.order_k)
    w0 = np.zeros(cfg.order_k, dtype=np.complex128)
    w0[0] = 1.0  # start at the identity predistorter
    _, v_avg = _nlms_run(basis, env_in.samples[idx], w0, cfg.mu, cfg.eps, cfg.passes)
    return PredistorterCoeffs(w=v_avg)


def apply_predistorter(env: ComplexEnvelope, pd: PredistorterCoeffs) -> ComplexEnvelope:
    """Multiply each sample by the predistortion function of its amplitude."""
    x = env.samples
    m = np.abs(x) ** 2
    acc = np.full_like(x, pd.w[-1])
    for wk in pd.w[-2::-1]:
        acc = acc * m + wk
    return ComplexEnvelope(x * acc, env.sps)
