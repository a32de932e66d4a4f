"""Experiment orchestration: bits -> modulate -> shape -> [predistort] -> SSPA -> measure.

Each experiment trains a predistorter on a training record, freezes it, and
evaluates adjacent-channel power and EVM on an out-of-sample record (separate
seed). Reports, spectra and curve tables are written as CSV; companion PNG
figures are rendered next to them unless disabled.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .dpd import (
    DivergenceError,
    DpdTrainConfig,
    PredistorterCoeffs,
    apply_predistorter,
    identify_pa,
    train_predistorter,
)
from .metrics import (
    AmCurve,
    ChannelPlan,
    Spectrum,
    WelchConfig,
    extract_am_curves,
    measure_acp,
    measure_evm,
    welch_psd,
)
from .modem import (
    ModulationScheme,
    PulseShapeConfig,
    map_symbols,
    matched_filter_downsample,
    pulse_shape,
)
from .pamodel import GhorbaniParams, PolyPaCoeffs, apply_poly_pa, apply_sspa
from .sigcore import ComplexEnvelope, gen_bits, scale_to_peak

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "PipelineError",
    "ReportRow",
    "SWEEP_ORDER",
    "run_curves",
    "run_experiment",
    "run_identify",
    "run_sweep",
]

#: Sweep order: decreasing bits/symbol.
SWEEP_ORDER = ("qam16", "psk8", "qpsk", "bpsk")


class PipelineError(RuntimeError):
    """A pipeline stage failed; the message names the stage."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Full parameter set of one linearization experiment."""

    modulation: str = "qam16"
    n_symbols: int = 50_000
    pulse: PulseShapeConfig = field(default_factory=PulseShapeConfig)
    drive: float = 1.0
    ghorbani: GhorbaniParams = field(default_factory=GhorbaniParams)
    dpd: DpdTrainConfig = field(default_factory=DpdTrainConfig)
    welch: WelchConfig = field(default_factory=WelchConfig)
    plan: ChannelPlan | None = None
    seed_train: int = 1
    seed_eval: int = 2
    out: Path | None = None
    spectra_out: Path | None = None
    figures: bool = True
    pa_override: PolyPaCoeffs | None = None

    def __post_init__(self):
        ModulationScheme.from_kind(self.modulation)  # validates the kind
        if self.n_symbols < 1:
            raise ValueError(f"n_symbols must be positive, got {self.n_symbols}")
        if not 0.0 < self.drive <= 1.2:
            raise ValueError(
                f"drive must lie in (0, 1.2] to stay in the monotone AM/AM range, "
                f"got {self.drive}"
            )
        if self.seed_train == self.seed_eval:
            raise ValueError(
                "seed_train and seed_eval must differ (out-of-sample evaluation)"
            )
        if self.seed_train < 0 or self.seed_eval < 0:
            raise ValueError("seeds must be nonnegative integers")
        plan = self.plan
        if plan is None:
            width = 1.0 + self.pulse.rolloff
            plan = ChannelPlan(main_center=0.0, channel_width=width, adjacent_offset=width)
        object.__setattr__(self, "plan", plan)
        if self.out is not None:
            object.__setattr__(self, "out", Path(self.out))
        if self.spectra_out is not None:
            object.__setattr__(self, "spectra_out", Path(self.spectra_out))

    @property
    def scheme(self) -> ModulationScheme:
        return ModulationScheme.from_kind(self.modulation)

    def digest(self) -> str:
        """Stable hash of every numeric parameter, for report provenance."""
        text = repr(
            (
                self.modulation,
                self.n_symbols,
                (self.pulse.rolloff, self.pulse.sps, self.pulse.span_symbols),
                self.drive,
                (self.ghorbani.x, self.ghorbani.y, self.ghorbani.phase_unit),
                (
                    self.dpd.mode,
                    self.dpd.order_k,
                    self.dpd.mu,
                    self.dpd.eps,
                    self.dpd.target_gain,
                    self.dpd.passes,
                ),
                (self.welch.segment_len, self.welch.overlap_fraction, self.welch.window),
                (self.plan.main_center, self.plan.channel_width, self.plan.adjacent_offset),
                self.seed_train,
                self.seed_eval,
                None if self.pa_override is None else tuple(self.pa_override.a.tolist()),
            )
        )
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ReportRow:
    """One modulation's before/after measurements."""

    modulation: str
    acp_before_db: float
    acp_after_db: float
    improvement_db: float
    evm_before_pct: float
    evm_after_pct: float
    seed_train: int
    seed_eval: int
    error: str | None = None


@dataclass(frozen=True)
class ExperimentReport:
    rows: tuple[ReportRow, ...]
    config_digest: str


@dataclass(frozen=True)
class _SingleResult:
    row: ReportRow
    spectrum_before: Spectrum
    spectrum_after: Spectrum
    predistorter: PredistorterCoeffs


def _stage(name: str, fn, *args, **kwargs):
    """Run one pipeline stage, tagging failures with the stage name."""
    try:
        return fn(*args, **kwargs)
    except DivergenceError:
        raise
    except Exception as exc:
        raise PipelineError(f"stage '{name}' failed: {exc}") from exc


def _amplifier(cfg: ExperimentConfig):
    """The amplifier under test as an envelope-to-envelope callable."""
    if cfg.pa_override is not None:
        coeffs = cfg.pa_override
        return lambda env: apply_poly_pa(env, coeffs)
    params = cfg.ghorbani
    return lambda env: apply_sspa(env, params)


def _make_record(cfg: ExperimentConfig, seed: int):
    """bits -> symbols -> shaped envelope at the configured drive level.

    Returns (reference symbols, drive-scaled envelope, scale factor applied
    to the unit-power shaped signal).
    """
    scheme = cfg.scheme
    bits = _stage("bits", gen_bits, seed, cfg.n_symbols * scheme.bits_per_symbol)
    symbols = _stage("map", map_symbols, bits, scheme)
    shaped = _stage("shape", pulse_shape, symbols, cfg.pulse)
    env = _stage("scale", scale_to_peak, shaped, cfg.drive)
    scale = cfg.drive / float(np.abs(shaped.samples).max())
    return symbols, env, scale


def _receive_evm(
    cfg: ExperimentConfig, out_env: ComplexEnvelope, ref_symbols: np.ndarray, scale: float
) -> float:
    rx = _stage(
        "matched-filter", matched_filter_downsample, out_env, cfg.pulse, len(ref_symbols)
    )
    return _stage("evm", measure_evm, ref_symbols, rx / scale)


def _run_single(cfg: ExperimentConfig) -> _SingleResult:
    pa = _amplifier(cfg)

    # Train on the training record, then freeze the predistorter.
    _, env_train, _ = _make_record(cfg, cfg.seed_train)
    train_cfg = replace(cfg.dpd, mode="indirect")
    pd = _stage("train", train_predistorter, env_train, pa, train_cfg)

    # Out-of-sample evaluation, without and with the frozen predistorter.
    ref_symbols, env_eval, scale = _make_record(cfg, cfg.seed_eval)
    out_before = _stage("amplify", pa, env_eval)
    out_after = _stage("amplify", pa, _stage("predistort", apply_predistorter, env_eval, pd))

    spec_before = _stage("welch", welch_psd, out_before, cfg.welch)
    spec_after = _stage("welch", welch_psd, out_after, cfg.welch)
    acp_before = _stage("acp", measure_acp, spec_before, cfg.plan)
    acp_after = _stage("acp", measure_acp, spec_after, cfg.plan)

    evm_before = _receive_evm(cfg, out_before, ref_symbols, scale)
    evm_after = _receive_evm(cfg, out_after, ref_symbols, scale)

    row = ReportRow(
        modulation=cfg.modulation,
        acp_before_db=acp_before.acp_db,
        acp_after_db=acp_after.acp_db,
        improvement_db=acp_before.acp_db - acp_after.acp_db,
        evm_before_pct=evm_before,
        evm_after_pct=evm_after,
        seed_train=cfg.seed_train,
        seed_eval=cfg.seed_eval,
    )
    return _SingleResult(
        row=row, spectrum_before=spec_before, spectrum_after=spec_after, predistorter=pd
    )


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run one modulation end to end; write report/spectra files if configured."""
    result = _run_single(cfg)
    report = ExperimentReport(rows=(result.row,), config_digest=cfg.digest())
    if cfg.out is not None:
        write_report_csv(cfg.out, report.rows)
    if cfg.spectra_out is not None:
        write_spectra_csv(cfg.spectra_out, result.spectrum_before, result.spectrum_after)
        if cfg.figures:
            from . import plots

            plots.save_spectra_figure(
                cfg.spectra_out.with_suffix(".png"),
                {cfg.modulation: (result.spectrum_before, result.spectrum_after)},
                cfg.plan,
            )
    return report


def run_sweep(base: ExperimentConfig) -> ExperimentReport:
    """Run all four modulations with shared parameters, in decreasing bits/symbol.

    A failing modulation contributes an error row; the sweep continues.
    """
    rows: list[ReportRow] = []
    spectra: dict[str, tuple[Spectrum, Spectrum]] = {}
    for kind in SWEEP_ORDER:
        cfg = replace(base, modulation=kind, out=None, spectra_out=None)
        try:
            result = _run_single(cfg)
        except Exception as exc:
            rows.append(
                ReportRow(
                    modulation=kind,
                    acp_before_db=float("nan"),
                    acp_after_db=float("nan"),
                    improvement_db=float("nan"),
                    evm_before_pct=float("nan"),
                    evm_after_pct=float("nan"),
                    seed_train=base.seed_train,
                    seed_eval=base.seed_eval,
                    error=str(exc),
                )
            )
            continue
        rows.append(result.row)
        spectra[kind] = (result.spectrum_before, result.spectrum_after)

    report = ExperimentReport(rows=tuple(rows), config_digest=base.digest())
    if base.out is not None:
        write_report_csv(base.out, report.rows)
    if base.spectra_out is not None:
        for kind, (before, after) in spectra.items():
            write_spectra_csv(_per_modulation_path(base.spectra_out, kind), before, after)
        if base.figures and spectra:
            from . import plots

            plots.save_spectra_figure(base.spectra_out.with_suffix(".png"), spectra, base.plan)
    return report


def run_curves(cfg: ExperimentConfig, n_bins: int = 64):
    """Emit the amplifier / predistorter / cascade AM curves on a common grid."""
    pa = _amplifier(cfg)
    _, env_train, _ = _make_record(cfg, cfg.seed_train)
    pd = _stage("train", train_predistorter, env_train, pa, replace(cfg.dpd, mode="indirect"))

    _, env, _ = _make_record(cfg, cfg.seed_eval)
    predistorted = _stage("predistort", apply_predistorter, env, pd)
    pa_curve = _stage("curves", extract_am_curves, env, pa(env), n_bins)
    pd_curve = _stage("curves", extract_am_curves, env, predistorted, n_bins)
    cascade_curve = _stage("curves", extract_am_curves, env, pa(predistorted), n_bins)

    if cfg.out is not None:
        write_curves_csv(cfg.out, pa_curve, pd_curve, cascade_curve)
        if cfg.figures:
            from . import plots

            plots.save_curves_figure(
                cfg.out.with_suffix(".png"), pa_curve, pd_curve, cascade_curve
            )
    return pa_curve, pd_curve, cascade_curve


def run_identify(cfg: ExperimentConfig, truth: PolyPaCoeffs) -> PolyPaCoeffs:
    """Identify a synthetic polynomial amplifier and tabulate the recovery.

    The identification record is the raw symbol stream at the drive level
    (one sample per symbol, no pulse shaping): its few exact amplitude levels
    condition the polynomial basis far better than the shaped envelope, and
    no spectral measurement is involved.
    """
    scheme = cfg.scheme
    bits = _stage("bits", gen_bits, cfg.seed_train, cfg.n_symbols * scheme.bits_per_symbol)
    symbols = _stage("map", map_symbols, bits, scheme)
    env = _stage("scale", scale_to_peak, ComplexEnvelope(symbols, 1), cfg.drive)
    out = _stage("amplify", apply_poly_pa, env, truth)
    ident_cfg = replace(cfg.dpd, mode="identify")
    estimate = _stage("identify", identify_pa, env, out, ident_cfg)
    if cfg.out is not None:
        write_identify_csv(cfg.out, truth, estimate)
        if cfg.figures:
            from . import plots

            plots.save_identify_figure(cfg.out.with_suffix(".png"), truth, estimate)
    return estimate


# ---------------------------------------------------------------------------
# CSV output (UTF-8, header row, '.' decimal separator)


def _per_modulation_path(path: Path, kind: str) -> Path:
    return path.with_name(f"{path.stem}_{kind}{path.suffix}")


def _fmt(value: float, spec: str = ".6f") -> str:
    if value is None or (isinstance(value, float) and not np.isfinite(value)):
        return ""
    return format(value, spec)


def write_report_csv(path: Path, rows) -> None:
    lines = [
        "modulation,acp_before_db,acp_after_db,improvement_db,"
        "evm_before_pct,evm_after_pct,seed_train,seed_eval"
    ]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.modulation,
                    _fmt(r.acp_before_db),
                    _fmt(r.acp_after_db),
                    _fmt(r.improvement_db),
                    _fmt(r.evm_before_pct),
                    _fmt(r.evm_after_pct),
                    str(r.seed_train),
                    str(r.seed_eval),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_spectra_csv(path: Path, before: Spectrum, after: Spectrum) -> None:
    if before.freqs.shape != after.freqs.shape or not np.array_equal(
        before.freqs, after.freqs
    ):
        raise ValueError("before/after spectra must share one frequency grid")
    lines = ["freq,psd_before_db,psd_after_db"]
    for f, pb, pa_db in zip(before.freqs, before.psd_db, after.psd_db):
        lines.append(f"{f:.10g},{_fmt(pb)},{_fmt(pa_db)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_curves_csv(path: Path, pa: AmCurve, pd: AmCurve, cascade: AmCurve) -> None:
    if not (
        np.array_equal(pa.bin_centers, pd.bin_centers)
        and np.array_equal(pa.bin_centers, cascade.bin_centers)
    ):
        raise ValueError("curve tables must share one amplitude grid")
    lines = [
        "amplitude,pa_gain,pa_phase_rad,pd_gain,pd_phase_rad,cascade_gain,cascade_phase_rad"
    ]
    for i, amp in enumerate(pa.bin_centers):
        cells = [f"{amp:.10g}"]
        for curve in (pa, pd, cascade):
            if curve.counts[i] == 0:
                cells += ["", ""]
            else:
                cells += [
                    _fmt(float(curve.mean_gain[i]), ".9g"),
                    _fmt(float(curve.mean_phase_shift[i]), ".9g"),
                ]
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_identify_csv(path: Path, truth: PolyPaCoeffs, estimate: PolyPaCoeffs) -> None:
    lines = ["order,true_re,true_im,est_re,est_im,abs_err,rel_err"]
    n = max(truth.a.size, estimate.a.size)
    for k in range(n):
        true_k = truth.a[k] if k < truth.a.size else 0.0 + 0.0j
        est_k = estimate.a[k] if k < estimate.a.size else 0.0 + 0.0j
        abs_err = abs(est_k - true_k)
        rel = abs_err / abs(true_k) if abs(true_k) > 0 else None
        lines.append(
            ",".join(
                [
                    str(2 * k + 1),
                    _fmt(true_k.real, ".9g"),
                    _fmt(true_k.imag, ".9g"),
                    _fmt(est_k.real, ".9g"),
                    _fmt(est_k.imag, ".9g"),
                    _fmt(abs_err, ".6g"),
                    "" if rel is None else _fmt(rel, ".6g"),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
