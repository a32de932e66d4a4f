"""Acceptance suite: one test per criterion, printed as a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timings. Every tolerance is pinned here; the expected values come
from independent oracles (direct formula evaluation, least-squares floors,
brute-force grid scans) recorded in the module they exercise.
"""

import time

import numpy as np
import pytest

from predist.cli import main as cli_main
from predist.dpd import DpdTrainConfig, apply_predistorter, identify_pa, train_predistorter
from predist.harness import ExperimentConfig, run_experiment, run_sweep
from predist.metrics import (
    ChannelPlan,
    WelchConfig,
    extract_am_curves,
    measure_acp,
    welch_psd,
)
from predist.modem import (
    QAM16,
    SCHEMES,
    PulseShapeConfig,
    demap_symbols,
    map_symbols,
    matched_filter_downsample,
    pulse_shape,
)
from predist.pamodel import (
    GhorbaniParams,
    PolyPaCoeffs,
    apply_poly_pa,
    apply_sspa,
    ghorbani_am_am,
    ghorbani_am_pm,
)
from predist.sigcore import ComplexEnvelope, gen_bits, scale_to_peak


def report(n, label, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"\n[acceptance] criterion {n} ({label}): {status}  {detail}")
    assert ok, f"criterion {n} ({label}) failed: {detail}"


def test_criterion_1_model_fidelity():
    t0 = time.perf_counter()
    p = GhorbaniParams()
    x1, x2, x3, x4 = p.x
    y1, y2, y3, y4 = p.y
    h = np.linspace(0.0, 1.2, 10_000)

    # independent direct evaluation of the two closed forms
    am_ref = x1 * h**x2 / (1.0 + x3 * h**x2) + x4 * h
    pm_ref = y1 * h**y2 / (1.0 + y3 * h**y2) + y4 * h
    am = ghorbani_am_am(h, p)
    pm = ghorbani_am_pm(h, p)
    scale_am = np.maximum(np.abs(am_ref), 1e-30)
    scale_pm = np.maximum(np.abs(pm_ref), 1e-30)
    rel_am = np.max(np.abs(am - am_ref) / scale_am)
    rel_pm = np.max(np.abs(pm - pm_ref) / scale_pm)

    spot_am = ghorbani_am_am(1.0, p)
    spot_pm = ghorbani_am_pm(1.0, p)
    elapsed = time.perf_counter() - t0

    ok = (
        rel_am <= 1e-12
        and rel_pm <= 1e-12
        and abs(spot_am - 1.00899) < 1e-5
        and abs(spot_pm - 0.38964) < 1e-5
        and elapsed < 1.0
    )
    report(
        1,
        "model fidelity",
        ok,
        f"max rel err AM/AM {rel_am:.2e}, AM/PM {rel_pm:.2e}; "
        f"spot {spot_am:.6f}/{spot_pm:.6f}; {elapsed:.2f}s",
    )


def test_criterion_2_nlms_identification():
    t0 = time.perf_counter()
    truth = PolyPaCoeffs([1.0, -0.05 + 0.01j, 0.002])
    cfg = DpdTrainConfig(mode="identify", order_k=3, mu=0.05, passes=2)

    # 50 000 16-QAM-driven samples (one sample per symbol)
    symbols = map_symbols(gen_bits(1, 50_000 * 4), QAM16)
    env = scale_to_peak(ComplexEnvelope(symbols, 1), 1.0)
    est = identify_pa(env, apply_poly_pa(env, truth), cfg)
    rel = np.abs(est.a - truth.a) / np.abs(truth.a)

    est_lin = identify_pa(env, apply_poly_pa(env, PolyPaCoeffs([1.0])), cfg)
    nonlinear = np.abs(est_lin.a[1:])
    elapsed = time.perf_counter() - t0

    ok = bool(np.all(rel < 0.01) and np.all(nonlinear < 1e-3) and elapsed < 10.0)
    report(
        2,
        "NLMS identification",
        ok,
        f"rel errors {np.array2string(rel, precision=2)}, "
        f"linear-control nonlinear terms {np.array2string(nonlinear, precision=2)}; "
        f"{elapsed:.2f}s",
    )


def test_criterion_3_predistortion_linearity():
    t0 = time.perf_counter()
    ghorbani = GhorbaniParams()
    pa = lambda env: apply_sspa(env, ghorbani)
    pulse = PulseShapeConfig()
    cfg = DpdTrainConfig(order_k=4)

    def record(seed):
        bits = gen_bits(seed, 12_500 * 4)
        return scale_to_peak(pulse_shape(map_symbols(bits, QAM16), pulse), 1.0)

    env_train, env_eval = record(1), record(2)
    pd = train_predistorter(env_train, pa, cfg)

    cascade = pa(apply_predistorter(env_eval, pd))
    curve = extract_am_curves(env_eval, cascade, 64)
    sel = (curve.bin_centers >= 0.2) & (curve.bin_centers <= 0.9) & (curve.counts > 0)
    gain_db = 20.0 * np.log10(curve.mean_gain[sel])
    phase_deg = np.degrees(curve.mean_phase_shift[sel])

    # least-squares inverse-fit floor on the same training subset
    from predist.dpd import _basis_matrix, _equalize_amplitudes

    z = pa(env_train).samples / cfg.target_gain
    idx = _equalize_amplitudes(np.abs(z))
    basis = _basis_matrix(z[idx], cfg.order_k)
    target = env_train.samples[idx]
    w_ls, *_ = np.linalg.lstsq(basis, target, rcond=None)
    r_ls = float(np.linalg.norm(basis @ w_ls - target))
    r_nlms = float(np.linalg.norm(basis @ pd.w - target))
    elapsed = time.perf_counter() - t0

    ok = (
        np.max(np.abs(gain_db)) <= 0.5
        and np.max(np.abs(phase_deg)) <= 2.0
        and r_nlms <= 2.0 * r_ls
        and elapsed < 30.0
    )
    report(
        3,
        "predistortion linearity",
        ok,
        f"gain dev {np.max(np.abs(gain_db)):.3f} dB, phase {np.max(np.abs(phase_deg)):.3f} deg, "
        f"NLMS/LS residual {r_nlms / r_ls:.2f}x; {elapsed:.1f}s",
    )


def test_criterion_4_acp_improvement_sweep():
    t0 = time.perf_counter()
    reportobj = run_sweep(ExperimentConfig(figures=False))
    elapsed = time.perf_counter() - t0
    rows = {r.modulation: r for r in reportobj.rows}
    required = {"qam16": 10.0, "qpsk": 5.0, "bpsk": 5.0, "psk8": 5.0}
    detail = ", ".join(
        f"{kind} {rows[kind].improvement_db:+.1f} dB (need >= {need})"
        for kind, need in required.items()
    )
    ok = (
        all(rows[kind].error is None for kind in required)
        and all(rows[kind].improvement_db >= need for kind, need in required.items())
        and elapsed < 120.0
    )
    report(4, "ACP improvement", ok, f"{detail}; {elapsed:.1f}s")


def test_criterion_5_metrics_calibration():
    welch = WelchConfig(segment_len=4096, overlap_fraction=0.5)
    plan = ChannelPlan(main_center=0.0, channel_width=1.35, adjacent_offset=1.35)

    rng = np.random.default_rng(5)
    noise = (rng.standard_normal(2**18) + 1j * rng.standard_normal(2**18)) / np.sqrt(2)
    spec = welch_psd(ComplexEnvelope(noise, 8), welch)
    acp_white = measure_acp(spec, plan).acp_db

    lin = 10.0 ** (spec.psd_db / 10.0)
    df = spec.freqs[1] - spec.freqs[0]
    integrated = float(np.sum(lin) * df)

    symbols = map_symbols(gen_bits(13, 30_000 * 4), QAM16)
    env = scale_to_peak(pulse_shape(symbols, PulseShapeConfig()), 1.0)
    acp_clean = measure_acp(welch_psd(env, welch), plan).acp_db

    ok = abs(acp_white) <= 0.3 and abs(integrated - 1.0) <= 0.01 and acp_clean <= -40.0
    report(
        5,
        "metrics calibration",
        ok,
        f"white-noise ACP {acp_white:+.3f} dB, integrated power {integrated:.4f}, "
        f"clean-RRC ACP {acp_clean:.1f} dB",
    )


def test_criterion_6_chain_integrity():
    # identity-PA pipeline adds no measurable distortion
    row = run_experiment(
        ExperimentConfig(pa_override=PolyPaCoeffs([1.0]), figures=False)
    ).rows[0]
    evm_ok = row.evm_before_pct < 0.5 and row.evm_after_pct < 0.5

    # noiseless bit round trip, 50 000 symbols per scheme
    pulse = PulseShapeConfig()
    roundtrip_ok = True
    for scheme in SCHEMES:
        bits = gen_bits(23, 50_000 * scheme.bits_per_symbol)
        symbols = map_symbols(bits, scheme)
        rx = matched_filter_downsample(pulse_shape(symbols, pulse), pulse, len(symbols))
        if not np.array_equal(demap_symbols(rx, scheme).bits, bits.bits):
            roundtrip_ok = False

    ok = evm_ok and roundtrip_ok
    report(
        6,
        "chain integrity",
        ok,
        f"identity-PA EVM {row.evm_before_pct:.3f}%/{row.evm_after_pct:.3f}%, "
        f"bit round trip {'clean' if roundtrip_ok else 'FAILED'}",
    )


def test_criterion_7_determinism(tmp_path):
    blobs = []
    for tag in ("first", "second"):
        out = tmp_path / f"report_{tag}.csv"
        spectra = tmp_path / f"spectra_{tag}.csv"
        code = cli_main(
            ["sweep", "--symbols", "4000", "--passes", "150",
             "--out", str(out), "--spectra-out", str(spectra), "--no-figures"]
        )
        assert code == 0
        parts = [out.read_bytes()]
        for kind in ("qam16", "psk8", "qpsk", "bpsk"):
            parts.append((tmp_path / f"spectra_{tag}_{kind}.csv").read_bytes())
        blobs.append(parts)
    ok = blobs[0] == blobs[1]
    report(7, "determinism", ok, "byte-identical report and spectra CSVs across reruns")
