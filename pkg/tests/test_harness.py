"""Tests for the experiment harness: pipelines, reports, CSV outputs."""

import numpy as np
import pytest

from predist.dpd import DpdTrainConfig
from predist.harness import (
    SWEEP_ORDER,
    ExperimentConfig,
    run_curves,
    run_experiment,
    run_identify,
    run_sweep,
)
from predist.pamodel import PolyPaCoeffs, ghorbani_am_am

FAST_DPD = DpdTrainConfig(order_k=4, mu=0.05, passes=150)


def fast_config(**kw):
    base = dict(
        modulation="qam16",
        n_symbols=8000,
        dpd=FAST_DPD,
        figures=False,
    )
    base.update(kw)
    return ExperimentConfig(**base)


class TestConfigValidation:
    def test_equal_seeds_rejected(self):
        with pytest.raises(ValueError, match="seed"):
            ExperimentConfig(seed_train=5, seed_eval=5)

    def test_drive_guard(self):
        with pytest.raises(ValueError, match="drive"):
            ExperimentConfig(drive=1.5)
        with pytest.raises(ValueError, match="drive"):
            ExperimentConfig(drive=0.0)

    def test_bad_modulation(self):
        with pytest.raises(ValueError, match="unknown modulation"):
            ExperimentConfig(modulation="fm")

    def test_channel_plan_follows_rolloff(self):
        cfg = ExperimentConfig()
        assert cfg.plan.channel_width == pytest.approx(1.35)
        assert cfg.plan.adjacent_offset == pytest.approx(1.35)

    def test_digest_changes_with_parameters(self):
        assert fast_config().digest() != fast_config(drive=0.9).digest()
        assert fast_config().digest() == fast_config().digest()


class TestRunExperiment:
    def test_linear_pa_nothing_to_linearize(self):
        cfg = fast_config(pa_override=PolyPaCoeffs([1.0]))
        report = run_experiment(cfg)
        row = report.rows[0]
        assert abs(row.acp_before_db - row.acp_after_db) < 0.5
        assert row.acp_before_db <= -40.0
        assert row.acp_after_db <= -40.0
        assert row.evm_before_pct < 0.5

    def test_default_pa_improves(self):
        report = run_experiment(fast_config())
        row = report.rows[0]
        assert row.improvement_db > 5.0
        assert row.evm_after_pct < row.evm_before_pct

    def test_report_arithmetic_exact(self):
        row = run_experiment(fast_config()).rows[0]
        assert row.improvement_db == row.acp_before_db - row.acp_after_db

    def test_csv_outputs_and_determinism(self, tmp_path):
        paths = {}
        for tag in ("a", "b"):
            out = tmp_path / f"report_{tag}.csv"
            spectra = tmp_path / f"spectra_{tag}.csv"
            run_experiment(fast_config(out=out, spectra_out=spectra))
            paths[tag] = (out.read_bytes(), spectra.read_bytes())
        assert paths["a"] == paths["b"]
        header = paths["a"][0].decode().splitlines()[0]
        assert header == (
            "modulation,acp_before_db,acp_after_db,improvement_db,"
            "evm_before_pct,evm_after_pct,seed_train,seed_eval"
        )
        spectra_lines = paths["a"][1].decode().splitlines()
        assert spectra_lines[0] == "freq,psd_before_db,psd_after_db"
        freqs = [float(line.split(",")[0]) for line in spectra_lines[1:]]
        assert freqs == sorted(freqs)

    def test_out_of_sample_seeds_in_row(self):
        row = run_experiment(fast_config(seed_train=7, seed_eval=9)).rows[0]
        assert (row.seed_train, row.seed_eval) == (7, 9)


@pytest.fixture(scope="module")
def sweep_report(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep") / "report.csv"
    cfg = fast_config(n_symbols=6000, out=out, spectra_out=out.with_name("spectra.csv"))
    report = run_sweep(cfg)
    return report, out


@pytest.fixture(scope="module")
def curves(tmp_path_factory):
    out = tmp_path_factory.mktemp("curves") / "curves.csv"
    cfg = fast_config(out=out)
    pa_curve, pd_curve, cascade = run_curves(cfg, n_bins=64)
    return pa_curve, pd_curve, cascade, out


class TestRunSweep:
    def test_four_rows_in_table_order(self, sweep_report):
        report, _ = sweep_report
        assert tuple(r.modulation for r in report.rows) == SWEEP_ORDER
        assert SWEEP_ORDER == ("qam16", "psk8", "qpsk", "bpsk")

    def test_every_row_improves(self, sweep_report):
        report, _ = sweep_report
        for row in report.rows:
            assert row.error is None
            assert row.improvement_db > 0.0, row

    def test_per_modulation_spectra_files(self, sweep_report):
        _, out = sweep_report
        for kind in SWEEP_ORDER:
            assert out.with_name(f"spectra_{kind}.csv").exists()

    def test_report_csv_has_header_plus_four_rows(self, sweep_report):
        _, out = sweep_report
        lines = out.read_text().splitlines()
        assert len(lines) == 5


class TestRunCurves:
    def test_pa_gain_matches_model_at_top_bin(self, curves):
        pa_curve = curves[0]
        ok = np.nonzero(pa_curve.counts > 0)[0]
        top = ok[-1]
        c = pa_curve.bin_centers[top]
        want = ghorbani_am_am(c) / c
        assert pa_curve.mean_gain[top] == pytest.approx(want, rel=0.02)

    def test_cascade_flat_in_operating_range(self, curves):
        cascade = curves[2]
        sel = (
            (cascade.bin_centers >= 0.2)
            & (cascade.bin_centers <= 0.9)
            & (cascade.counts > 0)
        )
        gain_db = 20 * np.log10(cascade.mean_gain[sel])
        assert np.max(np.abs(gain_db)) < 0.5

    def test_predistorter_output_monotone(self, curves):
        pd_curve = curves[1]
        sel = (pd_curve.counts > 10) & (pd_curve.bin_centers >= 0.1)
        out_amp = pd_curve.bin_centers[sel] * pd_curve.mean_gain[sel]
        assert np.all(np.diff(out_amp) > 0)

    def test_csv_shape(self, curves):
        out = curves[3]
        lines = out.read_text().splitlines()
        assert lines[0] == (
            "amplitude,pa_gain,pa_phase_rad,pd_gain,pd_phase_rad,"
            "cascade_gain,cascade_phase_rad"
        )
        assert len(lines) == 1 + 64


class TestRunIdentify:
    def test_synthetic_truth_recovered(self, tmp_path):
        truth = PolyPaCoeffs([1.0, -0.05 + 0.01j, 0.002])
        cfg = fast_config(
            n_symbols=50_000,
            dpd=DpdTrainConfig(mode="identify", order_k=3, mu=0.05, passes=2),
            out=tmp_path / "ident.csv",
        )
        est = run_identify(cfg, truth)
        rel = np.abs(est.a - truth.a) / np.abs(truth.a)
        assert np.all(rel < 0.01)
        lines = (tmp_path / "ident.csv").read_text().splitlines()
        assert lines[0] == "order,true_re,true_im,est_re,est_im,abs_err,rel_err"
        assert len(lines) == 4

    def test_linear_truth_control(self):
        cfg = fast_config(
            n_symbols=50_000,
            dpd=DpdTrainConfig(mode="identify", order_k=3, mu=0.05, passes=2),
        )
        est = run_identify(cfg, PolyPaCoeffs([1.0]))
        assert np.all(np.abs(est.a[1:]) < 1e-3)
