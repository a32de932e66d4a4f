"""Command-line interface.

Subcommands: simulate, sweep, curves, identify. Shared flags can also come
from a ``--config`` file of ``key = value`` lines (``#`` starts a comment);
explicit command-line flags win over file values.

Exit codes: 0 success, 1 configuration error, 2 runtime/divergence error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .dpd import DivergenceError, DpdTrainConfig
from .harness import ExperimentConfig, run_curves, run_experiment, run_identify, run_sweep
from .modem import PulseShapeConfig
from .pamodel import PolyPaCoeffs

__all__ = ["main"]


class ConfigError(Exception):
    """Bad command line, config file, or parameter combination."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; the CLI contract reserves
    # 2 for runtime errors, so remap usage problems to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


_CONFIG_KEYS = {
    "modulation": str,
    "symbols": int,
    "sps": int,
    "rolloff": float,
    "drive": float,
    "dpd-order": int,
    "mu": float,
    "passes": int,
    "seed-train": int,
    "seed-eval": int,
    "out": str,
    "spectra-out": str,
    "bins": int,
    "truth": str,
}

_DEFAULTS = {
    "modulation": None,
    "symbols": 50_000,
    "sps": 8,
    "rolloff": 0.35,
    "drive": 1.0,
    "dpd_order": 4,
    "mu": 0.05,
    "passes": None,  # resolved per command: identification 2, training 300
    "seed_train": 1,
    "seed_eval": 2,
    "out": None,
    "spectra_out": None,
    "bins": 64,
    "truth": None,
}


def _add_shared_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--symbols", type=int, help="symbols per record (default 50000)")
    p.add_argument("--sps", type=int, help="samples per symbol (default 8)")
    p.add_argument("--rolloff", type=float, help="RRC rolloff (default 0.35)")
    p.add_argument("--drive", type=float, help="peak amplitude into the SSPA (default 1.0)")
    p.add_argument("--dpd-order", type=int, help="number of odd-order terms (default 4)")
    p.add_argument("--mu", type=float, help="NLMS step size (default 0.05)")
    p.add_argument(
        "--passes",
        type=int,
        help="adaptation sweeps (default: 2 for identify, 300 for training)",
    )
    p.add_argument("--seed-train", type=int, help="training record seed (default 1)")
    p.add_argument("--seed-eval", type=int, help="evaluation record seed (default 2)")
    p.add_argument("--out", type=str, help="primary CSV output path")
    p.add_argument("--spectra-out", type=str, help="spectra CSV output path")
    p.add_argument("--config", type=str, help="key = value parameter file")
    p.add_argument(
        "--no-figures",
        action="store_true",
        help="skip rendering PNG figures next to the CSV outputs",
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="predist", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one modulation end to end")
    p_sim.add_argument(
        "--modulation", type=str, choices=["bpsk", "qpsk", "psk8", "qam16"]
    )
    _add_shared_flags(p_sim)

    p_sweep = sub.add_parser("sweep", help="run all four modulations")
    _add_shared_flags(p_sweep)

    p_curves = sub.add_parser("curves", help="amplifier/predistorter/cascade AM curves")
    p_curves.add_argument("--bins", type=int, help="amplitude bins (default 64)")
    p_curves.add_argument(
        "--modulation", type=str, choices=["bpsk", "qpsk", "psk8", "qam16"]
    )
    _add_shared_flags(p_curves)

    p_ident = sub.add_parser("identify", help="identify a synthetic polynomial amplifier")
    p_ident.add_argument(
        "--truth",
        type=str,
        help="comma-separated re,im pairs of the true odd-order coefficients",
    )
    p_ident.add_argument(
        "--modulation", type=str, choices=["bpsk", "qpsk", "psk8", "qam16"]
    )
    _add_shared_flags(p_ident)

    return parser


def _parse_config_file(path: str) -> dict:
    """Read ``key = value`` lines; keys may use '-' or '_'."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("_", "-")
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key.replace("-", "_")] = _CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return values


def _merge(args: argparse.Namespace) -> tuple[dict, set]:
    """Resolve each parameter as CLI flag > config file > default.

    Also returns the set of keys that were given explicitly (either way).
    """
    merged = dict(_DEFAULTS)
    explicit = set()
    if getattr(args, "config", None):
        file_values = _parse_config_file(args.config)
        merged.update(file_values)
        explicit |= set(file_values)
    for key in list(merged):
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
            explicit.add(key)
    return merged, explicit


def _parse_truth(text: str) -> PolyPaCoeffs:
    try:
        parts = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"--truth must be comma-separated numbers: {exc}") from exc
    if not parts or len(parts) % 2 != 0:
        raise ConfigError(
            "--truth needs an even number of values (re,im per odd-order coefficient)"
        )
    values = np.asarray(parts).reshape(-1, 2)
    try:
        return PolyPaCoeffs(a=values[:, 0] + 1j * values[:, 1])
    except ValueError as exc:
        raise ConfigError(f"--truth: {exc}") from exc


def _experiment_config(params: dict, figures: bool, dpd_order: int | None = None) -> ExperimentConfig:
    try:
        return ExperimentConfig(
            modulation=params["modulation"] or "qam16",
            n_symbols=params["symbols"],
            pulse=PulseShapeConfig(rolloff=params["rolloff"], sps=params["sps"]),
            drive=params["drive"],
            dpd=DpdTrainConfig(
                order_k=dpd_order if dpd_order is not None else params["dpd_order"],
                mu=params["mu"],
                passes=params["passes"],
            ),
            seed_train=params["seed_train"],
            seed_eval=params["seed_eval"],
            out=params["out"],
            spectra_out=params["spectra_out"],
            figures=figures,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _print_rows(report) -> None:
    print(
        f"{'modulation':<11}{'acp_before':>12}{'acp_after':>12}"
        f"{'improvement':>13}{'evm_before%':>13}{'evm_after%':>12}"
    )
    for r in report.rows:
        if r.error is not None:
            print(f"{r.modulation:<11}  FAILED: {r.error}")
            continue
        print(
            f"{r.modulation:<11}{r.acp_before_db:>12.2f}{r.acp_after_db:>12.2f}"
            f"{r.improvement_db:>13.2f}{r.evm_before_pct:>13.3f}{r.evm_after_pct:>12.3f}"
        )


def main(argv: list[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse handles --help and usage errors
        return int(exc.code or 0)
    try:
        params, explicit = _merge(args)
        if params["passes"] is None:
            params["passes"] = 2 if args.command == "identify" else 300
        figures = not args.no_figures

        if args.command == "simulate":
            if params["modulation"] is None:
                raise ConfigError("simulate requires --modulation (flag or config file)")
            params["out"] = params["out"] or "report.csv"
            report = run_experiment(_experiment_config(params, figures))
            _print_rows(report)
        elif args.command == "sweep":
            params["modulation"] = "qam16"  # placeholder; the sweep sets each kind
            params["out"] = params["out"] or "report.csv"
            report = run_sweep(_experiment_config(params, figures))
            _print_rows(report)
            if any(r.error is not None for r in report.rows):
                return 2
        elif args.command == "curves":
            params["modulation"] = params["modulation"] or "qam16"
            params["out"] = params["out"] or "curves.csv"
            cfg = _experiment_config(params, figures)
            run_curves(cfg, n_bins=params["bins"])
            print(f"curve tables written to {cfg.out}")
        elif args.command == "identify":
            if params["truth"] is None:
                raise ConfigError("identify requires --truth (flag or config file)")
            truth = _parse_truth(params["truth"])
            # unless the order was given explicitly, match the truth length
            order = params["dpd_order"] if "dpd_order" in explicit else truth.a.size
            params["out"] = params["out"] or "identify.csv"
            cfg = _experiment_config(params, figures, dpd_order=order)
            estimate = run_identify(cfg, truth)
            n = max(truth.a.size, estimate.a.size)
            for k in range(n):
                t = truth.a[k] if k < truth.a.size else 0j
                e = estimate.a[k] if k < estimate.a.size else 0j
                print(f"order {2 * k + 1}: true {t:.6g}  estimated {e:.6g}")
        else:  # pragma: no cover - argparse enforces the choices
            raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"predist: config error: {exc}", file=sys.stderr)
        return 1
    except DivergenceError as exc:
        print(f"predist: divergence error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"predist: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
