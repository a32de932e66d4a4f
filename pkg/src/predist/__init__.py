"""Baseband polynomial-predistortion simulator for SSPA linearization.

A library plus CLI that pushes digital modulations (BPSK/QPSK/8-PSK/16-QAM)
through a Ghorbani-modeled solid-state power amplifier, trains an NLMS-adapted
odd-order polynomial predistorter, and measures adjacent-channel power and
EVM before and after linearization.
"""

from .dpd import (
    DivergenceError,
    DpdTrainConfig,
    NlmsState,
    PredistorterCoeffs,
    apply_predistorter,
    identify_pa,
    nlms_step,
    poly_basis,
    train_predistorter,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    PipelineError,
    ReportRow,
    run_curves,
    run_experiment,
    run_identify,
    run_sweep,
)
from .metrics import (
    AcpReport,
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
    BPSK,
    PSK8,
    QAM16,
    QPSK,
    Constellation,
    ModulationScheme,
    PulseShapeConfig,
    build_constellation,
    demap_symbols,
    map_symbols,
    matched_filter_downsample,
    pulse_shape,
    rrc_taps,
)
from .pamodel import (
    GhorbaniParams,
    PolyPaCoeffs,
    apply_poly_pa,
    apply_sspa,
    ghorbani_am_am,
    ghorbani_am_pm,
)
from .sigcore import (
    BitStream,
    ComplexEnvelope,
    EnvelopeStats,
    envelope_stats,
    gen_bits,
    scale_to_peak,
)

__version__ = "0.1.0"
