"""Monte Carlo model of a gigahertz-clocked two-state polarization QKD link.

The package is organised as a pipeline:

photonics  pulsed two-polarization source, lossy broadening channel
detector   single-photon detectors with rate-dependent timing response
protocol   event-level simulation of a clocked exchange, gating, sifting
postproc   error correction, privacy amplification, net key rate
analytics  closed-form predictions for the same physics
config     TOML-backed configuration bundle for a whole link
sweep      parameter sweeps with CSV/gnuplot output
calibrate  fit free parameters to measured anchor error rates

The names below are the supported surface; everything else may move.
"""

from .analytics import (
    GateLeakage,
    LinkPrediction,
    TimingBudget,
    analytic_qber,
    analytic_rates,
    gate_leakage,
    nonparalyzable_rate,
    per_arm_detected_cps,
    timing_budget,
    total_system_fwhm,
)
from .calibrate import (
    DEFAULT_ANCHORS,
    AnchorReport,
    CalibrationAnchor,
    CalibrationResult,
    VerificationRow,
    anchor_config,
    apply_param,
    calibrate,
    verify_calibration,
)
from .config import (
    GateSpec,
    LinkConfig,
    config_from_mapping,
    config_to_mapping,
    default_config,
    load_config,
    render_config,
)
from .detector import (
    BUILTIN_PROFILES,
    DetectionEvent,
    DetectorProfile,
    apply_dead_time,
    centroid_shift_at,
    click_probability,
    dead_time_mask,
    generate_dark_counts,
    get_profile,
    jitter_fwhm_at,
    sample_response_time,
)
from .photonics import (
    FWHM_PER_SIGMA,
    ChannelSpec,
    EmittedPulse,
    SourceSpec,
    channel_transmittance,
    draw_photon_number,
    emitter_pulse_fwhm,
    encode_bit,
    encode_bits,
    make_pulse,
    propagate,
)
from .postproc import (
    DistillationResult,
    ReconciliationReport,
    SecurityParams,
    binary_entropy,
    distill,
    key_to_hex,
    net_rate,
    privacy_amplify,
    reconcile,
)
from .protocol import (
    ANALYZER_DEG,
    RunSummary,
    SiftedKey,
    SlotRecord,
    alice_bits,
    assign_slot,
    compute_qber,
    measure_b92,
    run_link,
)
from .sweep import (
    SweepRow,
    SweepSpec,
    emit_results,
    load_sweep,
    point_config,
    point_seed,
    preset_fig2,
    preset_fig3,
    rows_to_csv,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "ANALYZER_DEG",
    "AnchorReport",
    "BUILTIN_PROFILES",
    "CalibrationAnchor",
    "CalibrationResult",
    "ChannelSpec",
    "DEFAULT_ANCHORS",
    "DetectionEvent",
    "DetectorProfile",
    "DistillationResult",
    "EmittedPulse",
    "FWHM_PER_SIGMA",
    "GateLeakage",
    "GateSpec",
    "LinkConfig",
    "LinkPrediction",
    "ReconciliationReport",
    "RunSummary",
    "SecurityParams",
    "SiftedKey",
    "SlotRecord",
    "SourceSpec",
    "SweepRow",
    "SweepSpec",
    "TimingBudget",
    "VerificationRow",
    "alice_bits",
    "analytic_qber",
    "analytic_rates",
    "anchor_config",
    "apply_dead_time",
    "apply_param",
    "assign_slot",
    "binary_entropy",
    "calibrate",
    "centroid_shift_at",
    "channel_transmittance",
    "click_probability",
    "compute_qber",
    "config_from_mapping",
    "config_to_mapping",
    "dead_time_mask",
    "default_config",
    "distill",
    "draw_photon_number",
    "emit_results",
    "emitter_pulse_fwhm",
    "encode_bit",
    "encode_bits",
    "gate_leakage",
    "generate_dark_counts",
    "get_profile",
    "jitter_fwhm_at",
    "key_to_hex",
    "load_config",
    "load_sweep",
    "make_pulse",
    "measure_b92",
    "net_rate",
    "nonparalyzable_rate",
    "per_arm_detected_cps",
    "point_config",
    "point_seed",
    "preset_fig2",
    "preset_fig3",
    "privacy_amplify",
    "propagate",
    "reconcile",
    "render_config",
    "rows_to_csv",
    "run_link",
    "run_sweep",
    "sample_response_time",
    "timing_budget",
    "total_system_fwhm",
    "verify_calibration",
    "__version__",
]
