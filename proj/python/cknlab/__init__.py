"""Python bindings for the cknlab core library."""

from ._cknlab import (
    AsymptoticsReport,
    ExponentFit,
    GateRecord,
    NonlinearitySpec,
    Parameters,
    PhiMonotonicity,
    PowerTerm,
    RadialSolution,
    RegimeReport,
    ScanHit,
    ScanResult,
    ShootOptions,
    __version__,
    ball_criterion,
    boundary_layer_J_json,
    check_asymptotics,
    classify_regime,
    condition_margin_ball,
    conformal_ii,
    derive_parameters,
    energy_identity_json,
    phi_monotonicity,
    run_flow,
    scan_solutions,
    shoot,
    verify_lemma22_json,
    verify_prop21_json,
)

__all__ = [
    "AsymptoticsReport",
    "ExponentFit",
    "GateRecord",
    "NonlinearitySpec",
    "Parameters",
    "PhiMonotonicity",
    "PowerTerm",
    "RadialSolution",
    "RegimeReport",
    "ScanHit",
    "ScanResult",
    "ShootOptions",
    "__version__",
    "ball_criterion",
    "boundary_layer_J_json",
    "check_asymptotics",
    "classify_regime",
    "condition_margin_ball",
    "conformal_ii",
    "derive_parameters",
    "energy_identity_json",
    "phi_monotonicity",
    "run_flow",
    "scan_solutions",
    "shoot",
    "verify_lemma22_json",
    "verify_prop21_json",
]
