"""
Synthesis package
H2 norm bounds, Schur complement checks and Luenberger estimator synthesis
"""

from synthesis.certificates import (
    NormCertificate,
    SynthesisResult,
    Verification,
    projected_spectrum,
    probe_margin,
    save_certificate,
    verify_certificate,
    verify_synthesis,
    write_report,
)
from synthesis.h2_norm import (
    DEFAULT_DEGREE,
    DEFAULT_EPS,
    DenseH2,
    direction_sup_by_simulation,
    h2_bound_gramian,
    h2_bound_schur,
    h2_norm_dense,
    h2_norm_ode,
)
from synthesis.schur import SchurReport, schur_consistency_check
from synthesis.estimator import reconstruct_gain, reconstruct_gain_with_residual, synthesize_estimator

__all__ = [
    "NormCertificate",
    "SynthesisResult",
    "Verification",
    "projected_spectrum",
    "probe_margin",
    "save_certificate",
    "verify_certificate",
    "verify_synthesis",
    "write_report",
    "DEFAULT_DEGREE",
    "DEFAULT_EPS",
    "DenseH2",
    "direction_sup_by_simulation",
    "h2_bound_gramian",
    "h2_bound_schur",
    "h2_norm_dense",
    "h2_norm_ode",
    "SchurReport",
    "schur_consistency_check",
    "reconstruct_gain",
    "reconstruct_gain_with_residual",
    "synthesize_estimator",
]
