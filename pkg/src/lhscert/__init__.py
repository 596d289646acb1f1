"""Certified local-hidden-state (LHS) models for filtered two-qubit states.

This package decides, with machine-checkable certificates, whether a noisy
Bell state admits a local-hidden-state model, and whether that model survives
arbitrary local filtering on the untrusted side.  Three certificate layers are
provided:

* closed-form convex decompositions for the analytic regimes
  (:mod:`lhscert.analytic`),
* numerically solved decompositions onto a shrunk icosahedral measurement
  family, exported as exact rational-free JSON certificates
  (:mod:`lhscert.sdp`),
* interval guarantees that stitch both kinds of certificate into a verified
  lower bound covering every canonical angle (:mod:`lhscert.sweep`).

Certificates serialize to JSON and re-verify from scratch: verification
recomputes every matrix inequality and never trusts the solver that produced
the certificate.
"""

from __future__ import annotations

from .analytic import (
    DecompositionCertificate,
    is_ppt_separable,
    small_angle_best,
    small_angle_certificate,
    small_angle_gate_margin,
    transport_certificate,
    transport_max_alpha,
    verify_decomposition,
    werner_mix_certificate,
    werner_mix_max_alpha,
)
from .errors import CertificateError, LhscertError, SolverError, ValidationError
from .measurements import (
    SHRINKING_TABLE,
    icosahedron_family,
    shrinking_factor_estimate,
    shrinking_profile,
    table_eta,
)
from .sdp import LhsSdpCertificate, certify_lhs, verify_certificate
from .states import (
    CanonicalParams,
    FilterPair,
    NormalFormResult,
    WernerParams,
    apply_filters,
    canonical_state,
    filter_normal_form,
    fold_theta,
    werner,
)
from .sweep import (
    DEFAULT_GRID,
    SweepConfig,
    SweepRecord,
    SweepResult,
    emit,
    sweep,
    verdict,
)

__version__ = "0.1.0"

__all__ = [
    "CanonicalParams",
    "CertificateError",
    "DEFAULT_GRID",
    "DecompositionCertificate",
    "FilterPair",
    "LhsSdpCertificate",
    "LhscertError",
    "NormalFormResult",
    "SHRINKING_TABLE",
    "SolverError",
    "SweepConfig",
    "SweepRecord",
    "SweepResult",
    "ValidationError",
    "WernerParams",
    "apply_filters",
    "canonical_state",
    "certify_lhs",
    "emit",
    "filter_normal_form",
    "fold_theta",
    "icosahedron_family",
    "is_ppt_separable",
    "shrinking_factor_estimate",
    "shrinking_profile",
    "small_angle_best",
    "small_angle_certificate",
    "small_angle_gate_margin",
    "sweep",
    "table_eta",
    "transport_certificate",
    "transport_max_alpha",
    "verdict",
    "verify_certificate",
    "verify_decomposition",
    "werner",
    "werner_mix_certificate",
    "werner_mix_max_alpha",
    "__version__",
]
