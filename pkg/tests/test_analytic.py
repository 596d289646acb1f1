"""Tests for the closed-form convex-decomposition certificates.

Oracle strategy: every closed-form validity bound is cross-checked against an
independent numeric bisection on raw certificate-construction success, and
every constructed remainder is re-checked entrywise against independently
transcribed matrix formulas.  Boundary behaviour (margins hitting zero at the
claimed bound) is asserted directly.
"""
from __future__ import annotations

import dataclasses
import json
import math

import numpy as np
import pytest

from lhscert.analytic import (
    DecompositionCertificate,
    ReferenceComponent,
    WERNER_REFERENCE_ALPHA,
    is_ppt_separable,
    small_angle_best,
    small_angle_certificate,
    small_angle_gate_margin,
    small_angle_max_theta,
    transport_certificate,
    transport_condition_bounds,
    transport_max_alpha,
    verify_decomposition,
    werner_mix_certificate,
    werner_mix_max_alpha,
)
from lhscert.errors import CertificateError, ValidationError
from lhscert.states import CanonicalParams, QUARTER_PI, canonical_state, werner

HANDOVER_THETA = math.atan(68.0 / 75.0)


def _bisect_validity(valid, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Largest x in [lo, hi] with valid(x), assuming monotone validity."""
    assert valid(lo) and not valid(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if valid(mid):
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# werner-mix: closed-form bound vs raw construction


def test_werner_mix_bound_at_quarter_pi():
    assert werner_mix_max_alpha(QUARTER_PI) == pytest.approx(5.0 / 12.0, abs=1e-12)


def test_werner_mix_bound_at_handover_angle():
    # the angle where the bound equals 4/11; the curve stays above it up to
    # pi/4, which is what the sweep relies on for its large-angle floor
    assert werner_mix_max_alpha(HANDOVER_THETA) == pytest.approx(4.0 / 11.0,
                                                                abs=1e-12)
    for theta in np.linspace(HANDOVER_THETA, QUARTER_PI, 50):
        assert werner_mix_max_alpha(float(theta)) >= 4.0 / 11.0 - 1e-12


def test_werner_mix_validity_matches_closed_form_on_grid():
    # success at the closed-form bound and failure 1e-3 above it, across a
    # 200-point angle grid
    for theta in np.linspace(0.005, QUARTER_PI, 200):
        theta = float(theta)
        bound = werner_mix_max_alpha(theta)
        cert = werner_mix_certificate(bound, theta)
        if not cert.degenerate:
            assert cert.margins["remainder_min_eig"] >= -1e-9
        with pytest.raises(CertificateError):
            werner_mix_certificate(bound + 1e-3, theta)


def test_werner_mix_bisection_agrees_with_closed_form():
    def make_valid(theta):
        def valid(a):
            try:
                werner_mix_certificate(a, theta)
                return True
            except CertificateError:
                return False
        return valid

    # the constructor accepts remainder eigenvalues down to -1e-9, which
    # shifts the numeric threshold by up to tolerance / margin-slope (~6e-9
    # at small angles), so agreement is asserted at 1e-7
    for theta in np.linspace(0.1, QUARTER_PI - 0.01, 15):
        theta = float(theta)
        numeric = _bisect_validity(make_valid(theta), 0.0, 1.0)
        assert numeric == pytest.approx(werner_mix_max_alpha(theta), abs=1e-7)


def test_werner_mix_boundary_margin_is_zero():
    for theta in (0.3, 0.5, HANDOVER_THETA, 0.75):
        cert = werner_mix_certificate(werner_mix_max_alpha(theta), theta)
        assert abs(cert.margins["remainder_min_eig"]) <= 1e-9


def test_werner_mix_binding_weight_is_11():
    # the remainder weight that first goes negative is the |11> one; this is
    # what makes the closed-form bound exact
    for theta in np.linspace(0.1, QUARTER_PI - 0.02, 25):
        theta = float(theta)
        cert = werner_mix_certificate(werner_mix_max_alpha(theta), theta)
        diag = np.real(np.diag(cert.remainder))
        assert int(np.argmin(diag)) == 3


def test_werner_mix_remainder_is_diagonal():
    rng = np.random.default_rng(7)
    for _ in range(50):
        theta = float(rng.uniform(0.05, QUARTER_PI))
        alpha = float(rng.uniform(0.0, 1.0)) * werner_mix_max_alpha(theta)
        cert = werner_mix_certificate(alpha, theta)
        off = cert.remainder - np.diag(np.diag(cert.remainder))
        assert np.max(np.abs(off)) < 1e-12


def test_werner_mix_alpha_zero_is_trivially_valid():
    cert = werner_mix_certificate(0.0, 0.4)
    assert cert.q == 0.0
    np.testing.assert_allclose(cert.remainder,
                               canonical_state(CanonicalParams(0.0, 0.4)),
                               atol=1e-14)


def test_werner_mix_degenerate_at_reference_point():
    cert = werner_mix_certificate(WERNER_REFERENCE_ALPHA, QUARTER_PI)
    assert cert.degenerate and cert.q == 1.0 and cert.remainder is None
    verify_decomposition(cert)


def test_werner_mix_input_validation():
    with pytest.raises(ValidationError):
        werner_mix_certificate(0.3, 0.0)
    with pytest.raises(ValidationError):
        werner_mix_certificate(0.3, QUARTER_PI + 0.1)
    with pytest.raises(ValidationError):
        werner_mix_certificate(1.2, 0.5)
    with pytest.raises(ValidationError):
        werner_mix_max_alpha(-0.1)


# ---------------------------------------------------------------------------
# transport: closed-form bound vs raw construction on random triples


def test_transport_max_alpha_identity_at_equal_angles():
    rng = np.random.default_rng(11)
    for _ in range(100):
        alpha = float(rng.uniform(0.01, 1.0))
        theta = float(rng.uniform(0.01, QUARTER_PI))
        assert transport_max_alpha(alpha, theta, theta) == pytest.approx(
            alpha, abs=1e-12)


def test_transport_max_alpha_monotone_in_target_angle():
    rng = np.random.default_rng(13)
    for _ in range(50):
        alpha = float(rng.uniform(0.05, 0.9))
        theta = float(rng.uniform(0.05, QUARTER_PI - 0.05))
        grid = np.linspace(theta, QUARTER_PI, 40)
        vals = [transport_max_alpha(alpha, theta, float(tp)) for tp in grid]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


def test_transport_validity_matches_closed_form_random():
    # 1000 random (alpha, theta, theta'): the certificate succeeds exactly at
    # the closed-form bound and fails 1e-3 above it
    rng = np.random.default_rng(17)
    for _ in range(1000):
        theta = float(rng.uniform(0.02, QUARTER_PI))
        theta_p = float(rng.uniform(theta, QUARTER_PI))
        alpha = float(rng.uniform(0.01, 1.0))
        bound = transport_max_alpha(alpha, theta, theta_p)
        cert = transport_certificate(alpha, theta, bound, theta_p)
        if not cert.degenerate:
            assert min(cert.margins[f"diag_{lab}"]
                       for lab in ("00", "01", "10", "11")) >= -1e-9
        if bound + 1e-3 <= 1.0:
            with pytest.raises(CertificateError):
                transport_certificate(alpha, theta, bound + 1e-3, theta_p)


def test_transport_remainder_structure_at_bound():
    rng = np.random.default_rng(19)
    for _ in range(100):
        theta = float(rng.uniform(0.05, QUARTER_PI - 0.05))
        theta_p = float(rng.uniform(theta + 0.02, QUARTER_PI))
        alpha = float(rng.uniform(0.05, 0.95))
        bound = transport_max_alpha(alpha, theta, theta_p)
        cert = transport_certificate(alpha, theta, bound, theta_p)
        S = cert.remainder
        assert abs(np.trace(S).real - 1.0) < 1e-10
        assert max(abs(S[0, 3]), abs(S[3, 0])) < 1e-10
        assert np.linalg.eigvalsh(S)[0] >= -1e-9


def test_transport_condition_bounds_dominance():
    # among the four per-weight caps the "00" one is the smallest and equals
    # the closed-form bound, so the other three conditions never bind
    rng = np.random.default_rng(23)
    for _ in range(500):
        theta = float(rng.uniform(0.02, QUARTER_PI - 0.01))
        theta_p = float(rng.uniform(theta, QUARTER_PI))
        alpha = float(rng.uniform(0.01, 1.0))
        caps = transport_condition_bounds(alpha, theta, theta_p)
        assert caps["00"] == min(caps.values())
        assert caps["00"] == pytest.approx(
            transport_max_alpha(alpha, theta, theta_p), rel=1e-12)


def test_transport_bisection_agrees_with_closed_form():
    def make_valid(alpha, theta, theta_p):
        def valid(a):
            try:
                transport_certificate(alpha, theta, a, theta_p)
                return True
            except CertificateError:
                return False
        return valid

    for alpha, theta, theta_p in [(0.40, 0.241, 0.2594), (0.36, 0.30, 0.50),
                                  (0.20, 0.10, 0.70), (0.90, 0.60, 0.78)]:
        numeric = _bisect_validity(make_valid(alpha, theta, theta_p), 0.0, 1.0)
        assert numeric == pytest.approx(
            transport_max_alpha(alpha, theta, theta_p), abs=1e-9)


def test_transport_degenerate_roundtrip():
    cert = transport_certificate(0.3, 0.5, 0.3, 0.5)
    assert cert.degenerate and cert.q == 1.0
    verify_decomposition(cert)


def test_transport_rejects_angle_decrease():
    with pytest.raises(ValidationError, match="upward"):
        transport_max_alpha(0.4, 0.5, 0.3)
    with pytest.raises(ValidationError):
        transport_certificate(0.4, 0.5, 0.2, 0.3)


def test_transport_input_validation():
    with pytest.raises(ValidationError):
        transport_certificate(0.0, 0.3, 0.1, 0.4)  # source alpha must be > 0
    with pytest.raises(ValidationError):
        transport_certificate(0.4, 0.3, 1.2, 0.4)
    with pytest.raises(ValidationError):
        transport_max_alpha(0.4, -0.1, 0.3)


# ---------------------------------------------------------------------------
# small-angle: gate plus PSD/PPT remainder


def test_small_angle_defaults_cover_requested_interval():
    for theta in np.linspace(0.0, 0.1, 100):
        cert = small_angle_certificate(0.4, float(theta))
        assert cert.margins["gate"] > 0.012
        assert cert.margins["remainder_min_eig"] >= -1e-12
        assert cert.margins["remainder_ppt_min_eig"] >= -1e-12


def test_small_angle_gate_margin_closed_form():
    expected = math.cos(0.2) ** 2 - 0.5 / (1.25 * 0.75 ** 3)
    assert small_angle_gate_margin(0.75, 0.1) == pytest.approx(expected,
                                                              abs=1e-12)
    assert expected > 0.0


def test_small_angle_invalid_beyond_gate():
    with pytest.raises(CertificateError, match="gate"):
        small_angle_certificate(0.4, 0.3)


def test_small_angle_gate_binds_at_default_max():
    mt = small_angle_max_theta()
    rhs = (2 * 0.75 - 1.0) / ((2 - 0.75) * 0.75 ** 3)
    theta_gate = 0.5 * math.acos(math.sqrt(rhs))
    assert mt == pytest.approx(theta_gate, abs=1e-6)
    small_angle_certificate(0.4, mt - 1e-6)
    with pytest.raises(CertificateError):
        small_angle_certificate(0.4, mt + 1e-6)


def test_small_angle_validity_monotone_in_theta():
    for theta in (0.02, 0.05, 0.09, 0.11):
        small_angle_certificate(0.4, theta)
        small_angle_certificate(0.4, 0.5 * theta)
        small_angle_certificate(0.4, 0.9 * theta)


def test_small_angle_remainder_matches_transcribed_entries():
    # the unnormalised remainder 4 (1 - q) S must reproduce the transcribed
    # closed-form entries; every other entry must vanish
    for alpha, theta, q, beta in [(0.4, 0.08, 0.5, 0.75),
                                  (0.4, 0.05, 0.5, 0.75),
                                  (0.3, 0.10, 0.4, 0.70),
                                  (0.4, 0.20, 0.62, 0.64)]:
        cert = small_angle_certificate(alpha, theta, q, beta)
        U = 4.0 * (1.0 - q) * cert.remainder
        c2, s2 = math.cos(theta) ** 2, math.sin(theta) ** 2
        cs = math.cos(theta) * math.sin(theta)
        expected = np.zeros((4, 4))
        expected[0, 0] = 2 * c2 * (1 + alpha) - q * (2 * c2 * (1 + beta)
                                                     + s2 * (1 - beta))
        expected[1, 1] = 2 * c2 * (1 - alpha) - q * (2 * c2 * (1 - beta)
                                                     + s2 * (1 + beta))
        expected[2, 2] = 2 * s2 * (1 - alpha) - q * s2 * (1 - beta)
        expected[3, 3] = 2 * s2 * (1 + alpha) - q * s2 * (1 + beta)
        expected[0, 3] = expected[3, 0] = 4 * alpha * cs - 2 * q * beta * cs
        np.testing.assert_allclose(U, expected, atol=1e-12)


def test_small_angle_best_reaches_beyond_defaults():
    cert = small_angle_best(0.24)
    assert cert is not None
    assert cert.margins["remainder_min_eig"] >= -1e-9
    assert cert.margins["remainder_ppt_min_eig"] >= -1e-9
    verify_decomposition(cert)


def test_small_angle_best_exhausted_well_beyond_reach():
    assert small_angle_best(0.30) is None


def test_small_angle_best_at_least_as_good_as_defaults():
    default = small_angle_certificate(0.4, 0.1)
    default_margin = min(default.margins["remainder_min_eig"],
                         default.margins["remainder_ppt_min_eig"])
    best = small_angle_best(0.1)
    best_margin = min(best.margins["remainder_min_eig"],
                      best.margins["remainder_ppt_min_eig"])
    assert best_margin >= default_margin - 1e-12


def test_small_angle_input_validation():
    with pytest.raises(ValidationError):
        small_angle_certificate(0.4, 0.05, q=0.0)
    with pytest.raises(ValidationError):
        small_angle_certificate(0.4, 0.05, q=1.0)
    with pytest.raises(ValidationError):
        small_angle_certificate(0.4, 0.05, beta=1.2)
    with pytest.raises(ValidationError):
        small_angle_gate_margin(0.0, 0.05)


# ---------------------------------------------------------------------------
# certificate object, serialisation, tamper detection


def _sample_certificates() -> list[DecompositionCertificate]:
    return [
        werner_mix_certificate(0.30, 0.70),
        transport_certificate(0.40, 0.241, 0.29, 0.30),
        small_angle_certificate(0.40, 0.08),
        werner_mix_certificate(WERNER_REFERENCE_ALPHA, QUARTER_PI),
    ]


def test_json_roundtrip_reverifies_all_techniques():
    for cert in _sample_certificates():
        blob = json.dumps(cert.to_json())
        back = DecompositionCertificate.from_json(json.loads(blob))
        assert back.technique == cert.technique
        assert back.q == pytest.approx(cert.q, abs=0)
        assert back.degenerate == cert.degenerate
        report = verify_decomposition(back)
        assert report["passed"]


def test_verify_rejects_tampered_q():
    cert = transport_certificate(0.40, 0.241, 0.29, 0.30)
    bad = dataclasses.replace(cert, q=cert.q + 0.05)
    with pytest.raises(CertificateError, match="reconstruction"):
        verify_decomposition(bad)


def test_verify_rejects_tampered_remainder():
    cert = werner_mix_certificate(0.30, 0.70)
    S = np.array(cert.remainder, copy=True)
    S[1, 1] -= 0.02
    S[2, 2] += 0.02  # keep the trace so only reconstruction can catch it
    bad = dataclasses.replace(cert, remainder=S)
    with pytest.raises(CertificateError, match="reconstruction"):
        verify_decomposition(bad)


def test_verify_rejects_negative_remainder():
    # overshoot the mixing weight: the exact remainder at q = 0.9 still
    # reconstructs the target but is no longer positive semidefinite
    cert = werner_mix_certificate(0.30, 0.70)
    target = canonical_state(cert.target)
    ref = cert.reference.state()
    q_bad = 0.9
    S_bad = (target - q_bad * ref) / (1.0 - q_bad)
    assert np.linalg.eigvalsh(S_bad)[0] < -1e-6
    bad = dataclasses.replace(cert, q=q_bad, remainder=S_bad)
    with pytest.raises(CertificateError, match="remainder_psd"):
        verify_decomposition(bad)


def test_verify_rejects_gate_violating_reference():
    cert = small_angle_certificate(0.40, 0.08)
    bad_ref = ReferenceComponent("half-lifted", (0.95, cert.target.theta))
    bad = dataclasses.replace(cert, reference=bad_ref)
    with pytest.raises(CertificateError):
        verify_decomposition(bad)


def test_reference_component_validation():
    with pytest.raises(ValidationError):
        ReferenceComponent("unknown", (0.3,))
    with pytest.raises(ValidationError):
        ReferenceComponent("werner", (0.3, 0.4))
    with pytest.raises(ValidationError):
        ReferenceComponent("canonical", (0.3,))


def test_certificate_format_guard():
    cert = werner_mix_certificate(0.30, 0.70)
    blob = cert.to_json()
    blob["format"] = "something-else/9"
    with pytest.raises(ValidationError):
        DecompositionCertificate.from_json(blob)


def test_non_degenerate_certificate_requires_remainder():
    with pytest.raises(ValidationError):
        DecompositionCertificate(CanonicalParams(0.3, 0.5), 0.5,
                                 ReferenceComponent("werner", (5.0 / 12.0,)),
                                 None, "werner-mix")


def test_verification_report_shape():
    report = verify_decomposition(werner_mix_certificate(0.30, 0.70))
    names = {c["name"] for c in report["checks"]}
    assert {"q_range_low", "q_range_high", "reconstruction", "remainder_trace",
            "remainder_psd", "remainder_ppt", "remainder_antidiagonal",
            "remainder_diagonal"} <= names
    assert all(c["passed"] for c in report["checks"])


# ---------------------------------------------------------------------------
# separability predicate


def test_ppt_margin_reference_values():
    ok, margin = is_ppt_separable(werner(1.0 / 3.0))
    assert ok and abs(margin) <= 1e-12
    ok, margin = is_ppt_separable(werner(0.4))
    assert not ok and margin == pytest.approx(-0.05, abs=1e-12)
    ok, margin = is_ppt_separable(np.eye(4) / 4.0)
    assert ok and margin == pytest.approx(0.25, abs=1e-12)


def test_ppt_threshold_is_one_third():
    # bisect on the exact margin sign, not the tolerance-padded boolean
    def valid(a):
        return is_ppt_separable(werner(a))[1] >= 0.0

    threshold = _bisect_validity(valid, 0.0, 1.0, tol=1e-12)
    assert threshold == pytest.approx(1.0 / 3.0, abs=1e-10)


def test_ppt_shape_guard():
    with pytest.raises(ValidationError):
        is_ppt_separable(np.eye(3) / 3.0)


# ---------------------------------------------------------------------------
# cross-technique consistency


def test_reconstruction_invariant_across_techniques():
    for cert in _sample_certificates():
        if cert.degenerate:
            continue
        target = canonical_state(cert.target)
        recon = cert.q * cert.reference.state() + (1.0 - cert.q) * cert.remainder
        np.testing.assert_allclose(recon, target, atol=1e-12)


def test_techniques_agree_where_domains_overlap():
    # at (0.36, 0.75) both the werner-mix construction and transport from a
    # stronger certified point must succeed; both certificates must verify
    alpha, theta = 0.36, 0.75
    assert werner_mix_max_alpha(theta) >= alpha
    wm = werner_mix_certificate(alpha, theta)
    tr = transport_certificate(0.43, 0.70, alpha, theta)
    for cert in (wm, tr):
        report = verify_decomposition(cert)
        assert report["passed"]
        assert cert.target == CanonicalParams(alpha, theta)
