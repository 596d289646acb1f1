"""Closed-form convex-decomposition certificates.

Three constructions prove that a member of the canonical filtered family
``rho(alpha, theta) = alpha |psi_theta><psi_theta| + (1 - alpha) rho_A x I/2``
inherits a local-hidden-state model from a reference state that is already
known to keep one:

- ``werner-mix``: mix the target out of the noisy Bell state at visibility
  5/12 (whose model for all measurements is a known reference result) and a
  diagonal separable remainder.  Valid exactly on
  ``alpha <= 1 / ((17/5) cot(theta) - 1)``.
- ``transport``: move a certified point of the family to a larger angle; the
  target is a convex combination of the certified state and a separable
  diagonal remainder whenever
  ``tan(theta') alpha'/(1+alpha') <= tan(theta) alpha/(1+alpha)``.
- ``small-angle``: mix the target out of the half-lifted reference
  ``1/2 (rho(beta, theta) + |0><0| x rho_B)``, which keeps a model for all
  measurements wherever ``cos^2(2 theta) >= (2 beta - 1)/((2 - beta) beta^3)``,
  plus a remainder that must be PSD and PPT (separable in 2x2).

Every certificate stores the reconstructed remainder and margins; validity is
always decided from freshly constructed matrices, never from transcribed
closed forms (those serve only as cross-checks in the test suite).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .errors import CertificateError, ValidationError
from .linalg import complex_matrix, partial_transpose
from .jsonio import matrix_from_json, matrix_to_json
from .states import CanonicalParams, QUARTER_PI, canonical_state, rho_theta, werner

__all__ = [
    "DecompositionCertificate",
    "ReferenceComponent",
    "WERNER_REFERENCE_ALPHA",
    "is_ppt_separable",
    "small_angle_best",
    "small_angle_certificate",
    "small_angle_gate_margin",
    "small_angle_max_theta",
    "transport_certificate",
    "transport_condition_bounds",
    "transport_max_alpha",
    "verify_decomposition",
    "werner_mix_certificate",
    "werner_mix_max_alpha",
]

#: visibility of the noisy-Bell reference state used by ``werner-mix``
WERNER_REFERENCE_ALPHA = 5.0 / 12.0

#: certificates at analytic boundaries accept eigenvalues down to -PSD_TOL
PSD_TOL = 1e-9

#: entrywise tolerance for reconstructing the target from (q, reference, S)
ENTRY_TOL = 1e-10

#: anti-diagonal entries of diagonal-by-construction remainders
ANTIDIAG_TOL = 1e-10

_TECHNIQUES = ("werner-mix", "transport", "small-angle")

#: diagonal basis labels of the two-qubit computational basis, used to name
#: which positivity condition failed
_DIAG_LABELS = ("00", "01", "10", "11")


# ---------------------------------------------------------------------------
# reference components


@dataclass(frozen=True)
class ReferenceComponent:
    """Tagged reference state of a decomposition.

    kind "werner": params = (alpha,); the noisy Bell state.
    kind "canonical": params = (alpha, theta); a certified family member.
    kind "half-lifted": params = (beta, theta); the small-angle reference
    ``1/2 (rho(beta, theta) + |0><0| x rho_B)``.
    """

    kind: str
    params: tuple[float, ...]

    def __post_init__(self) -> None:
        expected = {"werner": 1, "canonical": 2, "half-lifted": 2}
        if self.kind not in expected:
            raise ValidationError(f"unknown reference kind {self.kind!r}")
        if len(self.params) != expected[self.kind]:
            raise ValidationError(
                f"reference kind {self.kind!r} takes {expected[self.kind]} "
                f"parameters, got {len(self.params)}"
            )
        object.__setattr__(self, "params", tuple(float(x) for x in self.params))

    def state(self) -> np.ndarray:
        if self.kind == "werner":
            return werner(self.params[0])
        if self.kind == "canonical":
            return canonical_state(CanonicalParams(*self.params))
        return rho_theta(*self.params)


# ---------------------------------------------------------------------------
# certificate object


@dataclass(frozen=True)
class DecompositionCertificate:
    """Proof that ``target = q * reference + (1 - q) * remainder``.

    The remainder is a separable state (diagonal, or PSD + PPT which is
    equivalent to separable in 2x2), so the target inherits the reference
    state's local-hidden-state model.  ``degenerate`` marks the q = 1 case
    where the target equals the reference and no remainder exists.
    """

    target: CanonicalParams
    q: float
    reference: ReferenceComponent
    remainder: np.ndarray | None
    technique: str
    margins: dict[str, float] = field(default_factory=dict)
    degenerate: bool = False

    def __post_init__(self) -> None:
        if self.technique not in _TECHNIQUES:
            raise ValidationError(f"unknown technique {self.technique!r}")
        if not self.degenerate and self.remainder is None:
            raise ValidationError("non-degenerate certificate requires a remainder")

    def to_json(self) -> dict[str, Any]:
        return {
            "format": "decomposition-certificate/1",
            "technique": self.technique,
            "target": {"alpha": self.target.alpha, "theta": self.target.theta},
            "q": float(self.q),
            "reference": {"kind": self.reference.kind,
                          "params": list(self.reference.params)},
            "remainder": None if self.remainder is None
            else matrix_to_json(self.remainder),
            "margins": {k: float(v) for k, v in self.margins.items()},
            "degenerate": bool(self.degenerate),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "DecompositionCertificate":
        if data.get("format") != "decomposition-certificate/1":
            raise ValidationError(
                f"unsupported certificate format {data.get('format')!r}"
            )
        remainder = data.get("remainder")
        return cls(
            target=CanonicalParams(float(data["target"]["alpha"]),
                                   float(data["target"]["theta"])),
            q=float(data["q"]),
            reference=ReferenceComponent(data["reference"]["kind"],
                                         tuple(data["reference"]["params"])),
            remainder=None if remainder is None else matrix_from_json(remainder),
            technique=str(data["technique"]),
            margins={k: float(v) for k, v in dict(data.get("margins", {})).items()},
            degenerate=bool(data.get("degenerate", False)),
        )


def _min_eig(H: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(H)[0])


def _checks_failed(checks: list[dict[str, Any]]) -> list[str]:
    return [c["name"] for c in checks if not c["passed"]]


def verify_decomposition(
    cert: DecompositionCertificate,
    entry_tol: float = ENTRY_TOL,
    psd_tol: float = PSD_TOL,
) -> dict[str, Any]:
    """Re-check a decomposition certificate from scratch.

    Recomputes the reference state from its tag, reconstructs the target,
    and re-tests every positivity/structure condition.  Returns the check
    report; raises CertificateError naming the failed checks.
    """
    checks: list[dict[str, Any]] = []

    def add(name: str, value: float, bound: float) -> None:
        checks.append({"name": name, "value": float(value),
                       "bound": float(bound), "margin": float(value - bound),
                       "passed": bool(value >= bound)})

    target_state = canonical_state(cert.target)
    try:
        ref_state = cert.reference.state()
    except ValidationError as exc:
        raise CertificateError(
            f"reference component is not a valid state: {exc}",
            details={"reference": cert.reference.params},
        ) from exc
    q = cert.q
    add("q_range_low", q, 0.0)
    add("q_range_high", 1.0 + 1e-12, q)

    if cert.degenerate:
        resid = float(np.max(np.abs(target_state - ref_state)))
        add("target_equals_reference", entry_tol, resid)
    else:
        S = complex_matrix(cert.remainder, shape=(4, 4))
        recon = q * ref_state + (1.0 - q) * S
        add("reconstruction", entry_tol, float(np.max(np.abs(recon - target_state))))
        add("remainder_trace", 1e-10, abs(float(np.real(np.trace(S))) - 1.0))
        add("remainder_hermitian", 1e-10, float(np.max(np.abs(S - S.conj().T))))
        add("remainder_psd", _min_eig(S), -psd_tol)
        add("remainder_ppt", _min_eig(partial_transpose(S, (2, 2))), -psd_tol)
        if cert.technique in ("werner-mix", "transport"):
            add("remainder_antidiagonal", ANTIDIAG_TOL,
                max(abs(S[0, 3]), abs(S[3, 0])))
        if cert.technique == "werner-mix":
            off = S - np.diag(np.diag(S))
            add("remainder_diagonal", ANTIDIAG_TOL, float(np.max(np.abs(off))))

    if cert.technique == "small-angle":
        beta, theta_ref = cert.reference.params
        add("gate", small_angle_gate_margin(beta, theta_ref), -1e-12)
        add("reference_angle", 1e-12, abs(theta_ref - cert.target.theta))

    failed = _checks_failed(checks)
    report = {"checks": checks, "passed": not failed,
              "technique": cert.technique, "q": float(q)}
    if failed:
        raise CertificateError(
            "decomposition certificate failed checks: " + ", ".join(failed),
            details=report,
        )
    return report


# ---------------------------------------------------------------------------
# werner-mix (large angles)


def werner_mix_max_alpha(theta: float) -> float:
    """Validity bound of the werner-mix construction at angle theta.

    Closed form 1 / ((17/5) cot(theta) - 1); equals 5/12 at theta = pi/4.
    """
    theta = float(theta)
    if not 0.0 < theta <= QUARTER_PI + 1e-12:
        raise ValidationError(f"theta must lie in (0, pi/4], got {theta!r}")
    return 1.0 / (3.4 / math.tan(theta) - 1.0)


def werner_mix_certificate(alpha: float, theta: float) -> DecompositionCertificate:
    """Decompose rho(alpha, theta) over the visibility-5/12 noisy Bell state.

    The mixing weight q = (12/5) alpha sin(2 theta) is the unique choice
    cancelling the off-diagonal corner, leaving a diagonal remainder; the
    certificate is valid exactly when that remainder is PSD.
    """
    alpha, theta = float(alpha), float(theta)
    if not 0.0 < theta <= QUARTER_PI + 1e-12:
        raise ValidationError(f"theta must lie in (0, pi/4], got {theta!r}")
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha!r}")
    q = (12.0 / 5.0) * alpha * math.sin(2.0 * theta)
    reference = ReferenceComponent("werner", (WERNER_REFERENCE_ALPHA,))
    target = CanonicalParams(alpha, theta)
    if q > 1.0 + 1e-12:
        raise CertificateError(
            f"mixing weight q = {q:.6f} exceeds 1; the construction cannot "
            f"represent alpha = {alpha:.6f} at theta = {theta:.6f}",
            details={"q": q},
        )
    q = min(q, 1.0)
    ref_state = werner(WERNER_REFERENCE_ALPHA)
    target_state = canonical_state(target)
    raw = target_state - q * ref_state
    if 1.0 - q < 1e-14:
        resid = float(np.max(np.abs(raw)))
        cert = DecompositionCertificate(target, 1.0, reference, None,
                                        "werner-mix", {"reconstruction": resid},
                                        degenerate=True)
        verify_decomposition(cert)
        return cert
    S = raw / (1.0 - q)
    diag = np.real(np.diag(S))
    margins = {
        "remainder_min_eig": float(diag.min()),
        "remainder_off_diagonal": float(np.max(np.abs(S - np.diag(np.diag(S))))),
        "alpha_headroom": werner_mix_max_alpha(theta) - alpha,
    }
    if diag.min() < -PSD_TOL:
        k = int(np.argmin(diag))
        raise CertificateError(
            f"werner-mix remainder has negative |{_DIAG_LABELS[k]}> weight "
            f"{diag.min():.3e}; alpha = {alpha:.6f} exceeds the bound "
            f"{werner_mix_max_alpha(theta):.6f} at theta = {theta:.6f}",
            details=margins,
        )
    cert = DecompositionCertificate(target, q, reference, S, "werner-mix", margins)
    verify_decomposition(cert)
    return cert


# ---------------------------------------------------------------------------
# transport (angle increase)


def transport_max_alpha(alpha: float, theta: float, theta_prime: float) -> float:
    """Largest alpha' certifiable at theta' >= theta from (alpha, theta).

    Solves tan(theta') a/(1+a) = tan(theta) alpha/(1+alpha) for a: with
    t = tan(theta) alpha / ((1+alpha) tan(theta')), the answer is t/(1-t).
    Monotone non-increasing in theta' and equal to alpha at theta' = theta.
    """
    alpha, theta, theta_prime = float(alpha), float(theta), float(theta_prime)
    if not 0.0 <= theta <= QUARTER_PI + 1e-12:
        raise ValidationError(f"theta must lie in [0, pi/4], got {theta!r}")
    if theta_prime < theta - 1e-15 or theta_prime > QUARTER_PI + 1e-12:
        raise ValidationError(
            "transport only extends upward in angle: need "
            f"theta <= theta' <= pi/4, got theta={theta!r}, theta'={theta_prime!r}"
        )
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha!r}")
    if theta == 0.0 or alpha == 0.0:
        return 0.0
    t = math.tan(theta) * alpha / ((1.0 + alpha) * math.tan(theta_prime))
    return t / (1.0 - t)


def transport_condition_bounds(
    alpha: float, theta: float, theta_prime: float
) -> dict[str, float]:
    """Alpha' cap from each diagonal positivity condition of the remainder.

    Exposed as a diagnostic: for theta' >= theta the "00" condition is the
    binding one and coincides with transport_max_alpha (the others are
    dominated); the test suite confirms the dominance on random draws.
    """
    alpha, theta, theta_prime = float(alpha), float(theta), float(theta_prime)
    l1 = (math.cos(theta) * math.sin(theta_prime)) / (
        alpha * math.cos(theta_prime) * math.sin(theta))
    l2 = (math.cos(theta_prime) * math.sin(theta)) / (
        alpha * math.cos(theta) * math.sin(theta_prime))

    def cap(den: float) -> float:
        return math.inf if den <= 0.0 else 1.0 / den

    return {
        "00": cap(l1 * (1.0 + alpha) - 1.0),
        "01": 1.0 / (1.0 + l1 * (1.0 - alpha)),
        "10": 1.0 / (1.0 + l2 * (1.0 - alpha)),
        "11": cap(l2 * (1.0 + alpha) - 1.0),
    }


def transport_certificate(
    alpha: float, theta: float, alpha_prime: float, theta_prime: float
) -> DecompositionCertificate:
    """Decompose rho(alpha', theta') over the certified rho(alpha, theta).

    The mixing weight q = alpha' sin(2 theta') / (alpha sin(2 theta)) cancels
    the off-diagonal corner; validity requires the four diagonal remainder
    entries to be non-negative, which holds up to transport_max_alpha.
    """
    alpha, theta = float(alpha), float(theta)
    alpha_prime, theta_prime = float(alpha_prime), float(theta_prime)
    if not 0.0 < alpha <= 1.0:
        raise ValidationError(f"source alpha must lie in (0, 1], got {alpha!r}")
    if not 0.0 <= alpha_prime <= 1.0:
        raise ValidationError(f"target alpha must lie in [0, 1], got {alpha_prime!r}")
    if not 0.0 < theta <= theta_prime <= QUARTER_PI + 1e-12:
        raise ValidationError(
            "transport requires 0 < theta <= theta' <= pi/4, got "
            f"theta={theta!r}, theta'={theta_prime!r}"
        )
    reference = ReferenceComponent("canonical", (alpha, theta))
    target = CanonicalParams(alpha_prime, theta_prime)
    if abs(alpha_prime - alpha) < 1e-14 and abs(theta_prime - theta) < 1e-14:
        cert = DecompositionCertificate(target, 1.0, reference, None,
                                        "transport", {}, degenerate=True)
        verify_decomposition(cert)
        return cert
    q = (alpha_prime * math.sin(2.0 * theta_prime)) / (
        alpha * math.sin(2.0 * theta))
    if q > 1.0 + 1e-12:
        raise CertificateError(
            f"transport mixing weight q = {q:.6f} exceeds 1 "
            f"(alpha' = {alpha_prime:.6f} too large for the source corner)",
            details={"q": q},
        )
    q = min(q, 1.0)
    S = (canonical_state(target) - q * canonical_state(CanonicalParams(alpha, theta))
         ) / (1.0 - q)
    diag = np.real(np.diag(S))
    margins = {f"diag_{lab}": float(diag[k])
               for k, lab in enumerate(_DIAG_LABELS)}
    margins["anti_diagonal"] = float(max(abs(S[0, 3]), abs(S[3, 0])))
    margins["alpha_headroom"] = (
        transport_max_alpha(alpha, theta, theta_prime) - alpha_prime)
    bad = [lab for k, lab in enumerate(_DIAG_LABELS) if diag[k] < -PSD_TOL]
    if bad:
        raise CertificateError(
            "transport remainder has negative diagonal weight(s) |"
            + ">, |".join(bad) + ">; alpha' = "
            f"{alpha_prime:.6f} exceeds the bound "
            f"{transport_max_alpha(alpha, theta, theta_prime):.6f}",
            details=margins,
        )
    cert = DecompositionCertificate(target, q, reference, S, "transport", margins)
    verify_decomposition(cert)
    return cert


# ---------------------------------------------------------------------------
# small-angle (neighbourhood of zero)


def small_angle_gate_margin(beta: float, theta: float) -> float:
    """Margin of the reference-model validity gate.

    Positive iff cos^2(2 theta) >= (2 beta - 1)/((2 - beta) beta^3), the
    condition for the half-lifted reference to keep its model.
    """
    beta, theta = float(beta), float(theta)
    if not 0.0 < beta <= 1.0:
        raise ValidationError(f"beta must lie in (0, 1], got {beta!r}")
    if not 0.0 <= theta <= QUARTER_PI + 1e-12:
        raise ValidationError(f"theta must lie in [0, pi/4], got {theta!r}")
    return math.cos(2.0 * theta) ** 2 - (2.0 * beta - 1.0) / (
        (2.0 - beta) * beta ** 3)


def small_angle_certificate(
    alpha: float, theta: float, q: float = 0.5, beta: float = 0.75
) -> DecompositionCertificate:
    """Decompose rho(alpha, theta) over the half-lifted reference.

    Validity requires the gate on (beta, theta) plus a PSD and PPT remainder;
    both are checked numerically on constructed matrices.
    """
    alpha, theta, q, beta = float(alpha), float(theta), float(q), float(beta)
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha!r}")
    if not 0.0 < q < 1.0:
        raise ValidationError(f"q must lie strictly inside (0, 1), got {q!r}")
    gate = small_angle_gate_margin(beta, theta)
    margins = {"gate": gate}
    if gate < -1e-12:
        raise CertificateError(
            f"reference-model gate fails at beta = {beta:.6f}, "
            f"theta = {theta:.6f}: margin {gate:.3e}",
            details=margins,
        )
    reference = ReferenceComponent("half-lifted", (beta, theta))
    target = CanonicalParams(alpha, theta)
    S = (canonical_state(target) - q * reference.state()) / (1.0 - q)
    margins["remainder_min_eig"] = _min_eig(S)
    margins["remainder_ppt_min_eig"] = _min_eig(partial_transpose(S, (2, 2)))
    if margins["remainder_min_eig"] < -PSD_TOL or \
            margins["remainder_ppt_min_eig"] < -PSD_TOL:
        raise CertificateError(
            "small-angle remainder is not separable: min eigenvalue "
            f"{margins['remainder_min_eig']:.3e}, partial-transpose min "
            f"eigenvalue {margins['remainder_ppt_min_eig']:.3e} at "
            f"alpha = {alpha:.6f}, theta = {theta:.6f}, q = {q:.6f}, "
            f"beta = {beta:.6f}",
            details=margins,
        )
    cert = DecompositionCertificate(target, q, reference, S, "small-angle", margins)
    verify_decomposition(cert)
    return cert


def _small_angle_valid(alpha: float, theta: float, q: float, beta: float) -> bool:
    try:
        small_angle_certificate(alpha, theta, q, beta)
        return True
    except (CertificateError, ValidationError):
        return False


def small_angle_max_theta(
    alpha: float = 0.4, q: float = 0.5, beta: float = 0.75, tol: float = 1e-10
) -> float:
    """Largest angle where the fixed-(q, beta) certificate stays valid.

    Validity is monotone in theta (each margin is of the form
    sin^2(theta) (A cos^2 - B sin^2) with A, B >= 0, and the gate loosens as
    theta decreases), so bisection is sound.
    """
    lo, hi = 0.0, QUARTER_PI
    if not _small_angle_valid(alpha, 1e-12, q, beta):
        return 0.0
    if _small_angle_valid(alpha, hi, q, beta):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _small_angle_valid(alpha, mid, q, beta):
            lo = mid
        else:
            hi = mid
    return lo


def small_angle_best(
    theta: float,
    alpha: float = 0.4,
    q_grid: np.ndarray | None = None,
    beta_grid: np.ndarray | None = None,
) -> DecompositionCertificate | None:
    """Best small-angle certificate at (alpha, theta) over a (q, beta) search.

    Returns the certificate with the largest worst-case margin, or None when
    no grid point is valid.  The default grids cover the region where the
    gate/remainder trade-off is non-trivial.
    """
    if q_grid is None:
        q_grid = np.linspace(0.30, 0.90, 61)
    if beta_grid is None:
        beta_grid = np.linspace(0.55, 0.90, 71)
    best: DecompositionCertificate | None = None
    best_margin = -math.inf
    for q in q_grid:
        for beta in beta_grid:
            if small_angle_gate_margin(float(beta), theta) < 0.0:
                continue
            try:
                cert = small_angle_certificate(alpha, theta, float(q), float(beta))
            except (CertificateError, ValidationError):
                continue
            margin = min(cert.margins["remainder_min_eig"],
                         cert.margins["remainder_ppt_min_eig"])
            if margin > best_margin:
                best, best_margin = cert, margin
    return best


# ---------------------------------------------------------------------------
# separability predicate


def is_ppt_separable(rho: np.ndarray) -> tuple[bool, float]:
    """Partial-transpose separability test for a two-qubit state.

    Returns (separable, margin) with margin the smallest eigenvalue of the
    partial transpose; in 2x2 a non-negative partial transpose is equivalent
    to separability, so the test is exact here (and only here).
    """
    rho = complex_matrix(rho)
    if rho.shape != (4, 4):
        raise ValidationError(
            f"expected a 4 x 4 two-qubit state, got shape {rho.shape}"
        )
    margin = _min_eig(partial_transpose(rho, (2, 2)))
    return margin >= -1e-10, margin
