"""Two-qubit state families and the filter-to-canonical-form reduction.

The central family is

    rho(alpha, theta) = alpha |psi_theta><psi_theta| + (1 - alpha) rho_A x I/2

with |psi_theta> = cos(theta)|00> + sin(theta)|11> and rho_A the reduced
state of |psi_theta> on the first qubit.  theta = pi/4 recovers the
isotropic mixture of a maximally entangled state with white noise, and
local filtering of that mixture always lands back inside the family.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import jsonio
from .errors import ValidationError
from .linalg import complex_matrix, density_matrix, hermitize, partial_trace, svd

HALF_PI = math.pi / 2.0
QUARTER_PI = math.pi / 4.0

#: smallest accepted success probability before a filter counts as
#: annihilating the state
ANNIHILATION_TOL = 1e-12


def fold_theta(theta: float) -> float:
    """Reduce an angle to its equivalent representative in [0, pi/4].

    Local bit flips on both qubits map theta to pi/2 - theta and a sign
    flip of one amplitude maps theta to -theta, so every angle is
    equivalent to one in the fundamental domain [0, pi/4].
    """
    if not math.isfinite(theta):
        raise ValidationError(f"theta must be finite, got {theta!r}")
    r = theta % HALF_PI
    return min(r, HALF_PI - r)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha!r}")
    return alpha


@dataclass(frozen=True)
class WernerParams:
    """Visibility of a maximally entangled state mixed with white noise."""

    alpha: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", _check_alpha(self.alpha))


@dataclass(frozen=True)
class CanonicalParams:
    """Parameters of the canonical filtered family; theta is folded on entry."""

    alpha: float
    theta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", _check_alpha(self.alpha))
        object.__setattr__(self, "theta", fold_theta(float(self.theta)))


@dataclass
class FilterPair:
    """Local filter operators, one per side, each mapping a qubit into d dims.

    Both operators must admit a completing Kraus element, i.e. have largest
    singular value at most 1 (up to 1e-10 slack).
    """

    f_a: np.ndarray
    f_b: np.ndarray

    def __post_init__(self) -> None:
        self.f_a = _check_filter(self.f_a, "f_a")
        self.f_b = _check_filter(self.f_b, "f_b")

    def to_json(self) -> dict[str, Any]:
        return {
            "f_a": jsonio.matrix_to_json(self.f_a),
            "f_b": jsonio.matrix_to_json(self.f_b),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "FilterPair":
        for key in ("f_a", "f_b"):
            if key not in data:
                raise ValidationError(f"filter payload missing key {key!r}")
        return cls(jsonio.matrix_from_json(data["f_a"]),
                   jsonio.matrix_from_json(data["f_b"]))


def _check_filter(F: np.ndarray, name: str) -> np.ndarray:
    F = complex_matrix(F)
    if F.ndim != 2 or F.shape[1] != 2 or F.shape[0] < 1:
        raise ValidationError(f"{name} must be a d x 2 matrix with d >= 1, got shape {F.shape}")
    _, D, _ = svd(F)
    if D[0, 0] > 1.0 + 1e-10:
        raise ValidationError(
            f"{name} has largest singular value {D[0, 0]:.12g} > 1; "
            "no completing Kraus element exists"
        )
    return F


def _phi_plus() -> np.ndarray:
    v = np.zeros(4, dtype=np.complex128)
    v[0] = v[3] = 1.0 / math.sqrt(2.0)
    return v


def werner(params: WernerParams | float) -> np.ndarray:
    """Maximally entangled state mixed with white noise at visibility alpha."""
    if not isinstance(params, WernerParams):
        params = WernerParams(float(params))
    phi = _phi_plus()
    rho = params.alpha * np.outer(phi, phi.conj()) \
        + (1.0 - params.alpha) * np.eye(4, dtype=np.complex128) / 4.0
    return density_matrix(rho)


def canonical_state(params: CanonicalParams | tuple[float, float]) -> np.ndarray:
    """State of the canonical family at the given (alpha, theta)."""
    if not isinstance(params, CanonicalParams):
        params = CanonicalParams(*params)
    c, s = math.cos(params.theta), math.sin(params.theta)
    psi = np.array([c, 0.0, 0.0, s], dtype=np.complex128)
    local = np.diag([c * c, c * c, s * s, s * s]).astype(np.complex128) / 2.0
    rho = params.alpha * np.outer(psi, psi.conj()) + (1.0 - params.alpha) * local
    return density_matrix(rho)


def apply_filters(rho: np.ndarray, filters: FilterPair) -> tuple[np.ndarray, float]:
    """Conditional state and success probability after both local filters fire."""
    rho = density_matrix(rho)
    if rho.shape != (4, 4):
        raise ValidationError(f"filters act on two qubits; state has shape {rho.shape}")
    K = np.kron(filters.f_a, filters.f_b)
    out = K @ rho @ K.conj().T
    prob = float(np.trace(out).real)
    if prob < ANNIHILATION_TOL:
        raise ValidationError(
            f"filter annihilates state: success probability {prob:.3e} < {ANNIHILATION_TOL:g}"
        )
    out = hermitize(out / prob, tol=1e-8)
    return out, min(prob, 1.0)


@dataclass
class NormalFormResult:
    """Canonical parameters plus the local frame of a one-side filtered state.

    ``unitary_a`` (d x d) and ``unitary_b`` (2 x 2) rotate the canonical
    state, embedded in the top-left block of the d x 2 space, onto the
    filtered state.  ``separable`` marks rank-1 filters whose output is a
    product state (theta = 0).
    """

    params: CanonicalParams
    unitary_a: np.ndarray
    unitary_b: np.ndarray
    separable: bool = False

    def reconstructed_state(self) -> np.ndarray:
        d = self.unitary_a.shape[0]
        rho4 = canonical_state(self.params)
        emb = np.zeros((2 * d, 2 * d), dtype=np.complex128)
        emb[:4, :4] = rho4
        U = np.kron(self.unitary_a, self.unitary_b)
        return U @ emb @ U.conj().T


def filter_normal_form(f_a: np.ndarray, alpha: float) -> NormalFormResult:
    """Reduce a one-side filter on the noisy entangled mixture to canonical form.

    For F = U diag(s1, s2) V^dag acting on the first qubit, the normalized
    filtered state equals the canonical state at the same alpha and
    tan(theta) = s2/s1, rotated by U on side A and by conj(V) on side B.
    The success probability (s1^2 + s2^2)/2 does not depend on alpha.
    """
    alpha = _check_alpha(alpha)
    F = complex_matrix(f_a)
    if F.ndim != 2 or F.shape[1] != 2 or F.shape[0] < 1:
        raise ValidationError(f"filter must be a d x 2 matrix with d >= 1, got shape {F.shape}")
    U, D, V = svd(F)
    d = F.shape[0]
    s1 = float(D[0, 0])
    s2 = float(D[1, 1]) if d >= 2 else 0.0
    if s1 < 1e-150:
        raise ValidationError("filter of rank 0: cannot normalize the filtered state")
    separable = s2 <= 1e-12 * s1
    theta = 0.0 if separable else math.atan2(s2, s1)
    return NormalFormResult(
        params=CanonicalParams(alpha, theta),
        unitary_a=U,
        unitary_b=V.conj(),
        separable=separable,
    )


def rho_theta(beta: float, theta: float) -> np.ndarray:
    """Small-angle mixture: half canonical state, half |0><0| x its B marginal.

    Only defined where the closed-form local model is valid, i.e. where
    cos^2(2 theta) >= (2 beta - 1) / ((2 - beta) beta^3); violating inputs
    raise rather than silently producing an uncertified state.
    """
    beta = float(beta)
    theta = float(theta)
    if not math.isfinite(beta) or not 0.0 <= beta <= 1.0:
        raise ValidationError(f"beta must lie in [0, 1], got {beta!r}")
    if not math.isfinite(theta) or not 0.0 <= theta <= QUARTER_PI + 1e-12:
        raise ValidationError(f"theta must lie in [0, pi/4], got {theta!r}")
    lhs = math.cos(2.0 * theta) ** 2
    num = 2.0 * beta - 1.0
    den = (2.0 - beta) * beta ** 3
    if den > 0.0:
        rhs = num / den
        if lhs < rhs:
            raise ValidationError(
                "small-angle validity condition failed: "
                f"cos^2(2*theta) = {lhs:.6f} < {rhs:.6f} = "
                "(2*beta - 1)/((2 - beta)*beta^3) "
                f"at beta={beta:.6g}, theta={theta:.6g}"
            )
    # beta = 0 makes the right-hand side -inf; always valid
    rho = canonical_state(CanonicalParams(beta, theta))
    rho_b = partial_trace(rho, (2, 2), 0)
    zero = np.zeros((2, 2), dtype=np.complex128)
    zero[0, 0] = 1.0
    mix = 0.5 * (rho + np.kron(zero, rho_b))
    return density_matrix(mix)


def state_to_json(rho: np.ndarray, dims: tuple[int, int] = (2, 2)) -> dict[str, Any]:
    return jsonio.operator_to_json(density_matrix(rho), dims)


def state_from_json(data: dict[str, Any]) -> tuple[np.ndarray, tuple[int, ...]]:
    M, dims = jsonio.operator_from_json(data)
    return density_matrix(M), dims
