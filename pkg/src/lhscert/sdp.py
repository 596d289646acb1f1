"""Unsteerability certificates for the filtered family via semidefinite programming.

The program solved here is

    maximize   q
    subject to Tr_A((M_{a|x} (x) 1) chi) = sum_lambda D_lambda(a|x) sigma_lambda
               sigma_lambda  PSD  for every deterministic strategy lambda
               R := rho(q, theta_f) - eta chi - (1-eta) xi_A (x) chi_B   PSD
               R^{T_B}  PSD
               Tr(chi) >= 0

with chi_B := Tr_A(chi) and D_lambda ranging over the deterministic strategies
of a finite qubit measurement set.  A feasible point proves that rho(q,
theta_f) admits a local-hidden-state model for *all* POVMs on Alice's side:
eta-shrunk POVMs are convex mixtures of the finite set, which chi simulates
through the sigma_lambda, and the remainder R is separable because a PSD
two-qubit operator with PSD partial transpose is separable.

The q = 0 state is a product state, so the program is always strictly
feasible; a failure there signals a misconfigured problem, not a property of
the family.  Certificates store every matrix needed to re-check feasibility
from scratch, and `verify_certificate` performs that re-check without the
solver.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .errors import CertificateError, SolverError, ValidationError
from .jsonio import matrix_from_json, matrix_to_json
from .linalg import (
    PSD_TOL,
    complex_matrix,
    density_matrix,
    eig_hermitian,
    eigvals_hermitian,
    hermitize,
    partial_trace,
    partial_transpose,
)
from .measurements import (
    DeterministicStrategy,
    MeasurementSet,
    enumerate_strategies,
    icosahedron_family,
    icosahedron_set,
    shrinking_factor_estimate,
    table_eta,
)
from .solver import BlockGroup, BlockProblem, nullspace, solve_block_sdp
from .states import fold_theta

EQUALITY_TOL = 1e-8
POLISH_MIX = 1e-6
DEFAULT_SDP_TOL = 1e-8
DEFAULT_Q_TOL = 2e-5

CHI_DIM = 4
N_CHI_REALS = CHI_DIM * CHI_DIM
SIGMA_DIM = 2
N_SIGMA_REALS = SIGMA_DIM * SIGMA_DIM

REMAINDER_SIGN_NOTE = (
    "remainder convention: R = rho(q, theta_f) - eta*chi - (1-eta)*xi_A(x)chi_B "
    "with chi_B = Tr_A(chi); BOTH correction terms are subtracted.  The "
    "alternative convention that adds the (1-eta) term instead does not make "
    "the simulability decomposition sound and is not used here."
)


# ---------------------------------------------------------------------------
# real packing of Hermitian matrices
# ---------------------------------------------------------------------------


def _pack_order(n: int) -> list[tuple[int, int, str]]:
    order = [(i, i, "d") for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            order.append((i, j, "re"))
            order.append((i, j, "im"))
    return order


def pack_hermitian(H: np.ndarray) -> np.ndarray:
    """Real coordinates of a Hermitian matrix: diagonal, then upper re/im."""
    H = hermitize(np.asarray(H, dtype=np.complex128), tol=np.inf)
    n = H.shape[0]
    out = np.empty(n * n)
    for k, (i, j, kind) in enumerate(_pack_order(n)):
        out[k] = H[i, j].real if kind != "im" else H[i, j].imag
    return out


def unpack_hermitian(v: np.ndarray, n: int) -> np.ndarray:
    """Inverse of `pack_hermitian`."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != n * n:
        raise ValidationError(f"expected {n * n} real components, got {v.size}")
    H = np.zeros((n, n), dtype=np.complex128)
    for k, (i, j, kind) in enumerate(_pack_order(n)):
        if kind == "d":
            H[i, i] = v[k]
        elif kind == "re":
            H[i, j] += v[k]
            H[j, i] += v[k]
        else:
            H[i, j] += 1j * v[k]
            H[j, i] += -1j * v[k]
    return H


def hermitian_basis(n: int) -> np.ndarray:
    """Basis matrices X_k with unpack(e_k) = X_k, shape (n*n, n, n)."""
    out = np.empty((n * n, n, n), dtype=np.complex128)
    eye = np.eye(n * n)
    for k in range(n * n):
        out[k] = unpack_hermitian(eye[k], n)
    return out


def _sigma_slice(lam: int) -> slice:
    base = 1 + N_CHI_REALS + N_SIGMA_REALS * lam
    return slice(base, base + N_SIGMA_REALS)


def unpack_solution(z: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Split a decision vector into (q, chi, sigmas)."""
    z = np.asarray(z, dtype=float).reshape(-1)
    n_sigma, rem = divmod(z.size - 1 - N_CHI_REALS, N_SIGMA_REALS)
    if rem or n_sigma <= 0:
        raise ValidationError(f"decision vector length {z.size} is not 17 + 4*N")
    chi = unpack_hermitian(z[1 : 1 + N_CHI_REALS], CHI_DIM)
    sigmas = np.stack(
        [unpack_hermitian(z[_sigma_slice(k)], SIGMA_DIM) for k in range(n_sigma)]
    )
    return float(z[0]), chi, sigmas


# ---------------------------------------------------------------------------
# problem construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockMap:
    """Affine map from the decision vector to one batch of PSD blocks."""

    name: str
    constant: np.ndarray  # (nb, n, n)
    linear: np.ndarray  # (n_vars, nb, n, n)

    def value(self, z: np.ndarray) -> np.ndarray:
        return self.constant + np.einsum("i,ijab->jab", z, self.linear)


@dataclass(frozen=True)
class SdpProblem:
    """The assembled program: equality structure, cone maps, interior point."""

    theta_f: float
    eta: float
    xi_a: np.ndarray
    measurements: MeasurementSet
    strategies: tuple[DeterministicStrategy, ...]
    strict_chi: bool
    n_vars: int
    equality_matrix: np.ndarray
    equality_labels: tuple[str, ...]
    basis: np.ndarray  # orthonormal null-space basis of the equalities
    center: np.ndarray  # strictly feasible decision vector with q = 0
    block_maps: tuple[BlockMap, ...] = field(repr=False, default=())

    @property
    def n_sigma(self) -> int:
        return len(self.strategies)

    def block_values(self, z: np.ndarray) -> dict[str, np.ndarray]:
        return {bm.name: bm.value(z) for bm in self.block_maps}

    def min_block_eig(self, z: np.ndarray) -> float:
        worst = math.inf
        for bm in self.block_maps:
            vals = bm.value(z)
            for blk in vals:
                worst = min(worst, float(eigvals_hermitian(blk)[0]))
        return worst


def _live_outcomes(ms: MeasurementSet) -> list[list[int]]:
    return [
        [a for a, E in enumerate(p.elements) if float(np.max(np.abs(E))) > 0.0]
        for p in ms.povms
    ]


def canonical_family_parts(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """(rho_at_q0, slope) with rho(q) = rho_at_q0 + q * slope."""
    c, s = math.cos(theta), math.sin(theta)
    rho_a = np.diag([c * c, s * s]).astype(np.complex128)
    rho0 = np.kron(rho_a, np.eye(2, dtype=np.complex128) / 2)
    psi = np.array([c, 0.0, 0.0, s], dtype=np.complex128)
    return rho0, np.outer(psi, psi.conj()) - rho0


def build_lhs_sdp(
    theta_f: float,
    eta: float,
    xi_a: np.ndarray | None = None,
    measurements: MeasurementSet | None = None,
    strict_chi: bool = False,
) -> SdpProblem:
    """Assemble the certification program for the family at angle theta_f."""
    theta = fold_theta(theta_f)
    if theta <= 0.0:
        raise ValidationError(
            "the family at angle zero is a product state; there is nothing to certify"
        )
    eta = float(eta)
    if not 0.0 < eta <= 1.0:
        raise ValidationError(f"eta must lie in (0, 1], got {eta}")
    xi = density_matrix(complex_matrix(np.eye(2) / 2 if xi_a is None else xi_a,
                                       shape=(2, 2)))
    ms = icosahedron_set() if measurements is None else measurements
    if not isinstance(ms, MeasurementSet):
        raise ValidationError("measurements must be a MeasurementSet")
    strategies = tuple(enumerate_strategies(ms))
    n_sigma = len(strategies)
    n_z = 1 + N_CHI_REALS + N_SIGMA_REALS * n_sigma

    basis4 = hermitian_basis(CHI_DIM)
    basis2 = hermitian_basis(SIGMA_DIM)
    eye2 = np.eye(2, dtype=np.complex128)

    # --- equality rows: one packed 2x2 equation per live (a, x) pair.
    live = _live_outcomes(ms)
    any_complete = any(len(l) >= 2 for l in live)
    rows: list[np.ndarray] = []
    labels: list[str] = []
    for x, povm in enumerate(ms.povms):
        if len(live[x]) == 1 and any_complete:
            # A single-outcome POVM only states chi_B = sum_lambda sigma_lambda,
            # which summing the rows of any complete measurement already implies.
            continue
        for a in live[x]:
            MI = np.kron(povm.elements[a], eye2)
            block = np.zeros((N_SIGMA_REALS, n_z))
            for i in range(N_CHI_REALS):
                G = partial_trace(MI @ basis4[i], (2, 2), 0)
                block[:, 1 + i] = pack_hermitian(G)
            for lam, st in enumerate(strategies):
                if st.assignment[x] == a:
                    sl = _sigma_slice(lam)
                    block[:, sl] -= np.eye(N_SIGMA_REALS)
            rows.append(block)
            labels.append(f"x={x},a={a}")
    E = np.vstack(rows) if rows else np.zeros((0, n_z))
    B = nullspace(E)

    # --- strictly feasible center at q = 0: chi = t I/4 and product-form
    # sigmas reproduce the equalities exactly; every cone block sits strictly
    # inside because t is small against the q = 0 state's smallest eigenvalue.
    t = math.sin(theta) ** 2 / 4.0
    z_c = np.zeros(n_z)
    z_c[1 : 1 + CHI_DIM] = t / 4.0
    for lam, st in enumerate(strategies):
        w = 1.0
        for x, a in enumerate(st.assignment):
            w *= float(np.trace(ms.povms[x].elements[a]).real) / 2.0
        base = _sigma_slice(lam).start
        z_c[base : base + SIGMA_DIM] = t * w / 2.0

    # --- affine block maps.
    rho0, rho1 = canonical_family_parts(theta)
    K_sig = np.zeros((n_z, n_sigma, 2, 2), dtype=np.complex128)
    for lam in range(n_sigma):
        K_sig[_sigma_slice(lam), lam] = basis2
    C_sig = np.zeros((n_sigma, 2, 2), dtype=np.complex128)

    K_R = np.zeros((n_z, 4, 4), dtype=np.complex128)
    K_R[0] = rho1
    for i in range(N_CHI_REALS):
        X = basis4[i]
        K_R[1 + i] = -eta * X - (1.0 - eta) * np.kron(xi, partial_trace(X, (2, 2), 0))
    K_RT = np.stack([partial_transpose(K, (2, 2)) for K in K_R])
    C_RT = partial_transpose(rho0, (2, 2))

    K_tr = np.zeros((n_z, 1, 1), dtype=np.complex128)
    for d in range(CHI_DIM):
        K_tr[1 + d, 0, 0] = 1.0

    maps = [
        BlockMap("sigma", C_sig, K_sig),
        BlockMap("remainder", rho0[None], K_R[:, None]),
        BlockMap("remainder_pt", C_RT[None], K_RT[:, None]),
        BlockMap("trace_chi", np.zeros((1, 1, 1), dtype=np.complex128), K_tr[:, None]),
    ]
    if strict_chi:
        K_chi = np.zeros((n_z, 4, 4), dtype=np.complex128)
        K_chi[1 : 1 + N_CHI_REALS] = basis4
        maps.append(BlockMap("chi", np.zeros((1, 4, 4), dtype=np.complex128),
                             K_chi[:, None]))

    problem = SdpProblem(
        theta_f=theta,
        eta=eta,
        xi_a=xi,
        measurements=ms,
        strategies=strategies,
        strict_chi=bool(strict_chi),
        n_vars=n_z,
        equality_matrix=E,
        equality_labels=tuple(labels),
        basis=B,
        center=z_c,
        block_maps=tuple(maps),
    )

    resid = float(np.max(np.abs(E @ z_c))) if E.size else 0.0
    if resid > 1e-10:
        raise SolverError(f"interior construction violates the equalities ({resid:.2e})")
    if problem.min_block_eig(z_c) <= 0.0:
        raise SolverError(
            "the q = 0 product point is not strictly feasible; "
            "this signals a misconfigured problem"
        )
    return problem


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LhsSdpSolution:
    """Solver output: the optimal value, full decision vector, and statistics."""

    q_star: float
    z: np.ndarray
    chi: np.ndarray
    sigmas: np.ndarray
    stats: dict[str, Any]


def _reduced_problem(p: SdpProblem) -> tuple[BlockProblem, np.ndarray]:
    groups = []
    for bm in p.block_maps:
        A = np.tensordot(p.basis, bm.linear, axes=(0, 0))
        groups.append(BlockGroup(bm.constant, A))
    b = p.basis[0, :].copy()
    u0 = p.basis.T @ p.center
    return BlockProblem(b, tuple(groups)), u0


def _margin_problem(
    p: SdpProblem, basis_fixed_q: np.ndarray, q_fixed: float
) -> tuple[BlockProblem, np.ndarray]:
    """Max-margin feasibility program at fixed q: maximize t with blocks >= t*I."""
    groups = []
    worst = math.inf
    for bm in p.block_maps:
        C = bm.constant + q_fixed * bm.linear[0]
        A_y = np.tensordot(basis_fixed_q, bm.linear, axes=(0, 0))
        nb, n = C.shape[0], C.shape[1]
        A_t = -np.broadcast_to(np.eye(n, dtype=np.complex128), (1, nb, n, n))
        groups.append(BlockGroup(C, np.concatenate([A_y, A_t], axis=0)))
    n_y = basis_fixed_q.shape[1]
    b = np.zeros(n_y + 1)
    b[-1] = 1.0
    y0 = basis_fixed_q.T @ p.center
    for g in groups:
        vals = g.constant + np.einsum("k,kjab->jab", y0, g.coeffs[:-1])
        for blk in vals:
            worst = min(worst, float(eigvals_hermitian(blk)[0]))
    t0 = worst - max(0.25, abs(worst))
    return BlockProblem(b, tuple(groups)), np.concatenate([y0, [t0]])


def solve_lhs_sdp(
    problem: SdpProblem,
    tol: float = DEFAULT_SDP_TOL,
    mode: str = "direct",
    backend: str = "embedded",
    q_tol: float = DEFAULT_Q_TOL,
) -> LhsSdpSolution:
    """Maximize q over the certification program.

    `mode="direct"` optimizes q as the linear objective; `mode="bisect"`
    runs bisection on q with max-margin feasibility solves.  Both return a
    feasible decision vector, so the reported q_star is a certified lower
    bound on the true optimum in either mode.
    """
    if mode == "direct":
        bp, u0 = _reduced_problem(problem)
        try:
            sol = solve_block_sdp(bp, u0, gap_tol=tol, backend=backend)
        except SolverError as exc:
            raise SolverError(
                f"direct solve failed from the q = 0 interior point: {exc}"
            ) from exc
        z = problem.basis @ sol.u
        stats = {
            "mode": mode,
            "backend": backend,
            "iterations": sol.iterations,
            "gap": sol.gap,
            "residual": sol.residual,
        }
    elif mode == "bisect":
        fixed_rows = np.vstack([problem.equality_matrix,
                                np.eye(problem.n_vars)[:1]])
        basis2 = nullspace(fixed_rows)

        def margin(q_fixed: float) -> tuple[float, np.ndarray]:
            bp, u0 = _margin_problem(problem, basis2, q_fixed)
            sol = solve_block_sdp(bp, u0, gap_tol=max(tol, 1e-8), backend=backend)
            z_q = np.zeros(problem.n_vars)
            z_q[0] = q_fixed
            z_q += basis2 @ sol.u[:-1]
            return sol.objective, z_q

        steps = 0
        lo, z_best = 0.0, problem.center.copy()
        t_hi, z_hi = margin(1.0)
        steps += 1
        if t_hi > 0.0:
            lo, z_best, hi = 1.0, z_hi, 1.0
        else:
            hi = 1.0
            while hi - lo > q_tol:
                mid = 0.5 * (lo + hi)
                t_mid, z_mid = margin(mid)
                steps += 1
                if t_mid > 0.0:
                    lo, z_best = mid, z_mid
                else:
                    hi = mid
        z = z_best
        stats = {"mode": mode, "backend": backend, "bisect_steps": steps,
                 "bracket": hi - lo}
    else:
        raise ValidationError(f"unknown solve mode {mode!r}")

    if z[0] > 1.0:
        # The optimum exceeds the physical mixing range; transport the witness
        # along the line to the q = 0 point, which stays feasible by convexity.
        lam = 1.0 / z[0]
        z = lam * z + (1.0 - lam) * problem.center
        stats["clipped_at_physical_range"] = True
    q_star, chi, sigmas = unpack_solution(z)
    return LhsSdpSolution(q_star=q_star, z=z, chi=chi, sigmas=sigmas, stats=stats)


def polish_solution(problem: SdpProblem, z: np.ndarray, mix: float = POLISH_MIX) -> np.ndarray:
    """Pull the point slightly toward the interior and clip sigma negativity.

    The tiny center mix costs O(mix) in q but buys strictly positive margins;
    eigenvalue clipping then removes any residual negative sigma parts, and
    the equalities are re-checked afterwards.
    """
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size != problem.n_vars:
        raise ValidationError("decision vector does not match the problem")
    out = (1.0 - mix) * z + mix * problem.center
    for lam in range(problem.n_sigma):
        sl = _sigma_slice(lam)
        S = unpack_hermitian(out[sl], SIGMA_DIM)
        w, V = eig_hermitian(S)
        if w[0] < 0.0:
            S = (V * np.clip(w, 0.0, None)) @ V.conj().T
            out[sl] = pack_hermitian(S)
    if problem.strict_chi:
        sl = slice(1, 1 + N_CHI_REALS)
        C = unpack_hermitian(out[sl], CHI_DIM)
        w, V = eig_hermitian(C)
        if w[0] < 0.0:
            out[sl] = pack_hermitian((V * np.clip(w, 0.0, None)) @ V.conj().T)
    resid = float(np.max(np.abs(problem.equality_matrix @ out)))
    if resid > EQUALITY_TOL:
        raise SolverError(
            f"polishing left equality residual {resid:.2e} above {EQUALITY_TOL:g}"
        )
    return out


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


def measurement_set_id(ms: MeasurementSet) -> str:
    """Stable identifier: a named tag for the bundled set, else a content hash."""
    payload = json.dumps(ms.to_json(), sort_keys=True)
    digest = hashlib.sha256(payload.encode()).hexdigest()[:12]
    ref = icosahedron_set()
    if ms.count == ref.count and ms.outcomes_per_povm == ref.outcomes_per_povm:
        same = all(
            np.max(np.abs(a - b)) < 1e-12
            for p, q in zip(ms.povms, ref.povms)
            for a, b in zip(p.elements, q.elements)
        )
        if same:
            return "icosahedron-upper6"
    return f"custom-{digest}"


@dataclass(frozen=True)
class LhsSdpCertificate:
    """Self-contained proof object for `rho(q_star, theta_f)` unsteerability."""

    q_star: float
    chi: np.ndarray
    sigmas: np.ndarray
    eta: float
    xi_a: np.ndarray
    theta_f: float
    measurement_set_id: str
    measurements: MeasurementSet
    verification_report: dict[str, Any]
    metadata: dict[str, Any]

    def to_json(self) -> dict[str, Any]:
        return {
            "format": "lhs-sdp-certificate/1",
            "q_star": float(self.q_star),
            "theta_f": float(self.theta_f),
            "eta": float(self.eta),
            "xi_a": matrix_to_json(self.xi_a),
            "chi": matrix_to_json(self.chi),
            "sigmas": [matrix_to_json(S) for S in self.sigmas],
            "measurement_set_id": self.measurement_set_id,
            "measurements": self.measurements.to_json(),
            "verification_report": self.verification_report,
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "LhsSdpCertificate":
        if data.get("format") != "lhs-sdp-certificate/1":
            raise ValidationError(
                f"unsupported certificate format {data.get('format')!r}"
            )
        sigmas = np.stack([matrix_from_json(S) for S in data["sigmas"]])
        return cls(
            q_star=float(data["q_star"]),
            chi=matrix_from_json(data["chi"]),
            sigmas=sigmas,
            eta=float(data["eta"]),
            xi_a=matrix_from_json(data["xi_a"]),
            theta_f=float(data["theta_f"]),
            measurement_set_id=str(data["measurement_set_id"]),
            measurements=MeasurementSet.from_json(data["measurements"]),
            verification_report=dict(data.get("verification_report", {})),
            metadata=dict(data.get("metadata", {})),
        )


def _diagonal_bias(xi: np.ndarray) -> float | None:
    """The bias p with xi = diag((1+p)/2, (1-p)/2), if xi is diagonal."""
    if abs(xi[0, 1]) > 1e-10 or abs(xi[1, 0]) > 1e-10:
        return None
    return abs(float(2.0 * xi[0, 0].real - 1.0))


def _default_shrink_value(xi: np.ndarray) -> float:
    p = _diagonal_bias(xi)
    if p is None:
        raise CertificateError(
            "no configured shrinking value: xi_A is not diagonal, pass shrink_value"
        )
    try:
        return table_eta(p)
    except ValidationError as exc:
        raise CertificateError(f"no configured shrinking value: {exc}") from exc


def verify_certificate(
    cert: LhsSdpCertificate,
    shrink_value: float | None = None,
    equality_tol: float = EQUALITY_TOL,
) -> dict[str, Any]:
    """Re-check a certificate from its stored matrices alone.

    Recomputes (i) every live measurement-matching equality, (ii) positivity
    of every sigma, (iii) positivity of the remainder and of its partial
    transpose, and (iv) that eta stays within the configured shrinking value.
    Returns the report; raises CertificateError naming the first failed check.
    """
    ms = cert.measurements
    strategies = enumerate_strategies(ms)
    if len(strategies) != len(cert.sigmas):
        raise CertificateError(
            f"certificate has {len(cert.sigmas)} hidden states but the "
            f"measurement set induces {len(strategies)} strategies"
        )
    chi = complex_matrix(cert.chi, shape=(4, 4))
    xi = complex_matrix(cert.xi_a, shape=(2, 2))
    eye2 = np.eye(2, dtype=np.complex128)

    worst_eq = 0.0
    for x, povm in enumerate(ms.povms):
        for a, element in enumerate(povm.elements):
            if float(np.max(np.abs(element))) <= 0.0:
                continue
            lhs = partial_trace(np.kron(element, eye2) @ chi, (2, 2), 0)
            rhs = np.zeros((2, 2), dtype=np.complex128)
            for st, S in zip(strategies, cert.sigmas):
                if st.assignment[x] == a:
                    rhs += S
            worst_eq = max(worst_eq, float(np.max(np.abs(lhs - rhs))))

    sigma_min = min(float(eigvals_hermitian(S)[0]) for S in cert.sigmas)

    rho0, rho1 = canonical_family_parts(fold_theta(cert.theta_f))
    chi_b = partial_trace(chi, (2, 2), 0)
    R = (
        rho0
        + cert.q_star * rho1
        - cert.eta * chi
        - (1.0 - cert.eta) * np.kron(xi, chi_b)
    )
    r_min = float(eigvals_hermitian(hermitize(R, tol=1e-8))[0])
    rt_min = float(eigvals_hermitian(partial_transpose(hermitize(R, tol=1e-8), (2, 2)))[0])

    budget = _default_shrink_value(xi) if shrink_value is None else float(shrink_value)

    checks = [
        {
            "name": "equality_residual",
            "value": worst_eq,
            "bound": equality_tol,
            "margin": equality_tol - worst_eq,
            "passed": worst_eq < equality_tol,
        },
        {
            "name": "sigma_psd",
            "value": sigma_min,
            "bound": PSD_TOL,
            "margin": sigma_min - PSD_TOL,
            "passed": sigma_min >= PSD_TOL,
        },
        {
            "name": "remainder_psd",
            "value": r_min,
            "bound": PSD_TOL,
            "margin": r_min - PSD_TOL,
            "passed": r_min >= PSD_TOL,
        },
        {
            "name": "remainder_pt_psd",
            "value": rt_min,
            "bound": PSD_TOL,
            "margin": rt_min - PSD_TOL,
            "passed": rt_min >= PSD_TOL,
        },
        {
            "name": "eta_budget",
            "value": cert.eta,
            "bound": budget,
            "margin": budget - cert.eta,
            "passed": cert.eta <= budget,
        },
    ]
    report = {
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
        "shrink_value": budget,
        "q_star": float(cert.q_star),
        "theta_f": float(cert.theta_f),
    }
    failed = [c for c in checks if not c["passed"]]
    if failed:
        names = ", ".join(c["name"] for c in failed)
        raise CertificateError(
            f"certificate rejected: failed {names} "
            f"(first margin {failed[0]['margin']:.3e})",
            details={"report": report},
        )
    return report


def midpoint_certificate(
    c1: LhsSdpCertificate, c2: LhsSdpCertificate
) -> LhsSdpCertificate:
    """Average of two certificates at the smaller of their two q values.

    Each input is first transported along its mixing line to the common q
    (a convex combination with the q = 0 interior point), so the averaged
    matrices stay feasible exactly; averaging at unequal q directly would
    shift the remainder by the q difference and can dip below tolerance.
    """
    if abs(c1.theta_f - c2.theta_f) > 1e-12 or abs(c1.eta - c2.eta) > 1e-12:
        raise ValidationError("certificates must share theta_f and eta")
    if np.max(np.abs(c1.xi_a - c2.xi_a)) > 1e-12:
        raise ValidationError("certificates must share xi_A")
    problem = build_lhs_sdp(c1.theta_f, c1.eta, c1.xi_a, c1.measurements)
    q_min = min(c1.q_star, c2.q_star)

    def transported(c: LhsSdpCertificate) -> np.ndarray:
        z = np.concatenate(
            [[c.q_star], pack_hermitian(c.chi)]
            + [pack_hermitian(S) for S in c.sigmas]
        )
        if c.q_star <= q_min or c.q_star == 0.0:
            return z
        lam = q_min / c.q_star
        return lam * z + (1.0 - lam) * problem.center

    z_mid = 0.5 * (transported(c1) + transported(c2))
    q, chi, sigmas = unpack_solution(z_mid)
    meta = dict(c1.metadata)
    meta["origin"] = "midpoint"
    cert = LhsSdpCertificate(
        q_star=q,
        chi=chi,
        sigmas=sigmas,
        eta=c1.eta,
        xi_a=c1.xi_a,
        theta_f=c1.theta_f,
        measurement_set_id=c1.measurement_set_id,
        measurements=c1.measurements,
        verification_report={},
        metadata=meta,
    )
    report = verify_certificate(
        cert, shrink_value=meta.get("shrink_value_configured")
    )
    return replace(cert, verification_report=report)


def certify_lhs(
    theta_f: float,
    p: float = 0.0,
    eta: float | None = None,
    eta_mode: str = "table",
    tol: float = DEFAULT_SDP_TOL,
    mode: str = "direct",
    measurements: MeasurementSet | None = None,
    strict_chi: bool = False,
    backend: str = "embedded",
    shrink_reference: float | None = None,
) -> LhsSdpCertificate:
    """Build, solve, polish, and verify a certificate in one step.

    `p` parameterizes Alice's reference state xi_A = diag((1+p)/2, (1-p)/2).
    When `eta` is omitted it comes from the fixed reference table
    (`eta_mode="table"`), or from the module's own net-based estimate
    (`eta_mode="estimate"`), in which case the output is labeled
    non-certified because the estimate is not an exact bound.
    `shrink_reference` overrides the budget an explicit `eta` is checked
    against, for callers that obtain a shrinking bound by other means; the
    override is recorded in the certificate metadata.
    """
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"bias p must lie in [0, 1], got {p}")
    xi = np.diag([(1.0 + p) / 2.0, (1.0 - p) / 2.0]).astype(np.complex128)
    if eta is not None:
        eta_source = "explicit"
        eta_val = float(eta)
        if shrink_reference is not None:
            shrink_ref = float(shrink_reference)
        else:
            shrink_ref = table_eta(p) if p <= 0.9 else eta_val
    elif eta_mode == "table":
        eta_source = "table"
        eta_val = table_eta(p)
        shrink_ref = eta_val
    elif eta_mode == "estimate":
        eta_source = "estimate"
        _, eta_val = shrinking_factor_estimate(icosahedron_family(), p)
        shrink_ref = eta_val
    else:
        raise ValidationError(f"unknown eta_mode {eta_mode!r}")

    problem = build_lhs_sdp(theta_f, eta_val, xi, measurements, strict_chi)
    solution = solve_lhs_sdp(problem, tol=tol, mode=mode, backend=backend)
    z = polish_solution(problem, solution.z)
    q_star, chi, sigmas = unpack_solution(z)

    metadata = {
        "remainder_sign_note": REMAINDER_SIGN_NOTE,
        "redundant_trace_constraint": (
            "Tr(chi) >= 0 is kept verbatim although the equalities plus "
            "sigma positivity already imply it"
        ),
        "eta_source": eta_source,
        "eta_certified": eta_source != "estimate",
        "shrink_value_configured": shrink_ref,
        "bias_p": float(p),
        "strict_chi": bool(strict_chi),
        "strategy_count": problem.n_sigma,
        "polish_mix": POLISH_MIX,
        "solver": solution.stats,
    }
    cert = LhsSdpCertificate(
        q_star=q_star,
        chi=chi,
        sigmas=sigmas,
        eta=eta_val,
        xi_a=xi,
        theta_f=problem.theta_f,
        measurement_set_id=measurement_set_id(problem.measurements),
        measurements=problem.measurements,
        verification_report={},
        metadata=metadata,
    )
    report = verify_certificate(cert, shrink_value=shrink_ref)
    return replace(cert, verification_report=report)
