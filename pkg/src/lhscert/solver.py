"""Embedded primal-dual interior-point solver for small block-diagonal SDPs.

Solves problems of the form

    maximize    b . u
    subject to  S_g(u) = C_g + sum_k u_k A_{g,k}  is PSD  for every block

where the cone is a product of many small Hermitian PSD blocks (sizes 1-8
in this package).  Blocks of equal size are batched in groups.  The
iteration is a Nesterov-Todd scaled predictor-corrector method; a strictly
feasible start is required, and every iterate keeps S(u) strictly inside
the cone, so the running objective b . u is a valid bound at every step --
callers certify with the returned point, not with the optimality claim.

`solve_block_sdp` dispatches through a named backend table so an external
conic solver can be registered as a drop-in replacement.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from ._accel import eigh2_batch, schur_group
from .errors import SolverError, ValidationError
from .linalg import eig_hermitian

DEFAULT_GAP_TOL = 1e-9
DEFAULT_FEAS_TOL = 1e-8
_BOUNDARY_FRACTION = 0.98
_HERM_CHECK_TOL = 1e-8


def nullspace(mat: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis (columns) for the null space of a real matrix."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if mat.shape[0] == 0:
        return np.eye(mat.shape[1])
    _, s, vh = np.linalg.svd(mat)
    if tol is None:
        tol = max(mat.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


@dataclass(frozen=True)
class BlockGroup:
    """A batch of same-size Hermitian blocks sharing the coefficient layout.

    ``constant`` has shape (nb, n, n); ``coeffs`` has shape (m, nb, n, n)
    where m is the number of decision variables.  Block j of the slack is
    ``constant[j] + sum_k u[k] * coeffs[k, j]``.
    """

    constant: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        C = np.ascontiguousarray(np.asarray(self.constant, dtype=np.complex128))
        A = np.ascontiguousarray(np.asarray(self.coeffs, dtype=np.complex128))
        if C.ndim != 3 or C.shape[1] != C.shape[2]:
            raise ValidationError(f"block constants must be (nb, n, n), got {C.shape}")
        if A.ndim != 4 or A.shape[1:] != C.shape:
            raise ValidationError(
                f"block coefficients must be (m, nb, n, n) matching constants, "
                f"got {A.shape} vs {C.shape}"
            )
        for name, arr in (("constant", C), ("coeffs", A)):
            dev = np.max(np.abs(arr - np.swapaxes(arr, -1, -2).conj())) if arr.size else 0.0
            if dev > _HERM_CHECK_TOL:
                raise ValidationError(f"{name} blocks are not Hermitian (deviation {dev:.2e})")
        object.__setattr__(self, "constant", (C + np.swapaxes(C, -1, -2).conj()) / 2)
        object.__setattr__(self, "coeffs", (A + np.swapaxes(A, -1, -2).conj()) / 2)

    @property
    def n_blocks(self) -> int:
        return self.constant.shape[0]

    @property
    def block_size(self) -> int:
        return self.constant.shape[1]

    def slack(self, u: np.ndarray) -> np.ndarray:
        return self.constant + np.einsum("k,kjab->jab", u, self.coeffs)


@dataclass(frozen=True)
class BlockProblem:
    """Objective vector plus the block groups defining the PSD constraints."""

    b: np.ndarray
    groups: tuple[BlockGroup, ...]

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float).reshape(-1)
        groups = tuple(self.groups)
        if not groups:
            raise ValidationError("problem needs at least one block group")
        for g in groups:
            if g.coeffs.shape[0] != b.size:
                raise ValidationError(
                    f"group has {g.coeffs.shape[0]} coefficients, objective has {b.size}"
                )
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "groups", groups)

    @property
    def n_vars(self) -> int:
        return self.b.size

    @property
    def cone_dim(self) -> int:
        return sum(g.n_blocks * g.block_size for g in self.groups)

    def slacks(self, u: np.ndarray) -> list[np.ndarray]:
        return [g.slack(u) for g in self.groups]

    def min_eig(self, u: np.ndarray) -> float:
        return min(float(_group_eigvals(S).min()) for S in self.slacks(u))


@dataclass(frozen=True)
class SdpSolution:
    """Result of a solve: the feasible point, bounds, and diagnostics."""

    u: np.ndarray
    objective: float
    gap: float
    residual: float
    iterations: int
    status: str
    dual_blocks: tuple[np.ndarray, ...] = field(repr=False, default=())


# ---------------------------------------------------------------------------
# batched spectral helpers
# ---------------------------------------------------------------------------


def _group_eig(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a batch of Hermitian blocks (ascending)."""
    nb, n, _ = X.shape
    if n == 1:
        w = X[:, 0, 0].real.reshape(nb, 1)
        return w, np.ones((nb, 1, 1), dtype=np.complex128)
    if n == 2:
        return eigh2_batch(X)
    w = np.empty((nb, n))
    V = np.empty((nb, n, n), dtype=np.complex128)
    for j in range(nb):
        w[j], V[j] = eig_hermitian(X[j])
    return w, V


def _group_eigvals(X: np.ndarray) -> np.ndarray:
    return _group_eig(X)[0]


def _spectral_apply(w: np.ndarray, V: np.ndarray, fw: np.ndarray) -> np.ndarray:
    """Rebuild V diag(fw) V^dagger for a batch of blocks."""
    return np.einsum("jab,jb,jcb->jac", V, fw.astype(np.complex128), V.conj())


def _hermitize_batch(X: np.ndarray) -> np.ndarray:
    return (X + np.swapaxes(X, -1, -2).conj()) / 2


def _inner(X: np.ndarray, Y: np.ndarray) -> float:
    """Sum of real trace inner products over a batch of blocks."""
    return float(np.einsum("jab,jba->", X, Y).real)


def _apply_adjoint(A: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Vector of <A_k, X> over the variable index k."""
    return np.einsum("kjab,jba->k", A, X).real


def _step_to_boundary(w: np.ndarray, V: np.ndarray, D: np.ndarray) -> float:
    """Largest t with X + t D still PSD, given the eigensystem of X > 0."""
    inv_half = _spectral_apply(w, V, 1.0 / np.sqrt(w))
    B = inv_half @ D @ inv_half
    lam = float(_group_eigvals(_hermitize_batch(B)).min())
    if lam >= -1e-14:
        return np.inf
    return 1.0 / (-lam)


def _chol_solve(M: np.ndarray, rhs_cols: np.ndarray) -> np.ndarray:
    """Cholesky solve with escalating diagonal jitter on breakdown."""
    base = np.max(np.abs(np.diag(M))) + 1.0
    jitter = 0.0
    for attempt in range(12):
        try:
            cf = scipy.linalg.cho_factor(M + jitter * np.eye(M.shape[0]), lower=True)
            return scipy.linalg.cho_solve(cf, rhs_cols)
        except np.linalg.LinAlgError:
            jitter = base * (1e-14 if jitter == 0.0 else jitter / base * 100)
        except scipy.linalg.LinAlgError:  # pragma: no cover - scipy alias
            jitter = base * (1e-14 if jitter == 0.0 else jitter / base * 100)
    raise SolverError("Schur complement factorization failed despite jitter")


# ---------------------------------------------------------------------------
# the embedded interior-point iteration
# ---------------------------------------------------------------------------


def _solve_embedded(
    problem: BlockProblem,
    u0: np.ndarray,
    gap_tol: float,
    feas_tol: float,
    max_iter: int,
) -> SdpSolution:
    b = problem.b
    m = problem.n_vars
    N = problem.cone_dim
    b_scale = 1.0 + float(np.max(np.abs(b))) if b.size else 1.0

    u = np.asarray(u0, dtype=float).reshape(-1).copy()
    if u.size != m:
        raise ValidationError(f"start point has size {u.size}, problem has {m} variables")
    S = problem.slacks(u)
    if min(float(_group_eigvals(Sg).min()) for Sg in S) <= 0:
        raise SolverError("start point is not strictly feasible")
    Z = [np.broadcast_to(np.eye(g.block_size, dtype=np.complex128),
                         (g.n_blocks, g.block_size, g.block_size)).copy()
         for g in problem.groups]

    stalls = 0
    for it in range(max_iter):
        gap = sum(_inner(Sg, Zg) for Sg, Zg in zip(S, Z))
        mu = gap / N
        if not np.isfinite(gap) or np.max(np.abs(u)) > 1e30:
            raise SolverError("iterates diverged (problem unbounded or badly scaled)")
        resid = b.copy()
        for g, Zg in zip(problem.groups, Z):
            resid += _apply_adjoint(g.coeffs, Zg)
        res_norm = float(np.max(np.abs(resid))) if m else 0.0
        obj = float(b @ u)
        if gap / (1.0 + abs(obj)) < gap_tol and res_norm / b_scale < feas_tol:
            return SdpSolution(
                u=u, objective=obj, gap=gap, residual=res_norm,
                iterations=it, status="optimal", dual_blocks=tuple(Z),
            )

        # Nesterov-Todd scaling per group: W S W = Z.
        eig_S = [_group_eig(Sg) for Sg in S]
        eig_Z = [_group_eig(Zg) for Zg in Z]
        Sinv, W = [], []
        for (ws, Vs), Zg in zip(eig_S, Z):
            ws = np.maximum(ws, 1e-300)
            half = _spectral_apply(ws, Vs, np.sqrt(ws))
            inv_half = _spectral_apply(ws, Vs, 1.0 / np.sqrt(ws))
            Sinv.append(_spectral_apply(ws, Vs, 1.0 / ws))
            T = _hermitize_batch(half @ Zg @ half)
            wt, Vt = _group_eig(T)
            wt = np.maximum(wt, 1e-300)
            T_half = _spectral_apply(wt, Vt, np.sqrt(wt))
            W.append(_hermitize_batch(inv_half @ T_half @ inv_half))

        M = np.zeros((m, m))
        for g, Wg in zip(problem.groups, W):
            M += schur_group(g.coeffs, Wg)

        # Predictor (affine scaling step) fixes the centering weight.
        rhs = np.stack([b, np.zeros_like(b)], axis=1)
        for g, Si in zip(problem.groups, Sinv):
            rhs[:, 1] += _apply_adjoint(g.coeffs, Si)
        sol = _chol_solve(M, rhs)
        du_aff = sol[:, 0]
        dS_aff = [np.einsum("k,kjab->jab", du_aff, g.coeffs) for g in problem.groups]
        dZ_aff = [-(Zg + Wg @ dSg @ Wg) for Zg, Wg, dSg in zip(Z, W, dS_aff)]
        a_p = min(1.0, min(_step_to_boundary(ws, Vs, dSg)
                           for (ws, Vs), dSg in zip(eig_S, dS_aff)))
        a_d = min(1.0, min(_step_to_boundary(wz, Vz, dZg)
                           for (wz, Vz), dZg in zip(eig_Z, dZ_aff)))
        mu_aff = sum(
            _inner(Sg + a_p * dSg, Zg + a_d * dZg)
            for Sg, dSg, Zg, dZg in zip(S, dS_aff, Z, dZ_aff)
        ) / N
        sigma = min(1.0, max(mu_aff / mu, 0.0) ** 3)

        # Corrector reuses the factorization via the second RHS column.
        du = du_aff + sigma * mu * sol[:, 1]
        dS = [np.einsum("k,kjab->jab", du, g.coeffs) for g in problem.groups]
        dZ = [
            sigma * mu * Si - Zg - Wg @ dSg @ Wg
            for Si, Zg, Wg, dSg in zip(Sinv, Z, W, dS)
        ]
        a_p = _BOUNDARY_FRACTION * min(
            _step_to_boundary(ws, Vs, dSg) for (ws, Vs), dSg in zip(eig_S, dS)
        )
        a_d = _BOUNDARY_FRACTION * min(
            _step_to_boundary(wz, Vz, dZg) for (wz, Vz), dZg in zip(eig_Z, dZ)
        )
        a_p, a_d = min(1.0, a_p), min(1.0, a_d)
        for _ in range(40):
            trial = [Sg + a_p * dSg for Sg, dSg in zip(S, dS)]
            if min(float(_group_eigvals(T).min()) for T in trial) > 0:
                break
            a_p *= 0.8
        else:
            raise SolverError("could not keep the slack inside the cone")
        for _ in range(40):
            trial_Z = [_hermitize_batch(Zg + a_d * dZg) for Zg, dZg in zip(Z, dZ)]
            if min(float(_group_eigvals(T).min()) for T in trial_Z) > 0:
                break
            a_d *= 0.8
        else:
            raise SolverError("could not keep the dual inside the cone")

        u = u + a_p * du
        S = problem.slacks(u)
        Z = trial_Z
        stalls = stalls + 1 if max(a_p, a_d) < 1e-8 else 0
        if stalls >= 3:
            raise SolverError(
                f"progress stalled at gap {gap:.3e}, residual {res_norm:.3e}"
            )

    raise SolverError(
        f"no convergence in {max_iter} iterations "
        f"(gap {gap:.3e}, residual {res_norm:.3e})"
    )


# ---------------------------------------------------------------------------
# backend dispatch
# ---------------------------------------------------------------------------

Backend = Callable[[BlockProblem, np.ndarray, float, float, int], SdpSolution]

_BACKENDS: dict[str, Backend] = {"embedded": _solve_embedded}


def register_backend(name: str, fn: Backend) -> None:
    """Register an alternative conic solver under `name`."""
    _BACKENDS[str(name)] = fn


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def solve_block_sdp(
    problem: BlockProblem,
    u0: np.ndarray,
    *,
    gap_tol: float = DEFAULT_GAP_TOL,
    feas_tol: float = DEFAULT_FEAS_TOL,
    max_iter: int = 120,
    backend: str = "embedded",
) -> SdpSolution:
    """Maximize b.u over the PSD block constraints from a strictly feasible u0."""
    try:
        fn = _BACKENDS[backend]
    except KeyError:
        raise ValidationError(
            f"unknown solver backend {backend!r}; available: {available_backends()}"
        ) from None
    return fn(problem, u0, gap_tol, feas_tol, max_iter)
