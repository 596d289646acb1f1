"""Hot numeric kernels: numba-jitted with pure-numpy fallbacks.

The jitted path is used when numba imports cleanly; setting the environment
variable ``LHSCERT_PURE_NUMPY=1`` forces the numpy fallback.  Both paths
implement the same algorithms; ``bench/kernel_bench.py`` compares them.
"""
from __future__ import annotations

import os

import numpy as np

_FORCED = os.environ.get("LHSCERT_PURE_NUMPY", "").strip() not in ("", "0")

try:
    if _FORCED:
        raise ImportError("pure-numpy path forced via LHSCERT_PURE_NUMPY")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


# ---------------------------------------------------------------------------
# Cyclic Jacobi eigensolver for real symmetric matrices.
# ---------------------------------------------------------------------------

def _jacobi_numpy(E: np.ndarray, tol: float, max_sweeps: int = 60):
    """Cyclic Jacobi on a real symmetric matrix; returns (diag, V, sweeps)."""
    A = np.array(E, dtype=np.float64)
    n = A.shape[0]
    V = np.eye(n)
    fro = np.sqrt((A * A).sum())
    if fro == 0.0:
        return np.zeros(n), V, 0
    stop = tol * fro
    sweeps = 0
    for sweep in range(max_sweeps):
        off = np.sqrt(2.0 * (np.triu(A, 1) ** 2).sum())
        if off <= stop:
            break
        sweeps = sweep + 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    return np.diag(A).copy(), V, sweeps


if HAS_NUMBA:

    @njit(cache=True)
    def _jacobi_numba(E, tol, max_sweeps=60):  # pragma: no cover - jitted
        n = E.shape[0]
        A = E.copy()
        V = np.eye(n)
        fro = 0.0
        for i in range(n):
            for j in range(n):
                fro += A[i, j] * A[i, j]
        fro = np.sqrt(fro)
        if fro == 0.0:
            return np.zeros(n), V, 0
        stop = tol * fro
        sweeps = 0
        for sweep in range(max_sweeps):
            off = 0.0
            for i in range(n - 1):
                for j in range(i + 1, n):
                    off += A[i, j] * A[i, j]
            if np.sqrt(2.0 * off) <= stop:
                break
            sweeps = sweep + 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    if abs(apq) <= 1e-300:
                        continue
                    tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                    if tau >= 0.0:
                        t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                    else:
                        t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                    c = 1.0 / np.sqrt(1.0 + t * t)
                    s = t * c
                    for k in range(n):
                        akp = A[k, p]
                        akq = A[k, q]
                        A[k, p] = c * akp - s * akq
                        A[k, q] = s * akp + c * akq
                    for k in range(n):
                        apk = A[p, k]
                        aqk = A[q, k]
                        A[p, k] = c * apk - s * aqk
                        A[q, k] = s * apk + c * aqk
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    for k in range(n):
                        vkp = V[k, p]
                        vkq = V[k, q]
                        V[k, p] = c * vkp - s * vkq
                        V[k, q] = s * vkp + c * vkq
        d = np.empty(n)
        for i in range(n):
            d[i] = A[i, i]
        return d, V, sweeps

    def jacobi_eigh(E: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60):
        d, V, sweeps = _jacobi_numba(np.ascontiguousarray(E, dtype=np.float64),
                                     tol, max_sweeps)
        return d, V, sweeps
else:

    def jacobi_eigh(E: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60):
        return _jacobi_numpy(E, tol, max_sweeps)


# ---------------------------------------------------------------------------
# Batched 2x2 Hermitian eigendecomposition (closed form).
# ---------------------------------------------------------------------------

def _eigh2_numpy(H: np.ndarray):
    """Batched closed-form eig of 2x2 Hermitian matrices (B, 2, 2)."""
    a = H[:, 0, 0].real
    d = H[:, 1, 1].real
    b = H[:, 0, 1]
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + (b * b.conj()).real)
    mid = 0.5 * (a + d)
    lo = mid - disc
    hi = mid + disc
    # eigenvector for the larger eigenvalue, using the cancellation-free row
    use_top = a >= d
    x = np.where(use_top, hi - d, b)
    y = np.where(use_top, b.conj(), hi - a)
    nrm = np.sqrt((x * x.conj()).real + (y * y.conj()).real)
    flat = nrm < 1e-300
    x = np.where(flat, 1.0, x / np.where(flat, 1.0, nrm))
    y = np.where(flat, 0.0, y / np.where(flat, 1.0, nrm))
    V = np.empty_like(H)
    # ascending order: column 0 is the low eigenvector (orthogonal complement)
    V[:, 0, 0] = -y.conj()
    V[:, 1, 0] = x.conj()
    V[:, 0, 1] = x
    V[:, 1, 1] = y
    w = np.stack([lo, hi], axis=1)
    return w, V


if HAS_NUMBA:

    @njit(cache=True)
    def _eigh2_numba(H):  # pragma: no cover - jitted
        B = H.shape[0]
        w = np.empty((B, 2))
        V = np.empty_like(H)
        for i in range(B):
            a = H[i, 0, 0].real
            d = H[i, 1, 1].real
            b = H[i, 0, 1]
            half = 0.5 * (a - d)
            disc = np.sqrt(half * half + (b * np.conj(b)).real)
            mid = 0.5 * (a + d)
            lo = mid - disc
            hi = mid + disc
            if a >= d:
                x = complex(hi - d)
                y = np.conj(b)
            else:
                x = b
                y = complex(hi - a)
            nrm = np.sqrt((x * np.conj(x)).real + (y * np.conj(y)).real)
            if nrm < 1e-300:
                x = 1.0 + 0.0j
                y = 0.0 + 0.0j
            else:
                x = x / nrm
                y = y / nrm
            V[i, 0, 0] = -np.conj(y)
            V[i, 1, 0] = np.conj(x)
            V[i, 0, 1] = x
            V[i, 1, 1] = y
            w[i, 0] = lo
            w[i, 1] = hi
        return w, V

    def eigh2_batch(H: np.ndarray):
        return _eigh2_numba(np.ascontiguousarray(H, dtype=np.complex128))
else:

    def eigh2_batch(H: np.ndarray):
        return _eigh2_numpy(np.asarray(H, dtype=np.complex128))


# ---------------------------------------------------------------------------
# Schur-complement accumulation for the interior-point solver.
# M[i, k] += Re tr(A_i W A_k W) for a stack of Hermitian constraint matrices.
# ---------------------------------------------------------------------------

def _schur_block_numpy(A: np.ndarray, W: np.ndarray) -> np.ndarray:
    m = A.shape[0]
    WAW = np.matmul(np.matmul(W, A), W)
    return (A.reshape(m, -1) @ WAW.transpose(0, 2, 1).reshape(m, -1).T).real


if HAS_NUMBA:

    @njit(cache=True, fastmath=True)
    def _schur_block_numba(A, W):  # pragma: no cover - jitted
        m, n, _ = A.shape
        WAW = np.empty_like(A)
        for i in range(m):
            WAW[i] = W @ (A[i] @ W)
        M = np.empty((m, m))
        for i in range(m):
            for k in range(i, m):
                acc = 0.0
                for a in range(n):
                    for b in range(n):
                        acc += (A[i, a, b] * WAW[k, b, a]).real
                M[i, k] = acc
                M[k, i] = acc
        return M


# The jitted Schur kernels lose to the BLAS/einsum implementations at the
# block shapes this package actually solves (many 2x2 blocks, a few 4x4;
# measured ~2x slower, see bench/kernel_bench.py), so the einsum path is the
# production dispatch on both backends.  The jitted variants stay only for
# the benchmark comparison.
def schur_block(A: np.ndarray, W: np.ndarray) -> np.ndarray:
    return _schur_block_numpy(A, W)


# ---------------------------------------------------------------------------
# Grouped Schur accumulation: many same-size blocks, one W per block.
# M[i, k] = sum_j Re tr(A[i, j] W[j] A[k, j] W[j]).
# ---------------------------------------------------------------------------

def _schur_group_numpy(A: np.ndarray, W: np.ndarray) -> np.ndarray:
    WAW = np.einsum("jab,kjbc,jcd->kjad", W, A, W, optimize=True)
    return np.einsum("kjab,ljba->kl", A, WAW, optimize=True).real


if HAS_NUMBA:

    @njit(cache=True, fastmath=True)
    def _schur_group_numba(A, W):  # pragma: no cover - jitted
        m, nb, n, _ = A.shape
        M = np.zeros((m, m))
        WAW = np.empty((m, n, n), dtype=np.complex128)
        for j in range(nb):
            Wj = W[j]
            for i in range(m):
                WAW[i] = Wj @ (A[i, j] @ Wj)
            for i in range(m):
                for k in range(i, m):
                    acc = 0.0
                    for a in range(n):
                        for b in range(n):
                            acc += (A[i, j, a, b] * WAW[k, b, a]).real
                    M[i, k] += acc
        for i in range(m):
            for k in range(i):
                M[i, k] = M[k, i]
        return M


def schur_group(A: np.ndarray, W: np.ndarray) -> np.ndarray:
    return _schur_group_numpy(A, W)


def backend_name() -> str:
    """Which kernel path is active ("numba" or "numpy")."""
    return "numba" if HAS_NUMBA else "numpy"
