"""Dense complex linear algebra for small bipartite operators.

All matrices are plain ``numpy.ndarray`` with dtype complex128.  The global
basis convention for two qubits is |00>, |01>, |10>, |11> (row-major kron).
Eigendecompositions run on a cyclic-Jacobi kernel (see ``_accel``); numpy's
``eigh``/``svd`` appear only as oracles in the test suite.
"""
from __future__ import annotations

import numpy as np

from ._accel import jacobi_eigh
from .errors import ValidationError

HERM_TOL = 1e-12
PSD_TOL = -1e-10


def complex_matrix(A, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Coerce to a complex128 matrix, optionally checking the shape."""
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim != 2:
        raise ValidationError(f"expected a matrix, got ndim={M.ndim}")
    if shape is not None and M.shape != shape:
        raise ValidationError(f"expected shape {shape}, got {M.shape}")
    return M


def hermitize(A, tol: float = HERM_TOL) -> np.ndarray:
    """Return (A + A^dag)/2 if A is Hermitian within tol, else raise.

    The asymmetry bound is relative: max|A - A^dag| <= tol * max(1, max|A|).
    """
    M = complex_matrix(A)
    if M.shape[0] != M.shape[1]:
        raise ValidationError(f"hermitian matrix must be square, got {M.shape}")
    gap = np.abs(M - M.conj().T).max() if M.size else 0.0
    scale = max(1.0, np.abs(M).max()) if M.size else 1.0
    if gap > tol * scale:
        raise ValidationError(
            f"matrix is not Hermitian: max asymmetry {gap:.3e} exceeds "
            f"{tol:.1e} * {scale:.3e}")
    return 0.5 * (M + M.conj().T)


def density_matrix(A, trace_tol: float = 1e-10, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, PSD within psd_tol."""
    M = hermitize(A)
    tr = M.trace().real
    if abs(tr - 1.0) > trace_tol:
        raise ValidationError(f"trace {tr!r} differs from 1 by more than {trace_tol:.1e}")
    lo = min_eig(M)
    if lo < psd_tol:
        raise ValidationError(f"matrix has negative eigenvalue {lo:.3e} below {psd_tol:.1e}")
    return M


def _real_embedding(H: np.ndarray) -> np.ndarray:
    X = H.real
    Y = H.imag
    return np.block([[X, -Y], [Y, X]])


def eig_hermitian(H, tol: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix via cyclic Jacobi.

    The matrix is embedded as a real symmetric matrix of twice the size,
    diagonalized by Jacobi rotations, and the doubled spectrum is folded
    back to complex eigenpairs.

    Parameters
    ----------
    H : array_like
        Hermitian matrix (validated; hermitized within ``HERM_TOL``).
    tol : float
        Relative off-diagonal target for the Jacobi sweeps.

    Returns
    -------
    w : ndarray
        Eigenvalues in ascending order.
    V : ndarray
        Unitary matrix whose columns are the matching eigenvectors, so
        ``H = V @ diag(w) @ V.conj().T``.
    """
    M = hermitize(H)
    n = M.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=np.complex128)
    d, VR, _ = jacobi_eigh(_real_embedding(M), tol)
    order = np.argsort(d, kind="stable")
    d = d[order]
    VR = VR[:, order]
    scale = max(1.0, float(np.abs(d).max()))
    ctol = 1e-8 * scale

    vals = []
    vecs = []
    i = 0
    while i < 2 * n:
        j = i
        while j + 1 < 2 * n and d[j + 1] - d[j] <= ctol:
            j += 1
        count = j - i + 1
        keep = count // 2
        cand = [VR[:n, t] + 1j * VR[n:, t] for t in range(i, j + 1)]
        picked: list[np.ndarray] = []
        for _ in range(keep):
            best = None
            best_norm = -1.0
            for u in cand:
                r = u.copy()
                for p in picked:
                    r -= (p.conj() @ r) * p
                nr = float(np.linalg.norm(r))
                if nr > best_norm:
                    best_norm = nr
                    best = r / nr if nr > 0 else None
            if best is None:
                raise ValidationError("eigenvector extraction failed (degenerate cluster)")
            picked.append(best)
        for u in picked:
            lam = float((u.conj() @ (M @ u)).real)
            vals.append(lam)
            vecs.append(u)
        i = j + 1
    if len(vals) != n:
        raise ValidationError("eigenvector extraction failed (pair mismatch)")
    order2 = np.argsort(np.asarray(vals), kind="stable")
    w = np.asarray(vals)[order2]
    V = np.stack([vecs[k] for k in order2], axis=1)
    # deterministic phases: largest-magnitude component real and positive
    for k in range(n):
        idx = int(np.argmax(np.abs(V[:, k])))
        ph = V[idx, k]
        if abs(ph) > 0:
            V[:, k] *= ph.conj() / abs(ph)
    return w, V


def eigvals_hermitian(H, tol: float = 1e-14) -> np.ndarray:
    """Eigenvalues only, ascending (cheaper: no eigenvector extraction)."""
    M = hermitize(H)
    n = M.shape[0]
    if n == 0:
        return np.zeros(0)
    d, _, _ = jacobi_eigh(_real_embedding(M), tol)
    d = np.sort(d)
    return d[::2].copy()


def min_eig(H) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    M = hermitize(H)
    if M.shape[0] == 0:
        return 0.0
    d, _, _ = jacobi_eigh(_real_embedding(M), 1e-14)
    return float(d.min())


def is_psd(H, tol: float = PSD_TOL) -> bool:
    """True when the smallest eigenvalue is >= tol (tol is negative)."""
    return min_eig(H) >= tol


def _complete_basis(cols: list[np.ndarray], dim: int) -> list[np.ndarray]:
    """Extend orthonormal columns to a full orthonormal basis of C^dim."""
    out = [c.copy() for c in cols]
    for k in range(dim):
        e = np.zeros(dim, dtype=np.complex128)
        e[k] = 1.0
        for c in out:
            e -= (c.conj() @ e) * c
        nr = float(np.linalg.norm(e))
        if nr > 1e-8:
            out.append(e / nr)
        if len(out) == dim:
            break
    if len(out) != dim:
        raise ValidationError("orthonormal completion failed")
    return out


def svd(M) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Singular value decomposition of a d x 2 matrix (d >= 1).

    Returns (U, D, V) with U (d x d) and V (2 x 2) unitary and D (d x 2)
    diagonal with nonnegative entries in descending order, such that
    ``U @ D @ V.conj().T == M``.  Built from the closed-form
    eigendecomposition of the 2x2 Gram matrix plus orthonormal completion.
    """
    A = complex_matrix(M)
    d, two = A.shape
    if two != 2 or d < 1:
        raise ValidationError(f"svd expects a d x 2 matrix with d >= 1, got {A.shape}")
    G = A.conj().T @ A  # 2x2 Hermitian PSD
    a = G[0, 0].real
    c = G[1, 1].real
    b = G[0, 1]
    half = 0.5 * (a - c)
    disc = np.sqrt(half * half + (b * b.conj()).real)
    lam_hi = 0.5 * (a + c) + disc
    if abs(b) <= 1e-300:
        v1 = np.array([1.0, 0.0], dtype=np.complex128)
        if c > a:
            v1 = np.array([0.0, 1.0], dtype=np.complex128)
    else:
        if a >= c:
            v1 = np.array([lam_hi - c, b.conj()], dtype=np.complex128)
        else:
            v1 = np.array([b, lam_hi - a], dtype=np.complex128)
        v1 /= np.linalg.norm(v1)
    v2 = np.array([-v1[1].conj(), v1[0].conj()], dtype=np.complex128)
    # singular values from direct column norms: the Gram eigenvalues lose
    # sqrt(eps) accuracy for the small value, the norms do not
    w1 = A @ v1
    w2 = A @ v2
    s1 = float(np.linalg.norm(w1))
    s2 = float(np.linalg.norm(w2))
    if s2 > s1:
        v1, v2 = v2, -v1
        w1, w2 = w2, -w1
        s1, s2 = s2, s1

    ucols: list[np.ndarray] = []
    if s1 > 1e-300:
        u1 = w1 / s1
        u1 /= np.linalg.norm(u1)
        ucols.append(u1)
        if d >= 2:
            r2 = w2 - (u1.conj() @ w2) * u1
            s2 = float(np.linalg.norm(r2))
            if s2 > 1e-300:
                ucols.append(r2 / s2)
    else:
        s2 = 0.0
    U = np.stack(_complete_basis(ucols, d), axis=1)
    D = np.zeros((d, 2))
    D[0, 0] = s1
    if d >= 2:
        D[1, 1] = s2
    V = np.stack([v1, v2], axis=1)
    # phase convention: first significant component of each V column real positive
    for k in range(2):
        idx = int(np.argmax(np.abs(V[:, k])))
        ph = V[idx, k]
        if abs(ph) > 0:
            phase = ph.conj() / abs(ph)
            V[:, k] *= phase
            if k < len(ucols):
                # keep u_k v_k^dag invariant under the phase change
                U[:, k] *= phase
    return U, D, V


def tensor(*ops) -> np.ndarray:
    """Kronecker product of one or more operators, left to right."""
    if not ops:
        raise ValidationError("tensor needs at least one operator")
    out = complex_matrix(ops[0])
    for op in ops[1:]:
        out = np.kron(out, complex_matrix(op))
    return out


def _check_dims(M: np.ndarray, dims: tuple[int, int]) -> None:
    dA, dB = dims
    if dA < 1 or dB < 1 or M.shape != (dA * dB, dA * dB):
        raise ValidationError(
            f"dims {dims} incompatible with matrix of shape {M.shape}")


def partial_trace(M, dims: tuple[int, int], trace_out: int) -> np.ndarray:
    """Trace out subsystem 0 (first factor) or 1 (second) of a bipartite operator."""
    A = complex_matrix(M)
    _check_dims(A, dims)
    dA, dB = dims
    R = A.reshape(dA, dB, dA, dB)
    if trace_out == 0:
        return np.trace(R, axis1=0, axis2=2)
    if trace_out == 1:
        return np.trace(R, axis1=1, axis2=3)
    raise ValidationError(f"trace_out must be 0 or 1, got {trace_out}")


def partial_transpose(M, dims: tuple[int, int], subsystem: int = 1) -> np.ndarray:
    """Transpose one tensor factor of a bipartite operator."""
    A = complex_matrix(M)
    _check_dims(A, dims)
    dA, dB = dims
    R = A.reshape(dA, dB, dA, dB)
    if subsystem == 0:
        R = R.transpose(2, 1, 0, 3)
    elif subsystem == 1:
        R = R.transpose(0, 3, 2, 1)
    else:
        raise ValidationError(f"subsystem must be 0 or 1, got {subsystem}")
    return R.reshape(dA * dB, dA * dB).copy()
