"""Tests for the dense linear-algebra layer.

Reference results come from numpy.linalg (eigh/svd), which is independent of
the Jacobi / Gram-based routines under test, plus a few hand-derived frozen
matrices for the tensor-product helpers.
"""
from __future__ import annotations

import numpy as np
import pytest

from lhscert import _accel
from lhscert import linalg as L
from lhscert.errors import ValidationError


# ---------------------------------------------------------------------------
# input validation


def test_complex_matrix_shape_check():
    M = L.complex_matrix([[1, 0], [0, 1]], shape=(2, 2))
    assert M.dtype == np.complex128
    with pytest.raises(ValidationError):
        L.complex_matrix([[1, 0], [0, 1]], shape=(4, 4))
    with pytest.raises(ValidationError):
        L.complex_matrix([1, 2, 3], shape=(2, 2))


def test_hermitize_accepts_hermitian_and_rejects_skew():
    H = np.array([[1.0, 2.0 + 1j], [2.0 - 1j, -3.0]])
    out = L.hermitize(H)
    assert np.allclose(out, H)
    with pytest.raises(ValidationError):
        L.hermitize(np.array([[0.0, 1.0], [-1.0, 0.0]]))


def test_density_matrix_validation():
    rho = np.eye(2) / 2
    out = L.density_matrix(rho)
    assert np.allclose(out, rho)
    with pytest.raises(ValidationError):
        L.density_matrix(np.eye(2))  # trace 2
    with pytest.raises(ValidationError):
        L.density_matrix(np.diag([1.5, -0.5]))  # negative eigenvalue


# ---------------------------------------------------------------------------
# Hermitian eigendecomposition (Jacobi on the real embedding)


def test_eig_hermitian_matches_numpy():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(40):
        d = int(rng.integers(2, 9))
        X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        H = (X + X.conj().T) / 2
        w, V = L.eig_hermitian(H)
        assert np.all(np.diff(w) >= -1e-13)
        worst = max(
            worst,
            float(np.max(np.abs(V @ np.diag(w) @ V.conj().T - H))),
            float(np.max(np.abs(V.conj().T @ V - np.eye(d)))),
            float(np.max(np.abs(w - np.linalg.eigvalsh(H)))),
        )
    assert worst < 1e-11


def test_eig_hermitian_degenerate_spectra():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    Q, _ = np.linalg.qr(X)
    for diag in ([1.0, 1.0, 1.0, 2.0], [0.25, 0.25, 0.25, 0.25], [0.0, 0.0, 1.0, 1.0]):
        H = Q @ np.diag(diag) @ Q.conj().T
        H = (H + H.conj().T) / 2
        w, V = L.eig_hermitian(H)
        assert np.allclose(np.sort(w), np.sort(diag), atol=1e-12)
        assert np.max(np.abs(V @ np.diag(w) @ V.conj().T - H)) < 1e-12
        assert np.max(np.abs(V.conj().T @ V - np.eye(4))) < 1e-12


def test_eig_hermitian_real_symmetric_and_diagonal():
    w, V = L.eig_hermitian(np.diag([3.0, -1.0, 2.0]))
    assert np.allclose(w, [-1.0, 2.0, 3.0])
    assert np.max(np.abs(V @ np.diag(w) @ V.conj().T - np.diag([3.0, -1.0, 2.0]))) < 1e-14


def test_min_eig_and_is_psd():
    assert L.is_psd(np.eye(3))
    assert not L.is_psd(np.diag([1.0, -1e-6]))
    # tiny negative within tolerance still counts as PSD
    assert L.is_psd(np.diag([1.0, -1e-12]), tol=-1e-10)
    assert abs(L.min_eig(np.diag([4.0, -2.0, 7.0])) + 2.0) < 1e-13


# ---------------------------------------------------------------------------
# thin SVD for d x 2 matrices


def test_svd_matches_numpy_random():
    rng = np.random.default_rng(7)
    worst = 0.0
    for k in range(120):
        d = int(rng.integers(1, 5))
        M = rng.normal(size=(d, 2)) + 1j * rng.normal(size=(d, 2))
        if k % 7 == 0:
            M[:, 1] = M[:, 0] * (1.1 + 0.3j)  # exactly rank deficient
        if k % 11 == 0:
            M[:, 1] = 0.0
        U, D, V = L.svd(M)
        assert U.shape == (d, d) and D.shape == (d, 2) and V.shape == (2, 2)
        sv = np.linalg.svd(M, compute_uv=False)
        mine = np.array([D[0, 0], D[1, 1] if d >= 2 else 0.0])
        ref = np.array([sv[0], sv[1] if len(sv) >= 2 else 0.0])
        worst = max(
            worst,
            float(np.max(np.abs(U @ D @ V.conj().T - M))),
            float(np.max(np.abs(mine - ref))),
            float(np.max(np.abs(U.conj().T @ U - np.eye(d)))),
            float(np.max(np.abs(V.conj().T @ V - np.eye(2)))),
        )
    assert worst < 1e-11


def test_svd_descending_and_nonnegative():
    rng = np.random.default_rng(3)
    for _ in range(20):
        M = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
        _, D, _ = L.svd(M)
        assert D[0, 0] >= D[1, 1] >= 0.0


def test_svd_degenerate_inputs():
    for M in (np.zeros((3, 2)), np.eye(2), np.array([[2.0, 0.0]]), np.array([[0.0, 5.0]])):
        Mc = np.asarray(M, dtype=complex)
        U, D, V = L.svd(Mc)
        assert np.max(np.abs(U @ D @ V.conj().T - Mc)) < 1e-13


# ---------------------------------------------------------------------------
# tensor helpers


def test_tensor_matches_kron():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    B = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    C = rng.normal(size=(2, 2))
    assert np.allclose(L.tensor(A, B), np.kron(A, B))
    assert np.allclose(L.tensor(A, B, C), np.kron(np.kron(A, B), C))


def test_partial_trace_of_product():
    rng = np.random.default_rng(9)
    A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    B = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    M = np.kron(A, B)
    assert np.allclose(L.partial_trace(M, (2, 3), 1), np.trace(B) * A)
    assert np.allclose(L.partial_trace(M, (2, 3), 0), np.trace(A) * B)


def test_partial_trace_frozen_integer_case():
    # 4x4 with entries 1..16 viewed as a (2,2) bipartite operator:
    # blocks B_ij = M[2i:2i+2, 2j:2j+2]; trace over subsystem 1 leaves
    # [[tr B00, tr B01], [tr B10, tr B11]] = [[1+6, 3+8], [9+14, 11+16]].
    M = np.arange(1, 17, dtype=float).reshape(4, 4)
    out = L.partial_trace(M, (2, 2), 1)
    assert np.allclose(out, [[7.0, 11.0], [23.0, 27.0]])
    # trace over subsystem 0 sums the diagonal blocks.
    out0 = L.partial_trace(M, (2, 2), 0)
    assert np.allclose(out0, [[1.0 + 11.0, 2.0 + 12.0], [5.0 + 15.0, 6.0 + 16.0]])


def test_partial_transpose_frozen_integer_case():
    # transposing the second factor transposes each 2x2 block in place
    M = np.arange(1, 17, dtype=float).reshape(4, 4)
    expect = np.array(
        [
            [1.0, 5.0, 3.0, 7.0],
            [2.0, 6.0, 4.0, 8.0],
            [9.0, 13.0, 11.0, 15.0],
            [10.0, 14.0, 12.0, 16.0],
        ]
    )
    assert np.allclose(L.partial_transpose(M, (2, 2), 1), expect)
    # transposing both factors equals the full transpose
    both = L.partial_transpose(L.partial_transpose(M, (2, 2), 1), (2, 2), 0)
    assert np.allclose(both, M.T)


def test_partial_transpose_involution_and_trace():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    H = (X + X.conj().T) / 2
    PT = L.partial_transpose(H, (2, 2), 1)
    assert np.allclose(L.partial_transpose(PT, (2, 2), 1), H)
    assert abs(np.trace(PT) - np.trace(H)) < 1e-13
    # partial transpose of a Hermitian matrix stays Hermitian
    assert np.max(np.abs(PT - PT.conj().T)) < 1e-13


def test_partial_transpose_spectrum_of_maximally_entangled_state():
    # |phi><phi| with |phi> = (|00> + |11>)/sqrt(2); its partial transpose is
    # half the swap operator, so the spectrum is (-1/2, 1/2, 1/2, 1/2).
    phi = np.zeros(4, dtype=complex)
    phi[0] = phi[3] = 1.0 / np.sqrt(2.0)
    P = np.outer(phi, phi.conj())
    w = L.eigvals_hermitian(L.partial_transpose(P, (2, 2), 1))
    assert np.allclose(w, [-0.5, 0.5, 0.5, 0.5], atol=1e-12)


# ---------------------------------------------------------------------------
# kernel backends


def test_jacobi_backends_agree():
    rng = np.random.default_rng(21)
    E = rng.normal(size=(8, 8))
    E = E + E.T
    d_pub, V_pub, _ = _accel.jacobi_eigh(E.copy())
    d_ref, V_ref, _ = _accel._jacobi_numpy(E.copy(), 1e-14, 60)
    assert np.allclose(np.sort(d_pub), np.sort(d_ref), atol=1e-12)
    rec_pub = V_pub @ np.diag(d_pub) @ V_pub.T
    rec_ref = V_ref @ np.diag(d_ref) @ V_ref.T
    assert np.max(np.abs(rec_pub - E)) < 1e-12
    assert np.max(np.abs(rec_ref - E)) < 1e-12


def test_eigh2_batch_matches_numpy():
    rng = np.random.default_rng(13)
    H = rng.normal(size=(64, 2, 2)) + 1j * rng.normal(size=(64, 2, 2))
    H = (H + H.conj().transpose(0, 2, 1)) / 2
    w, V = _accel.eigh2_batch(H)
    assert np.all(w[:, 0] <= w[:, 1] + 1e-14)
    for i in range(64):
        assert np.allclose(np.sort(w[i]), np.linalg.eigvalsh(H[i]), atol=1e-12)
        rec = V[i] @ np.diag(w[i]) @ V[i].conj().T
        assert np.max(np.abs(rec - H[i])) < 1e-12


def test_schur_block_matches_einsum():
    rng = np.random.default_rng(17)
    A = rng.normal(size=(9, 6, 6)) + 1j * rng.normal(size=(9, 6, 6))
    A = (A + A.conj().transpose(0, 2, 1)) / 2
    Wm = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    Wm = Wm @ Wm.conj().T + np.eye(6)
    M = _accel.schur_block(A, Wm)
    ref = np.array(
        [[np.trace(A[i] @ Wm @ A[j] @ Wm).real for j in range(9)] for i in range(9)]
    )
    assert np.max(np.abs(M - ref)) < 1e-10
    assert np.max(np.abs(M - M.T)) < 1e-10


def test_schur_group_matches_per_block_traces():
    rng = np.random.default_rng(23)
    m, nb, n = 7, 5, 3
    A = rng.normal(size=(m, nb, n, n)) + 1j * rng.normal(size=(m, nb, n, n))
    A = (A + A.conj().transpose(0, 1, 3, 2)) / 2
    W = rng.normal(size=(nb, n, n)) + 1j * rng.normal(size=(nb, n, n))
    W = W @ W.conj().transpose(0, 2, 1) + np.eye(n)
    M = _accel.schur_group(A, W)
    ref = np.zeros((m, m))
    for i in range(m):
        for k in range(m):
            for j in range(nb):
                ref[i, k] += np.trace(A[i, j] @ W[j] @ A[k, j] @ W[j]).real
    assert np.max(np.abs(M - ref)) < 1e-10
    assert np.max(np.abs(M - M.T)) < 1e-10
    assert np.max(np.abs(_accel._schur_group_numpy(A, W) - ref)) < 1e-10


def test_backend_name_reports_mode():
    assert _accel.backend_name() in ("numba", "numpy")
