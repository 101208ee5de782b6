from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import linalg as sla

from specdiag.construct_finite import projection_from_diagonal, unitary_from_diagonal
from specdiag.errors import DimensionMismatch, NotUnitary, PatternMismatch
from specdiag.oracle import haar_orthogonal
from specdiag.verify import (
    Verdict,
    certify_tight_strong,
    certify_tight_strong_batch,
    certify_tight_unitary,
    certify_trace_equality,
    certify_trace_equality_batch,
    check_2x2_lemmas,
    hermitian_eigen_batch,
    jacobi_svd,
    jacobi_svd_batch,
    singular_values,
    symmetric_eigen,
    verify_construction,
)


def test_jacobi_svd_diag():
    _, sig, _ = jacobi_svd(np.diag([1.0, 3.0]))
    assert np.allclose(sig, [3, 1])


def test_jacobi_svd_planted():
    s = np.array([5.0, 3.0, 1.0, 0.5, 1e-3, 0.0])
    U = haar_orthogonal(6, 3, 0).data
    V = haar_orthogonal(6, 3, 1).data
    A = U @ np.diag(s) @ V
    Uj, sig, Vj = jacobi_svd(A)
    assert np.allclose(sig, s, atol=1e-10)
    assert np.allclose(Uj @ np.diag(sig) @ Vj.conj().T, A, atol=1e-12)
    assert np.allclose(Uj.T @ Uj, np.eye(6), atol=1e-12)


def test_jacobi_svd_wide_and_complex():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(3, 5)) + 1j * rng.normal(size=(3, 5))
    assert np.allclose(singular_values(A), sla.svdvals(A), atol=1e-12)


def test_symmetric_eigen_examples():
    _, w = symmetric_eigen(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(w, [3, 1])
    _, w = symmetric_eigen(np.diag([0.5, 2.0, -1.0]))
    assert np.allclose(w, [2, 0.5, -1])
    _, w = symmetric_eigen(projection_from_diagonal([0.5, 0.5, 1.0]))
    assert np.allclose(w, [1, 1, 0], atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 7), st.integers(1, 7), st.integers(0, 2**31 - 1))
def test_jacobi_matches_lapack(m, n, seed):
    A = np.random.default_rng(seed).normal(size=(m, n))
    assert np.allclose(singular_values(A), sla.svdvals(A), atol=1e-12 * max(1, np.abs(A).max()) * 10)


def test_batched_eigen_matches_lapack():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(200, 5, 5)) + 1j * rng.normal(size=(200, 5, 5))
    H = X + np.conj(np.swapaxes(X, -1, -2))
    Q, w = hermitian_eigen_batch(H)
    assert np.allclose(w, np.linalg.eigvalsh(H)[:, ::-1], atol=1e-10)
    _, sig, _ = jacobi_svd_batch(X)
    assert np.allclose(sig, np.linalg.svd(X, compute_uv=False), atol=1e-10)


def test_verify_construction():
    rep = verify_construction(np.eye(3), np.ones(3), np.ones(3))
    assert rep.passed and rep.to_dict()["pass"]
    rep = verify_construction(np.diag([2.0, 1.0]), [2.0, 1.0], [2.0, 1.5])
    assert not rep.passed and rep.sv_residual == pytest.approx(0.25)
    with pytest.raises(DimensionMismatch):
        verify_construction(np.eye(2), [1.0, 1.0, 1.0])
    P = projection_from_diagonal([0.5, 0.5, 1.0])
    rep = verify_construction(P, [0.5, 0.5, 1.0], aux=("symmetry", "idempotency"))
    assert rep.passed


def test_trace_certifier_examples():
    cert = certify_trace_equality(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert cert.hypothesis_gap == pytest.approx(1.0) and cert.verdict is Verdict.HYPOTHESIS_FAILS
    B = np.array([[2.0, 1.0], [1.0, 1.0]])
    cert = certify_trace_equality(1j * B)
    assert cert.verdict is Verdict.VERIFIED
    assert np.isclose(cert.extracted, -1j)


def test_tight_strong_examples():
    cert = certify_tight_strong(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    # the total gap is 2; only its sign matters for the verdict
    assert cert.hypothesis_gap == pytest.approx(2.0) and cert.verdict is Verdict.HYPOTHESIS_FAILS
    rng = np.random.default_rng(2)
    X = rng.normal(size=(300, 4, 4))
    psd = X @ np.swapaxes(X, -1, -2)
    certs = certify_tight_strong_batch(psd)
    assert all(c.verdict is Verdict.VERIFIED for c in certs)
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(300, 4)))
    certs = certify_tight_strong_batch(phases[:, :, None] * psd)
    assert all(c.verdict is Verdict.VERIFIED for c in certs)


def test_tight_unitary_examples():
    cert = certify_tight_unitary(np.diag([-1.0, 1.0, 1.0]))
    assert cert.hypothesis_gap == 0.0 and cert.verdict is Verdict.VERIFIED
    with pytest.raises(PatternMismatch):
        certify_tight_unitary(2 * np.full((2, 2), 0.5) - np.eye(2))
    with pytest.raises(NotUnitary):
        certify_tight_unitary(np.diag([-1.0, 2.0]))


def test_tight_unitary_negative_control():
    # feasible but not tight: defects sum to 2.0 against 2 * 0.8 = 1.6
    U = unitary_from_diagonal([-0.2, 0.3, 0.5]).matrix.data
    cert = certify_tight_unitary(U)
    assert cert.verdict is Verdict.HYPOTHESIS_FAILS


def test_2x2_examples():
    cert = check_2x2_lemmas(np.array([[1.0, 0.5], [0.5, 1.0]]))
    assert cert.hypothesis_gap == pytest.approx(0.0, abs=1e-14) and cert.verdict is Verdict.VERIFIED
    cert = check_2x2_lemmas(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert cert.hypothesis_gap == pytest.approx(1.0) and cert.verdict is Verdict.HYPOTHESIS_FAILS
    for b in (0.3, 1.0, 2.5):
        cert = check_2x2_lemmas(np.array([[1.0, b], [b, -1.0]]))
        assert cert.verdict is Verdict.VERIFIED
    with pytest.raises(PatternMismatch):
        check_2x2_lemmas(np.array([[1j, 0.0], [0.0, 1.0]]))


def test_random_matrices_never_violate():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(2000, 3, 3)) + 1j * rng.normal(size=(2000, 3, 3))
    for certs in (certify_trace_equality_batch(X), certify_tight_strong_batch(X)):
        assert not any(c.verdict is Verdict.VIOLATION for c in certs)
