"""Independent numerical checks: Jacobi SVD/eigensolvers and extremal-case certifiers.

Nothing here calls LAPACK decompositions for the quantities it certifies;
the Jacobi solvers below operate on stacks of matrices at once so that
large random sweeps stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .dense import DenseMatrix, as_array
from .errors import DimensionMismatch, NoConvergence, NotUnitary, PatternMismatch

EPS = np.finfo(float).eps
MAX_SWEEPS = 60


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Disjoint index pairs covering every pair once per sweep (circle method)."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < n and b < n]
        if pairs:
            I, J = zip(*pairs)
            rounds.append((np.array(I), np.array(J)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _rotation(alpha, beta, gamma, thresh):
    """Jacobi rotation zeroing the (complex) coupling ``gamma``.

    Returns ``c, s, w`` with ``w`` the unit phase of gamma; pairs whose
    coupling is already below ``thresh`` get the identity.
    """
    g = np.abs(gamma)
    active = g > thresh
    safe_g = np.where(active, g, 1.0)
    w = np.where(active, gamma / safe_g, 1.0)
    zeta = (beta - alpha) / (2.0 * safe_g)
    t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
    c = 1.0 / np.hypot(1.0, t)
    s = c * t
    c = np.where(active, c, 1.0)
    s = np.where(active, s, 0.0)
    return c, s, w, active


def jacobi_svd_batch(A: np.ndarray, tol: float = EPS) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One-sided Jacobi SVD of a stack ``(..., m, n)``.

    Returns ``U (..., m, k)``, ``sigma (..., k)`` nonincreasing and
    ``V (..., n, k)`` with ``k = min(m, n)`` and ``A = U diag(sigma) V^H``.
    Square inputs give unitary ``U`` and ``V``.
    """
    A = np.asarray(A)
    if A.shape[-2] < A.shape[-1]:
        U, s, V = jacobi_svd_batch(np.conj(np.swapaxes(A, -1, -2)), tol)
        return V, s, U
    lead = A.shape[:-2]
    m, n = A.shape[-2:]
    cplx = np.iscomplexobj(A)
    dtype = complex if cplx else float
    X = np.array(A, dtype=dtype).reshape((-1, m, n))
    B = X.shape[0]
    V = np.broadcast_to(np.eye(n, dtype=dtype), (B, n, n)).copy()
    rounds = _round_robin(n)
    converged = n < 2
    thresh = tol * max(m, 2)
    for _ in range(MAX_SWEEPS):
        if converged:
            break
        worst = 0.0
        for I, J in rounds:
            ai, aj = X[:, :, I], X[:, :, J]
            alpha = np.sum(np.abs(ai) ** 2, axis=1)
            beta = np.sum(np.abs(aj) ** 2, axis=1)
            gamma = np.sum(np.conj(ai) * aj, axis=1)
            scale = np.sqrt(alpha * beta)
            rel = np.abs(gamma) / np.where(scale > 0, scale, 1.0)
            worst = max(worst, float(rel.max()) if rel.size else 0.0)
            c, s, w, _ = _rotation(alpha, beta, gamma, thresh * scale)
            if not cplx:
                w = w.real
            wc = np.conj(w)
            c3, s3, wc3 = c[:, None, :], s[:, None, :], wc[:, None, :]
            X[:, :, I], X[:, :, J] = c3 * ai - s3 * wc3 * aj, s3 * ai + c3 * wc3 * aj
            vi, vj = V[:, :, I], V[:, :, J]
            V[:, :, I], V[:, :, J] = c3 * vi - s3 * wc3 * vj, s3 * vi + c3 * wc3 * vj
        converged = worst <= thresh
    if not converged:
        raise NoConvergence(f"one-sided Jacobi did not converge in {MAX_SWEEPS} sweeps")
    sigma = np.sqrt(np.sum(np.abs(X) ** 2, axis=1))
    order = np.argsort(-sigma, axis=1, kind="stable")
    sigma = np.take_along_axis(sigma, order, axis=1)
    X = np.take_along_axis(X, order[:, None, :], axis=2)
    V = np.take_along_axis(V, order[:, None, :], axis=2)
    top = sigma[:, :1]
    tiny = sigma <= np.maximum(top, np.finfo(float).tiny) * EPS * max(m, n)
    U = X / np.where(tiny, 1.0, sigma)[:, None, :]
    if np.any(tiny):
        U = _complete_columns(U, tiny)
    return U.reshape(lead + (m, n)), sigma.reshape(lead + (n,)), V.reshape(lead + (n, n))


def _complete_columns(U: np.ndarray, tiny: np.ndarray) -> np.ndarray:
    """Replace numerically null columns so that the nonnull ones extend to an orthonormal set."""
    out = U.copy()
    m, n = U.shape[1:]
    for b in np.flatnonzero(tiny.any(axis=1)):
        keep = ~tiny[b]
        Q, _ = np.linalg.qr(np.concatenate([U[b][:, keep], np.eye(m, dtype=U.dtype)], axis=1))
        fill = Q[:, keep.sum() : keep.sum() + (~keep).sum()]
        out[b][:, ~keep] = fill
    return out


def jacobi_svd(A, tol: float = EPS) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SVD ``A = U diag(sigma) V^H`` of a single matrix by one-sided Jacobi."""
    a = as_array(A)
    if a.size == 0:
        return np.zeros((a.shape[0], 0)), np.zeros(0), np.zeros((a.shape[1], 0))
    return jacobi_svd_batch(a, tol)


def singular_values(A, tol: float = EPS) -> np.ndarray:
    return jacobi_svd(A, tol)[1]


def hermitian_eigen_batch(A: np.ndarray, tol: float = EPS) -> tuple[np.ndarray, np.ndarray]:
    """Two-sided cyclic Jacobi for a stack of Hermitian matrices.

    Returns ``(Q, w)`` with ``A = Q diag(w) Q^H`` and ``w`` nonincreasing.
    """
    A = np.asarray(A)
    lead = A.shape[:-2]
    n = A.shape[-1]
    cplx = np.iscomplexobj(A)
    dtype = complex if cplx else float
    X = np.array(A, dtype=dtype).reshape((-1, n, n))
    X = (X + np.conj(np.swapaxes(X, -1, -2))) / 2.0
    B = X.shape[0]
    Q = np.broadcast_to(np.eye(n, dtype=dtype), (B, n, n)).copy()
    rounds = _round_robin(n)
    norm = np.sqrt(np.sum(np.abs(X) ** 2, axis=(1, 2)))
    floor = np.where(norm > 0, norm, 1.0)
    offmask = 1.0 - np.eye(n)
    for _ in range(MAX_SWEEPS):
        off = np.sqrt(np.sum(np.abs(X * offmask) ** 2, axis=(1, 2)))
        if np.all(off <= tol * floor * n):
            break
        for I, J in rounds:
            app = X[:, I, I].real
            aqq = X[:, J, J].real
            apq = X[:, I, J]
            # tau = (a_qq - a_pp) / (2 |a_pq|); reuse the one-sided formula
            c, s, w, _ = _rotation(app, aqq, apq, tol * floor[:, None] * 1e-3)
            if not cplx:
                w = w.real
            wc = np.conj(w)
            c3, s3, wc3 = c[:, None, :], s[:, None, :], wc[:, None, :]
            ci, cj = X[:, :, I], X[:, :, J]
            X[:, :, I], X[:, :, J] = c3 * ci - s3 * wc3 * cj, s3 * ci + c3 * wc3 * cj
            ri, rj = X[:, I, :], X[:, J, :]
            cr, sr, wr = c[:, :, None], s[:, :, None], w[:, :, None]
            X[:, I, :], X[:, J, :] = cr * ri - sr * wr * rj, sr * ri + cr * wr * rj
            qi, qj = Q[:, :, I], Q[:, :, J]
            Q[:, :, I], Q[:, :, J] = c3 * qi - s3 * wc3 * qj, s3 * qi + c3 * wc3 * qj
    else:
        raise NoConvergence(f"two-sided Jacobi did not converge in {MAX_SWEEPS} sweeps")
    w = np.diagonal(X, axis1=1, axis2=2).real.copy()
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    Q = np.take_along_axis(Q, order[:, None, :], axis=2)
    return Q.reshape(lead + (n, n)), w.reshape(lead + (n,))


def symmetric_eigen(A, tol: float = EPS) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a real symmetric or complex Hermitian matrix."""
    a = as_array(A)
    if a.size == 0:
        return np.zeros((0, 0)), np.zeros(0)
    return hermitian_eigen_batch(a, tol)


# ------------------------------------------------------------ round trips


@dataclass
class VerificationReport:
    diag_residual: float
    sv_residual: float | None
    aux_residuals: dict = field(default_factory=dict)
    passed: bool = True
    tolerances: dict = field(default_factory=dict)

    @property
    def pass_(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "diag_residual": self.diag_residual,
            "sv_residual": self.sv_residual,
            "aux_residuals": dict(self.aux_residuals),
            "pass": self.passed,
            "tolerances": dict(self.tolerances),
        }


AUX_CHECKS = ("orthogonality", "symmetry", "idempotency")


def verify_construction(
    A,
    d=None,
    s=None,
    tol: float = 1e-8,
    diag_tol: float = 1e-12,
    aux: tuple[str, ...] = (),
    aux_tol: float = 1e-10,
) -> VerificationReport:
    """Residuals of a witness against its requested diagonal and singular values.

    The diagonal is compared position by position.  Singular values are
    compared after sorting, relative to the largest requested one.
    """
    a = as_array(A)
    n = min(a.shape) if a.ndim == 2 else 0
    diag_res = 0.0
    if d is not None:
        d = np.asarray(d).ravel()
        if d.size != a.shape[0] or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"diagonal of length {d.size} for a {a.shape} matrix")
        diag_res = float(np.max(np.abs(np.diagonal(a) - d))) if d.size else 0.0
    sv_res = None
    if s is not None:
        s = np.sort(np.asarray(s, dtype=float).ravel())[::-1]
        if s.size != n:
            raise DimensionMismatch(f"{s.size} singular values for a {a.shape} matrix")
        sig = singular_values(a)
        sv_res = float(np.max(np.abs(sig - s)) / max(s[0], np.finfo(float).tiny)) if s.size else 0.0
        if s.size and s[0] == 0:
            sv_res = float(np.max(sig))
    residuals = {}
    for name in aux:
        if name == "orthogonality":
            residuals[name] = float(np.max(np.abs(np.conj(a.T) @ a - np.eye(a.shape[1])), initial=0.0))
        elif name == "symmetry":
            residuals[name] = float(np.max(np.abs(a - np.conj(a.T)), initial=0.0))
        elif name == "idempotency":
            residuals[name] = float(np.max(np.abs(a @ a - a), initial=0.0))
        else:
            raise ValueError(f"unknown auxiliary check {name!r}; choose from {AUX_CHECKS}")
    ok = diag_res <= diag_tol and (sv_res is None or sv_res <= tol) and all(v <= aux_tol for v in residuals.values())
    tols = {"diag": diag_tol, "sv": tol, "aux": aux_tol}
    return VerificationReport(diag_res, sv_res, residuals, bool(ok), tols)


# ------------------------------------------------------------ certifiers


class Theorem(str, Enum):
    TRACE = "TraceEquality_ThmPositive"
    TIGHT_STRONG = "TightStrong_UPositive"
    TIGHT_UNITARY = "TightUnitary_Selfadjoint"
    TWO_BY_TWO_TRACE = "TwoByTwoTrace"
    TWO_BY_TWO_SELFADJOINT = "TwoByTwoSelfadjoint"


class Verdict(str, Enum):
    HYPOTHESIS_FAILS = "HypothesisFails"
    VERIFIED = "HypothesisHoldsConclusionVerified"
    VIOLATION = "Violation"


@dataclass
class Certificate:
    theorem_tag: Theorem
    hypothesis_gap: float
    conclusion_residual: float | None
    extracted: object = None
    verdict: Verdict = Verdict.HYPOTHESIS_FAILS
    tolerances: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        ex = self.extracted
        if isinstance(ex, complex) or isinstance(ex, np.complexfloating):
            ex = [float(ex.real), float(ex.imag)]
        elif isinstance(ex, np.ndarray):
            ex = [[float(z.real), float(z.imag)] for z in ex.astype(complex)]
        return {
            "theorem": self.theorem_tag.value,
            "hypothesis_gap": float(self.hypothesis_gap),
            "conclusion_residual": None if self.conclusion_residual is None else float(self.conclusion_residual),
            "extracted": ex,
            "verdict": self.verdict.value,
            "tolerances": dict(self.tolerances),
        }


def _verdict(gap, hyp_thr, resid, concl_thr) -> np.ndarray:
    holds = np.atleast_1d(np.asarray(gap) <= hyp_thr)
    ok = np.atleast_1d(np.asarray(resid) <= concl_thr)
    out = np.empty(holds.shape, dtype=object)
    for i, (h, o) in enumerate(zip(holds, ok)):
        out[i] = Verdict.HYPOTHESIS_FAILS if not h else (Verdict.VERIFIED if o else Verdict.VIOLATION)
    return out


def conclusion_tolerance(tol: float) -> float:
    """Near-equality of size ``eps`` only forces the conclusion to ``O(sqrt(eps))``."""
    return 4.0 * float(np.sqrt(tol))


def _psd_residual_batch(M: np.ndarray) -> np.ndarray:
    """Distance-like measure of ``M`` from the positive semidefinite cone."""
    H = (M + np.conj(np.swapaxes(M, -1, -2))) / 2.0
    K = (M - np.conj(np.swapaxes(M, -1, -2))) / 2.0
    skew = np.sqrt(np.sum(np.abs(K) ** 2, axis=(-2, -1)))
    _, w = hermitian_eigen_batch(H)
    neg = np.maximum(0.0, -w[..., -1])
    return skew + neg


def certify_trace_equality_batch(As: np.ndarray, tol: float = 1e-10) -> list[Certificate]:
    """Equality ``|tr A| = tr|A|`` forces ``cA >= 0`` for a unimodular ``c``."""
    As = np.asarray(As)
    _, sig, _ = jacobi_svd_batch(As)
    tr = np.trace(As, axis1=-2, axis2=-1)
    trabs = sig.sum(axis=-1)
    gap = trabs - np.abs(tr)
    scale = np.maximum(1.0, trabs)
    c = np.where(np.abs(tr) > 0, np.conj(tr) / np.where(np.abs(tr) > 0, np.abs(tr), 1.0), 1.0)
    resid = _psd_residual_batch(c[:, None, None] * As)
    verdicts = _verdict(gap, tol * scale, resid, conclusion_tolerance(tol) * scale)
    tols = {"hypothesis": tol, "conclusion": conclusion_tolerance(tol)}
    return [
        Certificate(Theorem.TRACE, float(g), float(r), complex(cc), v, tols)
        for g, r, cc, v in zip(gap, resid, c, verdicts)
    ]


def certify_trace_equality(A, tol: float = 1e-10) -> Certificate:
    return certify_trace_equality_batch(as_array(A)[None], tol)[0]


def diagonal_phases(d: np.ndarray) -> np.ndarray:
    """Unit phases of ``d`` with phase 1 at zero entries."""
    mod = np.abs(d)
    return np.where(mod > 0, d / np.where(mod > 0, mod, 1.0), 1.0)


def certify_tight_strong_batch(As: np.ndarray, tol: float = 1e-10) -> list[Certificate]:
    """Zero final partial-sum gap between ``s(A)`` and ``|diag A|`` forces ``A = U B``.

    Here ``U`` is the diagonal unitary of the diagonal's phases and ``B`` is
    positive semidefinite.
    """
    As = np.asarray(As)
    _, sig, _ = jacobi_svd_batch(As)
    d = np.diagonal(As, axis1=-2, axis2=-1)
    gap = sig.sum(axis=-1) - np.abs(d).sum(axis=-1)
    scale = np.maximum(1.0, sig.sum(axis=-1))
    z = diagonal_phases(d)
    resid = _psd_residual_batch(np.conj(z)[:, :, None] * As)
    verdicts = _verdict(gap, tol * scale, resid, conclusion_tolerance(tol) * scale)
    tols = {"hypothesis": tol, "conclusion": conclusion_tolerance(tol)}
    return [
        Certificate(Theorem.TIGHT_STRONG, float(g), float(r), zz, v, tols)
        for g, r, zz, v in zip(gap, resid, z, verdicts)
    ]


def certify_tight_strong(A, tol: float = 1e-10) -> Certificate:
    return certify_tight_strong_batch(as_array(A)[None], tol)[0]


def certify_tight_unitary(U, tol: float = 1e-10, unitary_tol: float = 1e-8) -> Certificate:
    """Tight unitary-diagonal equality with one negative entry forces ``U = U^H``."""
    u = as_array(U)
    n = u.shape[0]
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionMismatch("certify_tight_unitary needs a square matrix")
    defect = float(np.max(np.abs(np.conj(u.T) @ u - np.eye(n)), initial=0.0))
    if defect > unitary_tol:
        raise NotUnitary(f"||U*U - I|| = {defect:.3e}")
    d = np.diagonal(u)
    if np.any(np.abs(np.imag(d)) > unitary_tol):
        raise PatternMismatch("diagonal is not real")
    d = np.real(d)
    neg = np.flatnonzero(d < 0)
    if neg.size != 1 or np.any(np.delete(d, neg) <= 0):
        raise PatternMismatch("diagonal must have exactly one negative entry and all others positive")
    gap = abs(2.0 * (1.0 - abs(d[neg[0]])) - float(np.sum(1.0 - np.abs(d))))
    resid = float(np.max(np.abs(u - np.conj(u.T)), initial=0.0))
    hyp_thr = tol * max(1, n)
    concl_thr = conclusion_tolerance(tol) * max(1, n)
    verdict = _verdict(np.array([gap]), hyp_thr, np.array([resid]), concl_thr)[0]
    tols = {"hypothesis": tol, "conclusion": conclusion_tolerance(tol)}
    return Certificate(Theorem.TIGHT_UNITARY, float(gap), resid, None, verdict, tols)


def check_2x2_lemmas_batch(As: np.ndarray, tol: float = 1e-10) -> list[Certificate | None]:
    """Both 2x2 lemmas over a stack; ``None`` where the diagonal fits neither pattern."""
    As = np.asarray(As)
    if As.shape[-2:] != (2, 2):
        raise DimensionMismatch("2x2 lemmas need 2x2 matrices")
    _, sig, _ = jacobi_svd_batch(As)
    d = np.diagonal(As, axis1=-2, axis2=-1)
    real = np.all(np.abs(np.imag(d)) <= tol * np.maximum(1.0, sig[:, :1]), axis=1)
    dr = np.real(d)
    trace_case = real & np.all(dr >= 0, axis=1)
    mixed = real & (dr[:, 0] * dr[:, 1] < 0)
    scale = np.maximum(1.0, sig[:, 0])
    trace_gap = sig.sum(axis=1) - dr.sum(axis=1)
    diff_gap = (sig[:, 0] - sig[:, 1]) - np.abs(np.abs(dr[:, 0]) - np.abs(dr[:, 1]))
    psd = _psd_residual_batch(As)
    herm = np.max(np.abs(As - np.conj(np.swapaxes(As, -1, -2))), axis=(1, 2))
    ct = conclusion_tolerance(tol)
    tols = {"hypothesis": tol, "conclusion": ct}
    v_trace = _verdict(trace_gap, tol * scale, psd, ct * scale)
    v_diff = _verdict(diff_gap, tol * scale, herm, ct * scale)
    out: list[Certificate | None] = []
    for i in range(As.shape[0]):
        if trace_case[i]:
            out.append(Certificate(Theorem.TWO_BY_TWO_TRACE, float(trace_gap[i]), float(psd[i]), None, v_trace[i], tols))
        elif mixed[i]:
            out.append(Certificate(Theorem.TWO_BY_TWO_SELFADJOINT, float(diff_gap[i]), float(herm[i]), None, v_diff[i], tols))
        else:
            out.append(None)
    return out


def check_2x2_lemmas(A, tol: float = 1e-10) -> Certificate:
    """Trace lemma for a nonnegative diagonal, difference lemma for opposite signs.

    ``s1 + s2 >= d1 + d2`` with equality only for positive A, and
    ``s1 - s2 >= | |d1| - |d2| |`` with equality only for selfadjoint A.
    """
    cert = check_2x2_lemmas_batch(as_array(A)[None], tol)[0]
    if cert is None:
        raise PatternMismatch("2x2 lemmas need a real diagonal that is nonnegative or of opposite signs")
    return cert
