"""Finite witnesses: matrices with a prescribed diagonal and spectral data.

Every constructor returns a matrix whose diagonal is written exactly, so
the only floating-point error lives in the singular values / eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dense import DenseMatrix, block_diag
from .errors import (
    Infeasible,
    NegativeEntry,
    NotInteger,
    NotMajorized,
    OutOfRange,
    SearchExhausted,
    UndecidableDepth,
)
from .majorization import thompson_majorizes, thompson_prefix_and_final, unitary_diagonal_check
from .seqspec import ONES, SequenceSpec, as_spec

DEFAULT_TOL = 1e-10


def _scale(*arrays) -> float:
    m = 1.0
    for a in arrays:
        a = np.asarray(a)
        if a.size:
            m = max(m, float(np.max(np.abs(a))))
    return m


# --------------------------------------------------------------------- 2x2


def two_by_two_failures(d1: float, d2: float, s1: float, s2: float, thr: float = 0.0) -> list[str]:
    """Names of the violated 2x2 inequalities (empty when feasible)."""
    x, y = max(d1, d2), min(d1, d2)
    failed = []
    if x > s1 + thr:
        failed.append("max(d) <= s1")
    if x + y > s1 + s2 + thr:
        failed.append("d1 + d2 <= s1 + s2")
    if x - y > s1 - s2 + thr:
        failed.append("|d1 - d2| <= s1 - s2")
    return failed


def solve_2x2(d1: float, d2: float, s1: float, s2: float, tol: float = DEFAULT_TOL) -> DenseMatrix:
    """Real 2x2 matrix ``[[d1, b], [c, d2]]`` with singular values ``(s1, s2)``.

    ``b**2 + c**2`` and ``b*c`` are fixed by the Frobenius norm and the
    determinant; ``b = (u+v)/2`` and ``c = (u-v)/2`` solve both.
    """
    d1, d2, s1, s2 = float(d1), float(d2), float(s1), float(s2)
    if d1 < 0 or d2 < 0:
        raise NegativeEntry("solve_2x2 needs a nonnegative diagonal")
    if s2 < 0 or s1 < s2:
        raise OutOfRange("solve_2x2 needs s1 >= s2 >= 0")
    thr = tol * _scale([d1, d2, s1])
    failed = two_by_two_failures(d1, d2, s1, s2, thr)
    if failed:
        raise Infeasible(f"2x2 problem infeasible: {', '.join(failed)}", failed)
    # factored forms of T + 2P and T - 2P avoid cancellation
    dm, sm = abs(d1 - d2), s1 - s2
    # a difference at rounding level is an exact tie; sqrt would inflate it to ~1e-8
    noise = 8.0 * np.finfo(float).eps * max(s1, d1, d2)
    du = sm - dm if abs(sm - dm) > noise else 0.0
    dv = s1 + s2 - d1 - d2 if abs(s1 + s2 - d1 - d2) > noise else 0.0
    u2 = du * (sm + dm)
    v2 = dv * (s1 + s2 + d1 + d2)
    u = math.sqrt(max(u2, 0.0))
    v = math.sqrt(max(v2, 0.0))
    b, c = (u + v) / 2.0, (u - v) / 2.0
    return DenseMatrix(np.array([[d1, b], [c, d2]]))


# -------------------------------------------------------------- Schur-Horn


def _check_majorized(d: np.ndarray, lam: np.ndarray, tol: float) -> None:
    ds, ls = np.sort(d)[::-1], np.sort(lam)[::-1]
    gaps = np.cumsum(ls - ds)
    thr = tol * _scale(ds, ls) * max(1, d.size)
    bad = np.flatnonzero(gaps[:-1] < -thr)
    if bad.size:
        k = int(bad[0]) + 1
        raise NotMajorized(f"prefix sum of d exceeds that of lam at k={k}", k)
    if gaps.size and abs(gaps[-1]) > thr:
        raise NotMajorized(f"totals differ by {gaps[-1]:.3e}", d.size)


def schur_horn_factor(d, lam, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal ``Q`` with ``Q.T @ diag(lam) @ Q`` having diagonal ``d``.

    Returns ``(B, Q)`` where ``B`` is that product with its diagonal set
    exactly to ``d``.  Peeling: the smallest open target is placed by one
    plane rotation between the two adjacent active eigenvalues bracketing
    it; the partner coordinate keeps the leftover trace.
    """
    d = np.asarray(d, dtype=float).ravel()
    lam = np.asarray(lam, dtype=float).ravel()
    if d.size != lam.size:
        raise NotMajorized("d and lam have different lengths", min(d.size, lam.size) + 1)
    n = d.size
    if n == 0:
        return np.zeros((0, 0)), np.zeros((0, 0))
    _check_majorized(d, lam, tol)

    sigma = np.argsort(-lam, kind="stable")
    a = lam[sigma].copy()  # active diagonal values, coordinates 0..n-1
    A = np.diag(a)
    R = np.eye(n)  # accumulated rotations: A = R diag(a0) R^T
    thr = tol * _scale(lam)
    active = list(range(n))
    coord_of_target = np.empty(n, dtype=int)
    targets = list(np.argsort(d, kind="stable"))  # smallest first

    while len(active) > 1:
        ti = targets.pop(0)
        t = d[ti]
        vals = np.array([a[c] for c in active])
        order = np.argsort(-vals, kind="stable")
        sv = vals[order]
        hit = np.flatnonzero(np.abs(sv - t) <= thr)
        if hit.size:
            p = active[order[hit[-1]]]
            coord_of_target[ti] = p
            active.remove(p)
            continue
        # adjacent bracketing pair sv[k] > t > sv[k+1]
        k = int(np.searchsorted(-sv, -t)) - 1
        k = min(max(k, 0), len(sv) - 2)
        p, q = active[order[k]], active[order[k + 1]]
        hi_v, lo_v = a[p], a[q]
        c2 = (t - lo_v) / (hi_v - lo_v)
        c2 = min(max(c2, 0.0), 1.0)
        c, s = math.sqrt(c2), math.sqrt(1.0 - c2)
        G = np.array([[c, -s], [s, c]])
        idx = [p, q]
        A[idx, :] = G @ A[idx, :]
        A[:, idx] = A[:, idx] @ G.T
        R[idx, :] = G @ R[idx, :]
        a[q] = hi_v + lo_v - t
        a[p] = t
        coord_of_target[ti] = p
        active.remove(p)
    coord_of_target[targets[0]] = active[0]

    perm = coord_of_target
    B = A[np.ix_(perm, perm)]
    B = (B + B.T) / 2.0
    np.fill_diagonal(B, d)
    inv_sigma = np.empty(n, dtype=int)
    inv_sigma[sigma] = np.arange(n)
    Qt = R[perm, :][:, inv_sigma]
    return B, Qt.T


def schur_horn(d, lam, tol: float = DEFAULT_TOL) -> DenseMatrix:
    """Real symmetric matrix with diagonal ``d`` and eigenvalues ``lam``."""
    return DenseMatrix(schur_horn_factor(d, lam, tol)[0])


# ------------------------------------------------------------------ phases


def phase_reduce(d) -> tuple[np.ndarray, DenseMatrix]:
    """Moduli of ``d`` and the diagonal unitary ``diag(z)`` with ``z * d = |d|``.

    ``z_i = |d_i| / d_i``, and ``z_i = 1`` where ``d_i = 0``.
    """
    arr = np.asarray(d)
    moduli = np.abs(arr).astype(float)
    safe = np.where(arr == 0, 1, arr)
    z = np.where(arr == 0, 1, moduli / safe)
    if not np.iscomplexobj(arr):
        z = np.sign(np.where(arr == 0, 1, arr)).astype(float)
    return moduli, DenseMatrix(np.diag(z))


def _apply_phases(A: np.ndarray, d: np.ndarray, phases: DenseMatrix) -> np.ndarray:
    z = np.diagonal(phases.data)
    out = (np.conj(z)[:, None] * A).astype(np.result_type(A, z, d))
    np.fill_diagonal(out, d)
    return out


# ---------------------------------------------------------------- Thompson


def splice(host: np.ndarray, block: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Replace the singular value ``block[0, 0]`` of ``host`` by the block's two.

    The host's diagonal is preserved; the block's (2, 2) entry becomes the
    new last diagonal entry.
    """
    host = np.asarray(host, dtype=float)
    block = np.asarray(block, dtype=float)
    t = block[0, 0]
    n = host.shape[0]
    P, sig, Qh = np.linalg.svd(host)
    j = int(np.argmin(np.abs(sig - t)))
    if abs(sig[j] - t) > tol * _scale(sig, [t]):
        raise ValueError(f"{t} is not a singular value of the host")
    out = np.zeros((n + 1, n + 1))
    out[:n, :n] = host + (t - sig[j]) * np.outer(P[:, j], Qh[j, :])
    out[:n, n] = block[0, 1] * P[:, j]
    out[n, :n] = block[1, 0] * Qh[j, :]
    out[n, n] = block[1, 1]
    return out


def _feasible_t_intervals(dp, sk, sl, dprime, rest, thr) -> list[tuple[float, float]]:
    """Interface values t keeping both the 2x2 block and the child feasible.

    The child compares ``dprime`` with ``rest`` plus ``t``; its constraints
    are piecewise linear in t, giving at most two intervals.
    """
    lo = max(0.0, dp - (sk - sl))
    hi = min(sk, sk + sl - dp, dp + sk - sl)
    if dp > sk + thr or lo > hi + thr:
        return []
    m_child = dprime.size
    Dp = np.cumsum(dprime)
    R = np.concatenate([[0.0], np.cumsum(rest)])
    wlo = -math.inf
    for m in range(1, m_child + 1):
        if m <= rest.size and R[m] >= Dp[m - 1] - thr:
            continue
        wlo = max(wlo, Dp[m - 1] - R[m - 1])
    minrest = rest[-1] if rest.size else math.inf
    total_rest = R[-1]
    C = Dp[-1] - 2.0 * dprime[-1]
    base_lo = max(lo, wlo)
    out = []
    i1 = (base_lo, min(hi, minrest, total_rest - C))
    i2 = (max(base_lo, minrest, C + 2.0 * minrest - total_rest), hi)
    for a, b in (i1, i2):
        if b >= a - thr:
            out.append((a, max(a, b)))
    return out


def _pick_t(intervals) -> list[float]:
    ranked = sorted(intervals, key=lambda ab: ab[0] - ab[1])
    picks = []
    for a, b in ranked:
        picks.extend([(a + b) / 2.0, a, b])
    return picks


def _thompson_sorted(d: np.ndarray, s: np.ndarray, tol: float, log: list) -> np.ndarray:
    """Witness for nonincreasing nonnegative ``d`` and ``s``; diagonal in the given order."""
    n = d.size
    thr = tol * _scale(s, d)
    if n == 0:
        return np.zeros((0, 0))
    if n == 1:
        return np.array([[d[0]]])
    if np.all(np.abs(d - s) <= thr):
        return np.diag(d)
    if n == 2:
        return solve_2x2(d[0], d[1], s[0], s[1], tol).data
    if abs(np.sum(s) - np.sum(d)) <= thr * n:
        return schur_horn_factor(d, s, tol)[0]

    peel_order = [n - 1, 0] + list(range(1, n - 1))
    for p in peel_order:
        dp = d[p]
        dprime = np.delete(d, p)
        for k in range(n):
            for l in range(k + 1, n):
                sk, sl = s[k], s[l]
                rest = np.delete(s, [k, l])
                t_eq = float(np.sum(dprime) - np.sum(rest))
                for t in _pick_t(_feasible_t_intervals(dp, sk, sl, dprime, rest, thr)):
                    t = min(max(t, 0.0), sk)
                    if abs(t - t_eq) <= thr * n:
                        # land the child exactly on the equal-sum case instead of near it
                        t = t_eq
                    entry = {"n": n, "peel": p, "pair": [k, l], "t": t}
                    if two_by_two_failures(t, dp, sk, sl, thr):
                        log.append({**entry, "status": "block infeasible"})
                        continue
                    child_s = np.sort(np.append(rest, t))[::-1]
                    gaps, final = thompson_prefix_and_final(dprime, child_s)
                    if np.any(gaps < -thr) or final < -thr:
                        log.append({**entry, "status": "child infeasible"})
                        continue
                    try:
                        child = _thompson_sorted(dprime, child_s, tol, log)
                    except SearchExhausted:
                        log.append({**entry, "status": "child exhausted"})
                        continue
                    block = solve_2x2(t, dp, sk, sl, tol).data
                    big = splice(child, block, tol=1e-6)
                    idx = list(range(p)) + [n - 1] + list(range(p, n - 1))
                    out = big[np.ix_(idx, idx)]
                    np.fill_diagonal(out, d)
                    return out
    raise SearchExhausted(f"no splice candidate validated for n={n}", log)


def thompson_construct(d, s, tol: float = DEFAULT_TOL) -> DenseMatrix:
    """Matrix with diagonal exactly ``d`` and singular values ``s``.

    Real ``d`` yields a real matrix.
    """
    d = np.asarray(as_spec(d).head if isinstance(d, SequenceSpec) else d).ravel()
    s = np.asarray(as_spec(s).head if isinstance(s, SequenceSpec) else s, dtype=float).ravel()
    rep = thompson_majorizes(SequenceSpec.finite(d), SequenceSpec.finite(s), tol)
    if not rep.verdict:
        failed = [f"weak prefix k={k}" for k, g in enumerate(rep.gaps, start=1) if g < 0]
        if rep.final_gap is not None and rep.final_gap < 0:
            failed.append("final inequality")
        raise Infeasible("d is not Thompson-majorized by s", failed)
    moduli, phases = phase_reduce(d)
    order = np.argsort(-moduli, kind="stable")
    s_sorted = np.sort(s)[::-1]
    log: list = []
    core = _thompson_sorted(moduli[order], s_sorted, tol, log)
    inv = np.empty_like(order)
    inv[order] = np.arange(order.size)
    A = core[np.ix_(inv, inv)]
    return DenseMatrix(_apply_phases(A, d, phases))


# ----------------------------------------------------------------- rank one


def rank_one(d, s1: float, K: int, tol: float = DEFAULT_TOL) -> DenseMatrix:
    """Rank-one matrix with top singular value ``s1`` and diagonal ``d_1..d_K``.

    Needs ``sum(d) <= s1``.  When fewer than two entries of the truncation
    are nonzero, one or two spare coordinates carry the remaining mass, so
    the result may be larger than K (padded with zero diagonal entries).
    """
    d = as_spec(d)
    d.require_real_nonnegative("d")
    s1 = float(s1)
    total = float(d.total())
    if total > s1 + tol * max(1.0, s1):
        raise Infeasible(f"sum(d) = {total} exceeds s1 = {s1}", ["sum(d) <= s1"])
    dv = d.values(K).astype(float)
    if np.any(np.diff(dv) > 0):
        raise ValueError("rank_one expects a nonincreasing d")
    if K == 0 or np.all(dv == 0):
        n = max(K, 2)
        A = np.zeros((n, n))
        A[0, 1] = s1
        return DenseMatrix(A)
    if K == 1 or dv[1] == 0:
        n = max(K, 3)
        f = min(dv[0] / s1, 1.0)
        v = np.zeros(n)
        w = np.zeros(n)
        v[0], v[1] = math.sqrt(f), math.sqrt(1 - f)
        w[0], w[2] = math.sqrt(f), math.sqrt(1 - f)
        A = s1 * np.outer(v, w)
        A[0, 0] = dv[0]
        return DenseMatrix(A)
    d1 = dv[0]
    T = float(np.sum(dv[1:]))
    q = (s1 * s1 - d1 * d1 - T * T) / (d1 * T)
    q = max(q, 2.0)
    alpha2 = (q + math.sqrt(q * q - 4.0)) / 2.0
    alpha = math.sqrt(alpha2)
    root = np.sqrt(dv)
    v = root.copy()
    w = root.copy()
    v[0] *= alpha
    w[0] /= alpha
    A = np.outer(v, w)
    np.fill_diagonal(A, dv)
    return DenseMatrix(A)


# --------------------------------------------------------------- projection


def projection_from_diagonal(d, tol: float = DEFAULT_TOL) -> DenseMatrix:
    """Orthogonal projection with diagonal ``d`` (entries in [0, 1], integer sum)."""
    d = np.asarray(as_spec(d).head if isinstance(d, SequenceSpec) else d, dtype=float).ravel()
    if np.any(d < -tol) or np.any(d > 1 + tol):
        raise OutOfRange("projection diagonals lie in [0, 1]")
    total = float(d.sum())
    m = int(round(total))
    if abs(total - m) > tol * max(1, d.size):
        raise NotInteger(f"sum(d) = {total} is not an integer", ["sum(d) in Z"])
    lam = np.concatenate([np.ones(m), np.zeros(d.size - m)])
    return schur_horn(d, lam, tol)


# ------------------------------------------------------------------ unitary


@dataclass
class UnitaryWitness:
    """Unitary with a prescribed diagonal on its first ``covered`` positions.

    Positions beyond ``covered`` hold ones (Ones tail) or auxiliary entries
    that absorb the rest of an infinite tail.
    """

    matrix: DenseMatrix
    phases: np.ndarray
    branch: str
    covered: int
    N: int | None = None
    M: int | None = None
    s: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "matrix": self.matrix.to_json(),
            "branch": self.branch,
            "covered": self.covered,
            "N": self.N,
            "M": self.M,
            "s": [float(x) for x in self.s],
        }


def unitary_parameters(moduli: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[int, int, np.ndarray]:
    """``N``, ``M`` and the interface sequence ``s`` for sorted-ascending moduli.

    ``N`` is the first index where the leading defects outweigh the rest,
    ``M`` the first where they outweigh the defects beyond ``N``.
    """
    x = np.asarray(moduli, dtype=float)
    e = 1.0 - x
    E = float(e.sum())
    pre = np.cumsum(e)
    thr = tol * max(1, x.size)
    N = int(np.argmax(2.0 * pre - E > thr)) + 1
    tailN = E - pre[N - 1]
    M = int(np.argmax(pre - tailN > thr)) + 1
    s = np.ones(N)
    s[: M - 1] = x[: M - 1]
    s[M - 1] = 1.0 + (pre[M - 2] if M > 1 else 0.0) - tailN
    return N, M, s


def _unitary_finite(moduli_sorted: np.ndarray, tol: float):
    """Orthogonal matrix for ascending moduli ``x`` followed by ones.

    Coordinates ``0..N-1`` carry ``x_N..x_1``, the next ``h-N`` carry
    ``x_{N+1}..x_h``, and the remainder carry ones.
    """
    x = moduli_sorted
    h = x.size
    N, M, s = unitary_parameters(x, tol)
    s_desc = s[::-1]
    dbar = x[:N][::-1]
    A = thompson_construct(dbar, s_desc, tol).data
    V, sig, Wh = np.linalg.svd(A)
    # unit singular values must give exactly zero off-diagonal blocks, not sqrt(eps)
    near = np.abs(1.0 - sig) <= 64 * np.finfo(float).eps * max(1, N)
    if near.any():
        sig = np.where(near, 1.0, sig)
        A = (V * sig) @ Wh
    S = np.diag(sig)
    Sin = np.diag(np.sqrt(np.maximum(0.0, (1.0 - sig) * (1.0 + sig))))
    L = max(N, h - N)
    U = np.eye(N + L)
    U[:N, :N] = A
    U[:N, N : 2 * N] = V @ Sin
    U[N : 2 * N, :N] = -Sin @ Wh
    U[N : 2 * N, N : 2 * N] = S
    targets = np.concatenate([1.0 - x[N:], np.zeros(L - (h - N))])
    lam = np.concatenate([1.0 - sig, np.zeros(L - N)])
    _, Q = schur_horn_factor(targets, lam, max(tol, 1e-9))
    W = block_diag(np.eye(N), Q)
    U = W.T @ U @ W
    diag = np.concatenate([dbar, x[N:], np.ones(N + L - h)])
    np.fill_diagonal(U, diag)
    return U, N, M, s


def unitary_from_diagonal(d, tol: float = DEFAULT_TOL, tail_terms: int = 8) -> UnitaryWitness:
    """Unitary (orthogonal for real ``d``) whose leading diagonal is ``d``.

    A plain list is read as a head followed by ones.  A Zero tail means
    infinitely many zeros; a Geometric tail lists the defects ``1 - |d_j|``
    of the tail entries, of which ``tail_terms`` are realized explicitly and
    the remaining defect mass sits on one auxiliary coordinate.
    """
    spec = d if isinstance(d, SequenceSpec) else as_spec(d, ONES)
    rep = unitary_diagonal_check(spec, tol)
    if not rep.verdict:
        raise Infeasible("d violates the unitary-diagonal inequality", ["2(1 - inf|d|) <= sum(1 - |d|)"])
    head = np.asarray(spec.head if spec.head else [], dtype=complex if not spec.is_real else float)

    if spec.tail.kind == "zero":
        moduli, phases = phase_reduce(head)
        half = (moduli + 1.0) / 2.0
        total = float(half.sum())
        if abs(total - round(total)) <= tol * max(1, half.size):
            pdiag = half
        elif abs(total + 0.5 - round(total + 0.5)) <= tol * max(1, half.size):
            pdiag = np.append(half, 0.5)
        else:
            raise UndecidableDepth("no zero-padding makes the projection trace an integer")
        P = projection_from_diagonal(pdiag, tol).data
        U = 2.0 * P - np.eye(pdiag.size)
        np.fill_diagonal(U, np.append(moduli, np.zeros(pdiag.size - moduli.size)))
        z = np.concatenate([np.diagonal(phases.data), np.ones(pdiag.size - head.size)])
        U = np.conj(z)[:, None] * U
        return UnitaryWitness(DenseMatrix(U), z, "zero-tail", head.size)

    covered = head.size
    extra = np.zeros(0)
    if spec.tail.kind == "geometric":
        c, r = spec.tail.c, spec.tail.r
        k = tail_terms
        while c * r**k / (1.0 - r) > c:
            k += 1
        rem = c * r**k / (1.0 - r)
        extra = np.append(1.0 - c * r ** np.arange(k), 1.0 - rem)
        covered = head.size + k
    full = np.concatenate([head, extra.astype(head.dtype)])
    moduli, phases = phase_reduce(full)
    z = np.diagonal(phases.data)
    h = full.size
    if h == 0 or np.all(1.0 - moduli <= tol):
        U = np.diag(np.conj(z)) if h else np.zeros((0, 0))
        np.fill_diagonal(U, full)
        return UnitaryWitness(DenseMatrix(U), z, "identity", covered)
    # ascending moduli; ties reversed so the reversed leading block keeps input order
    order = np.argsort(-moduli, kind="stable")[::-1]
    core, N, M, s = _unitary_finite(moduli[order], tol)
    size = core.shape[0]
    coord = np.empty(h, dtype=int)
    for rank, orig in enumerate(order):
        coord[orig] = (N - 1 - rank) if rank < N else rank
    rest = np.setdiff1d(np.arange(size), coord)
    perm = np.concatenate([coord, rest])
    U = core[np.ix_(perm, perm)]
    zz = np.concatenate([z, np.ones(size - h)])
    U = np.conj(zz)[:, None] * U
    np.fill_diagonal(U, np.concatenate([full, np.ones(size - h)]))
    return UnitaryWitness(DenseMatrix(U), zz, "finite-sum", covered, N, M, s.tolist())
