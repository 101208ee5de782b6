"""Feasibility predicates built on partial sums of rearranged sequences."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import LengthMismatch, OutOfRange, UndecidableDepth, UnsupportedTail
from .seqspec import (
    MAX_EXPLICIT_TERMS,
    SequenceSpec,
    as_spec,
    rearranged,
    tail_difference_sign,
)

DEFAULT_TOL = 1e-10


class Order(str, Enum):
    WEAK = "Weak"
    PLAIN = "Plain"
    THOMPSON = "Thompson"
    STRONG = "Strong"
    UNITARY = "Unitary"


def _num(x):
    if x is None:
        return None
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass
class MajorizationReport:
    order: Order
    verdict: bool
    gaps: list[float]
    final_gap: float | None = None
    binding_k: list[int] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "order": self.order.value,
            "verdict": bool(self.verdict),
            "gaps": [_num(g) for g in self.gaps],
            "final_gap": _num(self.final_gap),
            "binding_k": list(self.binding_k),
            "details": {k: (_num(v) if isinstance(v, float) else v) for k, v in self.details.items()},
        }


@dataclass
class KadisonReport:
    a: float
    b: float
    finite: bool
    integer_gap: float | None
    verdict: bool

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "finite": self.finite,
            "integer_gap": self.integer_gap,
            "verdict": self.verdict,
        }


def _binding(gaps: np.ndarray, thr: float) -> list[int]:
    return [int(i) + 1 for i in np.flatnonzero(np.abs(gaps) <= thr)]


def _moduli(x) -> SequenceSpec:
    x = as_spec(x)
    return x if x.is_real and all(v >= 0 for v in x.head) else x.abs()


def _weak_core(d, s, K: int, tol: float) -> tuple[bool, np.ndarray, float, dict]:
    """Weak-majorization verdict with exact certification past depth K.

    Returns the verdict, the stored gaps (at least K of them, extended to
    the first violation when that lies deeper), the threshold used, and
    details holding the closed-form limit of the gaps.
    """
    d, s = _moduli(d), as_spec(s)
    s.require_real_nonnegative("s")
    if d.tail.kind == "ones" or s.tail.kind == "ones":
        raise UnsupportedTail("weak majorization is decided for Zero/Geometric tails only")
    rd, rs = rearranged(d), rearranged(s)
    sign, settle = tail_difference_sign(rs, rd)
    limit = float(rs.total() - rd.total())
    depth = max(K, settle, len(rd) + 1, len(rs) + 1)
    if depth > MAX_EXPLICIT_TERMS:
        raise UndecidableDepth(f"certification needs {depth} explicit terms")
    gaps = np.cumsum(rs.values(depth) - rd.values(depth))
    peak = max(rs.values(1)[0] if depth else 0.0, rd.values(1)[0] if depth else 0.0, 1.0)
    thr = tol * peak
    details = {"limit": limit, "tail_sign": sign, "settle_index": settle}
    bad = np.flatnonzero(gaps < -thr)
    if bad.size:
        stop = max(K, int(bad[0]) + 1)
        return False, gaps[:stop], thr, details
    if sign < 0 and limit < -thr:
        # gaps decrease monotonically to the limit beyond `depth`; find the crossing
        n = depth
        while n < MAX_EXPLICIT_TERMS:
            n = min(2 * n, MAX_EXPLICIT_TERMS)
            ext = np.cumsum(rs.values(n) - rd.values(n))
            bad = np.flatnonzero(ext < -thr)
            if bad.size:
                return False, ext[: int(bad[0]) + 1], thr, details
        raise UndecidableDepth("violation lies beyond the explicit-term cap")
    return True, gaps[:K], thr, details


def weak_majorizes(d, s, K: int, tol: float = DEFAULT_TOL) -> MajorizationReport:
    """Is ``|d|*`` weakly majorized by ``s*``?

    Gaps are ``sum_{i<=k} (s*_i - |d|*_i)`` for ``k = 1..K``.  Indices past K
    are certified from the tail closed forms, so the verdict covers the
    whole sequence.
    """
    ok, gaps, thr, details = _weak_core(d, s, K, tol)
    return MajorizationReport(Order.WEAK, ok, gaps.tolist(), details["limit"], _binding(gaps, thr), details)


def majorizes(d, s, K: int, tol: float = DEFAULT_TOL) -> MajorizationReport:
    """Weak majorization plus equal totals."""
    ok, gaps, thr, details = _weak_core(d, s, K, tol)
    limit = details["limit"]
    return MajorizationReport(
        Order.PLAIN, ok and abs(limit) <= thr, gaps.tolist(), limit, _binding(gaps, thr), details
    )


def strong_majorizes(d, s, K: int, tol: float = DEFAULT_TOL) -> MajorizationReport:
    """Weak majorization with the liminf of the gaps equal to zero.

    For Zero and Geometric tails the gap sequence is eventually monotone,
    so its liminf is the closed-form limit.
    """
    ok, gaps, thr, details = _weak_core(d, s, K, tol)
    liminf = details["limit"]
    details["liminf"] = liminf
    return MajorizationReport(
        Order.STRONG, ok and abs(liminf) <= thr, gaps.tolist(), liminf, _binding(gaps, thr), details
    )


def _finite_values(x, name: str) -> np.ndarray:
    x = as_spec(x)
    if not x.tail.is_zero:
        raise LengthMismatch(f"{name} must be finite (Zero tail)")
    return np.abs(np.asarray(x.head, dtype=complex)).astype(float) if x.head else np.zeros(0)


def thompson_prefix_and_final(dm: np.ndarray, sv: np.ndarray) -> tuple[np.ndarray, float]:
    """Prefix gaps and final-inequality slack for sorted (nonincreasing) arrays.

    Works on stacked inputs of shape ``(..., N)``.
    """
    gaps = np.cumsum(sv - dm, axis=-1)
    if dm.shape[-1] == 0:
        return gaps, 0.0
    final = (gaps[..., -1] - sv[..., -1] + dm[..., -1]) - (sv[..., -1] - dm[..., -1])
    return gaps, final


def thompson_majorizes(d, s, tol: float = DEFAULT_TOL) -> MajorizationReport:
    """Weak majorization of ``|d|*`` by ``s*`` plus the final inequality

    ``sum_{i<N} |d|*_i - |d|*_N <= sum_{i<N} s*_i - s*_N``.
    """
    dm, sv = _finite_values(d, "d"), _finite_values(s, "s")
    if dm.size != sv.size:
        raise LengthMismatch(f"d has {dm.size} entries, s has {sv.size}")
    if np.any(np.asarray(as_spec(s).head, dtype=complex).real < 0):
        raise OutOfRange("singular values must be nonnegative")
    dm, sv = np.sort(dm)[::-1], np.sort(sv)[::-1]
    gaps, final = thompson_prefix_and_final(dm, sv)
    thr = tol * max(1.0, dm[0] if dm.size else 0.0, sv[0] if sv.size else 0.0)
    ok = bool(np.all(gaps >= -thr)) and final >= -thr
    return MajorizationReport(Order.THOMPSON, ok, gaps.tolist(), float(final), _binding(gaps, thr))


def fan_necessary(A, tol: float = DEFAULT_TOL) -> MajorizationReport:
    """Weak majorization of the moduli of ``diag(A)`` by the singular values of A."""
    from .dense import as_array
    from .verify import jacobi_svd

    a = as_array(A)
    _, sigma, _ = jacobi_svd(a)
    d = np.abs(np.diagonal(a))
    n = max(d.size, sigma.size)
    return weak_majorizes(SequenceSpec.finite(d), SequenceSpec.finite(sigma), n, tol)


def kadison_check(d, tol: float = DEFAULT_TOL) -> KadisonReport:
    """Split ``d`` at 1/2: ``a`` sums the small entries, ``b`` sums ``1 - d`` over the large."""
    d = as_spec(d)
    if not d.is_real:
        raise OutOfRange("projection diagonals are real")
    head = np.asarray(d.head, dtype=float)
    if np.any(head < -tol) or np.any(head > 1 + tol):
        raise OutOfRange("projection diagonal entries must lie in [0, 1]")
    head = np.clip(head, 0.0, 1.0)
    a = float(head[head < 0.5].sum())
    b = float((1.0 - head[head >= 0.5]).sum())
    if d.tail.kind == "geometric":
        c, r = d.tail.c, d.tail.r
        if c > 1 + tol:
            raise OutOfRange("tail entries exceed 1")
        big = 0 if c < 0.5 else int(math.floor(math.log(0.5 / c) / math.log(r))) + 1
        while big > 0 and c * r ** (big - 1) < 0.5:
            big -= 1
        while c * r**big >= 0.5:
            big += 1
        b += float(sum(1.0 - c * r**m for m in range(big)))
        a += c * r**big / (1.0 - r)
    # Zero tail adds to neither sum; Ones tail adds 1 - 1 = 0 to b
    gap = a - b
    ok = abs(gap - round(gap)) <= tol * max(1.0, a + b)
    return KadisonReport(a, b, True, gap, bool(ok))


def unitary_diagonal_check(d, tol: float = DEFAULT_TOL) -> MajorizationReport:
    """Is ``d`` (moduli at most one) a diagonal of some unitary?

    Tests ``2 (1 - inf |d_j|) <= sum_j (1 - |d_j|)``.  A Zero tail means
    infinitely many literal zeros (the defect sum diverges); a Geometric
    tail lists the defects ``1 - |d_j|`` of the tail entries.
    """
    d = as_spec(d)
    mods = np.abs(np.asarray(d.head, dtype=complex)) if d.head else np.zeros(0)
    if np.any(mods > 1 + tol):
        j = int(np.argmax(mods > 1 + tol)) + 1
        raise OutOfRange(f"|d_{j}| = {mods[j - 1]} exceeds 1")
    mods = np.minimum(mods, 1.0)
    defect = float(np.sum(1.0 - mods))
    inf_mod = float(mods.min()) if mods.size else 1.0
    if d.tail.kind == "zero":
        defect = math.inf
        inf_mod = 0.0
    elif d.tail.kind == "geometric":
        c, r = d.tail.c, d.tail.r
        if c > 1 + tol:
            raise OutOfRange("tail defects exceed 1")
        defect += c / (1.0 - r)
        inf_mod = min(inf_mod, 1.0 - min(c, 1.0))
    slack = defect - 2.0 * (1.0 - inf_mod)
    thr = tol * max(1.0, mods.size)
    ok = slack >= -thr
    details = {"defect_sum": defect, "inf_modulus": inf_mod}
    return MajorizationReport(Order.UNITARY, bool(ok), [slack], slack, [1] if abs(slack) <= thr else [], details)
