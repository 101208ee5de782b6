"""Planners for compact operators with prescribed diagonal and singular values.

Given nonincreasing ``s`` and a nonnegative ``d`` whose rearrangement is
weakly majorized by ``s``, the gap sequence ``delta_n = sum_{j<=n}(s_j - d_j)``
decides how the infinite problem splits into finite pieces:

* ``Case1_Majorized``: the gaps tend to zero; one Schur-Horn block.
* ``Case2_InfimumNotAttained``: the gaps stay below their limit infinitely
  often; an infinite direct sum of Thompson blocks, each borrowing one
  small diagonal entry from far down the sequence.
* ``Case3_TailDominated_*``: the gaps eventually sit above their limit;
  either the tails coincide, or one diagonal entry is traded into a
  Schur-Horn problem on the tail.

A plan is truncated to finitely many blocks.  Every emitted block is an
exact finite problem, so the realized matrix reproduces the covered
diagonal entries exactly.  Positions are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .construct_finite import schur_horn_factor, thompson_construct
from .dense import DenseMatrix, block_diag
from .errors import CaseMismatch, Infeasible, NotMajorized, NotNonincreasing, UndecidableDepth
from .majorization import thompson_majorizes, weak_majorizes
from .seqspec import (
    MAX_EXPLICIT_TERMS,
    SequenceSpec,
    as_spec,
    is_nonincreasing,
    rearranged,
    rearrangement_positions,
    tail_difference_sign,
)

DEFAULT_TOL = 1e-10


class CaseTag(str, Enum):
    CASE1 = "Case1_Majorized"
    CASE2 = "Case2_InfimumNotAttained"
    CASE3_CONSTANT = "Case3_TailDominated_EventuallyConstant"
    CASE3_SPLIT = "Case3_TailDominated_Split"


@dataclass
class Block:
    """A finite subproblem: ``kind`` is thompson, schur_horn or diagonal."""

    kind: str
    d: list
    s: list

    def to_json(self) -> dict:
        return {"kind": self.kind, "d": [float(x) for x in self.d], "s": [float(x) for x in self.s]}

    @classmethod
    def from_json(cls, obj: dict) -> "Block":
        return cls(obj["kind"], list(obj["d"]), list(obj["s"]))


@dataclass
class CasePlan:
    case_tag: CaseTag
    blocks: list = field(default_factory=list)
    splice_points: list = field(default_factory=list)
    provenance: list = field(default_factory=list)
    diagonal: list = field(default_factory=list)
    singular_values: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def covered(self) -> list[int]:
        return [p for p in self.provenance if p is not None]

    def to_json(self) -> dict:
        return {
            "schema": "specdiag/1",
            "case_tag": self.case_tag.value,
            "blocks": [b.to_json() for b in self.blocks],
            "splice_points": self.splice_points,
            "provenance": self.provenance,
            "diagonal": [float(x) for x in self.diagonal],
            "singular_values": [float(x) for x in self.singular_values],
            "data": self.data,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CasePlan":
        for key in ("case_tag", "blocks"):
            if key not in obj:
                raise ValueError(f"plan JSON is missing field '{key}'")
        return cls(
            CaseTag(obj["case_tag"]),
            [Block.from_json(b) for b in obj["blocks"]],
            list(obj.get("splice_points", [])),
            list(obj.get("provenance", [])),
            list(obj.get("diagonal", [])),
            list(obj.get("singular_values", [])),
            dict(obj.get("data", {})),
        )


class _Gaps:
    """Rearranged ``d``, nonincreasing ``s`` and their gap sequence, grown on demand."""

    def __init__(self, d, s, tol: float):
        d, s = as_spec(d), as_spec(s)
        d.require_real_nonnegative("d")
        s.require_real_nonnegative("s")
        if not is_nonincreasing(s.values(len(s) + 1)):
            raise NotNonincreasing("s must be nonincreasing")
        self.src_d = d
        self.d = rearranged(d)
        self.s = s
        self.sign, self.settle = tail_difference_sign(self.s, self.d)
        self.limit = float(self.s.total() - self.d.total())
        self.scale = max(1.0, float(self.s.values(1)[0]), float(self.d.values(1)[0]))
        self.thr = tol * self.scale
        self.tie = 64 * np.finfo(float).eps * self.scale
        self._n = 0
        self._grow(max(self.settle, len(self.d), len(self.s)) + 2)

    def _grow(self, n: int) -> None:
        if n <= self._n:
            return
        if n > MAX_EXPLICIT_TERMS:
            raise UndecidableDepth(f"plan needs more than {MAX_EXPLICIT_TERMS} explicit terms")
        n = max(n, 2 * self._n)
        # read entries from the input itself so covered diagonals match it bit for bit
        self.pos = np.asarray(rearrangement_positions(self.src_d, n), dtype=int)
        self.dv = self.src_d.values(int(self.pos.max())).astype(float)[self.pos - 1]
        self.sv = self.s.values(n).astype(float)
        self.delta = np.cumsum(self.sv - self.dv)
        self._n = n

    def dd(self, i: int) -> float:
        self._grow(i + 1)
        return float(self.dv[i - 1])

    def ss(self, i: int) -> float:
        self._grow(i + 1)
        return float(self.sv[i - 1])

    def dl(self, n: int) -> float:
        """``delta_n`` with ``delta_0 = 0``."""
        if n == 0:
            return 0.0
        self._grow(n + 1)
        return float(self.delta[n - 1])

    def d_range(self, a: int, b: int) -> np.ndarray:
        self._grow(b + 1)
        return self.dv[a - 1 : b]

    def s_range(self, a: int, b: int) -> np.ndarray:
        self._grow(b + 1)
        return self.sv[a - 1 : b]

    def sources(self, positions: list[int]) -> list[int]:
        """Positions in the input ``d`` of the given rearranged positions."""
        self._grow(max(positions, default=0) + 1)
        return [int(self.pos[p - 1]) for p in positions]

    def tag(self) -> CaseTag:
        if abs(self.limit) <= self.thr:
            return CaseTag.CASE1
        if self.sign > 0:
            return CaseTag.CASE2
        if self.sign == 0:
            return CaseTag.CASE3_CONSTANT
        return CaseTag.CASE3_SPLIT


def _prepare(d, s, K: int, tol: float) -> _Gaps:
    g = _Gaps(d, s, tol)
    rep = weak_majorizes(g.d, g.s, max(K, 1), tol)
    if not rep.verdict:
        raise Infeasible("rearranged d is not weakly majorized by s", [f"k={len(rep.gaps)}"])
    return g


def classify_case(d, s, K: int = 1, tol: float = DEFAULT_TOL) -> CasePlan:
    """Which case applies, decided from the closed-form limit and tail sign of the gaps."""
    g = _prepare(d, s, K, tol)
    return CasePlan(g.tag(), data={"limit": g.limit, "tail_sign": g.sign, "settle_index": g.settle})


def _expect(g: _Gaps, want: CaseTag | tuple) -> None:
    want = want if isinstance(want, tuple) else (want,)
    tag = g.tag()
    if tag not in want:
        raise CaseMismatch(f"pair is in {tag.value}, not {'/'.join(w.value for w in want)}")


def case2_partition(d, s, J: int, tol: float = DEFAULT_TOL) -> CasePlan:
    """First ``J`` Thompson blocks of the Case 2 decomposition.

    ``k_{j+1}`` is the last index attaining ``inf_{n > k_j} delta_n``.  The
    borrowed index ``m_j`` is the smallest unused index ``>= k_j + j`` with
    ``d_m`` below both ``min{delta_n - delta_{k_j} : k_j < n <= k_{j+1}}``
    and ``delta_{k_j} - delta_{k_{j-1}}``; the second bound is what keeps
    block j's last partial sum positive.
    """
    g = _prepare(d, s, 1, tol)
    _expect(g, CaseTag.CASE2)
    ks = [0]
    for _ in range(J + 1):
        kj = ks[-1]
        # past the settle index the gaps strictly increase, so the infimum lives in this window
        hi = max(g.settle, kj + 1)
        window = np.array([g.dl(n) for n in range(kj + 1, hi + 1)])
        low = window.min()
        ks.append(kj + 1 + int(np.flatnonzero(window <= low + g.tie)[-1]))
    ms: list[int] = []
    Ns: list[list[int]] = []
    used: set[int] = set()
    blocks, provenance, diagonal, svals = [], [], [], []
    for j in range(1, J + 1):
        kprev, kj, knext = ks[j - 1], ks[j], ks[j + 1]
        lit = min(g.dl(n) - g.dl(kj) for n in range(kj + 1, knext + 1))
        need = g.dl(kj) - g.dl(kprev)
        bound = min(lit, need)
        m = kj + j
        while m in used or g.dd(m) >= bound:
            m += 1
            if m > MAX_EXPLICIT_TERMS:
                raise UndecidableDepth(f"no admissible borrowed index for block {j}")
        ms.append(m)
        free = []
        i = 1
        while len(free) < kj - kprev:
            if i not in used and i != m:
                free.append(i)
            i += 1
        Nj = sorted(free + [m])
        used.update(Nj)
        Ns.append(Nj)
        dj = [g.dd(i) for i in Nj]
        sj = list(g.s_range(kprev + 1, kj)) + [0.0]
        blocks.append(Block("thompson", dj, sj))
        provenance.extend(g.sources(Nj))
        diagonal.extend(dj)
        svals.extend(sj)
    data = {"k": ks[: J + 1], "m": ms, "N": Ns, "limit": g.limit}
    plan = CasePlan(CaseTag.CASE2, blocks, [], provenance, diagonal, svals, data)
    check_plan(plan, tol)
    return plan


def case3_split(d, s, R: int = 8, tol: float = DEFAULT_TOL) -> CasePlan:
    """Case 3 plan covering ``R`` tail terms.

    Identical tails: a Thompson block on the head (ending where the
    sequences agree) and a diagonal block on ``R`` tail terms.  Otherwise
    choose ``k`` and ``k'`` as the smallest indices meeting the split
    conditions, put ``a = d_k + delta_{k'} - lim delta`` in place of ``d_k``
    in a Thompson block on ``1..k'``, and move ``d_k`` into a Schur-Horn
    problem on the span of coordinate ``k`` and the tail coordinates.  The
    last tail coordinate absorbs the untruncated remainder and is not a
    covered entry.
    """
    g = _prepare(d, s, 1, tol)
    _expect(g, (CaseTag.CASE3_CONSTANT, CaseTag.CASE3_SPLIT))
    if g.tag() is CaseTag.CASE3_CONSTANT:
        T = max(len(g.d), len(g.s), 1)
        while abs(g.dd(T) - g.ss(T)) > g.tie:
            T += 1
        tail_R = R if (not g.s.tail.is_zero) else 0
        head = Block("thompson", list(g.d_range(1, T)), list(g.s_range(1, T)))
        blocks = [head]
        if tail_R:
            blocks.append(Block("diagonal", list(g.d_range(T + 1, T + tail_R)), list(g.s_range(T + 1, T + tail_R))))
        positions = list(range(1, T + tail_R + 1))
        plan = CasePlan(
            CaseTag.CASE3_CONSTANT,
            blocks,
            [],
            g.sources(positions),
            [g.dd(i) for i in positions],
            list(g.s_range(1, T + tail_R)),
            {"T": T, "R": tail_R, "limit": g.limit},
        )
        check_plan(plan, tol)
        return plan

    L = g.limit
    # past the settle index the gaps decrease to L, so suffix minima over a finite window suffice
    W = max(g.settle, len(g.d), len(g.s)) + 2
    g._grow(W + 1)
    suffix_min = np.minimum.accumulate(g.delta[:W][::-1])[::-1]
    k = 2
    while True:
        if k - 1 > W:
            W = k + 1
        ok_gap = (suffix_min[k - 2] if k - 1 <= len(suffix_min) else L) >= L - g.thr
        if ok_gap and g.dd(k - 1) > g.dd(k):
            break
        k += 1
        if k > MAX_EXPLICIT_TERMS:
            raise UndecidableDepth("no admissible split index k")
    room = min(g.dd(k - 1) - g.dd(k), L)
    kp = k + 1
    while not (g.dl(kp) - L <= room and g.dl(kp - 1) >= g.dl(kp)):
        kp += 1
        if kp > MAX_EXPLICIT_TERMS:
            raise UndecidableDepth("no admissible index k'")
    a = g.dd(k) + g.dl(kp) - L
    d1 = list(g.d_range(1, kp))
    d1[k - 1] = a
    s1 = list(g.s_range(1, kp))

    for extra in range(R, R + 64):
        tail_s = list(g.s_range(kp + 1, kp + extra))
        x = g.dd(kp + extra) + g.dl(kp + extra) - L
        targets = [g.dd(k)] + list(g.d_range(kp + 1, kp + extra - 1)) + [x]
        eig = [a] + tail_s
        try:
            _check_sh(targets, eig, tol)
            break
        except NotMajorized:
            continue
    else:
        raise UndecidableDepth("no truncation depth makes the tail Schur-Horn problem feasible")
    R = extra
    blocks = [Block("thompson", d1, s1), Block("diagonal", tail_s, tail_s)]
    coords = [k] + list(range(kp + 1, kp + R + 1))
    splice = {
        "host_block": 0,
        "slot": k,
        "coordinates": coords,
        "kind": "schur_horn",
        "targets": [float(t) for t in targets],
        "eigenvalues": [float(e) for e in eig],
    }
    positions = list(range(1, kp + R))
    provenance = g.sources(positions) + [None]
    diagonal = [g.dd(i) for i in positions] + [x]
    plan = CasePlan(
        CaseTag.CASE3_SPLIT,
        blocks,
        [splice],
        provenance,
        diagonal,
        s1 + tail_s,
        {"k": k, "k_prime": kp, "a": a, "R": R, "limit": L},
    )
    check_plan(plan, tol)
    return plan


def case1_plan(d, s, R: int = 8, tol: float = DEFAULT_TOL) -> CasePlan:
    """Case 1 truncation: one Schur-Horn block on ``d_1..d_{R-1}`` plus a remainder coordinate."""
    g = _prepare(d, s, 1, tol)
    _expect(g, CaseTag.CASE1)
    if g.d.tail.is_zero and g.s.tail.is_zero:
        n = max(len(g.d), len(g.s), 1)
        targets = list(g.d_range(1, n))
        eig = list(g.s_range(1, n))
        positions = list(range(1, n + 1))
        plan = CasePlan(CaseTag.CASE1, [Block("schur_horn", targets, eig)], [], g.sources(positions), targets, eig, {"R": n, "limit": g.limit})
        check_plan(plan, tol)
        return plan
    for n in range(max(R, 1), max(R, 1) + 64):
        x = g.dd(n) + g.dl(n) - g.limit
        targets = list(g.d_range(1, n - 1)) + [x]
        eig = list(g.s_range(1, n))
        try:
            _check_sh(targets, eig, tol)
            break
        except NotMajorized:
            continue
    else:
        raise UndecidableDepth("no truncation depth makes the Schur-Horn problem feasible")
    positions = list(range(1, n))
    plan = CasePlan(CaseTag.CASE1, [Block("schur_horn", targets, eig)], [], g.sources(positions) + [None], targets, eig, {"R": n, "limit": g.limit})
    check_plan(plan, tol)
    return plan


def plan_case(d, s, depth: int = 4, tol: float = DEFAULT_TOL) -> CasePlan:
    """Classify and build the matching plan; ``depth`` is J for Case 2 and R otherwise."""
    tag = classify_case(d, s, 1, tol).case_tag
    if tag is CaseTag.CASE1:
        return case1_plan(d, s, depth, tol)
    if tag is CaseTag.CASE2:
        return case2_partition(d, s, depth, tol)
    return case3_split(d, s, depth, tol)


def _check_sh(targets, eig, tol: float) -> None:
    t = np.sort(np.asarray(targets, dtype=float))[::-1]
    e = np.sort(np.asarray(eig, dtype=float))[::-1]
    thr = tol * max(1.0, float(e[0]) if e.size else 0.0)
    gaps = np.cumsum(e - t)
    bad = np.flatnonzero(gaps[:-1] < -thr)
    if bad.size:
        raise NotMajorized("tail targets not majorized", int(bad[0]) + 1)
    if gaps.size and abs(gaps[-1]) > thr * max(1, t.size):
        raise NotMajorized("tail totals differ", t.size)


def check_block(block: Block, tol: float = DEFAULT_TOL) -> None:
    """Raise unless the block meets its constructor's precondition."""
    if block.kind == "thompson":
        rep = thompson_majorizes(SequenceSpec.finite(block.d), SequenceSpec.finite(block.s), tol)
        if not rep.verdict:
            raise Infeasible("Thompson block precondition fails", ["thompson"])
    elif block.kind == "schur_horn":
        _check_sh(block.d, block.s, tol)
    elif block.kind == "diagonal":
        if len(block.d) != len(block.s) or any(abs(a - b) > tol for a, b in zip(block.d, block.s)):
            raise Infeasible("diagonal block needs d equal to s", ["diagonal"])
    else:
        raise ValueError(f"unknown block kind {block.kind!r}")


def check_plan(plan: CasePlan, tol: float = DEFAULT_TOL) -> None:
    for b in plan.blocks:
        check_block(b, tol)
    for sp in plan.splice_points:
        _check_sh(sp["targets"], sp["eigenvalues"], tol)


def realize_truncation(plan: CasePlan, tol: float = DEFAULT_TOL) -> DenseMatrix:
    """Assemble the blocks (and splices) into one finite real matrix."""
    check_plan(plan, tol)
    mats = []
    for b in plan.blocks:
        if b.kind == "thompson":
            mats.append(thompson_construct(b.d, b.s, tol).data)
        elif b.kind == "schur_horn":
            mats.append(schur_horn_factor(b.d, b.s, tol)[0])
        else:
            mats.append(np.diag(np.asarray(b.d, dtype=float)))
    A = block_diag(*mats) if mats else np.zeros((0, 0))
    for sp in plan.splice_points:
        idx = np.asarray(sp["coordinates"], dtype=int) - 1
        _, Q = schur_horn_factor(sp["targets"], sp["eigenvalues"], tol)
        W = np.eye(A.shape[0])
        W[np.ix_(idx, idx)] = Q
        A = W.T @ A @ W
    if plan.diagonal:
        np.fill_diagonal(A, np.asarray(plan.diagonal, dtype=float))
    return DenseMatrix(A)
