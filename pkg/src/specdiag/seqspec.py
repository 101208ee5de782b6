"""Sequences given as a finite head followed by an analytic tail rule.

Every "infinite" sequence in the library is a :class:`SequenceSpec`: an
explicit head plus one of three tails (all zeros, all ones, or a geometric
progression ``c, c*r, c*r**2, ...``).  All tail sums used downstream have
closed forms, so infinite quantities such as total sums or the limit of the
partial-sum gap sequence are computed exactly rather than by truncation.

Positions are 1-based throughout, matching the usual indexing of sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    IncompatibleTails,
    InsufficientSupport,
    NegativeEntry,
    NotNonincreasing,
    OutOfRange,
    UndecidableDepth,
    UnsupportedTail,
)

TAIL_KINDS = ("zero", "ones", "geometric")

# beyond this many explicit terms we refuse to certify tail behaviour
MAX_EXPLICIT_TERMS = 1_000_000


@dataclass(frozen=True)
class Tail:
    kind: str = "zero"
    c: float = 0.0
    r: float = 0.0

    def __post_init__(self):
        if self.kind not in TAIL_KINDS:
            raise ValueError(f"unknown tail kind {self.kind!r}")
        if self.kind == "geometric":
            if not (0.0 < self.r < 1.0):
                raise ValueError(f"geometric tail needs 0 < r < 1, got r={self.r}")
            if self.c < 0.0:
                raise ValueError(f"geometric tail needs c >= 0, got c={self.c}")

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.kind == "geometric" and self.c == 0.0)

    def values(self, count: int) -> np.ndarray:
        """First ``count`` tail terms."""
        if count <= 0:
            return np.zeros(0)
        if self.kind == "zero":
            return np.zeros(count)
        if self.kind == "ones":
            return np.ones(count)
        return self.c * self.r ** np.arange(count, dtype=float)

    def sum_from(self, m: int) -> float:
        """Sum of tail terms number ``m, m+1, ...`` (``m >= 1``)."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "ones":
            return math.inf
        return self.c * self.r ** (m - 1) / (1.0 - self.r)

    def to_json(self) -> dict:
        if self.kind == "geometric":
            return {"kind": "geometric", "c": self.c, "r": self.r}
        return {"kind": self.kind}


ZERO = Tail("zero")
ONES = Tail("ones")


def geometric(c: float, r: float) -> Tail:
    return Tail("geometric", float(c), float(r))


def _normalize_scalar(v) -> complex | float:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex scalars are [re, im] pairs, got {v!r}")
        v = complex(float(v[0]), float(v[1]))
    v = complex(v)
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        raise ValueError("sequence entries must be finite")
    return v


@dataclass(frozen=True)
class SequenceSpec:
    """``head`` followed by ``tail`` evaluated at positions ``len(head)+1, ...``."""

    head: tuple = ()
    tail: Tail = field(default=ZERO)

    def __post_init__(self):
        vals = [_normalize_scalar(v) for v in self.head]
        if all(v.imag == 0.0 for v in vals):
            vals = [v.real for v in vals]
        object.__setattr__(self, "head", tuple(vals))
        if self.tail.kind == "geometric" and self.tail.c == 0.0:
            object.__setattr__(self, "tail", ZERO)

    @classmethod
    def finite(cls, values: Iterable) -> "SequenceSpec":
        return cls(tuple(values), ZERO)

    @property
    def is_real(self) -> bool:
        return all(isinstance(v, float) for v in self.head)

    @property
    def infinite_support(self) -> bool:
        return not self.tail.is_zero

    def __len__(self) -> int:
        return len(self.head)

    def values(self, n: int) -> np.ndarray:
        """First ``n`` terms of the represented sequence."""
        h = np.array(self.head, dtype=complex if not self.is_real else float)
        if n <= len(h):
            return h[:n].copy()
        rest = self.tail.values(n - len(h))
        if h.dtype == complex:
            rest = rest.astype(complex)
        return np.concatenate([h, rest])

    def total(self) -> complex | float:
        """Sum of all terms (``inf`` for a Ones tail)."""
        return sum(self.head, 0.0) + self.tail.sum_from(1)

    def abs(self) -> "SequenceSpec":
        return SequenceSpec(tuple(abs(v) for v in self.head), self.tail)

    def require_real_nonnegative(self, what: str = "sequence") -> None:
        if not self.is_real:
            raise OutOfRange(f"{what} must be real-valued")
        for i, v in enumerate(self.head, start=1):
            if v < 0:
                raise NegativeEntry(f"{what} has negative entry {v} at position {i}")

    def to_json(self) -> dict:
        head = [v if isinstance(v, float) else [v.real, v.imag] for v in self.head]
        return {"head": head, "tail": self.tail.to_json()}

    @classmethod
    def from_json(cls, obj) -> "SequenceSpec":
        """Accepts ``{"head": [...], "tail": {...}}`` or a bare list (Zero tail)."""
        if isinstance(obj, list):
            return cls(tuple(obj), ZERO)
        if not isinstance(obj, dict) or "head" not in obj:
            raise ValueError("sequence JSON needs a 'head' field")
        tail_obj = obj.get("tail", {"kind": "zero"})
        kind = tail_obj.get("kind", "zero")
        if kind == "geometric":
            tail = geometric(tail_obj["c"], tail_obj["r"])
        else:
            tail = Tail(kind)
        return cls(tuple(obj["head"]), tail)


def as_spec(x, tail: Tail = ZERO) -> SequenceSpec:
    """Coerce a list/array into a spec with the given tail; specs pass through."""
    if isinstance(x, SequenceSpec):
        return x
    return SequenceSpec(tuple(np.asarray(x).ravel().tolist()), tail)


def _ranked(x: SequenceSpec, K: int, allow_padding: bool = True) -> tuple[np.ndarray, list[int]]:
    """The K largest moduli of ``x`` with their 1-based source positions.

    Ties keep source order.  Zeros are skipped when the support is infinite;
    a finite-support sequence keeps its zeros (and pads with tail zeros).
    """
    if K < 0:
        raise ValueError("K must be nonnegative")
    if x.tail.kind == "ones":
        raise UnsupportedTail("rearrangement of a Ones tail is not defined")
    mods = [abs(v) for v in x.head]
    pos = list(range(1, len(mods) + 1))
    if x.infinite_support:
        pairs = [(m, p) for m, p in zip(mods, pos) if m > 0]
        pairs.sort(key=lambda t: (-t[0], t[1]))
        out_v, out_p = [], []
        c, r = x.tail.c, x.tail.r
        j = 0  # tail terms consumed
        i = 0
        while len(out_v) < K:
            tv = c * r**j
            if i < len(pairs) and pairs[i][0] >= tv:
                out_v.append(pairs[i][0])
                out_p.append(pairs[i][1])
                i += 1
            else:
                out_v.append(tv)
                out_p.append(len(mods) + 1 + j)
                j += 1
        return np.array(out_v, dtype=float), out_p
    order = sorted(range(len(mods)), key=lambda i: (-mods[i], i))
    out_v = [mods[i] for i in order[:K]]
    out_p = [pos[i] for i in order[:K]]
    if len(out_v) < K:
        if not allow_padding:
            raise InsufficientSupport(f"K={K} exceeds the {len(mods)} available entries")
        extra = K - len(out_v)
        out_v += [0.0] * extra
        out_p += list(range(len(mods) + 1, len(mods) + 1 + extra))
    return np.array(out_v, dtype=float), out_p


def nonincreasing_rearrangement(x, K: int, allow_padding: bool = True) -> np.ndarray:
    """The K largest terms of a nonnegative sequence, in nonincreasing order."""
    x = as_spec(x)
    x.require_real_nonnegative()
    return _ranked(x, K, allow_padding)[0]


def rearrangement_positions(x, K: int, allow_padding: bool = True) -> list[int]:
    """Source positions (1-based) of the first K terms of the modulus ranking."""
    return _ranked(as_spec(x), K, allow_padding)[1]


def modulus_rearrangement(x, K: int, allow_padding: bool = True) -> np.ndarray:
    """Original (possibly complex) values reordered by nonincreasing modulus.

    Among equal moduli the original index order is kept, which makes the
    output reproducible; any such order is an admissible rearrangement.
    """
    x = as_spec(x)
    _, positions = _ranked(x, K, allow_padding)
    vals = x.values(max(positions, default=0))
    out = np.array([vals[p - 1] for p in positions], dtype=complex if not x.is_real else float)
    return out


def rearranged(x: SequenceSpec) -> SequenceSpec:
    """The nonincreasing rearrangement of a nonnegative spec, as a spec.

    Head entries are merged into the geometric tail until every head entry
    has been placed; the remaining tail terms form the new tail.
    """
    x = as_spec(x)
    x.require_real_nonnegative()
    if x.tail.kind == "ones":
        raise UnsupportedTail("rearrangement of a Ones tail is not defined")
    positive = sorted((v for v in x.head if v > 0), reverse=True)
    if not x.infinite_support:
        return SequenceSpec(tuple(positive), ZERO)
    c, r = x.tail.c, x.tail.r
    if not positive:
        return SequenceSpec((), x.tail)
    hmin = positive[-1]
    # tail terms that are >= the smallest head entry come before it
    count = 0 if c < hmin else int(math.floor(math.log(hmin / c) / math.log(r))) + 1
    while count > 0 and c * r ** (count - 1) < hmin:
        count -= 1
    while c * r**count >= hmin:
        count += 1
    vals, _ = _ranked(x, len(positive) + count)
    return SequenceSpec(tuple(vals.tolist()), geometric(c * r**count, r))


def is_nonincreasing(values: Sequence[float], tol: float = 0.0) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) <= tol))


@dataclass(frozen=True)
class DeltaSequence:
    """Partial sums ``delta_n = sum_{j<=n} (s_j - d_j)`` and their limit."""

    values: tuple
    limit: float | None = None
    liminf: float | None = None

    def to_json(self) -> dict:
        return {"values": list(self.values), "limit": self.limit, "liminf": self.liminf}


def delta_sequence(d, s, K: int) -> DeltaSequence:
    """Partial-sum gaps between ``s`` and ``d`` up to depth ``K``.

    The limit is exact when both tails are Zero or Geometric; for such tails
    the gap sequence is eventually monotone, so the liminf equals the limit.
    """
    d, s = as_spec(d), as_spec(s)
    d.require_real_nonnegative("d")
    s.require_real_nonnegative("s")
    sv = s.values(K).astype(float)
    if not is_nonincreasing(sv):
        bad = int(np.argmax(np.diff(sv) > 0)) + 2
        raise NotNonincreasing(f"s increases at position {bad}")
    dv = d.values(K).astype(float)
    vals = np.cumsum(sv - dv)
    limit = liminf = None
    if d.tail.kind != "ones" and s.tail.kind != "ones":
        limit = float(s.total() - d.total())
        liminf = limit
    return DeltaSequence(tuple(float(v) for v in vals), limit, liminf)


def direct_sum(a, b) -> SequenceSpec:
    """Multiset union of two sequences.

    Interleaving is deterministic: ``a``'s head, then ``b``'s head, then
    whichever tail is not Zero.
    """
    a, b = as_spec(a), as_spec(b)
    if not a.tail.is_zero and not b.tail.is_zero:
        raise IncompatibleTails("at most one summand may have a non-Zero tail")
    tail = b.tail if a.tail.is_zero else a.tail
    return SequenceSpec(a.head + b.head, tail)


def tail_difference_sign(s: SequenceSpec, d: SequenceSpec) -> tuple[int, int]:
    """Eventual sign of ``s_n - d_n`` and an index from which it is constant.

    Both arguments must be nonincreasing with Zero or Geometric tails.  Past
    both heads the difference is ``A*a**n - B*b**n``, which changes sign at
    most once; the returned index ``Q`` satisfies ``sign(s_n - d_n) == sign``
    for every ``n >= Q``.
    """
    for x in (s, d):
        if x.tail.kind == "ones":
            raise UnsupportedTail("Ones tails have no eventual difference sign here")
    P = max(len(s), len(d)) + 1
    cs, rs = (s.tail.c, s.tail.r) if not s.tail.is_zero else (0.0, 0.0)
    cd, rd = (d.tail.c, d.tail.r) if not d.tail.is_zero else (0.0, 0.0)
    if cs == 0.0 and cd == 0.0:
        return 0, P
    if cd == 0.0:
        return 1, P
    if cs == 0.0:
        return -1, P
    # log s_n - log d_n = alpha + beta * n for n >= P
    alpha = (math.log(cs) - (len(s) + 1) * math.log(rs)) - (math.log(cd) - (len(d) + 1) * math.log(rd))
    beta = math.log(rs) - math.log(rd)
    scale = max(1.0, abs(math.log(cs)), abs(math.log(cd)))
    if abs(beta) <= 1e-14:
        if abs(alpha) <= 1e-12 * scale:
            return 0, P
        return (1 if alpha > 0 else -1), P
    root = -alpha / beta
    Q = max(P, int(math.floor(root)) + 2)
    if Q > MAX_EXPLICIT_TERMS:
        raise UndecidableDepth(f"tail comparison settles only after index {Q}")
    return (1 if beta > 0 else -1), Q
