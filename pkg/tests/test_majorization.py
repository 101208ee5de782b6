from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specdiag.errors import LengthMismatch, OutOfRange
from specdiag.majorization import (
    Order,
    fan_necessary,
    kadison_check,
    majorizes,
    strong_majorizes,
    thompson_majorizes,
    unitary_diagonal_check,
    weak_majorizes,
)
from specdiag.oracle import haar_orthogonal
from specdiag.seqspec import ONES, SequenceSpec, geometric


def brute_weak(d, s):
    d = np.sort(np.abs(d))[::-1]
    s = np.sort(s)[::-1]
    return bool(np.all(np.cumsum(s) - np.cumsum(d) >= -1e-12))


def test_weak_examples():
    rep = weak_majorizes([1.0, 1.0, 0.0], [3.0, 1.0, 1.0], 3)
    assert rep.verdict and rep.gaps == [2.0, 2.0, 3.0]
    rep = weak_majorizes([2.0, 1.0], [2.0, 1.0], 2)
    assert rep.verdict and rep.gaps == [0.0, 0.0]
    rep = weak_majorizes([2.0], [1.0], 1)
    assert not rep.verdict and rep.gaps == [-1.0]


def test_weak_finds_violation_deep_in_tail():
    # gaps fall to -0.5 in the limit, so some finite prefix fails
    d = SequenceSpec((), geometric(1.0, 0.9))
    s = SequenceSpec((5.0,), geometric(0.5, 0.5))
    rep = weak_majorizes(d, s, 3)
    assert not rep.verdict
    assert rep.gaps[-1] < 0 and len(rep.gaps) > 3


def test_thompson_examples():
    rep = thompson_majorizes([8.0, 2.0, 2.0], [10.0, 5.0, 3.0])
    assert rep.verdict and rep.gaps == [2.0, 5.0, 6.0] and rep.final_gap == 4.0
    rep = thompson_majorizes([0.0, 0.0], [1.0, 1.0])
    assert rep.verdict and rep.final_gap == 0.0
    rep = thompson_majorizes([2.0, 0.0], [2.0, 1.0])
    assert not rep.verdict and rep.final_gap == -1.0


def test_thompson_rejects_tails():
    with pytest.raises(LengthMismatch):
        thompson_majorizes(SequenceSpec((), geometric(1, 0.5)), [1.0])


def test_strong_examples():
    assert strong_majorizes([2.0, 1.0], [2.0, 1.0], 2).verdict
    c = 0.4
    rep = strong_majorizes(SequenceSpec((), geometric(c, 0.5)), SequenceSpec((), geometric(1.0, 0.5)), 5)
    assert not rep.verdict
    assert rep.details["liminf"] == pytest.approx((1 - c) * 2)
    rep = strong_majorizes([1.0, 1.0], [1.5, 0.5], 2)
    assert rep.verdict and rep.gaps == [0.5, 0.0]


def test_plain_majorization():
    assert majorizes([1.0, 1.0], [1.5, 0.5], 2).verdict
    assert not majorizes([1.0, 0.9], [1.5, 0.5], 2).verdict


def test_fan_examples():
    rep = fan_necessary(np.diag([3.0, 1.0]))
    assert rep.verdict and rep.gaps == pytest.approx([0.0, 0.0])
    rep = fan_necessary(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert rep.verdict


def test_fan_on_haar_orbit():
    s = np.array([4.0, 2.0, 1.0, 0.5, 0.1])
    for seed in range(50):
        U = haar_orthogonal(5, seed, 0).data
        V = haar_orthogonal(5, seed, 1).data
        assert fan_necessary(U @ np.diag(s) @ V).verdict


def test_kadison_examples():
    rep = kadison_check([0.5, 0.5, 1.0])
    assert (rep.a, rep.b, rep.verdict) == (0.0, 1.0, True)
    rep = kadison_check([0.7])
    assert rep.a == 0.0 and rep.b == pytest.approx(0.3) and not rep.verdict
    rep = kadison_check(SequenceSpec((), geometric(0.4, 0.5)))
    assert rep.a == pytest.approx(0.8) and rep.b == 0.0 and not rep.verdict
    with pytest.raises(OutOfRange):
        kadison_check([1.5])


def test_unitary_examples():
    rep = unitary_diagonal_check(SequenceSpec((0.0, 0.0), ONES))
    assert rep.verdict and rep.final_gap == pytest.approx(0.0)
    assert not unitary_diagonal_check(SequenceSpec((0.6, 0.8), ONES)).verdict
    rep = unitary_diagonal_check(SequenceSpec((0.9, 0.92, 0.95), ONES))
    assert rep.verdict and rep.details["defect_sum"] == pytest.approx(0.23)
    assert rep.order is Order.UNITARY


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(0, 3), min_size=1, max_size=7), st.randoms(use_true_random=False))
def test_weak_is_permutation_invariant(vals, rnd):
    s = sorted((v * 1.3 for v in vals), reverse=True)
    d = list(vals)
    rnd.shuffle(d)
    a = weak_majorizes(d, s, len(s)).verdict
    b = weak_majorizes(sorted(d), s, len(s)).verdict
    assert a == b == brute_weak(d, s)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 2), st.floats(0, 2)), min_size=1, max_size=6))
def test_thompson_implies_weak(pairs):
    d = [p[0] for p in pairs]
    s = sorted((p[1] for p in pairs), reverse=True)
    if thompson_majorizes(d, s).verdict:
        assert weak_majorizes(d, s, len(s)).verdict


def test_thompson_brute_small_grid():
    grid = [0.0, 0.5, 1.0, 1.5]
    for d in itertools.product(grid, repeat=2):
        for s in itertools.combinations_with_replacement(grid, 2):
            s = sorted(s, reverse=True)
            dm = sorted(d, reverse=True)
            weak = dm[0] <= s[0] and sum(dm) <= sum(s)
            final = dm[0] - dm[1] <= s[0] - s[1]
            assert thompson_majorizes(list(d), s).verdict == (weak and final)
