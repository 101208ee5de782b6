from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import linalg as sla

from specdiag.construct_finite import (
    phase_reduce,
    projection_from_diagonal,
    rank_one,
    schur_horn,
    solve_2x2,
    splice,
    thompson_construct,
    unitary_from_diagonal,
    unitary_parameters,
)
from specdiag.errors import Infeasible, NotInteger, NotMajorized, OutOfRange
from specdiag.majorization import thompson_majorizes
from specdiag.seqspec import ONES, SequenceSpec


def svals(A):
    return sla.svdvals(np.asarray(A))


def test_solve_2x2_examples():
    assert np.allclose(solve_2x2(1, 1, 1.5, 0.5).data, [[1, 0.5], [0.5, 1]])
    assert np.allclose(solve_2x2(0, 0, 1, 1).data, [[0, 1], [-1, 0]])


def test_solve_2x2_rejects_infeasible():
    with pytest.raises(Infeasible) as err:
        solve_2x2(2, 0, 2, 1)
    assert err.value.failed


def test_schur_horn_examples():
    A = schur_horn([1, 1, 1, 1], [4, 0, 0, 0]).data
    assert np.allclose(np.diag(A), 1)
    assert np.allclose(np.sort(np.linalg.eigvalsh(A)), [0, 0, 0, 4])
    assert np.allclose(schur_horn([3, 1], [3, 1]).data, np.diag([3, 1]))
    assert np.allclose(schur_horn([2, 2], [3, 1]).data, [[2, 1], [1, 2]])


def test_schur_horn_rejects_non_majorized():
    with pytest.raises(NotMajorized) as err:
        schur_horn([3, 0], [2, 1])
    assert err.value.k == 1


@pytest.mark.parametrize(
    "d, s",
    [([8, 2, 2], [10, 5, 3]), ([2, 2, 2], [6, 1, 1]), ([3, 2, 1], [3, 2, 1]), ([0.0, 0.0], [1.0, 1.0])],
)
def test_thompson_examples(d, s):
    A = thompson_construct(d, s)
    assert A.is_real
    assert np.array_equal(A.diagonal(), np.asarray(d, dtype=float))
    assert np.allclose(svals(A.data), s, atol=1e-10)


def test_thompson_equal_is_diagonal():
    assert np.array_equal(thompson_construct([3.0, 2.0], [3.0, 2.0]).data, np.diag([3.0, 2.0]))


def test_thompson_complex_phases():
    d = np.array([-2.0, 3j, 0.5])
    A = thompson_construct(d, [4.0, 2.0, 1.0])
    assert A.field == "complex"
    assert np.array_equal(A.diagonal(), d)
    assert np.allclose(svals(A.data), [4, 2, 1], atol=1e-10)


def test_thompson_infeasible_names_failure():
    with pytest.raises(Infeasible) as err:
        thompson_construct([2.0, 0.0], [2.0, 1.0])
    assert "final inequality" in err.value.failed


def test_splice_keeps_host_diagonal():
    host = solve_2x2(1, 1, 1.5, 0.5).data
    block = solve_2x2(0.5, 0.25, 0.75, 0.25).data
    out = splice(host, block)
    assert np.allclose(np.diag(out)[:2], [1, 1]) and out[2, 2] == pytest.approx(0.25)
    assert np.allclose(svals(out), [1.5, 0.75, 0.25])


def test_rank_one_examples():
    assert np.allclose(rank_one([1.0, 1.0], 2.0, 2).data, [[1, 1], [1, 1]])
    A = rank_one([0.0], 1.0, 1).data
    assert A[0, 1] == 1.0 and np.count_nonzero(A) == 1
    A = rank_one([0.5, 0.0], 1.0, 2).data
    h = np.sqrt(0.5)
    assert np.allclose(A, np.outer([h, h, 0], [h, 0, h]))


def test_rank_one_rejects_excess():
    with pytest.raises(Infeasible):
        rank_one([0.8, 0.5], 1.0, 2)


def test_projection_examples():
    assert np.allclose(projection_from_diagonal([0.5, 0.5]).data, [[0.5, 0.5], [0.5, 0.5]])
    assert np.allclose(projection_from_diagonal([1, 0]).data, np.diag([1, 0]))
    P = projection_from_diagonal([0.5, 0.5, 1.0]).data
    assert np.allclose(P @ P, P, atol=1e-12) and np.trace(P) == pytest.approx(2)
    with pytest.raises(NotInteger):
        projection_from_diagonal([0.7])
    with pytest.raises(OutOfRange):
        projection_from_diagonal([1.2, -0.2])


def test_unitary_example_parameters():
    N, M, s = unitary_parameters(np.array([0.9, 0.92, 0.95]))
    assert (N, M) == (2, 1)
    assert np.allclose(s, [0.95, 1.0])
    w = unitary_from_diagonal([0.9, 0.92, 0.95])
    U = w.matrix.data
    assert U.shape == (4, 4)
    assert np.allclose(np.diag(U), [0.9, 0.92, 0.95, 1.0])
    assert np.linalg.norm(U.T @ U - np.eye(4)) <= 1e-10


def test_unitary_tight_and_identity():
    U = unitary_from_diagonal(SequenceSpec((0.0, 0.0), ONES)).matrix.data
    assert np.allclose(U[:2, :2], [[0, 1], [-1, 0]])
    assert np.allclose(U[2:, 2:], np.eye(U.shape[0] - 2)) and not U[:2, 2:].any()
    assert np.allclose(unitary_from_diagonal([1.0, 1.0, 1.0]).matrix.data, np.eye(3))


def test_unitary_infeasible():
    with pytest.raises(Infeasible):
        unitary_from_diagonal([0.6, 0.8])


def test_phase_reduce_examples():
    m, z = phase_reduce([-2, 3j])
    assert np.allclose(m, [2, 3]) and np.allclose(np.diag(z.data), [-1, -1j])
    m, z = phase_reduce([-1.0, 2.0])
    assert z.is_real and np.allclose(np.diag(z.data), [-1, 1])


@st.composite
def thompson_pairs(draw):
    n = draw(st.integers(2, 6))
    s = sorted(draw(st.lists(st.floats(0, 2), min_size=n, max_size=n)), reverse=True)
    d = draw(st.lists(st.floats(0, 2), min_size=n, max_size=n))
    return d, s


@settings(max_examples=80, deadline=None)
@given(thompson_pairs())
def test_thompson_round_trip_property(pair):
    d, s = pair
    if not thompson_majorizes(d, s).verdict:
        with pytest.raises(Infeasible):
            thompson_construct(d, s)
        return
    A = thompson_construct(d, s)
    assert np.array_equal(A.diagonal(), np.asarray(d))
    assert np.allclose(svals(A.data), s, atol=1e-8 * max(1, s[0]))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 3), min_size=1, max_size=8), st.integers(0, 2**31 - 1))
def test_schur_horn_round_trip_property(lam, seed):
    lam = np.sort(lam)[::-1]
    g = np.random.default_rng(seed)
    # a convex combination of permutations of lam is majorized by lam
    w = g.dirichlet(np.ones(3))
    d = sum(wi * g.permutation(lam) for wi in w)
    d[-1] = lam.sum() - d[:-1].sum()
    A = schur_horn(d, lam).data
    assert np.allclose(A, A.T)
    assert np.allclose(np.diag(A), d, atol=1e-12)
    assert np.allclose(np.sort(np.linalg.eigvalsh(A))[::-1], lam, atol=1e-8)
