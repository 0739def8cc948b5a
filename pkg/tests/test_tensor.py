import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from dbrn.errors import DimensionError, ParameterError
from dbrn.tensor import (
    FeatureMap,
    cosine,
    cosine_matrix,
    l2_normalize,
    softmax,
    top_k_sum,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)
positive = st.floats(1e-3, 1e3)


def vectors(n):
    return arrays(np.float64, n, elements=finite)


@pytest.mark.parametrize(
    "v, expected",
    [([3, 4], [0.6, 0.8]), ([0, 0], [0, 0]), ([1, 1, 1, 1], [0.5] * 4)],
)
def test_l2_normalize(v, expected):
    np.testing.assert_allclose(l2_normalize(v), expected, atol=1e-15)


@pytest.mark.parametrize(
    "u, v, expected",
    [([1, 0], [1, 0], 1.0), ([1, 0], [0, 1], 0.0), ([1, 2], [2, 1], 4 / (math.sqrt(5) ** 2))],
)
def test_cosine_examples(u, v, expected):
    assert cosine(u, v) == pytest.approx(expected, abs=1e-15)
    assert oracles.cos(u, v) == pytest.approx(expected, abs=1e-15)


def test_cosine_length_mismatch():
    with pytest.raises(DimensionError):
        cosine([1, 2], [1, 2, 3])
    with pytest.raises(DimensionError):
        cosine_matrix(np.ones((2, 3)), np.ones((2, 4)))


def test_cosine_matrix_examples():
    np.testing.assert_array_equal(cosine_matrix(np.eye(2), np.eye(2)), np.eye(2))
    assert cosine_matrix([[1, 2]], [[2, 1]])[0, 0] == pytest.approx(0.8, abs=1e-15)
    a = np.array([[0.0, 0.0, 0.0], [1.0, 2.0, 3.0]])
    out = cosine_matrix(a, np.random.default_rng(0).normal(size=(4, 3)))
    np.testing.assert_array_equal(out[0], np.zeros(4))


def test_cosine_matrix_matches_scalar_loop(rng):
    for _ in range(1000):
        r1, r2 = rng.integers(1, 10, size=2)
        d = rng.integers(1, 9)
        a, b = rng.normal(size=(r1, d)), rng.normal(size=(r2, d))
        got = cosine_matrix(a, b)
        want = [[oracles.cos(x, y) for y in b.tolist()] for x in a.tolist()]
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)


@given(vectors(4), vectors(4), positive, positive)
def test_cosine_scale_invariant(u, v, alpha, beta):
    assume(np.linalg.norm(u) > 1e-6 and np.linalg.norm(v) > 1e-6)
    assert cosine(alpha * u, beta * v) == pytest.approx(cosine(u, v), abs=1e-12)


@given(vectors(5), vectors(5))
def test_cosine_symmetric_and_bounded(u, v):
    c = cosine(u, v)
    assert c == cosine(v, u)
    assert -1.0 <= c <= 1.0


@pytest.mark.parametrize(
    "values, k, expected",
    [([0.9, 0.1, 0.5], 2, 1.4), ([0.3, -0.2, 0.8], 3, 0.9), ([0.7, 0.7, 0.2], 1, 0.7)],
)
def test_top_k_sum_examples(values, k, expected):
    assert top_k_sum(values, k) == pytest.approx(sum(sorted(values)[-k:]), abs=1e-15)
    assert top_k_sum(values, k) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("k", [0, 4])
def test_top_k_sum_range(k):
    with pytest.raises(ParameterError):
        top_k_sum([1.0, 2.0, 3.0], k)


@given(st.lists(finite, min_size=1, max_size=12))
def test_top_k_sum_full_and_increments(values):
    n = len(values)
    assert top_k_sum(values, n) == pytest.approx(sum(values), abs=1e-9)
    sums = [top_k_sum(values, k) for k in range(1, n + 1)]
    # each step adds the next-largest value
    for k in range(1, n):
        kth = sorted(values, reverse=True)[k]
        assert sums[k] == pytest.approx(sums[k - 1] + kth, abs=1e-9)


@given(st.lists(st.floats(0, 1e3), min_size=1, max_size=12))
def test_top_k_sum_monotone_for_nonnegative(values):
    sums = [top_k_sum(values, k) for k in range(1, len(values) + 1)]
    assert all(b >= a for a, b in zip(sums, sums[1:]))


def test_softmax_examples():
    np.testing.assert_allclose(softmax([0, 0, 0]), [1 / 3] * 3, atol=1e-15)
    p = softmax([1000.0, 0.0])
    assert np.all(np.isfinite(p))
    np.testing.assert_allclose(p, [1.0, 0.0], atol=1e-300)
    np.testing.assert_allclose(softmax([math.log(2), 0.0]), [2 / 3, 1 / 3], atol=1e-15)


@given(st.lists(finite, min_size=1, max_size=8), st.floats(-1e3, 1e3))
def test_softmax_shift_invariant(z, c):
    p = softmax(z)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all((p >= 0) & (p <= 1))
    np.testing.assert_allclose(softmax(np.asarray(z) + c), p, atol=1e-12)


@given(st.lists(finite, min_size=2, max_size=8), st.randoms())
def test_softmax_permutation_equivariant(z, rnd):
    perm = list(range(len(z)))
    rnd.shuffle(perm)
    np.testing.assert_allclose(softmax(np.asarray(z)[perm]), softmax(z)[perm], atol=1e-15)


def test_feature_map_invariants():
    fm = FeatureMap(3, 2, 4, np.arange(24.0).reshape(6, 4))
    assert fm.r == 6
    assert fm.grid()[1, 0].tolist() == fm.data[3].tolist()  # row-major cells
    with pytest.raises(DimensionError):
        FeatureMap(3, 3, 4, np.zeros((6, 4)))
    with pytest.raises(ParameterError):
        FeatureMap(1, 1, 2, [[np.nan, 0.0]])
    with pytest.raises(ValueError):
        fm.data[0, 0] = 1.0
