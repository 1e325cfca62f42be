import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tslab._kernels import ball_max, ball_sum, max_sq, offsets


def brute(F, M, op):
    out = np.full(F.shape, 0.0 if op == "sum" else -np.inf)
    idx = list(itertools.product(*[range(s) for s in F.shape]))
    for x in idx:
        vals = [F[y] for y in idx if sum((a - b) ** 2 for a, b in zip(x, y)) <= M]
        out[x] = sum(vals) if op == "sum" else max(vals)
    return out


def test_max_sq_open_and_closed():
    assert max_sq(2.0, closed=False) == 3
    assert max_sq(2.0, closed=True) == 4
    assert max_sq(1.5, closed=False) == 2
    assert max_sq(0.5, closed=False) == 0
    # radius just above an integer root is not affected by rounding noise
    assert max_sq(np.sqrt(5) * (1 + 1e-14), closed=False) == 4
    assert max_sq(np.sqrt(5), closed=True) == 5


def test_offsets_count_matches_lattice():
    assert len(offsets(1, 4)) == 5
    assert len(offsets(2, 1)) == 5
    assert len(offsets(2, 2)) == 9
    assert len(offsets(3, 1)) == 7


@pytest.mark.parametrize("shape", [(11,), (7, 6), (4, 5, 3)])
@pytest.mark.parametrize("M", [0, 1, 2, 5, 9])
def test_ball_sum_and_max_match_enumeration(shape, M, rng):
    F = rng.normal(size=shape)
    s = brute(F, M, "sum")
    m = brute(F, M, "max")
    for mode in ("exact", "fast"):
        np.testing.assert_allclose(ball_sum(F, M, mode), s, rtol=1e-12, atol=1e-12)
        np.testing.assert_array_equal(ball_max(F, M, mode), m)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 12), st.integers(1, 20), st.integers(0, 2**31 - 1))
def test_ball_sum_is_linear_and_fast_agrees(M, N, seed):
    r = np.random.default_rng(seed)
    A, B = r.normal(size=(N, 5)), r.normal(size=(N, 5))
    lhs = ball_sum(2 * A - B, M, "fast")
    rhs = 2 * ball_sum(A, M, "exact") - ball_sum(B, M, "exact")
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)
