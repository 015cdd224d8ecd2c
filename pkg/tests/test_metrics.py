import math

import numpy as np
import pytest

from oracles import assignment_brute
from vlmd.exceptions import DimensionError, InvalidInput
from vlmd.metrics import correlation_matrix, freq_mape, hungarian_match, im_correlation_error


def test_identity_cost():
    a = hungarian_match(1.0 - np.eye(3))
    assert a.pairs == [(0, 0), (1, 1), (2, 2)] and a.total_cost == 0.0


def test_single_entry():
    a = hungarian_match([[0.7]])
    assert a.pairs == [(0, 0)] and a.total_cost == pytest.approx(0.7)


@pytest.mark.parametrize("shape", [(5, 5), (6, 5), (4, 6), (6, 6), (2, 1)])
def test_matches_exhaustive_search(shape):
    for seed in range(5):
        cost = np.random.default_rng(seed).random(shape)
        a = hungarian_match(cost)
        total, pairs = assignment_brute(cost)
        assert set(a.pairs) == pairs
        assert math.fsum(cost[r, c] for r, c in a.pairs) == total
        assert len(a.pairs) == min(shape)


def test_unmatched_reported():
    a = hungarian_match(np.array([[0.0], [1.0], [0.5]]))
    assert a.pairs == [(0, 0)] and a.unmatched_estimates == [1, 2]
    b = hungarian_match(np.array([[1.0, 0.0, 1.0]]))
    assert b.unmatched_truths == [0, 2]


def test_cost_errors():
    with pytest.raises(InvalidInput):
        hungarian_match(np.array([[np.nan]]))
    with pytest.raises(InvalidInput):
        hungarian_match(np.zeros((0, 2)))


def _modes(seed, K=3, C=4, T=200):
    return np.random.default_rng(seed).standard_normal((K, C, T))


def test_correlation_error_zero_for_identity_and_sign_flip():
    U = _modes(0)
    assert im_correlation_error(U, U)[0] == pytest.approx(0.0, abs=1e-12)
    assert im_correlation_error(-U, U)[0] == pytest.approx(0.0, abs=1e-12)


def test_replaced_mode_matches_direct_computation():
    U = _modes(1)
    est = U.copy()
    est[1] = np.random.default_rng(2).standard_normal(U[1].shape)
    err, assignment = im_correlation_error(est, U)
    r = np.mean([np.corrcoef(est[1, c], U[1, c])[0, 1] for c in range(U.shape[1])])
    assert assignment.pairs == [(0, 0), (1, 1), (2, 2)]
    assert err == pytest.approx((1 - abs(r)) / 3, abs=1e-12)


def test_correlation_matrix_direct():
    U, V = _modes(3, K=2), _modes(4, K=3)
    R = correlation_matrix(U, V)
    for i in range(2):
        for j in range(3):
            direct = np.mean([np.corrcoef(U[i, c], V[j, c])[0, 1] for c in range(4)])
            assert R[i, j] == pytest.approx(direct, abs=1e-12)


def test_zero_variance_channel_contributes_zero():
    U = _modes(5, K=1, C=2)
    est = U.copy()
    est[0, 1] = 3.0
    assert correlation_matrix(est, U)[0, 0] == pytest.approx(0.5, abs=1e-12)


def test_invariances():
    U = _modes(6, K=4)
    est = U + 0.5 * _modes(7, K=4)
    base = im_correlation_error(est, U)[0]
    perm = est[[2, 0, 3, 1]] * np.array([1, -1, -1, 1])[:, None, None]
    assert im_correlation_error(perm, U)[0] == pytest.approx(base, abs=1e-12)


def test_extra_estimates_left_unmatched():
    U = _modes(8, K=2)
    est = np.concatenate([_modes(9, K=1), U])
    err, a = im_correlation_error(est, U)
    assert err == pytest.approx(0.0, abs=1e-12)
    assert a.unmatched_estimates == [0]


def test_correlation_errors():
    with pytest.raises(InvalidInput):
        im_correlation_error(np.zeros((1, 1, 2)), np.zeros((1, 1, 2)))
    with pytest.raises(DimensionError):
        im_correlation_error(np.zeros((1, 2, 5)), np.zeros((1, 3, 5)))
    with pytest.raises(DimensionError):
        im_correlation_error(np.zeros((2, 5)), np.zeros((2, 5)))


def test_mape_examples():
    one = hungarian_match([[0.0]])
    assert freq_mape([100.0], [100.0], one) == 0.0
    assert freq_mape([110.0], [100.0], one) == pytest.approx(10.0)
    two = hungarian_match(1 - np.eye(2))
    assert freq_mape([5.1, 49.0], [5.0, 50.0], two) == pytest.approx(2.0)


def test_mape_uses_assignment_and_scale_invariant():
    a = hungarian_match(np.array([[1.0, 0.0], [0.0, 1.0]]))
    est, true = np.array([52.0, 4.0]), np.array([5.0, 50.0])
    m = freq_mape(est, true, a)
    assert m == pytest.approx(100 * np.mean([1 / 5, 2 / 50]))
    assert freq_mape(7 * est, 7 * true, a) == pytest.approx(m, rel=1e-12)


def test_mape_zero_truth():
    with pytest.raises(InvalidInput):
        freq_mape([1.0], [0.0], hungarian_match([[0.0]]))
