import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fraccable.cq import apply_history, checksum_partial_sums, weights

GAMMAS = [0.3, 0.5, 0.7, -0.3, -0.5, -0.7]


def test_limit_cases():
    d = weights(1.0, 0.5, 5).d
    np.testing.assert_array_equal(d, [2.0, -2.0, 0.0, 0.0, 0.0])
    np.testing.assert_array_equal(weights(0.0, 0.1, 4).d, [1.0, 0.0, 0.0, 0.0])


def test_half_order_values():
    np.testing.assert_allclose(weights(0.5, 1.0, 4).d, [1.0, -0.5, -0.125, -0.0625], rtol=1e-15)


@pytest.mark.parametrize("gamma", GAMMAS)
def test_against_mpmath_binomial(gamma):
    tau = 0.01
    d = weights(gamma, tau, 200).d
    mpmath.mp.dps = 30
    for i in (0, 1, 2, 17, 199):
        exact = mpmath.mpf(tau) ** (-gamma) * (-1) ** i * mpmath.binomial(gamma, i)
        assert d[i] == pytest.approx(float(exact), rel=1e-13)


@pytest.mark.parametrize("gamma", GAMMAS)
def test_sign_pattern(gamma):
    d = weights(gamma, 0.1, 300).d
    assert d[0] == pytest.approx(0.1 ** (-gamma))
    if gamma > 0:
        assert np.all(d[1:] < 0)
    else:
        assert np.all(d > 0)


def test_rejects_bad_input():
    for args in [(0.5, 0.0, 4), (0.5, -1.0, 4), (0.5, 1.0, 0), (1.5, 1.0, 4), (0.5, 1.0, 2.5)]:
        with pytest.raises(ValueError):
            weights(*args)


def test_apply_history_examples():
    w = weights(0.5, 1.0, 4)
    v = np.array([[3.0], [5.0], [7.0], [11.0]])
    assert apply_history(w, v, 1) == pytest.approx([3.0])
    assert apply_history(weights(0.0, 1.0, 4), np.full(4, 2.5), 4) == pytest.approx(2.5)
    assert apply_history(w, np.ones(4), 4) == pytest.approx(0.3125)
    with pytest.raises(ValueError):
        apply_history(w, np.ones(3), 4)


def test_apply_history_order():
    # sum_{i} d_i v(t_{n-i}): the newest value pairs with d_0
    w = weights(0.5, 1.0, 3)
    v = np.array([1.0, 10.0, 100.0])
    assert apply_history(w, v, 3) == pytest.approx(100 - 0.5 * 10 - 0.125 * 1)


def test_checksum_examples():
    assert checksum_partial_sums(weights(0.5, 0.3, 1)) == pytest.approx(1.0)
    assert checksum_partial_sums(weights(0.5, 0.3, 2)) == pytest.approx(0.5)


def test_checksum_decay_rate():
    ns = 2 ** np.arange(10, 17)
    sums = [checksum_partial_sums(weights(0.5, 1.0, int(n))) for n in ns]
    assert all(0 < s <= 1 for s in sums) and np.all(np.diff(sums) < 0)
    slope = np.polyfit(np.log(ns), np.log(sums), 1)[0]
    assert abs(slope + 0.5) <= 0.1


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_fractional_integral_of_one_first_order(alpha):
    exact = 1.0 / math.gamma(alpha + 1)
    errs = []
    for n in (64, 128, 256, 512):
        w = weights(-alpha, 1.0 / n, n)
        errs.append(abs(apply_history(w, np.ones(n), n) - exact))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all(np.abs(ratios - 2.0) <= 0.4)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(1e-3, 10.0))
def test_derivative_times_integral_is_identity(gamma, tau):
    n = 33
    d = weights(gamma, tau, n).d
    e = weights(-gamma, tau, n).d
    prod = np.convolve(d, e)[:n]
    assert prod[0] == pytest.approx(1.0, rel=1e-13)
    assert np.max(np.abs(prod[1:])) <= 1e-10
