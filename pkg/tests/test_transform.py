import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opfractal.transform import (
    cos2pi,
    functional_eq_residual,
    mu_hat,
    mu_hat_values,
    tail_bound,
    truncation_depth,
)


def direct_product(t, lam=0.25, depth=60):
    # independent oracle: plain math.cos, no reduction, fixed large depth
    p = 1.0
    for k in range(1, depth + 1):
        p *= math.cos(2 * math.pi * t * lam**k)
    return p


@pytest.mark.parametrize(
    "t, expected",
    [
        (30.0, 0.5046124145297286),
        (120.0, 0.5046124145297286),
        (10.0, 0.3803094606584578),
        (2.0, -0.692628912699653),
    ],
)
def test_frozen_values(t, expected):
    assert mu_hat(t).value == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("t", [0.5, 2.0, 3.7, 10.0, 30.0, 125.0, 1000.25])
def test_agrees_with_direct_product(t):
    v = mu_hat(t)
    assert abs(v.value - direct_product(t)) <= v.tail_bound + 1e-12


def test_trivial_points():
    assert mu_hat(0.0).value == 1.0
    assert mu_hat(0.0).depth == 1
    assert mu_hat(1.0).value == 0.0
    assert mu_hat(5.0).value == 0.0
    assert mu_hat(4.0**20).value == 0.0


def test_large_argument_depth():
    assert truncation_depth(4.0**20) == 31
    assert mu_hat(4.0**20).depth == 31


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_rejects_bad_tol(bad):
    with pytest.raises(ValueError):
        mu_hat(1.0, tol=bad)


@pytest.mark.parametrize("lam", [0.0, 1.0, 1.5])
def test_rejects_bad_ratio(lam):
    with pytest.raises(ValueError):
        mu_hat(1.0, lam=lam)


def test_functional_equation_exact_points():
    assert functional_eq_residual(30.0) == 0.0
    assert functional_eq_residual(7.5) == 0.0


def test_cos2pi_quarter_periods_are_exact():
    u = np.array([0.25, 0.75, 1.25, -0.25, 0.5, 3.0, 2.5])
    assert list(cos2pi(u)) == [0.0, 0.0, 0.0, 0.0, -1.0, 1.0, -1.0]


def test_depth_is_minimal():
    for t in [1.0, 17.0, 300.0, 1e6]:
        k = truncation_depth(t)
        assert tail_bound(t, 0.25, k) <= 1e-12
        if k > 1:
            x = 2 * math.pi * t * 0.25**k
            assert tail_bound(t, 0.25, k - 1) > 1e-12 or x / 0.75 > 0.5


@given(st.integers(min_value=1, max_value=4**12))
def test_zero_at_even_valuation_integers(n):
    v = (n & -n).bit_length() - 1
    if v % 2 == 0:
        assert mu_hat(float(n)).value == 0.0


@given(st.floats(min_value=-1e4, max_value=1e4, allow_nan=False))
def test_even_and_bounded(t):
    a, b = mu_hat(t).value, mu_hat(-t).value
    assert a == b
    assert abs(a) <= 1.0


@given(st.floats(min_value=-2e3, max_value=2e3, allow_nan=False))
def test_functional_equation(t):
    assert functional_eq_residual(t) <= 1e-10


@given(st.lists(st.floats(min_value=-1e5, max_value=1e5, allow_nan=False), min_size=1, max_size=30))
def test_vector_path_bit_identical(ts):
    vec = mu_hat_values(np.array(ts))
    for t, v in zip(ts, vec):
        assert v == mu_hat(t).value


@given(st.floats(min_value=0, max_value=1e5), st.sampled_from([1e-6, 1e-9, 1e-12]))
def test_tail_bound_respects_tol(t, tol):
    v = mu_hat(t, tol=tol)
    assert v.tail_bound <= tol
