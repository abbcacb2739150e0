import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cosmiclab.seqspace import (
    TruncatedGradientOperator,
    bound_audit,
    log_bounds,
    univariate_step,
    univariate_trajectory,
)


@pytest.mark.parametrize(
    "x,alpha,expected",
    [(0.0, 1.0, 1.0), (1.0, 1.0, 1 + math.exp(-1)), (-2.0, 0.5, -1.5)],
)
def test_univariate_step(x, alpha, expected):
    assert univariate_step(x, alpha) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("alpha", [0.0, -0.5, 1.5])
def test_step_size_must_be_in_unit_interval(alpha):
    with pytest.raises(ValueError):
        univariate_step(0.0, alpha)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(1e-6, 1.0))
def test_univariate_step_nonexpansive(x, y, alpha):
    assert abs(univariate_step(x, alpha) - univariate_step(y, alpha)) <= abs(x - y) * (1 + 1e-12) + 1e-12


class TestApply:
    def test_zero_vector(self):
        op = TruncatedGradientOperator(3)
        assert op.apply(np.zeros(3)) == pytest.approx([1, 1 / 4, 1 / 9], abs=1e-16)

    def test_twice_in_one_dimension(self):
        op = TruncatedGradientOperator(1)
        x = op.apply(op.apply(np.zeros(1)))
        assert x[0] == pytest.approx(1 + math.exp(-1), abs=1e-15)

    def test_separable(self):
        op = TruncatedGradientOperator(4)
        x = np.array([0.3, -2.0, 5.0, 1.0])
        y = x.copy()
        y[2] = -7.0
        tx, ty = op.apply(x), op.apply(y)
        assert np.array_equal(np.delete(tx, 2), np.delete(ty, 2))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            TruncatedGradientOperator(3).apply(np.zeros(4))

    def test_step_sizes(self):
        a = TruncatedGradientOperator(5).step_sizes
        assert a[0] == 1.0 and np.all(np.diff(a) < 0) and np.all(a > 0)

    def test_advance_matches_apply(self):
        op = TruncatedGradientOperator(16)
        rows = op.advance(np.zeros(16), 40)
        x = np.zeros(16)
        for row in rows:
            x = op.apply(x)
            assert np.array_equal(row, x)

    def test_no_overflow_far_left(self):
        op = TruncatedGradientOperator(2)
        with np.errstate(over="raise", invalid="raise"):
            assert op.apply(np.array([-1e6, 1e6])) == pytest.approx([-1e6 + 1, 1e6])


class TestLogBounds:
    def test_base_case(self):
        lo, hi = log_bounds(0, 1.0)
        assert lo == 0.0 and hi == pytest.approx(math.log(2))

    def test_one_step(self):
        lo, hi = log_bounds(1, 1.0)
        assert (lo, hi) == pytest.approx((math.log(2), math.log(4)))
        assert lo <= univariate_trajectory(1.0, 1)[1] <= hi

    def test_nine_steps(self):
        lo, hi = log_bounds(9, 1.0)
        assert (lo, hi) == pytest.approx((math.log(10), math.log(20)))
        assert lo <= univariate_trajectory(1.0, 9)[9] <= hi

    @pytest.mark.parametrize("alpha", [1.0, 1 / 4, 1 / 9, 1 / 100])
    def test_sandwich_and_monotone(self, alpha):
        xs = univariate_trajectory(alpha, 10_000)
        k = np.arange(len(xs))
        assert np.all(np.log(k + 1) + math.log(alpha) - 1e-12 <= xs)
        assert np.all(xs <= np.log(k + 1) + math.log(2) + 1e-12)
        assert np.all(np.diff(xs) > 0)


def test_bound_audit_flags_out_of_range():
    rows = bound_audit([10], [np.array([0.0, 5.0])])
    assert [r[-1] for r in rows] == [False, False]
    rows = bound_audit([0], [np.zeros(3)])
    assert all(r[-1] for r in rows)
