import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from outails import (
    DataError,
    DomainError,
    InsufficientDataError,
    RngSeed,
    Side,
    empirical_tail,
    hill_estimator,
    loglog_tail_fit,
    tail_curve,
)


def pareto_sample(beta, n, seed):
    u = RngSeed(seed).generator().random(n)
    return u ** (-1.0 / beta)


class TestHill:
    def test_hand_example(self):
        # 1/beta = (ln e^2 + ln e) / 2 = 1.5
        est = hill_estimator([math.e**2, math.e, 1.0], "right", 100.0)
        assert_allclose(est.index, 2.0 / 3.0, rtol=1e-15)
        assert est.k_used == 3 and est.fraction_pct == 100.0

    def test_scale_invariance(self):
        data = pareto_sample(2.0, 500, 1)
        a = hill_estimator(data, "right", 10.0)
        assert hill_estimator(64.0 * data, "right", 10.0).index == a.index
        assert_allclose(hill_estimator(137.5 * data, "right", 10.0).index, a.index, rtol=1e-13)

    def test_matches_direct_formula(self):
        # brute-force evaluation of the log-spacing sum, descending order
        data = pareto_sample(1.7, 200, 2)
        k = 20
        v = np.sort(data)[::-1]
        inv = sum(math.log(v[i] / v[k - 1]) for i in range(k - 1)) / (k - 1)
        est = hill_estimator(data, "right", 10.0)
        assert est.k_used == k
        assert_allclose(est.index, 1.0 / inv, rtol=1e-12)

    def test_pareto_mc_oracle(self):
        beta = 2.5
        est = hill_estimator(pareto_sample(beta, 1_000_000, 3), "right", 2.0)
        se = beta / math.sqrt(est.k_used)
        assert abs(est.index - beta) <= 3.0 * se

    def test_left_equals_negated_right(self):
        data = RngSeed(4).generator().standard_normal(1000)
        left = hill_estimator(data, Side.LEFT, 5.0)
        right = hill_estimator(-data, Side.RIGHT, 5.0)
        assert left.index == right.index

    def test_errors(self):
        with pytest.raises(InsufficientDataError):
            hill_estimator([1.0], "right", 50.0)
        with pytest.raises(DataError):
            hill_estimator([3.0, -1.0, -2.0], "right", 100.0)  # nonpositive threshold
        with pytest.raises(DomainError):
            hill_estimator([1.0, 2.0], "right", 0.0)
        with pytest.raises(DataError):
            hill_estimator([2.0, 2.0, 2.0], "right", 100.0)  # zero log spacing


class TestLogLogFit:
    def test_exact_power_tail(self):
        beta = 2.5
        n = 10_000
        values = (np.arange(1, n + 1) / n) ** (-1.0 / beta)
        est = loglog_tail_fit(values, "right", 0.05)
        assert_allclose(est.index, beta, rtol=1e-10)
        assert est.r_squared > 1.0 - 1e-12

    def test_two_point_slope(self):
        # exact two-point fit: slope = (ln(2/n) - ln(1/n)) / (ln v2 - ln v1)
        v1, v2 = 10.0, 2.0
        est = loglog_tail_fit([v1, v2], "right", 0.9999)
        expected = -(math.log(2.0 / 2.0) - math.log(1.0 / 2.0)) / (math.log(v2) - math.log(v1))
        assert_allclose(est.index, expected, rtol=1e-12)

    def test_pareto_mc_oracle(self):
        est = loglog_tail_fit(pareto_sample(2.5, 1_000_000, 5), "right", 0.05)
        assert abs(est.index - 2.5) <= 0.25

    def test_agreement_with_hill(self):
        data = pareto_sample(2.5, 1_000_000, 6)
        for frac in (0.02, 0.05):
            ls = loglog_tail_fit(data, "right", frac).index
            hill = hill_estimator(data, "right", 100.0 * frac).index
            assert abs(ls - hill) / hill <= 0.15

    def test_left_side(self):
        data = -pareto_sample(3.0, 50_000, 7)
        est = loglog_tail_fit(data, "left", 0.05)
        assert abs(est.index - 3.0) <= 0.4

    def test_errors(self):
        with pytest.raises(DataError):
            loglog_tail_fit([5.0] * 100, "right", 0.5)  # singular x-spread
        with pytest.raises(InsufficientDataError):
            loglog_tail_fit([-1.0] * 100, "right", 0.5)  # no positive tail values
        with pytest.raises(DomainError):
            loglog_tail_fit([1.0, 2.0], "right", 1.5)


class TestEmpiricalTail:
    def test_extremes(self):
        data = [1.0, 2.0, 3.0]
        assert empirical_tail(data, 0.0, "right") == 1.0
        assert empirical_tail(data, 3.5, "right") == 0.0

    def test_count(self):
        assert_allclose(empirical_tail([1.0, 2.0, 3.0], 1.5, "right"), 2.0 / 3.0)

    def test_left(self):
        assert_allclose(empirical_tail([-3.0, -1.0, 2.0], 2.0, "left"), 1.0 / 3.0)

    def test_strict_inequality(self):
        assert empirical_tail([1.0, 1.0], 1.0, "right") == 0.0


class TestTailCurve:
    def test_shapes_and_values(self):
        ln_v, ln_p = tail_curve([4.0, 1.0, 2.0, -1.0], "right")
        assert_allclose(ln_v, np.log([4.0, 2.0, 1.0]))
        assert_allclose(ln_p, np.log(np.array([1, 2, 3]) / 4.0))
