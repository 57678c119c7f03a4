import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from outails import (
    DomainError,
    OUParams,
    RngSeed,
    SamplePath,
    autocorrelation,
    increment_correlation,
    simulate_stationary,
    stationary_variance,
    transition_law,
)


class TestOUParams:
    def test_stationary_variance_values(self):
        assert stationary_variance(OUParams(0.5, 1.0)) == 1.0
        assert stationary_variance(OUParams(1.0, math.sqrt(2.0))) == pytest.approx(1.0, rel=1e-15)
        # direct formula: tau^2 / (2 alpha)
        assert_allclose(stationary_variance(OUParams(0.05, 1.0)), 1.0 / (2 * 0.05), rtol=1e-15)

    @pytest.mark.parametrize("alpha,tau", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
    def test_invalid_params(self, alpha, tau):
        with pytest.raises(DomainError):
            OUParams(alpha, tau)


class TestTransitionLaw:
    def test_zero_elapsed(self):
        assert transition_law(OUParams(0.7, 1.3), 0.0, 3.0) == (3.0, 0.0)

    def test_hand_value(self):
        # e^{-ln 2} = 1/2 and var = 1 * (1 - 1/4)
        mean, var = transition_law(OUParams(1.0, math.sqrt(2.0)), math.log(2.0), 1.0)
        assert_allclose(mean, 0.5, rtol=1e-12)
        assert_allclose(var, 0.75, rtol=1e-12)

    def test_relaxation_to_stationary(self):
        p = OUParams(0.05, 1.0)
        mean, var = transition_law(p, 1e4, 7.0)
        assert abs(mean) < 1e-12
        assert_allclose(var, 10.0, rtol=1e-12)

    def test_negative_elapsed_rejected(self):
        with pytest.raises(DomainError):
            transition_law(OUParams(1.0, 1.0), -0.1, 0.0)

    def test_variance_monotone_and_bounded(self):
        p = OUParams(0.3, 1.7)
        us = np.linspace(0.01, 30.0, 200)
        variances = np.array([transition_law(p, u, 0.0)[1] for u in us])
        assert np.all(np.diff(variances) > 0)
        assert np.all(variances < p.stationary_variance)

    def test_semigroup_composition(self):
        # mean: m_v(m_u(z)) = m_{u+v}(z); variance: s2_v + e^{-2 a v} s2_u = s2_{u+v}
        p = OUParams(0.4, 1.1)
        for u, v, z in [(0.3, 1.7, 2.0), (2.0, 2.0, -5.0), (0.01, 8.0, 0.7)]:
            m_u, s2_u = transition_law(p, u, z)
            m_uv, s2_uv = transition_law(p, u + v, z)
            m_v_of_mu, s2_v = transition_law(p, v, m_u)
            assert_allclose(m_v_of_mu, m_uv, rtol=1e-12)
            assert_allclose(s2_v + math.exp(-2 * p.alpha * v) * s2_u, s2_uv, rtol=1e-12)


class TestCorrelations:
    def test_autocorrelation(self):
        p = OUParams(0.05, 1.0)
        assert autocorrelation(p, 0.0) == 1.0
        assert_allclose(autocorrelation(p, 20.0), math.exp(-1.0), rtol=1e-15)
        assert autocorrelation(p, -13.0) == autocorrelation(p, 13.0)

    def test_increment_correlation_at_zero_and_delta(self):
        p = OUParams(0.05, 1.0)
        assert_allclose(increment_correlation(p, 20.0, 0.0), 1.0, rtol=1e-15)
        # algebraic simplification at k = delta: -(1 - e^{-alpha delta}) / 2
        assert_allclose(
            increment_correlation(p, 20.0, 20.0), -(1.0 - math.exp(-1.0)) / 2.0, rtol=1e-12
        )

    def test_increment_correlation_long_lag(self):
        p = OUParams(0.05, 1.0)
        far = increment_correlation(p, 20.0, 400.0)
        assert -1e-6 < far < 0.0

    def test_increment_correlation_continuous_at_delta(self):
        p = OUParams(0.07, 15.0)
        eps = 1e-9
        lo, mid, hi = (increment_correlation(p, 15.0, 15.0 + s) for s in (-eps, 0.0, eps))
        assert abs(lo - mid) < 1e-7 and abs(hi - mid) < 1e-7

    def test_domain_errors(self):
        p = OUParams(1.0, 1.0)
        with pytest.raises(DomainError):
            increment_correlation(p, 0.0, 1.0)
        with pytest.raises(DomainError):
            increment_correlation(p, -2.0, 1.0)
        with pytest.raises(DomainError):
            increment_correlation(p, 2.0, -1.0)


class TestSamplePath:
    def test_invariants(self):
        with pytest.raises(DomainError):
            SamplePath(0.0, 0.0, [1.0])
        with pytest.raises(DomainError):
            SamplePath(0.0, 1.0, [])

    def test_immutable_values(self):
        path = SamplePath(0.0, 1.0, [1.0, 2.0])
        with pytest.raises(ValueError):
            path.values[0] = 9.0

    def test_times_and_duration(self):
        path = SamplePath(5.0, 0.5, [0.0, 0.0, 0.0])
        assert_allclose(path.times, [5.0, 5.5, 6.0])
        assert path.duration == 1.0
        assert len(path) == 3


class TestSimulateStationary:
    def test_deterministic(self):
        p = OUParams(0.05, 1.0)
        a = simulate_stationary(p, 1000, 1.0, RngSeed(7, 3))
        b = simulate_stationary(p, 1000, 1.0, RngSeed(7, 3))
        assert np.array_equal(a.values, b.values)

    def test_streams_independent(self):
        p = OUParams(0.05, 1.0)
        a = simulate_stationary(p, 100, 1.0, RngSeed(7, 0))
        b = simulate_stationary(p, 100, 1.0, RngSeed(7, 1))
        assert not np.array_equal(a.values, b.values)

    def test_marginal_variance(self):
        # MC check against stationary_variance; the SE accounts for the
        # AR(1) autocorrelation of squared values
        p = OUParams(0.05, 1.0)
        n = 1_000_000
        x = simulate_stationary(p, n, 1.0, RngSeed(11)).values
        sig2 = p.stationary_variance
        phi2 = math.exp(-2 * p.alpha)
        se = sig2 * math.sqrt(2.0 * (1.0 + phi2) / (1.0 - phi2) / n)
        assert abs(x.var() - sig2) < 3.0 * se

    def test_lag_autocorrelation(self):
        p = OUParams(0.05, 1.0)
        x = simulate_stationary(p, 1_000_000, 1.0, RngSeed(12)).values
        x = x - x.mean()
        k = 20
        rho_hat = float(np.dot(x[:-k], x[k:]) / (len(x) - k)) / x.var()
        assert abs(rho_hat - math.exp(-1.0)) < 0.02

    def test_bad_args(self):
        p = OUParams(1.0, 1.0)
        with pytest.raises(DomainError):
            simulate_stationary(p, 0, 1.0, RngSeed(0))
        with pytest.raises(DomainError):
            simulate_stationary(p, 10, 0.0, RngSeed(0))


class TestRngSeed:
    def test_same_stream_identical(self):
        a = RngSeed(42, 5).generator().standard_normal(8)
        b = RngSeed(42, 5).generator().standard_normal(8)
        assert np.array_equal(a, b)

    def test_child_paths_differ(self):
        root = RngSeed(42)
        a = root.child_generator(0).standard_normal(8)
        b = root.child_generator(1).standard_normal(8)
        assert not np.array_equal(a, b)

    def test_validation(self):
        with pytest.raises(DomainError):
            RngSeed(-1)
        with pytest.raises(DomainError):
            RngSeed(2**64)
        with pytest.raises(DomainError):
            RngSeed(0, -1)
