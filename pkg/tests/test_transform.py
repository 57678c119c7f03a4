import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from outails import (
    DomainError,
    OUParams,
    PaperTransform,
    RngSeed,
    SaturationWarning,
    Side,
    SplineTransform,
    TailKind,
    TransformRangeError,
    UnsupportedSideError,
    apply,
    apply_flagged,
    hill_estimator,
    increment_tail_index,
    invert,
    marginal_cdf,
    stationary_tail_index,
    transform_from_dict,
    transition_tail_index,
)

STD = OUParams(alpha=1.0, tau=math.sqrt(2.0))  # sigma^2 = 1


def std_normal_cdf(x):
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


class TestPaperTransform:
    def test_fixed_points(self):
        h = PaperTransform()
        assert apply(h, 0.0) == 0.0
        assert_allclose(apply(h, 1.0), 2.0 * (math.exp(0.2) - 1.0) + 1.0, rtol=1e-15)
        assert_allclose(apply(h, -1.0), -2.0 * (math.exp(0.1) - 1.0) - 1.0, rtol=1e-15)

    def test_strictly_increasing(self):
        h = PaperTransform()
        grid = np.linspace(-8.0, 8.0, 4001)
        assert np.all(np.diff(apply(h, grid)) > 0)

    def test_tail_growth(self):
        h = PaperTransform()
        assert h.tail_growth(Side.RIGHT) == 0.2
        assert h.tail_growth("left") == 0.1


class TestInvert:
    def test_round_trip_grid(self):
        h = PaperTransform()
        for x in np.linspace(-5.0, 5.0, 41):
            assert abs(invert(h, apply(h, x)) - x) <= 1e-9

    def test_zero(self):
        assert invert(PaperTransform(), 0.0) == 0.0

    def test_paper_example_value(self):
        y = 2.0 * (math.exp(0.2) - 1.0) + 1.0
        assert_allclose(invert(PaperTransform(), y), 1.0, atol=1e-12)

    def test_huge_targets(self):
        h = PaperTransform()
        for y in (1e250, -1e250, 1e10, -1e10):
            x = invert(h, y)
            assert abs(apply(h, x) - y) <= max(1e-10, 1e-12 * abs(y))

    def test_out_of_range(self):
        h = PaperTransform()
        with pytest.raises(TransformRangeError):
            invert(h, 1e300)
        with pytest.raises(TransformRangeError):
            invert(h, math.inf)
        with pytest.raises(TransformRangeError):
            invert(h, math.nan)


class TestSaturation:
    def test_apply_flagged(self):
        h = PaperTransform()
        vals, flags = apply_flagged(h, np.array([0.0, 1.0, 80.0, -90.0]))
        assert list(flags) == [False, False, True, True]
        assert vals[2] == 1e300 and vals[3] == -1e300

    def test_apply_warns(self):
        with pytest.warns(SaturationWarning):
            out = apply(PaperTransform(), 100.0)
        assert out == 1e300


class TestSpline:
    def make(self):
        return SplineTransform.continuous(
            a2=0.0, a3=1.0, b_plus=0.2, b_minus=0.1, x1=-1.5, x2=2.0
        )

    def test_continuous_factory(self):
        h = self.make()
        for knot in (h.x1, h.x2):
            left = apply(h, knot - 1e-12)
            right = apply(h, knot + 1e-12)
            assert abs(left - right) < 1e-9

    def test_round_trip_all_pieces(self):
        h = self.make()
        for x in (-6.0, -1.5001, -0.2, 0.0, 1.9, 2.0001, 5.5):
            y = apply(h, x)
            assert abs(apply(h, invert(h, y)) - y) <= max(1e-10, 1e-12 * abs(y))

    def test_monotone_grid(self):
        h = self.make()
        grid = np.linspace(-10.0, 10.0, 5001)
        assert np.all(np.diff(apply(h, grid)) > 0)

    def test_discontinuous_rejected(self):
        h = self.make()
        with pytest.raises(DomainError):
            SplineTransform(
                a1=h.a1 * 1.01, a2=h.a2, a3=h.a3, a4=h.a4,
                b_plus=h.b_plus, b_minus=h.b_minus, x1=h.x1, x2=h.x2,
            )

    def test_bad_knots_rejected(self):
        with pytest.raises(DomainError):
            SplineTransform.continuous(a2=-3.0, a3=1.0, b_plus=0.2, b_minus=0.1, x1=1.0, x2=2.0)

    def test_factory_needs_sign_change(self):
        with pytest.raises(DomainError):
            SplineTransform.continuous(a2=5.0, a3=1.0, b_plus=0.2, b_minus=0.1, x1=-1.0, x2=2.0)

    def test_serialization_round_trip(self):
        h = self.make()
        d = h.to_dict()
        again = transform_from_dict(d)
        assert again == h
        assert json.dumps(d, sort_keys=True) == json.dumps(again.to_dict(), sort_keys=True)

    def test_paper_serialization(self):
        h = PaperTransform()
        assert transform_from_dict(h.to_dict()) == h


class TestMarginalCdf:
    def test_median_and_one_sigma(self):
        h = PaperTransform()
        assert_allclose(marginal_cdf(h, STD, apply(h, 0.0)), 0.5, atol=1e-12)
        assert_allclose(marginal_cdf(h, STD, apply(h, 1.0)), std_normal_cdf(1.0), rtol=1e-10)

    def test_monotone(self):
        h = PaperTransform()
        ys = np.linspace(-30.0, 30.0, 101)
        vals = marginal_cdf(h, STD, ys)
        assert np.all(np.diff(vals) >= 0)

    def test_clamps_with_flag(self):
        h = PaperTransform()
        with pytest.warns(SaturationWarning):
            lo = marginal_cdf(h, STD, -1e305)
        with pytest.warns(SaturationWarning):
            hi = marginal_cdf(h, STD, 1e305)
        assert (lo, hi) == (0.0, 1.0)


class TestTailIndices:
    def test_stationary_values(self):
        h = PaperTransform()
        assert_allclose(stationary_tail_index(h, STD, "right").index, 2.5, rtol=1e-12)
        assert_allclose(stationary_tail_index(h, STD, "left").index, 5.0, rtol=1e-12)

    def test_linear_in_alpha(self):
        h = PaperTransform()
        one = stationary_tail_index(h, OUParams(0.05, 1.0), "right").index
        two = stationary_tail_index(h, OUParams(0.10, 1.0), "right").index
        assert_allclose(two, 2.0 * one, rtol=1e-12)

    def test_tau_normalization_invariance(self):
        # (alpha, tau) -> (alpha, 1) with h~(x) = h(tau x) leaves beta unchanged
        tau = 1.7
        h = SplineTransform.continuous(a2=0.1, a3=1.2, b_plus=0.3, b_minus=0.15, x1=-1.0, x2=1.4)
        h_tilde = SplineTransform.continuous(
            a2=0.1, a3=1.2 * tau, b_plus=0.3 * tau**2, b_minus=0.15 * tau**2,
            x1=-1.0 / tau, x2=1.4 / tau,
        )
        for side in (Side.LEFT, Side.RIGHT):
            a = stationary_tail_index(h, OUParams(0.4, tau), side).index
            b = stationary_tail_index(h_tilde, OUParams(0.4, 1.0), side).index
            assert_allclose(a, b, rtol=1e-12)

    def test_transition_value_and_monotonicity(self):
        h = PaperTransform()
        p = OUParams(0.05, 1.0)
        got = transition_tail_index(h, p, 10.0, "right")
        assert_allclose(got.index, 0.05 / (0.2 * (1.0 - math.exp(-1.0))), rtol=1e-12)
        assert got.kind is TailKind.TRANSITION and got.elapsed == 10.0
        stat = stationary_tail_index(h, p, "right").index
        prev = math.inf
        for elapsed in (0.5, 2.0, 10.0, 50.0):
            idx = transition_tail_index(h, p, elapsed, "right").index
            assert stat < idx < prev
            prev = idx
        assert_allclose(transition_tail_index(h, p, 1e4, "right").index, stat, rtol=1e-12)

    def test_transition_domain(self):
        with pytest.raises(DomainError):
            transition_tail_index(PaperTransform(), STD, 0.0, "right")

    def test_increment_dominating_side(self):
        h = PaperTransform()
        got = increment_tail_index(h, STD)
        assert got.side is Side.RIGHT and got.kind is TailKind.INCREMENT
        assert_allclose(got.index, 2.5, rtol=1e-12)

    def test_increment_mirrored(self):
        mirrored = SplineTransform.continuous(
            a2=0.0, a3=1.0, b_plus=0.1, b_minus=0.2, x1=-1.5, x2=1.5
        )
        got = increment_tail_index(mirrored, STD)
        assert got.side is Side.LEFT
        assert_allclose(got.index, stationary_tail_index(mirrored, STD, "left").index, rtol=1e-12)

    def test_increment_indeterminate(self):
        h = SplineTransform.continuous(a2=0.0, a3=1.0, b_plus=0.2, b_minus=0.2, x1=-1.0, x2=1.0)
        with pytest.raises(UnsupportedSideError):
            increment_tail_index(h, STD)


class TestSimulationConsistency:
    def test_right_tail_hill_near_prediction(self):
        g = RngSeed(31).generator()
        y = apply(PaperTransform(), g.standard_normal(100_000))
        est = hill_estimator(y, "right", 2.0)
        se = est.index / math.sqrt(est.k_used)
        assert abs(est.index - 2.5) <= 3.0 * se

    def test_increment_tail_quick(self):
        g = RngSeed(32).generator()
        rho = math.exp(-1.0)
        z1 = g.standard_normal(100_000)
        z2 = rho * z1 + math.sqrt(1 - rho * rho) * g.standard_normal(100_000)
        h = PaperTransform()
        est = hill_estimator(apply(h, z2) - apply(h, z1), "right", 2.0)
        assert 2.1 <= est.index <= 3.0
