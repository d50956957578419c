import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risask.special import gaussian_q, laguerre_half, marcum_q_half

from oracles import gaussian_q_oracle, laguerre_half_oracle, marcum_q_half_oracle


class TestGaussianQ:
    def test_zero_is_half(self):
        assert gaussian_q(0.0) == 0.5

    def test_tail_limits(self):
        assert gaussian_q(45.0) == 0.0
        assert gaussian_q(-45.0) == 1.0

    def test_deep_tail_does_not_underflow_early(self):
        # still a meaningful positive number far beyond x = 8
        assert 0.0 < gaussian_q(30.0) < 1e-190

    def test_against_quadrature_at_one(self):
        oracle = gaussian_q_oracle(1.0)
        assert abs(gaussian_q(1.0) - oracle) <= 1e-12 * oracle

    @pytest.mark.parametrize("x", np.linspace(-6.0, 6.0, 25))
    def test_against_quadrature_grid(self, x):
        oracle = gaussian_q_oracle(x)
        assert abs(gaussian_q(x) - oracle) <= 1e-12 * max(oracle, 1e-12)

    @given(st.floats(-37.0, 37.0))
    @settings(max_examples=200, deadline=None)
    def test_complement_symmetry(self, x):
        assert abs(gaussian_q(x) + gaussian_q(-x) - 1.0) <= 1e-14

    def test_strictly_decreasing(self):
        xs = np.linspace(-8.0, 8.0, 200)
        q = gaussian_q(xs)
        assert np.all(np.diff(q) < 0.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            gaussian_q(float("nan"))
        with pytest.raises(ValueError):
            gaussian_q(float("inf"))


class TestMarcumQHalf:
    @pytest.mark.parametrize("a", [0.0, 0.5, 1.0, 3.0, 10.0])
    def test_b_zero_is_one(self, a):
        assert marcum_q_half(a, 0.0) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("b", [0.1, 1.0, 2.5])
    def test_central_case_two_tails(self, b):
        assert marcum_q_half(0.0, b) == pytest.approx(2.0 * gaussian_q(b), rel=1e-15)

    def test_against_chisq_quadrature_spot(self):
        oracle = marcum_q_half_oracle(1.5, 2.0)
        assert abs(marcum_q_half(1.5, 2.0) - oracle) <= 1e-10

    def test_monotone_in_both_arguments(self):
        grid = np.linspace(0.0, 5.0, 12)
        for b in grid:
            vals = marcum_q_half(grid, b)
            assert np.all(np.diff(vals) >= -1e-15)
        for a in grid:
            vals = marcum_q_half(a, grid)
            assert np.all(np.diff(vals) <= 1e-15)

    def test_range(self):
        a, b = np.meshgrid(np.linspace(0, 8, 15), np.linspace(0, 8, 15))
        q = marcum_q_half(a, b)
        assert np.all((q >= 0.0) & (q <= 1.0))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            marcum_q_half(-0.1, 1.0)
        with pytest.raises(ValueError):
            marcum_q_half(1.0, -2.0)


class TestLaguerreHalf:
    def test_at_zero_exactly_one(self):
        assert laguerre_half(0.0) == 1.0

    def test_series_oracle_minus_one(self):
        oracle = laguerre_half_oracle(-1.0)
        assert abs(laguerre_half(-1.0) - oracle) <= 1e-10 * abs(oracle)

    def test_series_oracle_minus_ten(self):
        oracle = laguerre_half_oracle(-10.0)
        assert abs(laguerre_half(-10.0) - oracle) <= 1e-8 * abs(oracle)

    def test_at_least_one_and_monotone(self):
        xs = -np.linspace(0.0, 50.0, 200)
        vals = laguerre_half(xs)
        assert np.all(vals >= 1.0)
        # nonincreasing in x on (-inf, 0] means nondecreasing in K = -x
        assert np.all(np.diff(vals) >= 0.0)

    def test_variance_positivity_bound(self):
        # keeps the cascade variance factor nonnegative for any Rician K
        ks = np.linspace(0.0, 50.0, 500)
        vals = laguerre_half(-ks)
        assert np.all(vals * vals <= (16.0 / math.pi ** 2) * (1.0 + ks) * (1.0 + 1e-12))

    def test_rejects_positive(self):
        with pytest.raises(ValueError):
            laguerre_half(0.5)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            laguerre_half(float("-inf"))
