import math

import numpy as np
import pytest

from risask.channel import (
    ChannelParams,
    Scenario,
    clt_moments,
    effective_channel_variance,
    sample_cascade_gain,
    sample_cascade_gains,
    sample_direct_real,
    sample_direct_reals,
)


def rayleigh_params(num_elements, sigma_h2=1.0, sigma_n2=1.0, sigma_hd2=1.0):
    return ChannelParams(num_elements=num_elements, mu1=0j, mu2=0j,
                         sigma_h2=sigma_h2, sigma_hd2=sigma_hd2, sigma_n2=sigma_n2)


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            ChannelParams(1, 0j, 0j, 1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            ChannelParams(8, 0j, 0j, 0.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            ChannelParams(8, 0j, 0j, 1.0, -1.0, 1.0)
        with pytest.raises(ValueError):
            ChannelParams(8, 0j, 0j, 1.0, 1.0, 0.0)

    def test_rician_factors(self):
        p = ChannelParams.from_rician(16, 2.0, 0.5, sigma_h2=2.0, sigma_n2=1.0)
        assert p.rice_k1 == pytest.approx(2.0, rel=1e-14)
        assert p.rice_k2 == pytest.approx(0.5, rel=1e-14)

    def test_default_direct_coupling(self):
        p = ChannelParams.from_rician(16, 0.0, 0.0, sigma_h2=3.0, sigma_n2=1.0)
        assert p.sigma_hd2 == 9.0


class TestCltMoments:
    @pytest.mark.parametrize("num", [2, 32, 64, 128])
    def test_rayleigh_closed_form_bitwise(self, num):
        m = clt_moments(rayleigh_params(num))
        assert m.alpha == num * math.pi / 4
        assert m.beta == num * (16.0 - math.pi * math.pi) / 16.0

    def test_rayleigh_scales_linearly_in_elements(self):
        m32 = clt_moments(rayleigh_params(32))
        m64 = clt_moments(rayleigh_params(64))
        assert m64.alpha == 2.0 * m32.alpha
        assert m64.beta == 2.0 * m32.beta

    def test_moment_identities(self):
        p = ChannelParams.from_rician(32, 1.0, 2.0, sigma_h2=1.7, sigma_n2=1.0)
        m = clt_moments(p)
        assert m.mu_f == m.alpha * 1.7
        assert m.sigma_f2 == m.beta * 1.7 * 1.7

    def test_beta_positive_over_rician_grid(self):
        for k1 in np.linspace(0.0, 50.0, 15):
            for k2 in np.linspace(0.0, 50.0, 15):
                p = ChannelParams.from_rician(8, k1, k2, 1.0, 1.0)
                assert clt_moments(p).beta > 0.0

    def test_rician_moments_match_sampled_channel(self):
        p = ChannelParams.from_rician(32, 1.0, 1.0, sigma_h2=1.0, sigma_n2=1.0)
        m = clt_moments(p)
        n = 400_000
        g = sample_cascade_gains(p, n, np.random.default_rng(42))
        se_mean = g.std(ddof=1) / math.sqrt(n)
        assert abs(g.mean() - m.mu_f) <= 4.0 * se_mean
        s2 = g.var(ddof=1)
        m4 = np.mean((g - g.mean()) ** 4)
        se_var = math.sqrt(max(m4 - s2 * s2, 0.0) / n)
        assert abs(s2 - m.sigma_f2) <= 4.0 * se_var


class TestSampling:
    def test_deterministic_given_stream(self):
        p = rayleigh_params(16)
        a = sample_cascade_gains(p, 100, np.random.default_rng(7))
        b = sample_cascade_gains(p, 100, np.random.default_rng(7))
        assert np.array_equal(a, b)
        assert sample_cascade_gain(p, np.random.default_rng(3)) == sample_cascade_gain(
            p, np.random.default_rng(3))

    def test_degenerate_scatter_limit(self):
        p = ChannelParams(num_elements=16, mu1=2.0 + 0j, mu2=0.0 + 1.5j,
                          sigma_h2=1e-30, sigma_hd2=0.0, sigma_n2=1.0)
        g = sample_cascade_gain(p, np.random.default_rng(0))
        assert g == pytest.approx(16 * 2.0 * 1.5, rel=1e-10)

    def test_rayleigh_sample_mean_matches_clt_mean(self):
        p = rayleigh_params(32)
        n = 300_000
        g = sample_cascade_gains(p, n, np.random.default_rng(11))
        se = g.std(ddof=1) / math.sqrt(n)
        assert abs(g.mean() - 8.0 * math.pi) <= 3.5 * se

    def test_gains_positive(self):
        p = rayleigh_params(8)
        g = sample_cascade_gains(p, 10_000, np.random.default_rng(5))
        assert np.all(g > 0.0)

    def test_direct_real_degenerate(self):
        p = rayleigh_params(8, sigma_hd2=0.0)
        assert sample_direct_real(p, np.random.default_rng(1)) == 0.0

    def test_direct_real_statistics(self):
        p = rayleigh_params(8, sigma_hd2=1.0)
        n = 400_000
        z = sample_direct_reals(p, n, np.random.default_rng(9))
        assert abs(z.mean()) <= 3.5 / math.sqrt(2.0 * n)
        s2 = z.var(ddof=1)
        assert abs(s2 - 0.5) <= 3.5 * 0.5 * math.sqrt(2.0 / n)


class TestEffectiveVariance:
    def test_cases(self):
        p = rayleigh_params(32, sigma_hd2=1.0)
        m = clt_moments(p)
        blocked = effective_channel_variance(m, p, Scenario.BLOCKED)
        unblocked = effective_channel_variance(m, p, Scenario.UNBLOCKED)
        assert blocked == 2.0 * m.sigma_f2
        assert unblocked == 2.0 * m.sigma_f2 + 1.0

    def test_scenario_continuity_at_zero_direct_variance(self):
        p = rayleigh_params(32, sigma_hd2=0.0)
        m = clt_moments(p)
        assert (effective_channel_variance(m, p, Scenario.BLOCKED)
                == effective_channel_variance(m, p, Scenario.UNBLOCKED))
