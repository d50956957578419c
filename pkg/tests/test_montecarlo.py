import math

import numpy as np
import pytest

from risask.channel import ChannelParams, Scenario, clt_moments, sample_cascade_gains
from risask.constellation import Side, build, snr_scale, traditional_equispaced
from risask.montecarlo import (
    McConfig,
    cascade_gain_draws,
    cascade_gain_draws_multi,
    pairwise_error_rate,
    simulate_sep,
    wilson_interval,
)
from risask.sep import pep_context, sep_union_bound


def rayleigh_params(num_elements=32, sigma_n2=1.0):
    return ChannelParams.from_rician(num_elements, 0.0, 0.0, 1.0, sigma_n2)


def constellation_at_db(side, size, db, params, scenario):
    m = clt_moments(params)
    scale = snr_scale(m, params, scenario)
    return traditional_equispaced(side, size, 10.0 ** (db / 10.0) / scale)


class TestWilson:
    def test_brackets_point_estimate(self):
        for errors, trials in [(0, 100), (1, 100), (50, 100), (100, 100)]:
            lo, hi = wilson_interval(errors, trials)
            assert 0.0 <= lo <= errors / trials <= hi <= 1.0

    def test_zero_errors_still_informative(self):
        lo, hi = wilson_interval(0, 10 ** 6)
        assert lo == 0.0
        assert 0.0 < hi < 1e-5

    def test_validation(self):
        with pytest.raises(ValueError):
            wilson_interval(5, 0)
        with pytest.raises(ValueError):
            wilson_interval(7, 5)


class TestDeterminism:
    def test_thread_count_invariance(self):
        params = rayleigh_params(16)
        c = constellation_at_db(Side.TWO_SIDED, 4, 10.0, params, Scenario.BLOCKED)
        results = [
            simulate_sep(c, params, Scenario.BLOCKED,
                         McConfig(trials=40_000, seed=9, threads=t))
            for t in (1, 4, 8)
        ]
        assert results[0].errors == results[1].errors == results[2].errors

    def test_batch_invariance(self):
        params = rayleigh_params(16)
        c = constellation_at_db(Side.ONE_SIDED, 4, 12.0, params, Scenario.UNBLOCKED)
        a = simulate_sep(c, params, Scenario.UNBLOCKED,
                         McConfig(trials=30_000, seed=4, batch=30_000))
        b = simulate_sep(c, params, Scenario.UNBLOCKED,
                         McConfig(trials=30_000, seed=4, batch=911))
        assert a.errors == b.errors

    def test_seed_changes_result(self):
        params = rayleigh_params(16)
        c = constellation_at_db(Side.TWO_SIDED, 4, 10.0, params, Scenario.BLOCKED)
        a = simulate_sep(c, params, Scenario.BLOCKED, McConfig(trials=40_000, seed=1))
        b = simulate_sep(c, params, Scenario.BLOCKED, McConfig(trials=40_000, seed=2))
        assert a.errors != b.errors

    def test_cascade_draw_determinism_and_offset(self):
        params = rayleigh_params(8)
        full = cascade_gain_draws(params, 1000, seed=77)
        tail = cascade_gain_draws(params, 400, seed=77, start=600)
        assert np.array_equal(full[600:], tail)


class TestPhysics:
    def test_noise_free_two_level_mirror_is_error_free(self):
        params = ChannelParams.from_rician(32, 0.0, 0.0, 1.0, sigma_n2=1e-300)
        c = build(Side.TWO_SIDED, [1.0])
        est = simulate_sep(c, params, Scenario.BLOCKED,
                           McConfig(trials=100_000, seed=3))
        assert est.errors == 0

    def test_bound_dominates_simulation(self):
        params = rayleigh_params(32)
        scen = Scenario.BLOCKED
        c = constellation_at_db(Side.TWO_SIDED, 4, 15.0, params, scen)
        est = simulate_sep(c, params, scen, McConfig(trials=10 ** 6, seed=21))
        rep = sep_union_bound(pep_context(c, clt_moments(params), params, scen))
        assert est.sep <= rep.sep_upper + 3.0 * est.half_width

    def test_ci_width_shrinks_like_root_two(self):
        params = rayleigh_params(32)
        c = constellation_at_db(Side.ONE_SIDED, 4, 15.0, params, Scenario.BLOCKED)
        a = simulate_sep(c, params, Scenario.BLOCKED, McConfig(trials=200_000, seed=5))
        b = simulate_sep(c, params, Scenario.BLOCKED, McConfig(trials=400_000, seed=5))
        ratio = b.half_width / a.half_width
        assert ratio == pytest.approx(1.0 / math.sqrt(2.0), rel=0.1)

    def test_unblocked_beats_blocked(self):
        params = rayleigh_params(32)
        cb = constellation_at_db(Side.TWO_SIDED, 4, 12.0, params, Scenario.BLOCKED)
        cu = constellation_at_db(Side.TWO_SIDED, 4, 12.0, params, Scenario.UNBLOCKED)
        eb = simulate_sep(cb, params, Scenario.BLOCKED, McConfig(trials=400_000, seed=8))
        eu = simulate_sep(cu, params, Scenario.UNBLOCKED, McConfig(trials=400_000, seed=8))
        assert eu.sep <= eb.sep + 3.0 * (eb.half_width + eu.half_width)

    def test_kernel_moments_match_reference_sampler(self):
        # counter-based kernel vs generator-based numpy sampler, same law
        params = ChannelParams.from_rician(24, 1.0, 0.5, 1.3, 1.0)
        n = 150_000
        a = cascade_gain_draws(params, n, seed=13)
        b = sample_cascade_gains(params, n, np.random.default_rng(99))
        se = math.sqrt(a.var(ddof=1) / n + b.var(ddof=1) / n)
        assert abs(a.mean() - b.mean()) <= 4.0 * se

    def test_multi_cell_shares_draws(self):
        p0 = rayleigh_params(16)
        p1 = ChannelParams.from_rician(16, 1.0, 1.0, 1.0, 1.0)
        multi = cascade_gain_draws_multi([p0, p1], 2000, seed=55)
        single = cascade_gain_draws(p0, 2000, seed=55)
        assert np.array_equal(multi[0], single)
        # the cells ride identical scatter draws, so the line-of-sight cell
        # averages higher even over a modest sample
        assert multi[1].mean() > multi[0].mean()

    def test_multi_cell_rejects_mixed_geometry(self):
        with pytest.raises(ValueError):
            cascade_gain_draws_multi([rayleigh_params(16), rayleigh_params(32)],
                                     100, seed=1)


class TestPairwise:
    def test_validation(self):
        params = rayleigh_params(16)
        c = constellation_at_db(Side.TWO_SIDED, 4, 10.0, params, Scenario.BLOCKED)
        with pytest.raises(ValueError):
            pairwise_error_rate(c, params, Scenario.BLOCKED, 1, 1,
                                McConfig(trials=10, seed=1))
        with pytest.raises(ValueError):
            pairwise_error_rate(c, params, Scenario.BLOCKED, 0, 9,
                                McConfig(trials=10, seed=1))

    def test_independent_of_full_simulation_stream(self):
        params = rayleigh_params(16)
        c = constellation_at_db(Side.TWO_SIDED, 4, 10.0, params, Scenario.BLOCKED)
        est = pairwise_error_rate(c, params, Scenario.BLOCKED, 1, 2,
                                  McConfig(trials=50_000, seed=12))
        again = pairwise_error_rate(c, params, Scenario.BLOCKED, 1, 2,
                                    McConfig(trials=50_000, seed=12, threads=4))
        assert est.errors == again.errors
