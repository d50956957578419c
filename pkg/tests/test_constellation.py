import math

import numpy as np
import pytest

from risask.channel import ChannelParams, Scenario, clt_moments
from risask.constellation import (
    Constellation,
    Side,
    SnrAllocation,
    avg_energy,
    build,
    constellation_csv_rows,
    snr_inverse,
    snr_map,
    snr_scale,
    traditional_equispaced,
)


def rayleigh_link(num_elements=32):
    p = ChannelParams.from_rician(num_elements, 0.0, 0.0, 1.0, 1.0)
    return p, clt_moments(p)


class TestBuild:
    def test_one_sided_amplitudes(self):
        c = build(Side.ONE_SIDED, [1.0, 4.0])
        assert np.allclose(c.amplitudes, [1.0, 2.0])
        assert c.size == 2

    def test_two_sided_mirroring(self):
        c = build(Side.TWO_SIDED, [1.0, 4.0])
        assert np.allclose(c.amplitudes, [-2.0, -1.0, 1.0, 2.0])
        assert c.size == 4
        assert c.mirror_index(0) == 3 and c.mirror_index(1) == 2

    def test_rejects_bad_orderings(self):
        with pytest.raises(ValueError):
            build(Side.ONE_SIDED, [4.0, 1.0])
        with pytest.raises(ValueError):
            build(Side.ONE_SIDED, [-1.0, 1.0])
        with pytest.raises(ValueError):
            build(Side.ONE_SIDED, [1.0, 1.0 + 1e-12])
        with pytest.raises(ValueError):
            build(Side.TWO_SIDED, [0.0, 1.0])  # zero level would collide mirrored

    def test_two_sided_symbol_set_symmetric(self):
        c = build(Side.TWO_SIDED, [0.5, 2.0, 3.0])
        assert c.amplitudes.sum() == pytest.approx(0.0, abs=1e-15)
        energies, counts = np.unique(c.symbol_energies, return_counts=True)
        assert np.all(counts == 2)
        assert len(energies) == 3


class TestTraditional:
    def test_one_sided_m2(self):
        c = traditional_equispaced(Side.ONE_SIDED, 2, 2.0)
        assert np.allclose(c.amplitudes, [0.0, 2.0])

    def test_two_sided_m4(self):
        c = traditional_equispaced(Side.TWO_SIDED, 4, 5.0 / 4.0)
        assert np.allclose(c.amplitudes, [-1.5, -0.5, 0.5, 1.5])

    def test_odd_two_sided_rejected(self):
        with pytest.raises(ValueError):
            traditional_equispaced(Side.TWO_SIDED, 5, 1.0)

    @pytest.mark.parametrize("side", [Side.ONE_SIDED, Side.TWO_SIDED])
    @pytest.mark.parametrize("size", [2, 4, 8, 16])
    def test_average_energy_met(self, side, size):
        if side is Side.TWO_SIDED and size % 2:
            return
        e_av = 3.7
        c = traditional_equispaced(side, size, e_av)
        assert avg_energy(c) == pytest.approx(e_av, rel=1e-12)

    def test_avg_energy_examples(self):
        assert avg_energy(build(Side.ONE_SIDED, [1.0, 4.0])) == pytest.approx(2.5)
        assert avg_energy(build(Side.TWO_SIDED, [1.0, 4.0])) == pytest.approx(2.5)


class TestSnrMapping:
    def test_reference_gamma(self):
        p, m = rayleigh_link(32)
        c = build(Side.ONE_SIDED, [1.0])
        alloc = snr_map(c, m, p, Scenario.BLOCKED)
        expected = 2.0 * m.beta + m.alpha * m.alpha
        assert alloc.gammas[0] == pytest.approx(expected, rel=1e-12)

    def test_zero_energy_zero_gamma(self):
        p, m = rayleigh_link(32)
        c = traditional_equispaced(Side.ONE_SIDED, 4, 1.0)
        alloc = snr_map(c, m, p, Scenario.BLOCKED)
        assert alloc.gammas[0] == 0.0

    def test_unblocked_scale_includes_direct_term(self):
        p, m = rayleigh_link(32)
        blocked = snr_scale(m, p, Scenario.BLOCKED)
        unblocked = snr_scale(m, p, Scenario.UNBLOCKED)
        assert unblocked == pytest.approx(blocked + 1.0 / p.sigma_n2, rel=1e-12)

    @pytest.mark.parametrize("side", [Side.ONE_SIDED, Side.TWO_SIDED])
    @pytest.mark.parametrize("scenario", [Scenario.BLOCKED, Scenario.UNBLOCKED])
    def test_round_trip(self, side, scenario):
        p, m = rayleigh_link(64)
        c = traditional_equispaced(side, 8, 2.25)
        back = snr_inverse(snr_map(c, m, p, scenario), m, p)
        assert back.side is side
        assert np.allclose(back.energies, c.energies, rtol=1e-12)

    def test_monotone(self):
        p, m = rayleigh_link(32)
        c = traditional_equispaced(Side.ONE_SIDED, 8, 1.0)
        alloc = snr_map(c, m, p, Scenario.BLOCKED)
        assert np.all(np.diff(alloc.gammas) > 0.0)

    def test_gamma_av_is_mean(self):
        p, m = rayleigh_link(32)
        c = traditional_equispaced(Side.TWO_SIDED, 6, 1.0)
        alloc = snr_map(c, m, p, Scenario.BLOCKED)
        assert alloc.gamma_av == pytest.approx(np.mean(alloc.gammas), rel=1e-14)
        assert alloc.gamma_av == pytest.approx(
            snr_scale(m, p, Scenario.BLOCKED) * avg_energy(c), rel=1e-12)


class TestAllocationValidation:
    def test_mean_mismatch_rejected(self):
        with pytest.raises(ValueError):
            SnrAllocation(side=Side.ONE_SIDED, scenario=Scenario.BLOCKED,
                          gammas=(1.0, 2.0), gamma_av=2.0)

    def test_decreasing_rejected(self):
        with pytest.raises(ValueError):
            SnrAllocation(side=Side.ONE_SIDED, scenario=Scenario.BLOCKED,
                          gammas=(2.0, 1.0), gamma_av=1.5)

    def test_size(self):
        alloc = SnrAllocation(side=Side.TWO_SIDED, scenario=Scenario.BLOCKED,
                              gammas=(1.0, 3.0), gamma_av=2.0)
        assert alloc.size == 4


class TestCsv:
    def test_rows_shape_and_fields(self):
        p, m = rayleigh_link(32)
        c = build(Side.TWO_SIDED, [1.0, 4.0])
        alloc = snr_map(c, m, p, Scenario.BLOCKED)
        rows = constellation_csv_rows(c, alloc)
        assert len(rows) == 4
        first = rows[0].split(",")
        assert first[0] == "two" and first[1] == "4" and first[2] == "1"
        assert float(first[3]) == pytest.approx(-2.0)
        assert float(first[4]) == pytest.approx(4.0)
        assert float(first[5]) == pytest.approx(alloc.gammas[1], rel=1e-12)

    def test_gamma_empty_without_allocation(self):
        c = build(Side.ONE_SIDED, [1.0, 4.0])
        rows = constellation_csv_rows(c)
        assert all(r.endswith(",") for r in rows)
