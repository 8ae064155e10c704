import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import GS, UAV2, ray_point, ref_fspl, ref_sinr
from muibfd.duplex import swap_plan
from muibfd.errors import EmptyMapError
from muibfd.metrics import (
    GridAxis,
    GridMap,
    TddConfig,
    aggressors,
    area_fraction_below,
    ber_awgn,
    capacity_improvement_pct,
    cci_dbm,
    dbm_sum,
    downlink_capacity,
    downlink_sinr_db,
    q_function,
    required_si_cancellation_db,
    shannon_capacity,
    sinr_db,
    tdd_baseline_capacity,
)
from muibfd.propagation import link_budget, noise_floor_dbm
from muibfd.scenario import reference_scenario

PLAN = swap_plan(1, 2, 1, 2)


class TestCci:
    def test_single_aggressor_equals_link(self):
        s = reference_scenario()
        assert cci_dbm(s, PLAN, 1) == link_budget(s, (2, "uplink"), (1, "downlink"), 2).rx_power

    def test_two_equal_aggressors(self):
        assert dbm_sum([-50.0, -50.0]) == pytest.approx(-50 + 10 * math.log10(2), abs=1e-12)

    def test_empty_sum(self):
        assert dbm_sum([]) == -math.inf

    def test_aggressors(self):
        assert aggressors(PLAN, 1) == [2]
        assert aggressors(PLAN, 2) == [1]

    def test_xpd_subtracted(self):
        from dataclasses import replace
        s = reference_scenario()
        assert cci_dbm(replace(s, xpd_db=20.0), PLAN, 1) == pytest.approx(cci_dbm(s, PLAN, 1) - 20.0)

    def test_frequency_symmetry(self):
        # mirrored pair on the same ray: the two CCI paths differ only by the carrier
        s = reference_scenario(uav1_position=(2500.0, 120.0, 100.0))
        s = s.with_uav_positions({1: (2500.0, 60.0, 100.0), 2: (2500.0, -60.0, 100.0)})
        # victim 1 listens on 5.725 GHz, victim 2 on 5.675 GHz
        diff = cci_dbm(s, PLAN, 1) - cci_dbm(s, PLAN, 2)
        assert diff == pytest.approx(-20 * math.log10(5.725 / 5.675), abs=1e-9)

    def test_ray_decreasing(self):
        s = reference_scenario()
        vals = []
        for d in range(20, 400, 10):
            vals.append(cci_dbm(s.with_uav_positions({1: ray_point(float(d))}), PLAN, 1))
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_sinr_matches_reference_model(self):
        s = reference_scenario()
        for p in [(2450.0, 40.0, 80.0), (2600.0, -30.0, 90.0), (2700.0, 150.0, 70.0)]:
            t = s.with_uav_positions({1: p})
            assert downlink_sinr_db(t, PLAN, 1) == pytest.approx(ref_sinr(t, 1, 2, [2]), abs=1e-9)


class TestSinr:
    def test_worst_case_example(self):
        mpmath.mp.dps = 40
        lin = lambda x: mpmath.mpf(10) ** (mpmath.mpf(x) / 10)  # noqa: E731
        oracle = float(10 * mpmath.log10(lin(-73.53) / (lin(-40.60) + lin(-99.46))))
        assert sinr_db(-73.53, [-40.60], -99.46) == pytest.approx(oracle, abs=1e-9)
        assert sinr_db(-73.53, [-40.60], -99.46) == pytest.approx(-32.93, abs=0.05)

    def test_equal_powers(self):
        assert sinr_db(-90, [], -90) == 0.0

    def test_absent_aggressor(self):
        assert sinr_db(-70, [-math.inf], -100) == sinr_db(-70, [], -100)

    # terms kept within 40 dB of each other so a change stays above double rounding
    @given(st.floats(-120, -60), st.floats(-40, 40), st.floats(-40, 40), st.floats(0.01, 20))
    def test_monotone(self, n, di, ds, d):
        i, s = n + di, n + ds
        base = sinr_db(s, [i], n)
        assert sinr_db(s, [i + d], n) < base
        assert sinr_db(s + d, [i], n) > base


class TestCapacity:
    def test_zero_db(self):
        assert shannon_capacity(9e6, 0.0) == 9e6

    def test_twenty_db(self):
        oracle = 9e6 * math.log2(1 + 100)
        assert shannon_capacity(9e6, 20.0) == pytest.approx(oracle, rel=1e-12)
        assert shannon_capacity(9e6, 20.0) == pytest.approx(59.95e6, rel=1e-3)

    @given(st.floats(1, 1e9), st.floats(-50, 60), st.floats(0.1, 10))
    def test_linear_in_bandwidth(self, b, s, k):
        assert shannon_capacity(k * b, s) == pytest.approx(k * shannon_capacity(b, s), rel=1e-12)

    @given(st.floats(-100, 60), st.floats(0.01, 5))
    def test_positive_increasing(self, s, d):
        assert 0 < shannon_capacity(1e6, s) < shannon_capacity(1e6, s + d)

    def test_downlink_capacity(self):
        s = reference_scenario()
        assert downlink_capacity(s, PLAN, 1) == shannon_capacity(9e6, downlink_sinr_db(s, PLAN, 1))


class TestTdd:
    def test_example(self):
        s = reference_scenario(uav1_position=UAV2)
        snr = 36 - ref_fspl(math.dist(GS, UAV2), 5.675e9) - (-174 + 10 * math.log10(9e6) + 5)
        oracle = 0.4 * 9e6 * math.log2(1 + 10 ** (snr / 10))
        c = tdd_baseline_capacity(s, 1, 1)
        assert c == pytest.approx(oracle, rel=1e-12)
        assert c == pytest.approx(23.96e6, rel=0.02)

    def test_parameter_collapse(self):
        s = reference_scenario()
        lb = link_budget(s, ("gs", "downlink"), (1, "downlink"), 2)
        tdd = TddConfig(eirp_dbm=lb.tx_power + lb.tx_gain, duty=1.0, rx_gain_dbi=lb.rx_gain)
        snr = lb.rx_power - noise_floor_dbm(9e6, 5.0)
        assert tdd_baseline_capacity(s, 1, 2, tdd) == pytest.approx(shannon_capacity(9e6, snr), rel=1e-12)

    def test_zero_duty(self):
        s = reference_scenario()
        assert tdd_baseline_capacity(s, 1, 2, TddConfig(duty=0.0)) == 0.0


class TestImprovement:
    def test_examples(self):
        assert capacity_improvement_pct(5.0, 5.0) == 0.0
        assert capacity_improvement_pct(1.0, 0.4) == pytest.approx(150.0)
        assert capacity_improvement_pct(2.0, 1.0) == 100.0

    def test_zero_baseline(self):
        with pytest.raises(ZeroDivisionError):
            capacity_improvement_pct(1.0, 0.0)

    @given(st.floats(1e-3, 1e12))
    def test_self_zero(self, c):
        assert capacity_improvement_pct(c, c) == 0.0


def test_required_si():
    assert required_si_cancellation_db(17, -90) == 107
    assert required_si_cancellation_db(5, 5) == 0
    assert required_si_cancellation_db(36, -90) == 126


class TestBer:
    def test_qpsk_zero_db(self):
        oracle = 0.5 * math.erfc(1.0)  # Q(sqrt 2)
        assert ber_awgn("QPSK", 0.0) == pytest.approx(oracle, rel=1e-14)
        assert ber_awgn("QPSK", 0.0) == pytest.approx(0.0786, abs=1e-4)

    def test_q_function_mpmath(self):
        mpmath.mp.dps = 40
        for x in [0.0, 0.5, 1.0, 2.5, 4.0, 6.0, 8.0]:
            oracle = float(mpmath.erfc(mpmath.mpf(x) / mpmath.sqrt(2)) / 2)
            assert q_function(x) == pytest.approx(oracle, rel=1e-10)

    @pytest.mark.parametrize("mod", ["BPSK", "QPSK", "16QAM", "64QAM"])
    def test_monotone_to_zero(self, mod):
        vals = [ber_awgn(mod, s) for s in np.arange(-5, 30, 0.5)]
        assert all(a > b for a, b in zip(vals, vals[1:]) if a > 0)
        assert vals[-1] < 1e-12

    def test_unknown(self):
        with pytest.raises(ValueError):
            ber_awgn("8PSK", 10.0)

    def test_16qam_monte_carlo(self):
        # Gray-mapped 16QAM over AWGN, 1e7 bits
        ebn0 = 10 ** (10.5 / 10)
        rng = np.random.default_rng(16)
        nsym = 2_500_000
        bits = rng.integers(0, 2, (nsym, 4), dtype=np.int8)
        gray = {(0, 0): -3, (0, 1): -1, (1, 1): 1, (1, 0): 3}
        lut = np.zeros((2, 2))
        for k, v in gray.items():
            lut[k] = v
        i = lut[bits[:, 0], bits[:, 1]]
        q = lut[bits[:, 2], bits[:, 3]]
        es = 10.0  # mean symbol energy of the +-1, +-3 grid
        n0 = es / (4 * ebn0)
        sigma = math.sqrt(n0 / 2)
        ri = i + rng.normal(0, sigma, nsym)
        rq = q + rng.normal(0, sigma, nsym)

        def demod(r):
            b0 = (r > 0).astype(np.int8)
            b1 = (np.abs(r) < 2).astype(np.int8)
            return b0, b1

        d0, d1 = demod(ri)
        d2, d3 = demod(rq)
        errors = ((d0 != bits[:, 0]).sum() + (d1 != bits[:, 1]).sum()
                  + (d2 != bits[:, 2]).sum() + (d3 != bits[:, 3]).sum())
        mc = errors / (4 * nsym)
        assert ber_awgn("16QAM", 10.5) == pytest.approx(mc, rel=0.2)


class TestGrid:
    def grid(self, values, mask=None):
        v = np.asarray(values, float)
        return GridMap(GridAxis(0, 1, v.size), GridAxis(0, 1, 1), GridAxis(0, 1, 1), v,
                       np.ones(v.size, bool) if mask is None else mask, "dB")

    def test_all_below(self):
        assert area_fraction_below(self.grid([1, 2, 3]), 10) == 1.0

    def test_half(self):
        assert area_fraction_below(self.grid([1, 20]), 10) == 0.5

    def test_masked_ignored(self):
        g = self.grid([1, 20, 30], np.array([True, True, False]))
        assert np.isnan(g.values[0, 0, 2])
        assert area_fraction_below(g, 10) == 0.5

    def test_empty(self):
        with pytest.raises(EmptyMapError):
            area_fraction_below(self.grid([1, 2], np.array([False, False])), 0)

    def test_cells_order(self):
        g = GridMap(GridAxis(0, 1, 2), GridAxis(10, 1, 2), GridAxis(100, 1, 2), np.arange(8), np.ones(8, bool), "dB")
        cells = list(g.cells())
        assert [c[3] for c in cells] == list(range(8))
        assert [c[:3] for c in cells[:3]] == [(0, 10, 100), (1, 10, 100), (0, 11, 100)]
