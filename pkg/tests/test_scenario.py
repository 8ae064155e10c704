from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from muibfd.antenna import point_at
from muibfd.errors import UnknownReferenceError
from muibfd.scenario import (
    ChannelDef,
    RadioPort,
    Vec3,
    reference_scenario,
    distance,
    validate,
)


@pytest.fixture
def scen():
    return reference_scenario()


def codes(s):
    return [v.code for v in validate(s)]


def test_default_is_valid(scen):
    assert validate(scen) == []


def test_default_table_values(scen):
    assert all(u.antenna.tx_power == 17.0 for u in scen.uavs)
    assert scen.gs.downlink_tx.pattern.hpbw_el == 3.0
    assert scen.gs.downlink_tx.pattern.hpbw_az == 52.0
    assert scen.gs.downlink_tx.pattern.peak_gain == 18.2
    assert scen.gs.uplink_rx.pattern.peak_gain == 19.8
    assert scen.gs.uplink_rx.pattern.hpbw_az == 75.0
    assert scen.gs.downlink_tx.tx_power == 8.75
    assert scen.uav(2).position == (2500.0, 0.0, 100.0)
    assert scen.gs.position == (0.0, 0.0, 1.5)
    assert sorted(c.center_freq for c in scen.channels) == [5.675e9, 5.725e9]
    assert all(c.occupied_bw == 9e6 for c in scen.channels)
    u = scen.uav(1).antenna.pattern
    assert (u.peak_gain, u.hpbw_az, u.hpbw_el) == (15.0, 28.0, 28.0)


def test_uav_antenna_shared(scen):
    u = scen.uav(1)
    assert u.downlink_rx == (u.uplink_port.pattern, u.uplink_port.pointing)


def test_duplicate_channel(scen):
    s = replace(scen, channels=scen.channels + (ChannelDef(1, 5.9e9, 9e6, 1e6),))
    assert codes(s) == ["duplicate_channel_id"]


def test_duplicate_uav(scen):
    s = replace(scen, uavs=scen.uavs + (replace(scen.uavs[0], position=Vec3(0, 500, 50)),))
    assert "duplicate_uav_id" in codes(s)


def test_uav_at_gs(scen):
    s = scen.with_uav_positions({1: (0, 10, 1.5)}, reaim=True)
    s = replace(s, uavs=(replace(s.uavs[0], position=scen.gs.position), s.uavs[1]))
    assert "min_distance" in codes(s)


def test_tx_power_bounds(scen):
    u = scen.uavs[0]
    s = replace(scen, uavs=(replace(u, antenna=replace(u.antenna, tx_power=70.0)), scen.uavs[1]))
    assert codes(s) == ["tx_power_range"]


def test_below_ground(scen):
    s = replace(scen, uavs=(replace(scen.uavs[0], position=Vec3(2500, 100, -1)), scen.uavs[1]))
    assert codes(s) == ["position_below_ground"]


def test_overlapping_channels(scen):
    s = replace(scen, channels=(ChannelDef(1, 5.675e9, 9e6, 1e6), ChannelDef(2, 5.68e9, 9e6, 1e6)))
    assert codes(s) == ["channel_overlap"]


def test_channel_fields(scen):
    s = replace(scen, channels=(ChannelDef(1, -1.0, 0.0, -1.0),))
    assert set(codes(s)) == {"channel_freq", "channel_bw", "channel_guard"}


def test_raster_width():
    assert ChannelDef(1, 5.675e9, 9e6, 1e6).raster_width == 10e6


def test_unknown_refs(scen):
    with pytest.raises(UnknownReferenceError):
        scen.uav(9)
    with pytest.raises(UnknownReferenceError):
        scen.channel(9)


def test_validate_pure(scen):
    s = replace(scen, channels=scen.channels + (ChannelDef(1, 5.9e9, 9e6, 1e6),))
    assert validate(s) == validate(s)


def test_with_positions_reaims(scen):
    s = scen.with_uav_positions({1: (2600, 50, 80)})
    assert s.uav(1).antenna.pointing == point_at((2600, 50, 80), scen.gs.position)
    assert s.uav(2) == scen.uav(2)
    keep = scen.with_uav_positions({1: (2600, 50, 80)}, reaim=False)
    assert keep.uav(1).antenna.pointing == scen.uav(1).antenna.pointing


def test_with_positions_does_not_mutate(scen):
    before = scen.uav(1)
    scen.with_uav_positions({1: (0, 100, 10)})
    assert scen.uav(1) == before


@given(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4), st.floats(0, 1e3))
def test_vec_distance(x, y, z):
    a, b = Vec3(x, y, z), Vec3(1.0, 2.0, 3.0)
    assert distance(a, b) == pytest.approx((a - b).norm())
    assert (a - b) + b == pytest.approx(a)


def test_radio_port_type(scen):
    assert isinstance(scen.gs.downlink_tx, RadioPort)
