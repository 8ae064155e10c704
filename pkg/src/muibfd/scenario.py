"""World model: ground station, UAVs, channels, and consistency checks.

Coordinates are meters in a local east-north-up frame whose origin is the
ground point below the GS antenna. All values are immutable; derive modified
scenarios with :func:`dataclasses.replace` or :meth:`Scenario.with_uav_positions`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

from .antenna import AntennaPattern, Pointing, point_at
from .errors import UnknownReferenceError

__all__ = [
    "Vec3",
    "ChannelDef",
    "RadioPort",
    "Uav",
    "GroundStation",
    "Scenario",
    "Violation",
    "validate",
    "reference_scenario",
    "distance",
    "TX_POWER_BOUNDS",
    "UAV_FLOOR_ATTEN_DB",
    "GS_FLOOR_ATTEN_DB",
]

TX_POWER_BOUNDS = (-30.0, 60.0)

# side/back-lobe floor depths; UAV value calibrated against the
# experiment-area CCI statistic (see README "Model calibration")
UAV_FLOOR_ATTEN_DB = 38.0
GS_FLOOR_ATTEN_DB = 30.0


class Vec3(NamedTuple):
    x: float
    y: float
    z: float

    def __sub__(self, other):
        return Vec3(self.x - other[0], self.y - other[1], self.z - other[2])

    def __add__(self, other):
        return Vec3(self.x + other[0], self.y + other[1], self.z + other[2])

    def norm(self):
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


def distance(a, b):
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)


@dataclass(frozen=True)
class ChannelDef:
    id: int
    center_freq: float
    occupied_bw: float
    guard_bw: float = 0.0

    @property
    def raster_width(self):
        return self.occupied_bw + self.guard_bw


@dataclass(frozen=True)
class RadioPort:
    tx_power: float
    pattern: AntennaPattern
    pointing: Pointing


@dataclass(frozen=True)
class Uav:
    """A UAV with one physical aperture shared by uplink Tx and downlink Rx."""

    id: int
    position: Vec3
    antenna: RadioPort

    @property
    def uplink_port(self):
        return self.antenna

    @property
    def downlink_rx(self):
        return self.antenna.pattern, self.antenna.pointing


@dataclass(frozen=True)
class GroundStation:
    position: Vec3
    uplink_rx: RadioPort
    downlink_tx: RadioPort


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class Scenario:
    gs: GroundStation
    uavs: tuple = ()
    channels: tuple = ()
    noise_figure: float = 5.0
    min_link_distance: float = 5.0
    # cross-polarization discrimination subtracted from interference paths
    xpd_db: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "uavs", tuple(self.uavs))
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def uav_ids(self):
        return tuple(u.id for u in self.uavs)

    def uav(self, uav_id):
        for u in self.uavs:
            if u.id == uav_id:
                return u
        raise UnknownReferenceError(f"unknown UAV id {uav_id!r}")

    def channel(self, channel_id):
        for c in self.channels:
            if c.id == channel_id:
                return c
        raise UnknownReferenceError(f"unknown channel id {channel_id!r}")

    def with_uav_positions(self, positions, reaim=True):
        """Copy with UAVs moved; antennas re-aimed at the GS when `reaim`."""
        uavs = []
        for u in self.uavs:
            if u.id in positions:
                pos = Vec3(*positions[u.id])
                ant = u.antenna
                if reaim:
                    ant = replace(ant, pointing=point_at(pos, self.gs.position))
                u = replace(u, position=pos, antenna=ant)
            uavs.append(u)
        return replace(self, uavs=tuple(uavs))


def _port_violations(label, port):
    out = []
    lo, hi = TX_POWER_BOUNDS
    if not (math.isfinite(port.tx_power) and lo <= port.tx_power <= hi):
        out.append(Violation(
            "tx_power_range", f"{label}: tx_power {port.tx_power} dBm outside [{lo}, {hi}]"))
    return out


def _position_violations(label, pos):
    out = []
    if not all(math.isfinite(c) for c in pos):
        out.append(Violation("position_nonfinite", f"{label}: non-finite position {tuple(pos)}"))
    elif pos[2] < 0:
        out.append(Violation("position_below_ground", f"{label}: z = {pos[2]} < 0"))
    return out


def validate(scenario):
    """Return every invariant violation of `scenario`; empty when valid."""
    v = []
    v += _position_violations("gs", scenario.gs.position)
    v += _port_violations("gs.uplink_rx", scenario.gs.uplink_rx)
    v += _port_violations("gs.downlink_tx", scenario.gs.downlink_tx)

    seen = set()
    for u in scenario.uavs:
        if u.id in seen:
            v.append(Violation("duplicate_uav_id", f"UAV id {u.id!r} appears more than once"))
        seen.add(u.id)
        v += _position_violations(f"uav {u.id}", u.position)
        v += _port_violations(f"uav {u.id}", u.antenna)

    seen = set()
    for c in scenario.channels:
        if c.id in seen:
            v.append(Violation("duplicate_channel_id", f"channel id {c.id!r} appears more than once"))
        seen.add(c.id)
        if not c.center_freq > 0:
            v.append(Violation("channel_freq", f"channel {c.id}: center_freq must be > 0"))
        if not c.occupied_bw > 0:
            v.append(Violation("channel_bw", f"channel {c.id}: occupied_bw must be > 0"))
        if c.guard_bw < 0:
            v.append(Violation("channel_guard", f"channel {c.id}: guard_bw must be >= 0"))

    # raster consistency: adjacent centers may not be closer than the raster
    ordered = sorted(scenario.channels, key=lambda c: c.center_freq)
    for a, b in zip(ordered, ordered[1:]):
        spacing = b.center_freq - a.center_freq
        need = 0.5 * (a.raster_width + b.raster_width)
        if spacing < need - 1e-6:
            v.append(Violation(
                "channel_overlap",
                f"channels {a.id} and {b.id}: spacing {spacing:g} Hz < raster {need:g} Hz"))

    if not math.isfinite(scenario.noise_figure) or scenario.noise_figure < 0:
        v.append(Violation("noise_figure", "noise_figure must be finite and >= 0 dB"))
    if not scenario.min_link_distance > 0:
        v.append(Violation("min_link_distance", "min_link_distance must be > 0"))

    nodes = [("gs", scenario.gs.position)] + [(f"uav {u.id}", u.position) for u in scenario.uavs]
    for (na, pa), (nb, pb) in itertools.combinations(nodes, 2):
        d = distance(pa, pb)
        if d < scenario.min_link_distance:
            v.append(Violation(
                "min_distance",
                f"{na} and {nb} are {d:.3f} m apart (< {scenario.min_link_distance} m)"))
    return v


def uav_pattern(floor_atten=UAV_FLOOR_ATTEN_DB):
    return AntennaPattern(peak_gain=15.0, hpbw_az=28.0, hpbw_el=28.0, floor_atten=floor_atten)


def gs_downlink_pattern(floor_atten=GS_FLOOR_ATTEN_DB):
    # VP slot antenna: 18.2 dBi, 3 deg vertical x 52 deg horizontal
    return AntennaPattern(peak_gain=18.2, hpbw_az=52.0, hpbw_el=3.0, floor_atten=floor_atten)


def gs_uplink_pattern(floor_atten=GS_FLOOR_ATTEN_DB):
    # HP slot antenna: 19.8 dBi, 3 deg vertical x 75 deg horizontal
    return AntennaPattern(peak_gain=19.8, hpbw_az=75.0, hpbw_el=3.0, floor_atten=floor_atten)


def reference_scenario(uav1_position=(2500.0, 100.0, 100.0),
                           uav_floor_atten=UAV_FLOOR_ATTEN_DB,
                           gs_floor_atten=GS_FLOOR_ATTEN_DB):
    """Two-UAV scenario of downlink experiment point #B.

    GS at (0, 0, 1.5) with its fixed beams aimed at UAV 2 hovering at
    (2500, 0, 100). UAV 1 starts abreast of UAV 2; both UAV antennas track
    the GS. Channel 1 is 5.675 GHz and channel 2 is 5.725 GHz, each 9 MHz
    occupied plus 1 MHz guard.
    """
    gs_pos = Vec3(0.0, 0.0, 1.5)
    uav2_pos = Vec3(2500.0, 0.0, 100.0)
    uav1_pos = Vec3(*uav1_position)
    gs_aim = point_at(gs_pos, uav2_pos)
    gs = GroundStation(
        position=gs_pos,
        uplink_rx=RadioPort(8.75, gs_uplink_pattern(gs_floor_atten), gs_aim),
        downlink_tx=RadioPort(8.75, gs_downlink_pattern(gs_floor_atten), gs_aim),
    )
    pat = uav_pattern(uav_floor_atten)
    uavs = tuple(
        Uav(uid, pos, RadioPort(17.0, pat, point_at(pos, gs_pos)))
        for uid, pos in ((1, uav1_pos), (2, uav2_pos))
    )
    channels = (
        ChannelDef(1, 5.675e9, 9e6, 1e6),
        ChannelDef(2, 5.725e9, 9e6, 1e6),
    )
    return Scenario(gs=gs, uavs=uavs, channels=channels)
