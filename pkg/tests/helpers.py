"""Scenario builders and independent reference computations for tests."""
import math
from dataclasses import replace

import numpy as np

from muibfd.antenna import point_at
from muibfd.scenario import ChannelDef, RadioPort, Uav, Vec3, reference_scenario, uav_pattern

C = 299792458.0
GS = (0.0, 0.0, 1.5)
UAV2 = (2500.0, 0.0, 100.0)


def ray_point(dist_beyond, origin=GS, through=UAV2):
    """Point `dist_beyond` meters past `through` on the ray from `origin`."""
    o, t = np.array(origin), np.array(through)
    d = (t - o) / np.linalg.norm(t - o)
    return tuple(float(v) for v in t + dist_beyond * d)


def fleet(positions, freqs=None):
    """Default GS and hardware with UAVs 1..n at `positions`, aimed at the GS."""
    base = reference_scenario()
    n = len(positions)
    if freqs is None:
        freqs = [5.6e9 + 60e6 * k for k in range(n)]
    pat = uav_pattern()
    uavs = tuple(
        Uav(i + 1, Vec3(*p), RadioPort(17.0, pat, point_at(p, base.gs.position)))
        for i, p in enumerate(positions))
    chans = tuple(ChannelDef(k + 1, f, 9e6, 1e6) for k, f in enumerate(freqs))
    return replace(base, uavs=uavs, channels=chans)


# -- reference model, written from the formulas with numpy only ------------------

def ref_fspl(d, f):
    return 20.0 * math.log10(4.0 * math.pi * d * f / C)


def ref_gain(pattern, az, el, direction):
    """Gain via explicit rotation matrices (independent of the library path)."""
    a, e = math.radians(az), math.radians(el)
    rz = np.array([[math.cos(a), math.sin(a), 0], [-math.sin(a), math.cos(a), 0], [0, 0, 1]])
    ry = np.array([[math.cos(e), 0, math.sin(e)], [0, 1, 0], [-math.sin(e), 0, math.cos(e)]])
    u, v, w = ry @ rz @ np.asarray(direction, float)
    daz = math.degrees(math.atan2(v, u))
    de = math.degrees(math.atan2(w, math.hypot(u, v)))
    att = min(12 * (daz / pattern.hpbw_az) ** 2 + 12 * (de / pattern.hpbw_el) ** 2, pattern.floor_atten)
    return pattern.peak_gain - att


def ref_rx(tx_pos, tx_pow, tx_pat, tx_pt, rx_pos, rx_pat, rx_pt, f):
    d = np.subtract(rx_pos, tx_pos)
    dist = float(np.linalg.norm(d))
    return (tx_pow + ref_gain(tx_pat, tx_pt.azimuth, tx_pt.elevation, d)
            + ref_gain(rx_pat, rx_pt.azimuth, rx_pt.elevation, -d) - ref_fspl(dist, f))


def ref_sinr(scenario, victim, channel_id, aggressor_ids):
    ch = scenario.channel(channel_id)
    gs = scenario.gs
    v = scenario.uav(victim)
    s = ref_rx(gs.position, gs.downlink_tx.tx_power, gs.downlink_tx.pattern, gs.downlink_tx.pointing,
               v.position, v.antenna.pattern, v.antenna.pointing, ch.center_freq)
    lin = 10 ** ((-174 + 10 * math.log10(ch.occupied_bw) + scenario.noise_figure) / 10)
    for a in aggressor_ids:
        u = scenario.uav(a)
        i = ref_rx(u.position, u.antenna.tx_power, u.antenna.pattern, u.antenna.pointing,
                   v.position, v.antenna.pattern, v.antenna.pointing, ch.center_freq)
        lin += 10 ** ((i - scenario.xpd_db) / 10)
    return s - 10 * math.log10(lin)


def ball(radius):
    """Integer offsets with |o| <= radius, written independently of the library."""
    k = int(math.floor(radius))
    return [(a, b, c) for a in range(-k, k + 1) for b in range(-k, k + 1) for c in range(-k, k + 1)
            if a * a + b * b + c * c <= radius * radius + 1e-9]


def exhaustive_positions(scenario, plan, radii, floor, min_sep=10.0, altitude=(0.0, 150.0)):
    """Best joint placement over every lattice combination.

    Ranking: higher min downlink SINR capped at `floor` (rounded to 1e-9 dB),
    then smaller total squared displacement, then lexicographic offsets.
    """
    import itertools
    from muibfd.metrics import downlink_sinr_db

    ids = sorted(scenario.uav_ids)
    anchors = {u: tuple(scenario.uav(u).position) for u in ids}
    sep = max(min_sep, scenario.min_link_distance)
    best = None
    for combo in itertools.product(*(ball(radii[u]) for u in ids)):
        pos = {u: tuple(anchors[u][k] + o[k] for k in range(3)) for u, o in zip(ids, combo)}
        if any(not altitude[0] <= p[2] <= altitude[1] for p in pos.values()):
            continue
        if any(math.dist(p, scenario.gs.position) < scenario.min_link_distance for p in pos.values()):
            continue
        if any(math.dist(pos[a], pos[b]) < sep for a, b in itertools.combinations(ids, 2)):
            continue
        moved = scenario.with_uav_positions(pos)
        v = round(min(min(downlink_sinr_db(moved, plan, u) for u in ids), floor), 9)
        disp = sum(o[0] ** 2 + o[1] ** 2 + o[2] ** 2 for o in combo)
        key = (-v, disp, combo)
        if best is None or key < best[0]:
            best = (key, pos)
    return best[1]
