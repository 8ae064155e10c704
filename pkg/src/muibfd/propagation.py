"""Free-space link budgets, thermal noise, and UAV pointing jitter.

Powers are dBm, gains dBi, losses dB. Link endpoints are addressed as
``(node, port)`` pairs: ``("gs", "downlink")`` / ``("gs", "uplink")`` for the
ground station and ``(uav_id, "uplink")`` / ``(uav_id, "downlink")`` for a
UAV (both UAV ports resolve to the same physical antenna).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .antenna import Pointing, gain_dbi
from .errors import NearFieldError, UnknownReferenceError

__all__ = [
    "SPEED_OF_LIGHT",
    "LinkBudgetResult",
    "fspl_db",
    "noise_floor_dbm",
    "resolve_endpoint",
    "link_budget",
    "jittered_rssi_series",
]

SPEED_OF_LIGHT = 299792458.0
_FOUR_PI_OVER_C = 4.0 * math.pi / SPEED_OF_LIGHT


@dataclass(frozen=True)
class LinkBudgetResult:
    distance: float
    tx_power: float
    tx_gain: float
    rx_gain: float
    fspl: float
    rx_power: float


def fspl_db(distance, freq, min_distance=0.0):
    """Friis free-space loss 20 log10(4 pi d f / c) in dB."""
    if freq <= 0:
        raise ValueError("frequency must be positive")
    if distance <= 0 or distance < min_distance:
        raise NearFieldError(
            f"link distance {distance:.3f} m is inside the {min_distance} m near-field cutoff")
    return 20.0 * math.log10(_FOUR_PI_OVER_C * distance * freq)


def noise_floor_dbm(bandwidth, noise_figure):
    """Thermal noise power -174 dBm/Hz + 10 log10(B) + NF."""
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    return -174.0 + 10.0 * math.log10(bandwidth) + noise_figure


def resolve_endpoint(scenario, endpoint):
    """Return ``(position, tx_power, pattern, pointing, uav_id or None)``."""
    node, port = endpoint
    if node == "gs":
        if port == "downlink":
            p = scenario.gs.downlink_tx
        elif port == "uplink":
            p = scenario.gs.uplink_rx
        else:
            raise UnknownReferenceError(f"unknown GS port {port!r}")
        return scenario.gs.position, p.tx_power, p.pattern, p.pointing, None
    if port not in ("uplink", "downlink"):
        raise UnknownReferenceError(f"unknown UAV port {port!r}")
    u = scenario.uav(node)
    a = u.antenna
    return u.position, a.tx_power, a.pattern, a.pointing, u.id


def _budget(tx_pos, tx_power, tx_pat, tx_pt, rx_pos, rx_pat, rx_pt, freq, min_distance):
    dx = rx_pos[0] - tx_pos[0]
    dy = rx_pos[1] - tx_pos[1]
    dz = rx_pos[2] - tx_pos[2]
    d = math.sqrt(dx * dx + dy * dy + dz * dz)
    loss = fspl_db(d, freq, min_distance)
    gt = gain_dbi(tx_pat, tx_pt, (dx, dy, dz))
    gr = gain_dbi(rx_pat, rx_pt, (-dx, -dy, -dz))
    return LinkBudgetResult(d, tx_power, gt, gr, loss, tx_power + gt + gr - loss)


def link_budget(scenario, tx, rx, channel):
    """Received power of the `tx` -> `rx` link on `channel`.

    `channel` is a :class:`ChannelDef` or a channel id of the scenario.
    """
    if not hasattr(channel, "center_freq"):
        channel = scenario.channel(channel)
    tpos, tpow, tpat, tpt, _ = resolve_endpoint(scenario, tx)
    rpos, _, rpat, rpt, _ = resolve_endpoint(scenario, rx)
    return _budget(tpos, tpow, tpat, tpt, rpos, rpat, rpt,
                   channel.center_freq, scenario.min_link_distance)


def _perturbed(pointing, daz, del_):
    return Pointing(pointing.azimuth + daz, min(90.0, max(-90.0, pointing.elevation + del_)))


def jittered_rssi_series(scenario, link, tilt_sigma, n, seed):
    """Received power samples with the UAV boresight(s) shaken by body tilt.

    `link` is ``(tx_endpoint, rx_endpoint, channel)``. For every sample each
    UAV end gets independent zero-mean Gaussian offsets (std `tilt_sigma`
    degrees) in azimuth and elevation; the GS end is fixed. Sample ``i`` draws
    from a generator seeded by ``(seed, i)`` so any subset of samples can be
    recomputed independently.
    """
    if tilt_sigma < 0:
        raise ValueError("tilt_sigma must be >= 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    tx, rx, channel = link
    if not hasattr(channel, "center_freq"):
        channel = scenario.channel(channel)
    tpos, tpow, tpat, tpt, tuav = resolve_endpoint(scenario, tx)
    rpos, _, rpat, rpt, ruav = resolve_endpoint(scenario, rx)
    freq = channel.center_freq
    out = np.empty(n)
    for i in range(n):
        draws = np.random.default_rng([seed, i]).normal(0.0, 1.0, 4) * tilt_sigma
        t_pt = _perturbed(tpt, draws[0], draws[1]) if tuav is not None else tpt
        r_pt = _perturbed(rpt, draws[2], draws[3]) if ruav is not None else rpt
        out[i] = _budget(tpos, tpow, tpat, t_pt, rpos, rpat, r_pt,
                         freq, scenario.min_link_distance).rx_power
    return out
