"""Downlink SINR, capacity, TDD baseline and grid-map statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyMapError
from .propagation import link_budget, noise_floor_dbm

__all__ = [
    "TddConfig",
    "GridAxis",
    "GridMap",
    "aggressors",
    "cci_dbm",
    "sinr_db",
    "downlink_signal_dbm",
    "downlink_noise_dbm",
    "victim_sinr_db",
    "downlink_sinr_db",
    "shannon_capacity",
    "downlink_capacity",
    "tdd_baseline_capacity",
    "capacity_improvement_pct",
    "required_si_cancellation_db",
    "q_function",
    "ber_awgn",
    "bits_per_symbol",
    "area_fraction_below",
    "dbm_sum",
]


@dataclass(frozen=True)
class TddConfig:
    """Conventional TDD/omni baseline.

    duty = downlink time share (0.5) x guard efficiency (0.8). rx_gain_dbi is
    the UAV receive gain granted to the baseline; 0 means ideal omni.
    """

    eirp_dbm: float = 36.0
    duty: float = 0.4
    rx_gain_dbi: float = 0.0


def dbm_sum(powers):
    """Linear-domain sum of dBm values, returned in dBm (-inf when empty)."""
    powers = list(powers)
    if not powers:
        return -math.inf
    if len(powers) == 1:
        return float(powers[0])
    total = sum(10.0 ** (p / 10.0) for p in powers)
    return 10.0 * math.log10(total) if total > 0 else -math.inf


def aggressors(plan, victim):
    """UAV ids whose uplink shares `victim`'s downlink channel."""
    down = plan.downlink(victim)
    return [u for u, up, _ in plan.assignments if up == down and u != victim]


def _interference_terms(scenario, victim, channel, aggressor_ids):
    return [
        link_budget(scenario, (a, "uplink"), (victim, "downlink"), channel).rx_power
        - scenario.xpd_db
        for a in aggressor_ids
    ]


def cci_dbm(scenario, plan, victim):
    """Total co-channel interference at `victim`'s downlink receiver (dBm)."""
    channel = scenario.channel(plan.downlink(victim))
    return dbm_sum(_interference_terms(scenario, victim, channel, aggressors(plan, victim)))


def sinr_db(signal, interference, noise):
    """10 log10(S / (sum(I) + N)) with all terms in dBm."""
    denom = sum(10.0 ** (i / 10.0) for i in interference) + 10.0 ** (noise / 10.0)
    return 10.0 * math.log10(10.0 ** (signal / 10.0) / denom)


def downlink_signal_dbm(scenario, victim, channel):
    return link_budget(scenario, ("gs", "downlink"), (victim, "downlink"), channel).rx_power


def downlink_noise_dbm(scenario, channel):
    if not hasattr(channel, "occupied_bw"):
        channel = scenario.channel(channel)
    return noise_floor_dbm(channel.occupied_bw, scenario.noise_figure)


def victim_sinr_db(scenario, victim, channel, aggressor_ids):
    """Downlink SINR of `victim` on `channel` with the given aggressors."""
    if not hasattr(channel, "center_freq"):
        channel = scenario.channel(channel)
    s = downlink_signal_dbm(scenario, victim, channel)
    terms = _interference_terms(scenario, victim, channel, aggressor_ids)
    return sinr_db(s, terms, downlink_noise_dbm(scenario, channel))


def downlink_sinr_db(scenario, plan, victim):
    return victim_sinr_db(scenario, victim, plan.downlink(victim), aggressors(plan, victim))


def shannon_capacity(bandwidth, sinr):
    """B log2(1 + SINR) in bit/s, SINR given in dB."""
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    return bandwidth * math.log2(1.0 + 10.0 ** (sinr / 10.0))


def downlink_capacity(scenario, plan, victim):
    channel = scenario.channel(plan.downlink(victim))
    return shannon_capacity(channel.occupied_bw, downlink_sinr_db(scenario, plan, victim))


def tdd_baseline_capacity(scenario, victim, channel, tdd=None):
    """Capacity of the TDD/omni baseline for `victim` on `channel` (bit/s).

    Same path loss and noise floor as the full-duplex downlink; fixed EIRP,
    no co-channel interference, throughput scaled by the duty factor.
    """
    tdd = tdd or TddConfig()
    if not hasattr(channel, "center_freq"):
        channel = scenario.channel(channel)
    # path loss only: reuse the budget and strip the antenna terms
    lb = link_budget(scenario, ("gs", "downlink"), (victim, "downlink"), channel)
    snr = tdd.eirp_dbm + tdd.rx_gain_dbi - lb.fspl - downlink_noise_dbm(scenario, channel)
    return tdd.duty * shannon_capacity(channel.occupied_bw, snr)


def capacity_improvement_pct(c_fd, c_tdd):
    """(C_fd - C_tdd) / C_tdd x 100."""
    if c_tdd == 0:
        raise ZeroDivisionError("baseline capacity is zero")
    return (c_fd - c_tdd) / c_tdd * 100.0


def required_si_cancellation_db(tx_power, target_residual):
    """Isolation needed to push a transmitter's own leakage down to a target."""
    return tx_power - target_residual


def q_function(x):
    return 0.5 * math.erfc(x / math.sqrt(2.0))


_MODULATION_ORDER = {"BPSK": 2, "QPSK": 4, "16QAM": 16, "64QAM": 64}


def bits_per_symbol(modulation):
    return int(math.log2(_MODULATION_ORDER[modulation.upper()]))


def ber_awgn(modulation, snr_per_bit):
    """Gray-coded AWGN bit error rate at Eb/N0 = `snr_per_bit` dB."""
    mod = modulation.upper()
    if mod not in _MODULATION_ORDER:
        raise ValueError(f"unsupported modulation {modulation!r}")
    gb = 10.0 ** (snr_per_bit / 10.0)
    m = _MODULATION_ORDER[mod]
    if m in (2, 4):
        return q_function(math.sqrt(2.0 * gb))
    k = math.log2(m)
    return (4.0 / k) * (1.0 - 1.0 / math.sqrt(m)) * q_function(math.sqrt(3.0 * k / (m - 1) * gb))


@dataclass(frozen=True)
class GridAxis:
    origin: float
    step: float
    count: int

    def coords(self):
        return self.origin + self.step * np.arange(self.count)


@dataclass(eq=False)
class GridMap:
    """Scalar values on a regular x/y/z lattice.

    `values` and `mask` have shape (nz, ny, nx); `mask` is True for valid
    cells, and masked cells hold NaN.
    """

    x: GridAxis
    y: GridAxis
    z: GridAxis
    values: np.ndarray
    mask: np.ndarray
    unit: str

    def __post_init__(self):
        shape = (self.z.count, self.y.count, self.x.count)
        self.values = np.asarray(self.values, dtype=float).reshape(shape)
        self.mask = np.asarray(self.mask, dtype=bool).reshape(shape)
        self.values[~self.mask] = np.nan

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_valid(self):
        return int(self.mask.sum())

    def cells(self):
        """Yield (x, y, z, value) for unmasked cells, z-major then y then x."""
        xs, ys, zs = self.x.coords(), self.y.coords(), self.z.coords()
        for k, z in enumerate(zs):
            for j, y in enumerate(ys):
                for i, x in enumerate(xs):
                    if self.mask[k, j, i]:
                        yield float(x), float(y), float(z), float(self.values[k, j, i])


def area_fraction_below(grid, threshold):
    """Share of unmasked cells whose value is strictly below `threshold`."""
    n = grid.n_valid
    if n == 0:
        raise EmptyMapError("map has no unmasked cells")
    return float(np.count_nonzero(grid.values[grid.mask] < threshold)) / n
