"""Channel plans for the swap-style full-duplex scheme.

Each channel carries one UAV's uplink and a different UAV's downlink, so
the fleet as a whole transmits and receives on every channel at once while
no single UAV needs self-interference cancellation. A plan is therefore a
derangement: victim ``i`` downlinks on the uplink channel of aggressor
``d(i) != i``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, PlanError, UnknownReferenceError
from .metrics import shannon_capacity, victim_sinr_db
from .scenario import Violation

__all__ = [
    "DEFAULT_DELTA_MIN_HZ",
    "MAX_EXHAUSTIVE",
    "ChannelPlan",
    "CciPair",
    "Violation",
    "validate_plan",
    "cci_pairs",
    "derangement_count",
    "enumerate_derangements",
    "evaluate_plan",
    "optimize_plan",
    "swap_plan",
]

DEFAULT_DELTA_MIN_HZ = 50e6
MAX_EXHAUSTIVE = 9


@dataclass(frozen=True)
class ChannelPlan:
    """Per-UAV ``(uav_id, uplink_channel, downlink_channel)`` records."""

    assignments: tuple

    def __post_init__(self):
        recs = tuple(sorted((tuple(a) for a in self.assignments), key=lambda r: r[0]))
        ids = [r[0] for r in recs]
        if len(set(ids)) != len(ids):
            raise PlanError("a UAV appears more than once in the plan")
        object.__setattr__(self, "assignments", recs)

    @classmethod
    def from_mapping(cls, mapping):
        """Build from ``{uav_id: (uplink, downlink)}``."""
        return cls(tuple((u, up, down) for u, (up, down) in mapping.items()))

    def as_mapping(self):
        return {u: (up, down) for u, up, down in self.assignments}

    def _record(self, uav_id):
        for rec in self.assignments:
            if rec[0] == uav_id:
                return rec
        raise UnknownReferenceError(f"UAV {uav_id!r} is not in the plan")

    def uplink(self, uav_id):
        return self._record(uav_id)[1]

    def downlink(self, uav_id):
        return self._record(uav_id)[2]

    @property
    def uav_ids(self):
        return tuple(r[0] for r in self.assignments)

    def encoding(self):
        """Canonical tuple used for deterministic tie-breaking."""
        return tuple((up, down) for _, up, down in self.assignments)


@dataclass(frozen=True)
class CciPair:
    aggressor: int
    victim: int
    channel: int


def swap_plan(uav_a, uav_b, ch_a, ch_b):
    """Two-UAV plan: A up on `ch_a` / down on `ch_b`, B the other way round."""
    return ChannelPlan(((uav_a, ch_a, ch_b), (uav_b, ch_b, ch_a)))


def _channel_map(channels):
    return {c.id: c for c in channels}


def validate_plan(plan, channels, delta_min=DEFAULT_DELTA_MIN_HZ):
    """Violations of the plan invariants; empty when the plan is valid.

    Codes: ``same_channel`` (a), ``separation`` (b), ``uplink_count`` and
    ``downlink_count`` (c).
    """
    cmap = _channel_map(channels)
    for u, up, down in plan.assignments:
        for ch in (up, down):
            if ch not in cmap:
                raise UnknownReferenceError(f"plan for UAV {u} references unknown channel {ch!r}")
    out = []
    for u, up, down in plan.assignments:
        if up == down:
            out.append(Violation("same_channel", f"UAV {u} uplinks and downlinks on channel {up}"))
        elif abs(cmap[up].center_freq - cmap[down].center_freq) < delta_min:
            sep = abs(cmap[up].center_freq - cmap[down].center_freq)
            out.append(Violation(
                "separation", f"UAV {u}: uplink/downlink {sep:g} Hz apart < {delta_min:g} Hz"))
    for cid in sorted(cmap):
        n_up = sum(1 for _, up, _ in plan.assignments if up == cid)
        n_down = sum(1 for _, _, down in plan.assignments if down == cid)
        if n_up != 1:
            out.append(Violation("uplink_count", f"channel {cid} carries {n_up} uplinks"))
        if n_down != 1:
            out.append(Violation("downlink_count", f"channel {cid} carries {n_down} downlinks"))
    return out


def cci_pairs(plan, strict=True):
    """Aggressor/victim pairs sharing a channel, ordered by channel then ids.

    With ``strict`` the plan must use each channel for at most one uplink and
    one downlink. Pass ``strict=False`` for fleets with more UAVs than
    channels, where a victim may face several aggressors.
    """
    ups, downs = {}, {}
    for u, up, down in plan.assignments:
        if up == down:
            raise PlanError(f"UAV {u} uplinks and downlinks on channel {up}")
        ups.setdefault(up, []).append(u)
        downs.setdefault(down, []).append(u)
    if strict:
        for cid, us in list(ups.items()) + list(downs.items()):
            if len(us) > 1:
                raise PlanError(f"channel {cid} is shared by UAVs {sorted(us)} in one direction")
    pairs = []
    for cid in sorted(set(ups) & set(downs)):
        for a in sorted(ups[cid]):
            for v in sorted(downs[cid]):
                if a != v:
                    pairs.append(CciPair(a, v, cid))
    return pairs


def derangement_count(n):
    """D(n) by the recurrence D(n) = (n - 1)(D(n-1) + D(n-2))."""
    a, b = 1, 0  # D(0), D(1)
    if n == 0:
        return a
    for k in range(2, n + 1):
        a, b = b, (k - 1) * (a + b)
    return b


def enumerate_derangements(n):
    """All fixed-point-free permutations of range(n), in lexicographic order."""
    if not 1 <= n <= MAX_EXHAUSTIVE:
        raise ValueError(f"n must lie in [1, {MAX_EXHAUSTIVE}], got {n}")
    out = []
    perm = [0] * n
    used = [False] * n

    def place(i):
        if i == n:
            out.append(tuple(perm))
            return
        for v in range(n):
            if v != i and not used[v]:
                used[v] = True
                perm[i] = v
                place(i + 1)
                used[v] = False

    place(0)
    return out


def _default_uplinks(scenario, channels):
    uav_ids = sorted(scenario.uav_ids)
    ch_ids = sorted(c.id for c in channels)
    return dict(zip(uav_ids, ch_ids))


def evaluate_plan(scenario, plan, objective="maxmin"):
    """Objective value of `plan`: min downlink SINR (dB) or sum capacity (bit/s)."""
    values = []
    for u in plan.uav_ids:
        down = plan.downlink(u)
        aggs = [a for a, up, _ in plan.assignments if up == down and a != u]
        s = victim_sinr_db(scenario, u, down, aggs)
        if objective == "maxmin":
            values.append(s)
        else:
            values.append(shannon_capacity(scenario.channel(down).occupied_bw, s))
    return _reduce(values, objective)


def _reduce(values, objective):
    if objective == "maxmin":
        return min(values)
    if objective == "sumcap":
        total = 0.0
        for v in values:
            total = total + v
        return total
    raise ValueError(f"unknown objective {objective!r}")


def _score_matrix(scenario, uav_ids, uplinks, objective):
    # entry [i, a]: victim i downlinking on a's uplink channel, a the aggressor
    n = len(uav_ids)
    m = np.full((n, n), -math.inf)
    for i, v in enumerate(uav_ids):
        for j, a in enumerate(uav_ids):
            if i == j:
                continue
            s = victim_sinr_db(scenario, v, uplinks[a], [a])
            if objective == "sumcap":
                s = shannon_capacity(scenario.channel(uplinks[a]).occupied_bw, s)
            m[i, j] = s
    return m


def optimize_plan(scenario, channels=None, delta_min=DEFAULT_DELTA_MIN_HZ,
                  objective="maxmin", uplinks=None, exhaustive=None):
    """Choose downlink channels maximizing the objective.

    Uplinks are held fixed (`uplinks` maps UAV id to channel id; default pairs
    sorted UAV ids with sorted channel ids). Up to ``MAX_EXHAUSTIVE`` UAVs every
    derangement is scored and ties go to the lexicographically smallest plan
    encoding. Larger fleets use a first-improvement pairwise-swap local search
    started from the cyclic shift ``d(i) = i + 1 mod n``.

    Returns ``(plan, objective_value)``.
    """
    if objective not in ("maxmin", "sumcap"):
        raise ValueError(f"unknown objective {objective!r}")
    channels = tuple(channels if channels is not None else scenario.channels)
    uav_ids = sorted(scenario.uav_ids)
    n = len(uav_ids)
    if n != len(channels):
        raise PlanError(f"{n} UAVs but {len(channels)} channels; counts must match")
    if n < 2:
        raise InfeasibleError("at least two UAVs are needed for a channel swap")
    uplinks = dict(uplinks) if uplinks is not None else _default_uplinks(scenario, channels)
    cmap = _channel_map(channels)
    if sorted(uplinks) != uav_ids or sorted(uplinks.values()) != sorted(cmap):
        raise PlanError("uplinks must assign every channel to exactly one UAV")

    freq = np.array([cmap[uplinks[u]].center_freq for u in uav_ids])
    # feasible[i, j]: victim i may downlink on j's uplink channel
    feasible = np.abs(freq[:, None] - freq[None, :]) >= delta_min
    np.fill_diagonal(feasible, False)
    score = _score_matrix(scenario, uav_ids, uplinks, objective)
    up_ids = np.array([uplinks[u] for u in uav_ids])

    if exhaustive is None:
        exhaustive = n <= MAX_EXHAUSTIVE
    if exhaustive:
        perms = np.array(enumerate_derangements(n), dtype=int)
        rows = np.arange(n)
        ok = feasible[rows, perms].all(axis=1)
        if not ok.any():
            raise InfeasibleError(f"no derangement satisfies delta_min = {delta_min:g} Hz")
        perms = perms[ok]
        entries = score[rows, perms]
        if objective == "maxmin":
            values = entries.min(axis=1)
        else:
            values = entries[:, 0].copy()
            for k in range(1, n):
                values = values + entries[:, k]
        best = values.max()
        cands = perms[values == best]
        # uplinks fixed, so the encoding order is the order of downlink ids
        enc = up_ids[cands]
        order = np.lexsort(enc.T[::-1])
        chosen = cands[order[0]]
        value = float(best)
    else:
        chosen, value = _local_search(score, feasible, up_ids, objective)

    plan = ChannelPlan(tuple(
        (u, uplinks[u], int(up_ids[chosen[i]])) for i, u in enumerate(uav_ids)))
    return plan, value


def _local_search(score, feasible, up_ids, objective):
    n = score.shape[0]
    rows = np.arange(n)

    def value(p):
        return _reduce([float(score[i, p[i]]) for i in range(n)], objective)

    start = None
    for shift in range(1, n):
        p = (rows + shift) % n
        if feasible[rows, p].all():
            start = p
            break
    if start is None:
        raise InfeasibleError("no cyclic-shift plan satisfies delta_min")
    cur, cur_val = start.copy(), value(start)
    improved = True
    while improved:
        improved = False
        for i in range(n):
            for j in range(i + 1, n):
                p = cur.copy()
                p[i], p[j] = p[j], p[i]
                if p[i] == i or p[j] == j or not (feasible[i, p[i]] and feasible[j, p[j]]):
                    continue
                v = value(p)
                if v > cur_val:
                    cur, cur_val, improved = p, v, True
                    break
            if improved:
                break
    return cur, cur_val
