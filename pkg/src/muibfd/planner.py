"""Grid sweeps, keep-out maps and position control.

A sweep moves one victim UAV across a region, re-aiming its antenna at the
GS in every cell, and evaluates a downlink metric there. The planner uses
the same evaluation to nudge UAVs out of each other's main lobes.
"""
from __future__ import annotations

import functools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, InfeasibleError
from .metrics import (
    GridAxis,
    GridMap,
    TddConfig,
    capacity_improvement_pct,
    cci_dbm,
    downlink_sinr_db,
    shannon_capacity,
    tdd_baseline_capacity,
)
from .scenario import distance

__all__ = [
    "MAP_KINDS",
    "MAP_UNITS",
    "RegionSpec",
    "PlanConstraints",
    "PlannerResult",
    "reference_region",
    "simulate_map",
    "keep_out_map",
    "adjust_positions",
    "min_downlink_sinr",
    "lattice_offsets",
    "ray_lateral_distance",
]

MAP_KINDS = ("cci", "sinr", "capacity", "improvement", "keepout")
MAP_UNITS = {"cci": "dBm", "sinr": "dB", "capacity": "bit/s",
             "improvement": "percent", "keepout": "flag"}


def _axis(lo, hi, step):
    if step <= 0:
        raise ValueError("region step must be positive")
    if hi < lo:
        return GridAxis(lo, step, 0)
    return GridAxis(lo, step, int(math.floor((hi - lo) / step + 1e-9)) + 1)


@dataclass(frozen=True)
class RegionSpec:
    """Axis-aligned box with per-axis steps and optional exclusion boxes.

    Bounds are inclusive; ``x``, ``y``, ``z`` are ``(min, max)`` pairs and
    ``step`` is ``(dx, dy, dz)``. An exclusion is a triple of ``(min, max)``
    pairs; cells inside any exclusion are masked.
    """

    x: tuple
    y: tuple
    z: tuple
    step: tuple
    exclusions: tuple = ()

    def __post_init__(self):
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        object.__setattr__(self, "step", tuple(float(s) for s in self.step))
        object.__setattr__(self, "exclusions", tuple(
            tuple(tuple(float(v) for v in b) for b in box) for box in self.exclusions))
        if any(s <= 0 for s in self.step):
            raise ValueError("region steps must be positive")

    def axes(self):
        return tuple(_axis(lo, hi, s) for (lo, hi), s in zip((self.x, self.y, self.z), self.step))

    @property
    def n_cells(self):
        n = 1
        for a in self.axes():
            n *= a.count
        return n

    def excluded(self, p):
        return any(all(lo <= c <= hi for c, (lo, hi) in zip(p, box)) for box in self.exclusions)


def reference_region():
    """Reproduction region around UAV 2 at experiment point #B.

    x 2400..2700 m, y -150..150 m (5 m step) at heights 70, 80, 90, 100 m,
    with the 50 m x 50 m column over UAV 2 left out.
    """
    return RegionSpec(
        x=(2400.0, 2700.0), y=(-150.0, 150.0), z=(70.0, 100.0), step=(5.0, 5.0, 10.0),
        exclusions=(((2475.0, 2525.0), (-25.0, 25.0), (0.0, 200.0)),),
    )


def ray_lateral_distance(p, origin, through):
    """Perpendicular distance from `p` to the line through `origin` and `through`."""
    o = np.asarray(origin, float)
    axis = np.asarray(through, float) - o
    axis /= np.linalg.norm(axis)
    r = np.asarray(p, float) - o
    return float(np.linalg.norm(r - np.dot(r, axis) * axis))


def _cell_value(scenario, plan, victim, kind, tdd, sinr_floor):
    if kind == "cci":
        return cci_dbm(scenario, plan, victim)
    sinr = downlink_sinr_db(scenario, plan, victim)
    if kind == "sinr":
        return sinr
    if kind == "keepout":
        return 1.0 if sinr < sinr_floor else 0.0
    channel = scenario.channel(plan.downlink(victim))
    cap = shannon_capacity(channel.occupied_bw, sinr)
    if kind == "capacity":
        return cap
    return capacity_improvement_pct(cap, tdd_baseline_capacity(scenario, victim, channel, tdd))


def _sweep_slab(args):
    scenario, plan, victim, kind, tdd, sinr_floor, region, k = args
    xa, ya, za = region.axes()
    z = float(za.coords()[k])
    vals = np.full((ya.count, xa.count), np.nan)
    mask = np.zeros((ya.count, xa.count), dtype=bool)
    for j, y in enumerate(ya.coords()):
        for i, x in enumerate(xa.coords()):
            p = (float(x), float(y), z)
            if region.excluded(p):
                continue
            try:
                moved = scenario.with_uav_positions({victim: p})
                vals[j, i] = _cell_value(moved, plan, victim, kind, tdd, sinr_floor)
            except GeometryError:
                # near-field and coincident cells are masked, not errors
                continue
            mask[j, i] = True
    return vals, mask


def simulate_map(scenario, plan, victim, region, kind, tdd=None, sinr_floor=10.0, jobs=1):
    """Sweep `victim` over `region` and map one metric.

    ``kind`` is one of ``MAP_KINDS``. With ``jobs > 1`` height slabs are
    evaluated in worker processes; assembly order is fixed, so the result is
    identical to the serial sweep.
    """
    if kind not in MAP_KINDS:
        raise ValueError(f"unknown map kind {kind!r}; expected one of {MAP_KINDS}")
    scenario.uav(victim)
    tdd = tdd or TddConfig()
    xa, ya, za = region.axes()
    if xa.count * ya.count * za.count == 0:
        raise ValueError("region contains no cells")
    tasks = [(scenario, plan, victim, kind, tdd, sinr_floor, region, k) for k in range(za.count)]
    if jobs > 1 and za.count > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            slabs = list(ex.map(_sweep_slab, tasks))
    else:
        slabs = [_sweep_slab(t) for t in tasks]
    values = np.stack([s[0] for s in slabs])
    mask = np.stack([s[1] for s in slabs])
    return GridMap(xa, ya, za, values, mask, MAP_UNITS[kind])


def keep_out_map(scenario, plan, victim, region, sinr_floor, jobs=1):
    """Flag cells where the victim's downlink SINR would fall below `sinr_floor`."""
    return simulate_map(scenario, plan, victim, region, "keepout",
                        sinr_floor=sinr_floor, jobs=jobs)


# -- position control ---------------------------------------------------------

@dataclass(frozen=True)
class PlanConstraints:
    """Limits on how far the planner may move UAVs.

    ``max_displacement`` is a Euclidean radius around each UAV's anchor,
    either one value for all UAVs or a ``{uav_id: meters}`` mapping.
    ``anchors`` default to the UAV positions handed to the planner.
    """

    min_separation: float = 10.0
    max_displacement: object = 10.0
    altitude: tuple = (0.0, 150.0)
    anchors: dict = field(default=None, compare=False)

    def __post_init__(self):
        if self.min_separation < 0:
            raise ValueError("min_separation must be >= 0")
        for d in self._displacements().values():
            if d < 0:
                raise ValueError("max_displacement must be >= 0")
        lo, hi = self.altitude
        if lo < 0 or hi < lo:
            raise ValueError("altitude bounds must satisfy 0 <= min <= max")

    def _displacements(self):
        if isinstance(self.max_displacement, dict):
            return dict(self.max_displacement)
        return {None: float(self.max_displacement)}

    def radius(self, uav_id):
        if isinstance(self.max_displacement, dict):
            return float(self.max_displacement.get(uav_id, 0.0))
        return float(self.max_displacement)


@dataclass(frozen=True)
class PlannerResult:
    positions: dict
    sinr: dict
    initial_sinr: dict
    moved: bool


def min_downlink_sinr(scenario, plan):
    return min(downlink_sinr_db(scenario, plan, u) for u in plan.uav_ids)


@functools.lru_cache(maxsize=64)
def lattice_offsets(radius, step):
    """Integer offsets (multiples of `step`) inside a ball of `radius`, in meters.

    Returned as integer meter vectors sorted lexicographically.
    """
    if radius < 1 or step < 1:
        return ((0, 0, 0),)
    k = int(math.floor(radius / step + 1e-9))
    r2 = radius * radius + 1e-9
    out = []
    for a in range(-k, k + 1):
        for b in range(-k, k + 1):
            for c in range(-k, k + 1):
                dx, dy, dz = a * step, b * step, c * step
                if dx * dx + dy * dy + dz * dz <= r2:
                    out.append((dx, dy, dz))
    return tuple(out)


class _Search:
    """Shared state for one adjust_positions call."""

    def __init__(self, scenario, plan, constraints, sinr_floor):
        self.scenario = scenario
        self.plan = plan
        self.c = constraints
        self.floor = sinr_floor
        self.ids = sorted(plan.uav_ids)
        anchors = constraints.anchors or {}
        self.anchor = {u: tuple(anchors.get(u, scenario.uav(u).position)) for u in self.ids}

    def position(self, u, off):
        a = self.anchor[u]
        return (a[0] + off[0], a[1] + off[1], a[2] + off[2])

    def feasible(self, u, off, offsets):
        p = self.position(u, off)
        lo, hi = self.c.altitude
        if not lo <= p[2] <= hi:
            return False
        if distance(p, self.scenario.gs.position) < self.scenario.min_link_distance:
            return False
        sep = max(self.c.min_separation, self.scenario.min_link_distance)
        for v in self.ids:
            if v != u and distance(p, self.position(v, offsets[v])) < sep:
                return False
        return True

    def value(self, offsets):
        moved = self.scenario.with_uav_positions({u: self.position(u, offsets[u]) for u in self.ids})
        v = min_downlink_sinr(moved, self.plan)
        # quantized so symmetric positions tie exactly and fall to the tie-break
        return round(min(v, self.floor), 9)

    def key(self, offsets, value):
        disp = sum(o[0] ** 2 + o[1] ** 2 + o[2] ** 2 for o in offsets.values())
        lex = tuple(offsets[u] for u in self.ids)
        return (-value, disp, lex)


def _levels(radius):
    if radius < 1:
        return []
    s = 1 << int(math.floor(math.log2(radius) + 1e-12))
    out = []
    while s >= 1:
        out.append(s)
        s //= 2
    return out


def adjust_positions(scenario, plan, constraints, sinr_floor):
    """Move UAVs so every downlink reaches `sinr_floor`, or as close as possible.

    Candidates live on a 1 m lattice around each UAV's anchor, inside its
    displacement ball. For lattice steps 2^k, 2^(k-1), ..., 1 m (2^k the largest
    power of two within the largest radius), sweeps visit UAVs in id order and
    move each to the best candidate among all multiples of the step, holding
    the others fixed; sweeps repeat until nothing improves. Candidates rank by
    min downlink SINR capped at the floor (higher is better), then total squared
    displacement, then lexicographic offsets. The antennas re-aim at the GS
    after every move. Input that already meets the floor is returned as is.

    Returns a :class:`PlannerResult`.
    """
    search = _Search(scenario, plan, constraints, sinr_floor)
    ids = search.ids
    lo, hi = constraints.altitude
    for u in ids:
        if not lo <= search.anchor[u][2] <= hi:
            raise ValueError(f"anchor of UAV {u} violates the altitude bounds")

    initial = {u: downlink_sinr_db(scenario, plan, u) for u in ids}
    start = {u: tuple(scenario.uav(u).position) for u in ids}
    offsets = {u: tuple(round(start[u][k] - search.anchor[u][k], 9) for k in range(3)) for u in ids}
    initial_offsets = dict(offsets)
    feasible_now = all(search.feasible(u, offsets[u], offsets) for u in ids)
    if feasible_now and min(initial.values()) >= sinr_floor:
        return PlannerResult(start, initial, initial, False)

    cur_val = search.value(offsets) if feasible_now else -math.inf
    cur_key = search.key(offsets, cur_val) if feasible_now else (math.inf,)
    radii = {u: constraints.radius(u) for u in ids}
    for step in _levels(max(radii.values(), default=0.0)):
        improved = True
        while improved:
            improved = False
            for u in ids:
                if radii[u] < step:
                    continue
                best = None
                for off in lattice_offsets(radii[u], step):
                    trial = dict(offsets)
                    trial[u] = off
                    if not search.feasible(u, off, trial):
                        continue
                    k = search.key(trial, search.value(trial))
                    if best is None or k < best[0]:
                        best = (k, trial)
                if best is not None and best[0] < cur_key:
                    cur_key, offsets = best
                    improved = True

    if not all(search.feasible(u, offsets[u], offsets) for u in ids):
        raise InfeasibleError("no candidate positions satisfy the separation constraints")
    positions = {u: start[u] if offsets[u] == initial_offsets[u] else search.position(u, offsets[u])
                 for u in ids}
    final = scenario.with_uav_positions(positions)
    sinr = {u: downlink_sinr_db(final, plan, u) for u in ids}
    return PlannerResult(positions, sinr, initial, positions != start)
