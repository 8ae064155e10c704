"""Scenario files, measurement logs, CSV grids and SVG heatmaps.

Scenario files are YAML with a strict key tree (unknown keys are errors)::

    scenario:
      gs:
        position: [x, y, z]
        ports:
          uplink:   {tx_power, gain, hpbw_az, hpbw_el, floor, boresight}
          downlink: {tx_power, gain, hpbw_az, hpbw_el, floor, boresight}
      uavs:
        - {id, position, tx_power, antenna: {gain, hpbw_az, hpbw_el, floor, boresight}}
      channels:
        - {id, center_hz, occupied_hz, guard_hz}
      noise: {nf_db}
      link: {min_distance_m, xpd_db}                       # optional
      plan: {<uav id>: [<uplink channel>, <downlink channel>]}   # optional
      duplex: {delta_min_hz}                               # optional
      region: {box: [[x0, x1], [y0, y1], [z0, z1]], step: [dx, dy, dz],
               exclusions: [[[x0, x1], [y0, y1], [z0, z1]], ...]}   # optional
      tdd: {eirp_dbm, duty, rx_gain_dbi}                   # optional
      jitter: {sigma_deg, seed}                            # optional

``boresight`` is ``{azimuth, elevation}`` in degrees, or the string ``gs``
(UAV ports only) to aim at the ground station.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np
import yaml

from .antenna import AntennaPattern, Pointing, point_at
from .duplex import DEFAULT_DELTA_MIN_HZ, ChannelPlan, swap_plan
from .metrics import TddConfig
from .planner import RegionSpec, reference_region
from .scenario import (
    ChannelDef,
    GroundStation,
    RadioPort,
    Scenario,
    Uav,
    Vec3,
    reference_scenario,
    validate,
)

__all__ = [
    "SchemaError",
    "LogFormatError",
    "JitterConfig",
    "ScenarioFile",
    "default_scenario_file",
    "parse_scenario_file",
    "load_scenario_file",
    "dump_scenario_file",
    "save_scenario_file",
    "MeasurementRow",
    "MEASUREMENT_HEADER",
    "read_measurement_log",
    "write_measurement_log",
    "GRID_HEADER",
    "grid_to_csv",
    "read_grid_csv",
    "grid_to_svg",
    "DIVERGING_PALETTE",
]


class SchemaError(ValueError):
    """The scenario document does not match the key tree or fails validation."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class LogFormatError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class JitterConfig:
    sigma_deg: float = 3.0
    seed: int = 0


@dataclass(frozen=True)
class ScenarioFile:
    scenario: Scenario
    plan: ChannelPlan = None
    region: RegionSpec = None
    tdd: TddConfig = field(default_factory=TddConfig)
    jitter: JitterConfig = field(default_factory=JitterConfig)
    delta_min: float = DEFAULT_DELTA_MIN_HZ


def default_scenario_file():
    """Experiment-point scenario with the swap plan and the reproduction region."""
    return ScenarioFile(reference_scenario(), swap_plan(1, 2, 1, 2), reference_region())


# -- parsing -------------------------------------------------------------------

def _mapping(node, path, required, optional=()):
    if not isinstance(node, dict):
        raise SchemaError(f"{path}: expected a mapping")
    allowed = set(required) | set(optional)
    unknown = sorted(str(k) for k in node if k not in allowed)
    if unknown:
        raise SchemaError(f"{path}: unknown keys {unknown}")
    missing = [k for k in required if k not in node]
    if missing:
        raise SchemaError(f"{path}: missing keys {missing}")
    return node


def _num(node, path):
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise SchemaError(f"{path}: expected a number, got {node!r}")
    return float(node)


def _int(node, path):
    if isinstance(node, bool) or not isinstance(node, int):
        raise SchemaError(f"{path}: expected an integer, got {node!r}")
    return node


def _vec(node, path, n=3):
    if not isinstance(node, (list, tuple)) or len(node) != n:
        raise SchemaError(f"{path}: expected a list of {n} numbers")
    return tuple(_num(v, f"{path}[{i}]") for i, v in enumerate(node))


def _pattern(node, path):
    try:
        return AntennaPattern(
            peak_gain=_num(node["gain"], f"{path}.gain"),
            hpbw_az=_num(node["hpbw_az"], f"{path}.hpbw_az"),
            hpbw_el=_num(node["hpbw_el"], f"{path}.hpbw_el"),
            floor_atten=_num(node["floor"], f"{path}.floor"),
        )
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"{path}: {exc}") from None


def _pointing(node, path, origin, gs_position):
    if node == "gs":
        if gs_position is None:
            raise SchemaError(f"{path}: 'gs' boresight is only valid for UAV antennas")
        return point_at(origin, gs_position)
    _mapping(node, path, ("azimuth", "elevation"))
    try:
        return Pointing(_num(node["azimuth"], f"{path}.azimuth"),
                        _num(node["elevation"], f"{path}.elevation"))
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"{path}: {exc}") from None


_PORT_KEYS = ("tx_power", "gain", "hpbw_az", "hpbw_el", "floor", "boresight")
_ANT_KEYS = ("gain", "hpbw_az", "hpbw_el", "floor", "boresight")


def _gs(node):
    _mapping(node, "scenario.gs", ("position", "ports"))
    pos = Vec3(*_vec(node["position"], "scenario.gs.position"))
    ports = _mapping(node["ports"], "scenario.gs.ports", ("uplink", "downlink"))
    built = {}
    for name in ("uplink", "downlink"):
        path = f"scenario.gs.ports.{name}"
        p = _mapping(ports[name], path, _PORT_KEYS)
        built[name] = RadioPort(_num(p["tx_power"], f"{path}.tx_power"), _pattern(p, path),
                                _pointing(p["boresight"], f"{path}.boresight", pos, None))
    return GroundStation(pos, built["uplink"], built["downlink"])


def _uav(node, i, gs_position):
    path = f"scenario.uavs[{i}]"
    _mapping(node, path, ("id", "position", "tx_power", "antenna"))
    pos = Vec3(*_vec(node["position"], f"{path}.position"))
    ant = _mapping(node["antenna"], f"{path}.antenna", _ANT_KEYS)
    port = RadioPort(_num(node["tx_power"], f"{path}.tx_power"), _pattern(ant, f"{path}.antenna"),
                     _pointing(ant["boresight"], f"{path}.antenna.boresight", pos, gs_position))
    return Uav(_int(node["id"], f"{path}.id"), pos, port)


def _channel(node, i):
    path = f"scenario.channels[{i}]"
    _mapping(node, path, ("id", "center_hz", "occupied_hz"), ("guard_hz",))
    return ChannelDef(_int(node["id"], f"{path}.id"), _num(node["center_hz"], f"{path}.center_hz"),
                      _num(node["occupied_hz"], f"{path}.occupied_hz"),
                      _num(node.get("guard_hz", 0.0), f"{path}.guard_hz"))


def _plan(node):
    if not isinstance(node, dict) or not node:
        raise SchemaError("scenario.plan: expected a non-empty mapping uav -> [up, down]")
    recs = []
    for u, pair in node.items():
        u = _int(u, "scenario.plan key")
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise SchemaError(f"scenario.plan.{u}: expected [uplink, downlink]")
        recs.append((u, _int(pair[0], f"scenario.plan.{u}[0]"), _int(pair[1], f"scenario.plan.{u}[1]")))
    return ChannelPlan(tuple(recs))


def _pair(node, path):
    v = _vec(node, path, 2)
    return v


def _region(node):
    _mapping(node, "scenario.region", ("box", "step"), ("exclusions",))
    box = node["box"]
    if not isinstance(box, list) or len(box) != 3:
        raise SchemaError("scenario.region.box: expected [[x0, x1], [y0, y1], [z0, z1]]")
    axes = [_pair(b, f"scenario.region.box[{i}]") for i, b in enumerate(box)]
    step = _vec(node["step"], "scenario.region.step")
    excl = []
    for j, e in enumerate(node.get("exclusions") or []):
        if not isinstance(e, list) or len(e) != 3:
            raise SchemaError(f"scenario.region.exclusions[{j}]: expected three [min, max] pairs")
        excl.append(tuple(_pair(b, f"scenario.region.exclusions[{j}][{i}]") for i, b in enumerate(e)))
    try:
        return RegionSpec(axes[0], axes[1], axes[2], step, tuple(excl))
    except ValueError as exc:
        raise SchemaError(f"scenario.region: {exc}") from None


def parse_scenario_file(doc):
    """Build a :class:`ScenarioFile` from a parsed YAML document."""
    _mapping(doc, "<root>", ("scenario",))
    root = _mapping(doc["scenario"], "scenario", ("gs", "uavs", "channels", "noise"),
                    ("link", "plan", "duplex", "region", "tdd", "jitter"))
    gs = _gs(root["gs"])
    if not isinstance(root["uavs"], list):
        raise SchemaError("scenario.uavs: expected a list")
    uavs = [_uav(u, i, gs.position) for i, u in enumerate(root["uavs"])]
    if not isinstance(root["channels"], list):
        raise SchemaError("scenario.channels: expected a list")
    channels = [_channel(c, i) for i, c in enumerate(root["channels"])]
    noise = _mapping(root["noise"], "scenario.noise", ("nf_db",))
    link = _mapping(root.get("link") or {}, "scenario.link", (), ("min_distance_m", "xpd_db"))
    scenario = Scenario(
        gs=gs, uavs=tuple(uavs), channels=tuple(channels),
        noise_figure=_num(noise["nf_db"], "scenario.noise.nf_db"),
        min_link_distance=_num(link.get("min_distance_m", 5.0), "scenario.link.min_distance_m"),
        xpd_db=_num(link.get("xpd_db", 0.0), "scenario.link.xpd_db"),
    )
    violations = validate(scenario)
    if violations:
        raise SchemaError("scenario failed validation", violations)

    plan = _plan(root["plan"]) if "plan" in root else None
    duplex = _mapping(root.get("duplex") or {}, "scenario.duplex", (), ("delta_min_hz",))
    region = _region(root["region"]) if "region" in root else None
    tdd_node = _mapping(root.get("tdd") or {}, "scenario.tdd", (), ("eirp_dbm", "duty", "rx_gain_dbi"))
    defaults = TddConfig()
    tdd = TddConfig(
        eirp_dbm=_num(tdd_node.get("eirp_dbm", defaults.eirp_dbm), "scenario.tdd.eirp_dbm"),
        duty=_num(tdd_node.get("duty", defaults.duty), "scenario.tdd.duty"),
        rx_gain_dbi=_num(tdd_node.get("rx_gain_dbi", defaults.rx_gain_dbi), "scenario.tdd.rx_gain_dbi"),
    )
    jit_node = _mapping(root.get("jitter") or {}, "scenario.jitter", (), ("sigma_deg", "seed"))
    jitter = JitterConfig(
        sigma_deg=_num(jit_node.get("sigma_deg", 3.0), "scenario.jitter.sigma_deg"),
        seed=_int(jit_node.get("seed", 0), "scenario.jitter.seed"),
    )
    return ScenarioFile(scenario, plan, region, tdd, jitter,
                        _num(duplex.get("delta_min_hz", DEFAULT_DELTA_MIN_HZ), "scenario.duplex.delta_min_hz"))


def load_scenario_file(path):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise SchemaError(f"{path}: not valid YAML ({exc})") from None
    return parse_scenario_file(doc)


# -- serialization ---------------------------------------------------------------

def _pattern_doc(pattern, pointing):
    return {
        "gain": pattern.peak_gain, "hpbw_az": pattern.hpbw_az, "hpbw_el": pattern.hpbw_el,
        "floor": pattern.floor_atten,
        "boresight": {"azimuth": pointing.azimuth, "elevation": pointing.elevation},
    }


def _port_doc(port):
    d = {"tx_power": port.tx_power}
    d.update(_pattern_doc(port.pattern, port.pointing))
    return d


def scenario_file_doc(sf):
    s = sf.scenario
    doc = {
        "gs": {
            "position": list(s.gs.position),
            "ports": {"uplink": _port_doc(s.gs.uplink_rx), "downlink": _port_doc(s.gs.downlink_tx)},
        },
        "uavs": [
            {"id": u.id, "position": list(u.position), "tx_power": u.antenna.tx_power,
             "antenna": _pattern_doc(u.antenna.pattern, u.antenna.pointing)}
            for u in s.uavs
        ],
        "channels": [
            {"id": c.id, "center_hz": c.center_freq, "occupied_hz": c.occupied_bw, "guard_hz": c.guard_bw}
            for c in s.channels
        ],
        "noise": {"nf_db": s.noise_figure},
        "link": {"min_distance_m": s.min_link_distance, "xpd_db": s.xpd_db},
        "duplex": {"delta_min_hz": sf.delta_min},
        "tdd": {"eirp_dbm": sf.tdd.eirp_dbm, "duty": sf.tdd.duty, "rx_gain_dbi": sf.tdd.rx_gain_dbi},
        "jitter": {"sigma_deg": sf.jitter.sigma_deg, "seed": sf.jitter.seed},
    }
    if sf.plan is not None:
        doc["plan"] = {u: [up, down] for u, up, down in sf.plan.assignments}
    if sf.region is not None:
        r = sf.region
        doc["region"] = {
            "box": [list(r.x), list(r.y), list(r.z)],
            "step": list(r.step),
            "exclusions": [[list(b) for b in box] for box in r.exclusions],
        }
    return {"scenario": doc}


def dump_scenario_file(sf):
    return yaml.safe_dump(scenario_file_doc(sf), sort_keys=False, default_flow_style=None)


def save_scenario_file(sf, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_scenario_file(sf))


# -- measurement logs ------------------------------------------------------------

MEASUREMENT_HEADER = ("t_s", "x_m", "y_m", "z_m", "power_dbm", "channel_id")


@dataclass(frozen=True)
class MeasurementRow:
    t_s: float
    x_m: float
    y_m: float
    z_m: float
    power_dbm: float
    channel_id: int


def read_measurement_log(path):
    """Parse a measurement CSV; raises :class:`LogFormatError` with a line number."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise LogFormatError("empty file", 1)
        if tuple(h.strip() for h in header) != MEASUREMENT_HEADER:
            raise LogFormatError(f"expected header {','.join(MEASUREMENT_HEADER)}", 1)
        last_t = -math.inf
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not f.strip() for f in rec):
                continue
            if len(rec) != len(MEASUREMENT_HEADER):
                raise LogFormatError(f"expected {len(MEASUREMENT_HEADER)} fields, got {len(rec)}", lineno)
            try:
                vals = [float(f) for f in rec[:5]]
                ch = int(rec[5])
            except ValueError:
                raise LogFormatError(f"unparseable field in {rec!r}", lineno) from None
            if not all(math.isfinite(v) for v in vals):
                raise LogFormatError("non-finite value", lineno)
            if vals[0] < last_t:
                raise LogFormatError("t_s decreases", lineno)
            last_t = vals[0]
            rows.append(MeasurementRow(*vals, ch))
    if not rows:
        raise LogFormatError("log has no data rows", 2)
    return rows


def write_measurement_log(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MEASUREMENT_HEADER)
        for r in rows:
            w.writerow([repr(float(r.t_s)), repr(float(r.x_m)), repr(float(r.y_m)),
                        repr(float(r.z_m)), repr(float(r.power_dbm)), int(r.channel_id)])


# -- grid CSV ------------------------------------------------------------------

GRID_HEADER = "x_m,y_m,z_m,value,unit"


def _coord(v):
    return format(v, ".10g")


def grid_to_csv(grid):
    """CSV text: one row per unmasked cell, z-major then y then x ascending."""
    out = io.StringIO()
    out.write(GRID_HEADER + "\n")
    for x, y, z, v in grid.cells():
        out.write(f"{_coord(x)},{_coord(y)},{_coord(z)},{v:.6g},{grid.unit}\n")
    return out.getvalue()


def read_grid_csv(text):
    """Parse grid CSV text into ``(points (n, 3), values (n,), unit)``."""
    lines = text.splitlines()
    if not lines or lines[0] != GRID_HEADER:
        raise ValueError("not a grid CSV")
    pts, vals, unit = [], [], None
    for line in lines[1:]:
        x, y, z, v, u = line.split(",")
        pts.append((float(x), float(y), float(z)))
        vals.append(float(v))
        unit = u
    return np.array(pts).reshape(-1, 3), np.array(vals), unit


# -- SVG heatmap -------------------------------------------------------------------

# 11-step blue-white-red diverging scale (low -> high)
DIVERGING_PALETTE = (
    "#053061", "#2166ac", "#4393c3", "#92c5de", "#d1e5f0", "#f7f7f7",
    "#fddbc7", "#f4a582", "#d6604d", "#b2182b", "#67001f",
)


def _bin(v, lo, hi):
    if hi <= lo:
        return len(DIVERGING_PALETTE) // 2
    k = int((v - lo) / (hi - lo) * len(DIVERGING_PALETTE))
    return min(max(k, 0), len(DIVERGING_PALETTE) - 1)


def grid_to_svg(grid, title="", cell_px=4):
    """SVG heatmap with one panel per height and one <rect class="cell"> per unmasked cell."""
    nz, ny, nx = grid.shape
    valid = grid.values[grid.mask]
    lo = float(valid.min()) if valid.size else 0.0
    hi = float(valid.max()) if valid.size else 0.0
    pad, top = 20, 40
    panel_w, panel_h = nx * cell_px, ny * cell_px
    legend_h = 50
    width = pad + nz * (panel_w + pad)
    height = top + panel_h + pad + legend_h
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<text x="{pad}" y="18" font-family="sans-serif" font-size="13">{escape(title)}</text>',
    ]
    zs = grid.z.coords()
    for k in range(nz):
        ox = pad + k * (panel_w + pad)
        parts.append(f'<g class="panel" data-z="{_coord(float(zs[k]))}">')
        parts.append(f'<text x="{ox}" y="{top - 6}" font-family="sans-serif" font-size="11">'
                     f'z = {_coord(float(zs[k]))} m</text>')
        for j in range(ny):
            # north up: largest y on the top row
            py = top + (ny - 1 - j) * cell_px
            for i in range(nx):
                if not grid.mask[k, j, i]:
                    continue
                color = DIVERGING_PALETTE[_bin(grid.values[k, j, i], lo, hi)]
                parts.append(f'<rect class="cell" x="{ox + i * cell_px}" y="{py}" '
                             f'width="{cell_px}" height="{cell_px}" fill="{color}"/>')
        parts.append("</g>")
    ly = top + panel_h + pad
    parts.append('<g class="legend">')
    sw = 18
    for b, color in enumerate(DIVERGING_PALETTE):
        parts.append(f'<rect class="swatch" x="{pad + b * sw}" y="{ly}" width="{sw}" height="12" '
                     f'fill="{color}"/>')
    unit = escape(grid.unit)
    parts.append(f'<text x="{pad}" y="{ly + 28}" font-family="sans-serif" font-size="11">'
                 f'min {lo:.6g} {unit}</text>')
    parts.append(f'<text x="{pad + 6 * sw}" y="{ly + 28}" font-family="sans-serif" font-size="11">'
                 f'max {hi:.6g} {unit}</text>')
    parts.append("</g></svg>")
    return "\n".join(parts) + "\n"
