"""Command-line entry point: ``muibfd <command> [options]``.

Exit codes: 0 ok, 2 bad input or validation failure, 3 I/O failure,
4 infeasible, 5 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io as sio
from .duplex import evaluate_plan, optimize_plan, validate_plan
from .errors import ConditioningError, EmptyMapError, InfeasibleError
from .gpr import Hyperparams, SampleSet, fit, fit_hyperparams, predict
from .metrics import (
    GridMap,
    area_fraction_below,
    ber_awgn,
    bits_per_symbol,
    downlink_sinr_db,
    shannon_capacity,
)
from .planner import (
    MAP_KINDS,
    PlanConstraints,
    RegionSpec,
    adjust_positions,
    ray_lateral_distance,
    simulate_map,
)
from .propagation import jittered_rssi_series, link_budget, noise_floor_dbm

EXIT_OK, EXIT_INPUT, EXIT_IO, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 2, 3, 4, 5

BER_ERROR_FREE = 1e-6


class UsageError(ValueError):
    pass


# -- argument helpers ---------------------------------------------------------------

def parse_region(text, exclusions=()):
    """``x0:x1:y0:y1:z1,z2,...:step`` -> RegionSpec.

    Heights must be evenly spaced; `step` applies to x and y.
    """
    parts = text.split(":")
    if len(parts) != 6:
        raise UsageError(f"region {text!r}: expected x0:x1:y0:y1:z1,z2,...:step")
    try:
        x0, x1, y0, y1 = (float(p) for p in parts[:4])
        zs = [float(z) for z in parts[4].split(",") if z.strip()]
        step = float(parts[5])
    except ValueError:
        raise UsageError(f"region {text!r}: non-numeric field") from None
    if not zs:
        raise UsageError(f"region {text!r}: no heights given")
    if step <= 0:
        raise UsageError("region step must be positive")
    zs = sorted(zs)
    if len(zs) == 1:
        dz = 1.0
    else:
        gaps = np.diff(zs)
        dz = float(gaps[0])
        if dz <= 0 or not np.allclose(gaps, dz, rtol=0, atol=1e-9):
            raise UsageError(f"region {text!r}: heights must be distinct and evenly spaced")
    return RegionSpec((x0, x1), (y0, y1), (zs[0], zs[-1]), (step, step, dz), tuple(exclusions))


def _endpoint(text):
    node, _, port = text.partition(":")
    if not port:
        raise UsageError(f"endpoint {text!r}: expected <node>:<port>")
    if node != "gs":
        try:
            node = int(node)
        except ValueError:
            raise UsageError(f"endpoint {text!r}: node must be 'gs' or a UAV id") from None
    return node, port


def _displacement(text):
    if "=" not in text:
        return float(text)
    out = {}
    for item in text.split(","):
        k, _, v = item.partition("=")
        out[int(k)] = float(v)
    return out


def _with_uav_floor(scenario, floor):
    uavs = []
    for u in scenario.uavs:
        pat = replace(u.antenna.pattern, floor_atten=floor)
        uavs.append(replace(u, antenna=replace(u.antenna, pattern=pat)))
    return replace(scenario, uavs=tuple(uavs))


def _load(args):
    sf = sio.load_scenario_file(args.scenario) if args.scenario else sio.default_scenario_file()
    if getattr(args, "floor", None) is not None:
        sf = replace(sf, scenario=_with_uav_floor(sf.scenario, args.floor))
    return sf


def _require_plan(sf):
    if sf.plan is None:
        raise UsageError("scenario file has no plan section")
    bad = validate_plan(sf.plan, sf.scenario.channels, sf.delta_min)
    if bad:
        raise UsageError("invalid plan: " + "; ".join(v.message for v in bad))
    return sf.plan


def _region(args, sf):
    excl = sf.region.exclusions if sf.region is not None else ()
    if args.region:
        return parse_region(args.region, excl)
    if sf.region is None:
        raise UsageError("no --region given and the scenario file has no region section")
    return sf.region


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _emit_grid(grid, prefix, title, figures):
    _write(f"{prefix}.csv", sio.grid_to_csv(grid))
    _write(f"{prefix}.svg", sio.grid_to_svg(grid, title))
    if figures:
        from .figures import render_map_png
        render_map_png(grid, f"{prefix}.png", title)


def _g(v):
    return format(v, ".10g")


# -- commands ---------------------------------------------------------------------

def cmd_simulate_map(args):
    sf = _load(args)
    plan = _require_plan(sf)
    region = _region(args, sf)
    victim = args.victim if args.victim is not None else plan.uav_ids[0]
    kind = args.kind
    sinr_floor = args.threshold if (kind == "keepout" and args.threshold is not None) else 10.0
    grid = simulate_map(sf.scenario, plan, victim, region, kind, tdd=sf.tdd,
                        sinr_floor=sinr_floor, jobs=args.jobs)
    if grid.n_valid == 0:
        raise EmptyMapError("every cell of the region is masked")
    _emit_grid(grid, args.out, f"{kind} [{grid.unit}], victim UAV {victim}", not args.no_figures)
    lines = [f"kind: {kind}", f"unit: {grid.unit}", f"cells: {grid.n_valid}"]
    vals = grid.values[grid.mask]
    lines.append(f"min: {vals.min():.6g}")
    lines.append(f"max: {vals.max():.6g}")
    threshold = args.threshold
    if threshold is None and kind == "cci":
        threshold = -90.0
    if kind == "keepout":
        lines.append(f"keepout_fraction: {float(vals.mean()):.6g}")
    elif threshold is not None:
        lines.append(f"fraction_below_{_g(threshold)}: {area_fraction_below(grid, threshold):.6g}")
    if kind == "improvement":
        lines.append(f"fraction_above_100pct: {float((vals > 100.0).mean()):.6g}")
        lines.append(f"fraction_negative: {float((vals < 0.0).mean()):.6g}")
    _write(f"{args.out}.summary.txt", "\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK


def cmd_assign(args):
    sf = _load(args)
    delta = args.delta_min if args.delta_min is not None else sf.delta_min
    plan, value = optimize_plan(sf.scenario, delta_min=delta, objective=args.objective)
    s = sf.scenario
    rows = ["uav_id,uplink_channel,downlink_channel,sinr_db,capacity_bps"]
    for u, up, down in plan.assignments:
        sinr = downlink_sinr_db(s, plan, u)
        cap = shannon_capacity(s.channel(down).occupied_bw, sinr)
        rows.append(f"{u},{up},{down},{sinr:.6g},{cap:.6g}")
    text = "\n".join(rows) + "\n"
    unit = "dB" if args.objective == "maxmin" else "bit/s"
    print(text + f"objective ({args.objective}): {value:.6g} {unit}")
    if args.out:
        _write(f"{args.out}.csv", text)
        if args.write_scenario:
            sio.save_scenario_file(replace(sf, plan=plan), args.write_scenario)
    return EXIT_OK


def cmd_plan(args):
    sf = _load(args)
    plan = _require_plan(sf)
    floor = args.threshold if args.threshold is not None else 10.0
    constraints = PlanConstraints(
        min_separation=args.min_separation,
        max_displacement=_displacement(args.max_displacement),
        altitude=(args.alt_min, args.alt_max),
    )
    res = adjust_positions(sf.scenario, plan, constraints, floor)
    rows = ["uav_id,x0_m,y0_m,z0_m,sinr0_db,x1_m,y1_m,z1_m,sinr1_db"]
    for u in sorted(res.positions):
        p0 = sf.scenario.uav(u).position
        p1 = res.positions[u]
        rows.append(",".join([str(u), *(_g(c) for c in p0), f"{res.initial_sinr[u]:.6g}",
                              *(_g(c) for c in p1), f"{res.sinr[u]:.6g}"]))
    text = "\n".join(rows) + "\n"
    print(text + f"moved: {res.moved}; min SINR {min(res.initial_sinr.values()):.6g} -> "
          f"{min(res.sinr.values()):.6g} dB (floor {floor:g} dB)")
    if args.out:
        _write(f"{args.out}.csv", text)
    return EXIT_OK


def _hyperparams(text, samples):
    if text == "auto":
        return fit_hyperparams(samples)
    try:
        ls, sf2, sn2 = text.split(":")
        scales = [float(v) for v in ls.split(",")]
        if len(scales) == 1:
            scales = scales * samples.dim
        return Hyperparams(tuple(scales), float(sf2), float(sn2), float(np.mean(samples.values)))
    except ValueError as exc:
        raise UsageError(f"hyperparams {text!r}: expected 'auto' or l[,l,l]:sf2:sn2 ({exc})") from None


def cmd_interpolate(args):
    rows = sio.read_measurement_log(args.log)
    if args.channel is not None:
        rows = [r for r in rows if r.channel_id == args.channel]
        if not rows:
            raise UsageError(f"log has no rows on channel {args.channel}")
    pts = np.array([(r.x_m, r.y_m, r.z_m) for r in rows])
    vals = np.array([r.power_dbm for r in rows])
    samples = SampleSet(pts, vals, "dBm")
    hp = _hyperparams(args.hyperparams, samples)
    model = fit(samples, hp)
    region = parse_region(args.region)
    xa, ya, za = region.axes()
    if xa.count * ya.count * za.count == 0:
        raise UsageError("query region contains no cells")
    zz, yy, xx = np.meshgrid(za.coords(), ya.coords(), xa.coords(), indexing="ij")
    query = np.column_stack([xx.ravel(), yy.ravel(), zz.ravel()])
    mask = np.array([not region.excluded(p) for p in query])
    mean, var = predict(model, query)
    mean_grid = GridMap(xa, ya, za, mean, mask, "dBm")
    var_grid = GridMap(xa, ya, za, var, mask, "dB^2")
    figures = not args.no_figures
    _emit_grid(mean_grid, f"{args.out}_mean", "interpolated mean [dBm]", figures)
    _emit_grid(var_grid, f"{args.out}_var", "posterior variance [dB^2]", figures)
    lines = [
        f"samples: {len(vals)}",
        "length_scales_m: " + ",".join(_g(v) for v in hp.length_scales),
        f"signal_var: {hp.signal_var:.6g}",
        f"noise_var: {hp.noise_var:.6g}",
        f"prior_mean: {hp.prior_mean:.6g}",
        f"flat_prior: {hp.flat}",
        f"jitter: {model.jitter:.3g}",
    ]
    print("\n".join(lines))
    _write(f"{args.out}.summary.txt", "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_jitter(args):
    sf = _load(args)
    s = sf.scenario
    if args.tx or args.rx:
        if not (args.tx and args.rx and args.channel is not None):
            raise UsageError("--tx, --rx and --channel must be given together")
        tx, rx, channel = _endpoint(args.tx), _endpoint(args.rx), args.channel
    else:
        # default: first UAV's uplink into the GS
        u = s.uav_ids[0]
        channel = args.channel if args.channel is not None else (
            sf.plan.uplink(u) if sf.plan is not None else s.channels[0].id)
        tx, rx = (u, "uplink"), ("gs", "uplink")
    sigma = args.sigma if args.sigma is not None else sf.jitter.sigma_deg
    seed = args.seed if args.seed is not None else sf.jitter.seed
    ch = s.channel(channel)
    nominal = link_budget(s, tx, rx, ch).rx_power
    rssi = jittered_rssi_series(s, (tx, rx, ch), sigma, args.n, seed)
    noise = noise_floor_dbm(ch.occupied_bw, s.noise_figure)
    # one symbol per hertz of occupied band
    ebn0_offset = 10.0 * math.log10(bits_per_symbol(args.modulation))
    snr = rssi - noise
    ber = np.array([ber_awgn(args.modulation, v - ebn0_offset) for v in snr])
    lines = ["sample,rssi_dbm,snr_db,ber"]
    lines += [f"{i},{r:.6f},{q:.6f},{b:.6e}" for i, (r, q, b) in enumerate(zip(rssi, snr, ber))]
    _write(f"{args.out}.csv", "\n".join(lines) + "\n")
    ok = float(np.mean(ber <= BER_ERROR_FREE))
    drop = float(np.mean(rssi < nominal - args.drop_db))
    summary = [
        f"link: {tx[0]}:{tx[1]} -> {rx[0]}:{rx[1]} on channel {channel}",
        f"sigma_deg: {_g(sigma)}",
        f"seed: {seed}",
        f"samples: {args.n}",
        f"nominal_rssi_dbm: {nominal:.6f}",
        f"mean_rssi_dbm: {float(np.mean(rssi)):.6f}",
        f"min_rssi_dbm: {float(np.min(rssi)):.6f}",
        f"error_free_fraction: {ok:.6g}",
        f"degraded_fraction: {drop:.6g}",
    ]
    _write(f"{args.out}.summary.txt", "\n".join(summary) + "\n")
    if not args.no_figures:
        from .figures import render_jitter_png
        render_jitter_png(rssi, ber, f"{args.out}.png", f"sigma = {_g(sigma)} deg")
    print("\n".join(summary))
    return EXIT_OK


def cmd_default_scenario(args):
    sf = sio.default_scenario_file()
    if args.floor is not None:
        sf = replace(sf, scenario=_with_uav_floor(sf.scenario, args.floor))
    text = sio.dump_scenario_file(sf)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_reproduce(args):
    """CCI, SINR and improvement maps of the default scenario plus a jitter run."""
    sf = _load(args)
    plan = _require_plan(sf)
    region = _region(args, sf)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    s = sf.scenario
    victim = plan.uav_ids[0]
    aggressor = plan.uav_ids[1]
    lines = []
    grids = {}
    for kind in ("cci", "sinr", "improvement"):
        g = simulate_map(s, plan, victim, region, kind, tdd=sf.tdd, jobs=args.jobs)
        grids[kind] = g
        _emit_grid(g, out / kind, f"{kind} [{g.unit}], victim UAV {victim}", not args.no_figures)
    lines.append(f"cci_fraction_below_-90dBm: {area_fraction_below(grids['cci'], -90.0):.6g}")
    imp = grids["improvement"]
    vals = imp.values[imp.mask]
    lines.append(f"improvement_fraction_above_100pct: {float((vals > 100).mean()):.6g}")
    gs = s.gs.position
    ref = s.uav(aggressor).position
    lateral = [ray_lateral_distance((x, y, z), gs, ref) for x, y, z, v in imp.cells() if v < 0]
    lines.append(f"negative_improvement_cells: {len(lateral)}")
    lines.append(f"negative_improvement_max_lateral_m: {max(lateral, default=0.0):.6g}")
    lines.append(f"swap_plan_min_sinr_db: {evaluate_plan(s, plan):.6g}")
    _write(out / "summary.txt", "\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK


# -- parser -----------------------------------------------------------------------

def _seed(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="muibfd", description="Multi-UAV full-duplex link simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, region=True):
        sp.add_argument("--scenario", help="scenario YAML (default: built-in experiment scenario)")
        sp.add_argument("--floor", type=float, help="override the UAV antenna floor attenuation [dB]")
        if region:
            sp.add_argument("--region", help="x0:x1:y0:y1:z1,z2,...:step (meters)")
        sp.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    sp = sub.add_parser("simulate-map", help="sweep the victim UAV over a region")
    common(sp)
    sp.add_argument("--kind", choices=MAP_KINDS, required=True)
    sp.add_argument("--out", required=True, help="output prefix")
    sp.add_argument("--victim", type=int)
    sp.add_argument("--threshold", type=float,
                    help="area-fraction threshold (default -90 for cci); SINR floor for keepout")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_simulate_map)

    sp = sub.add_parser("assign", help="choose a channel plan")
    common(sp, region=False)
    sp.add_argument("--objective", choices=("maxmin", "sumcap"), default="maxmin")
    sp.add_argument("--delta-min", type=float, help="uplink/downlink separation [Hz]")
    sp.add_argument("--out", help="output prefix for the plan CSV")
    sp.add_argument("--write-scenario", help="also write the scenario with the chosen plan")
    sp.set_defaults(func=cmd_assign)

    sp = sub.add_parser("plan", help="adjust UAV positions to meet a SINR floor")
    common(sp, region=False)
    sp.add_argument("--threshold", type=float, help="SINR floor [dB] (default 10)")
    sp.add_argument("--max-displacement", default="10",
                    help="meters, or per-UAV list like 1=10,2=0")
    sp.add_argument("--min-separation", type=float, default=10.0)
    sp.add_argument("--alt-min", type=float, default=0.0)
    sp.add_argument("--alt-max", type=float, default=150.0)
    sp.add_argument("--out", help="output prefix")
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("interpolate", help="GP interpolation of a measurement log")
    sp.add_argument("--log", required=True)
    sp.add_argument("--hyperparams", default="auto", help="'auto' or l[,l,l]:sf2:sn2")
    sp.add_argument("--region", required=True, help="query grid x0:x1:y0:y1:z1,z2,...:step")
    sp.add_argument("--channel", type=int, help="use only rows on this channel")
    sp.add_argument("--out", required=True)
    sp.add_argument("--no-figures", action="store_true")
    sp.set_defaults(func=cmd_interpolate)

    sp = sub.add_parser("jitter", help="RSSI/BER series under UAV pointing jitter")
    common(sp, region=False)
    sp.add_argument("--tx", help="transmit endpoint, e.g. 1:uplink")
    sp.add_argument("--rx", help="receive endpoint, e.g. gs:uplink")
    sp.add_argument("--channel", type=int)
    sp.add_argument("--sigma", type=float, help="tilt std [deg]")
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--seed", type=_seed)
    sp.add_argument("--modulation", default="16QAM", choices=("BPSK", "QPSK", "16QAM", "64QAM"))
    sp.add_argument("--drop-db", type=float, default=1.0,
                    help="RSSI drop below nominal counted as degraded")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_jitter)

    sp = sub.add_parser("default-scenario", help="write the built-in scenario as YAML")
    sp.add_argument("--floor", type=float)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_default_scenario)

    sp = sub.add_parser("reproduce", help="CCI/SINR/improvement maps with summary statistics")
    common(sp)
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except sio.SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for v in exc.violations:
            print(f"  [{v.code}] {v.message}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConditioningError, ZeroDivisionError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
