"""Command-line entry point: scenario files, single runs, sweeps and oracle gaps.

Exit codes: 0 success, 2 configuration or input error, 3 a produced schedule
failed constraint verification.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from . import experiment as ex
from .baselines import run_cachuni
from .metrics import evaluate, verify_p1
from .mobility import (estimate_stats, generate_synthetic_trajectories,
                       read_trajectories_csv, write_trajectories_csv)
from .oracle import exact_schedule, toy_instance
from .scheduler import ScheduleConfig, schedule_caching
from .topology import Scenario

RUN_COLUMNS = ["seed", "scheme", "expected_cached_bits", "energy_mj", "efficiency_bits_per_mj",
               "link_slots", "hotspots_served", "detail"]
SWEEP_COLUMNS = ["axis", "value", "scheme", "n_seeds", "mean_expected_cached_bits",
                 "std_expected_cached_bits", "mean_efficiency_bits_per_mj", "std_efficiency_bits_per_mj"]
GAP_COLUMNS = ["instance", "mhrc_bits", "cachuni_bits", "oracle_bits", "mhrc_ratio", "oracle_valid"]


class InvariantViolation(RuntimeError):
    pass


def _num(x) -> str:
    return repr(float(x))


def _detail(outcome) -> str:
    # per hotspot: id=target/cached/delivered in bits
    ids = sorted(outcome.delivered)
    return ";".join(f"{u}={_num(outcome.target.get(u, 0))}/{_num(outcome.cached.get(u, 0.0))}/"
                    f"{_num(outcome.delivered[u])}" for u in ids)


def _run_rows(config: dict, seed: int) -> tuple[list[list[str]], dict]:
    try:
        res = ex.run_once(config, seed, verify=True)
    except AssertionError as exc:
        raise InvariantViolation(str(exc)) from None
    rows = []
    for name in ex.SCHEMES:
        o = res.outcomes[name]
        served = sum(1 for d in o.delivered.values() if d > 0)
        rows.append([str(seed), name, _num(o.expected_cached), _num(o.energy_mj),
                     _num(o.energy_efficiency), str(o.link_slots), str(served), _detail(o)])
    schedules = {name: s.to_dict() for name, s in res.schedules.items()}
    return rows, schedules


def _map(fn, args_list, jobs: int):
    if jobs <= 1 or len(args_list) <= 1:
        return [fn(*a) for a in args_list]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, *zip(*args_list)))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _load(args) -> dict:
    config = ex.load_config(args.config)
    for item in args.set or []:
        key, sep, raw = item.partition("=")
        if not sep or "." not in key:
            raise ex.ConfigError(f"--set expects section.field=value, got {item!r}")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        config = ex.set_field(config, key, value)
    if getattr(args, "trajectories", None):
        config = ex.set_field(config, "mobility.trajectory_file", args.trajectories)
    ex.parse_config(config)  # validate early
    return config


# --- subcommands -------------------------------------------------------------

def cmd_gen_scenario(args) -> int:
    parsed = ex.parse_config(_load(args))
    sc = ex.build_scenario(parsed, args.seed)
    Path(args.out).write_text(sc.to_json())
    return 0


def cmd_gen_traj(args) -> int:
    config = _load(args)
    parsed = ex.parse_config(config)
    sc = _read_scenario(args.scenario) if args.scenario else ex.build_scenario(parsed, args.seed)
    trajs = generate_synthetic_trajectories(sc, parsed.mobility.n_users, parsed.mobility,
                                            ex.rng_stream(args.seed, "trajectories"))
    write_trajectories_csv(trajs, args.out)
    return 0


def _read_scenario(path) -> Scenario:
    try:
        return Scenario.from_json(Path(path).read_text())
    except FileNotFoundError:
        raise ex.ConfigError(f"scenario file not found: {path}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise ex.ConfigError(f"bad scenario file {path}: {exc}") from None


def cmd_stats(args) -> int:
    sc = _read_scenario(args.scenario)
    if not Path(args.trajectories).is_file():
        raise ex.ConfigError(f"trajectory file not found: {args.trajectories}")
    trajs = read_trajectories_csv(args.trajectories)
    if not trajs:
        raise ex.ConfigError("trajectory file holds no users")
    stats = estimate_stats(trajs, sc.hotspots, sc.radio.slot_duration)
    Path(args.out).write_text(stats.to_json())
    return 0


def cmd_run(args) -> int:
    config = _load(args)
    seeds = list(args.seeds)
    results = _map(_run_rows, [(config, s) for s in seeds], args.jobs)
    rows = [r for rs, _ in results for r in rs]
    Path(args.out).write_text(_csv_text(RUN_COLUMNS, rows))
    if args.schedule_out:
        doc = {str(s): sched for s, (_, sched) in zip(seeds, results)}
        Path(args.schedule_out).write_text(json.dumps(doc, sort_keys=True))
    return 0


def _sweep_point(config: dict, axis: str, value, seed: int):
    rows, _ = _run_rows(ex.with_axis(config, axis, value), seed)
    return rows


def sweep_rows(config: dict, axis: str, values: Sequence, seeds: Sequence[int], jobs: int = 1):
    """(aggregate rows, raw rows) for the Cartesian product of values and seeds."""
    if axis not in ex.AXES:
        raise ex.ConfigError(f"unknown sweep axis {axis!r}; choose from {sorted(ex.AXES)}")
    if not values:
        raise ex.ConfigError("sweep needs at least one axis value")
    if not seeds:
        raise ex.ConfigError("sweep needs at least one seed")
    for v in values:
        ex.parse_config(ex.with_axis(config, axis, v))
    tasks = [(config, axis, v, s) for v in values for s in seeds]
    out = _map(_sweep_point, tasks, jobs)
    raw, groups = [], {}
    for (_, _, v, _), rows in zip(tasks, out):
        for r in rows:
            raw.append([axis, _num(v)] + r)
            groups.setdefault((r[1], float(v)), []).append((float(r[2]), float(r[4])))
    agg = []
    for (scheme, v), pts in sorted(groups.items(), key=lambda g: (ex.SCHEMES.index(g[0][0]), g[0][1])):
        eds = [p[0] for p in pts]
        effs = [p[1] for p in pts]
        std = (lambda xs: statistics.stdev(xs) if len(xs) > 1 else 0.0)
        agg.append([axis, _num(v), scheme, str(len(pts)), _num(statistics.fmean(eds)), _num(std(eds)),
                    _num(statistics.fmean(effs)), _num(std(effs))])
    return agg, raw


def cmd_sweep(args) -> int:
    config = _load(args)
    values = args.values if args.values is not None else ex.AXIS_DEFAULT_VALUES.get(args.axis, [])
    agg, raw = sweep_rows(config, args.axis, values, list(args.seeds), args.jobs)
    Path(args.out).write_text(_csv_text(SWEEP_COLUMNS, agg))
    if args.raw_out:
        Path(args.raw_out).write_text(_csv_text(["axis", "value"] + RUN_COLUMNS, raw))
    return 0


def oracle_gap_rows(n_instances: int, slots: int, first_seed: int = 0, sigma: float = 1e-10,
                    max_hops: int = 3) -> list[list[str]]:
    rows = []
    for i in range(first_seed, first_seed + n_instances):
        sc, st = toy_instance(i)
        cfg = ScheduleConfig(total_slots=slots, sigma=sigma, max_hops=max_hops)
        m = evaluate("MHRC", schedule_caching(sc, st, cfg), sc, st).expected_cached
        c = run_cachuni(sc, st, cfg)[1].expected_cached
        opt = exact_schedule(sc, st, slots, sigma)
        ok = verify_p1(opt.schedule, opt.delivered, sc, st, sigma=sigma).ok
        if m > opt.expected_cached * (1 + 1e-9) or c > opt.expected_cached * (1 + 1e-9) or not ok:
            raise InvariantViolation(f"instance {i}: heuristic above oracle or oracle schedule invalid")
        ratio = m / opt.expected_cached if opt.expected_cached > 0 else 1.0
        rows.append([str(i), _num(m), _num(c), _num(opt.expected_cached), _num(ratio), str(ok)])
    return rows


def cmd_oracle_gap(args) -> int:
    rows = oracle_gap_rows(args.instances, args.slots, args.seed)
    Path(args.out).write_text(_csv_text(GAP_COLUMNS, rows))
    ratios = [float(r[4]) for r in rows]
    if ratios:
        print(f"mean MHRC/oracle ratio {statistics.fmean(ratios):.3f} over {len(ratios)} instances")
    return 0


# --- argument parsing --------------------------------------------------------

def _axis_value(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not a finite number: {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fogcache", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seeds=False):
        sp.add_argument("--config", help="JSON config; missing fields take the defaults")
        sp.add_argument("--set", action="append", metavar="SECTION.FIELD=VALUE",
                        help="override one config field (repeatable)")
        if seeds:
            sp.add_argument("--seeds", type=int, nargs="+", default=[0])
            sp.add_argument("--jobs", type=int, default=1, help="worker processes")
        else:
            sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("gen-scenario", help="write a random scenario as JSON")
    common(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen_scenario)

    sp = sub.add_parser("gen-traj", help="write synthetic user trajectories as CSV")
    common(sp)
    sp.add_argument("--scenario", help="scenario JSON (default: generate from config and seed)")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen_traj)

    sp = sub.add_parser("stats", help="estimate pass probability and stay per hotspot")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--trajectories", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("run", help="MHRC and both baselines on seeded scenarios")
    common(sp, seeds=True)
    sp.add_argument("--trajectories", help="trajectory CSV instead of synthetic users")
    sp.add_argument("--out", required=True, help="results CSV")
    sp.add_argument("--schedule-out", help="schedule JSON")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="mean and std of every scheme along one parameter")
    common(sp, seeds=True)
    sp.add_argument("--axis", required=True, choices=sorted(ex.AXES))
    sp.add_argument("--values", type=_axis_value, nargs="*",
                    help="axis values (default: the axis's standard grid)")
    sp.add_argument("--trajectories", help="trajectory CSV instead of synthetic users")
    sp.add_argument("--out", required=True, help="aggregate CSV")
    sp.add_argument("--raw-out", help="per-seed rows CSV")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("oracle-gap", help="MHRC against the exact optimum on toy instances")
    sp.add_argument("--instances", type=int, default=50)
    sp.add_argument("--slots", type=int, default=6)
    sp.add_argument("--seed", type=int, default=0, help="first instance seed")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_oracle_gap)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ex.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as exc:  # unreadable or malformed input files
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
