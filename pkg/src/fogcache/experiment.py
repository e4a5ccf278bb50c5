"""Configuration and the end-to-end pipeline shared by the CLI and the tests."""

from __future__ import annotations

import copy
import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .baselines import run_cachuni, run_unicast
from .metrics import CacheOutcome, evaluate, verify_p1
from .mobility import (HotspotStats, LocationError, MobilityParams, estimate_stats,
                       generate_synthetic_trajectories, perturb_hotspots, read_trajectories_csv)
from .radio import AntennaModel, RadioParams
from .scheduler import Schedule, ScheduleConfig, schedule_caching
from .topology import HotspotSpec, Scenario, generate_scenario

SCHEMES = ("MHRC", "CachUni", "Unicast")


class ConfigError(ValueError):
    pass


DEFAULT_CONFIG: dict[str, Any] = {
    "radio": {
        "bandwidth": 2160e6,
        "noise_dbm_per_mhz": -134.0,
        "pathloss_exp": 2.0,
        "tx_power_dbm": 30.0,
        "rho": 1.0,
        "carrier_frequency": 60e9,
        "eta": 0.5,
        "slot_duration": 1.0,
    },
    "antenna": {"beamwidth": 30.0},
    "topology": {
        "region": [300.0, 300.0],
        "n_relays": 30,
        "hotspots": 6,
        "hotspot_radius": 15.0,
        "min_bs_distance": 0.0,
        "centers": None,
    },
    "mobility": {
        "n_users": 100,
        "speed": 1.4,
        "dwell_mean": 600.0,
        "dwell_shape": 4.0,
        "popularity": [0.1, 0.9],
        "trajectory_file": None,
        "location_error_variance": 0.0,
    },
    "schedule": {"total_slots": 5400, "sigma": 1e-10, "beta": 0.9, "max_hops": 8},
    "metrics": {"include_delivery_energy": True},
}

# sweep axis -> (config section, key)
AXES = {
    "beta": ("schedule", "beta"),
    "hm": ("schedule", "max_hops"),
    "pt": ("radio", "tx_power_dbm"),
    "relays": ("topology", "n_relays"),
    "theta": ("antenna", "beamwidth"),
    "sigma": ("schedule", "sigma"),
    "k": ("schedule", "total_slots"),
    "err_var": ("mobility", "location_error_variance"),
}

AXIS_DEFAULT_VALUES = {
    "beta": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
    "hm": [1, 2, 3, 4, 5, 6, 7, 8],
    "pt": [10.0, 15.0, 20.0, 25.0, 30.0],
    "relays": [10, 15, 20, 25, 30, 35, 40],
    "theta": [10.0, 20.0, 30.0, 40.0, 50.0, 60.0],
    "sigma": [1e-14, 1e-13, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6],
    "k": [1800, 3600, 5400, 7200, 9000, 10800],
    "err_var": [0.0, 25.0, 50.0, 100.0, 200.0],
}


def merge_config(base: Mapping, override: Mapping) -> dict:
    out = copy.deepcopy(dict(base))
    for key, val in override.items():
        if key not in out:
            raise ConfigError(f"unknown config section {key!r}")
        if not isinstance(val, Mapping):
            raise ConfigError(f"config section {key!r} must be an object")
        for k, v in val.items():
            if k not in out[key]:
                raise ConfigError(f"unknown config field {key}.{k}")
            out[key][k] = v
    return out


def load_config(path: str | Path | None = None) -> dict:
    if path is None:
        return copy.deepcopy(DEFAULT_CONFIG)
    try:
        user = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    return merge_config(DEFAULT_CONFIG, user)


def set_field(config: dict, dotted: str, value) -> dict:
    section, _, key = dotted.partition(".")
    return merge_config(config, {section: {key: value}})


def with_axis(config: dict, axis: str, value) -> dict:
    if axis not in AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {sorted(AXES)}")
    section, key = AXES[axis]
    if key in ("max_hops", "total_slots", "n_relays"):
        value = int(value)
    return merge_config(config, {section: {key: value}})


def rng_stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for one component; the name keeps streams apart."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), zlib.crc32(name.encode())]))


@dataclass
class Parsed:
    radio: RadioParams
    antenna: AntennaModel
    hotspot_spec: HotspotSpec
    region: tuple[float, float]
    n_relays: int
    mobility: MobilityParams
    trajectory_file: str | None
    location_error: LocationError
    schedule: ScheduleConfig
    include_delivery: bool


def parse_config(config: Mapping) -> Parsed:
    try:
        topo, mob = config["topology"], config["mobility"]
        centers = topo.get("centers")
        return Parsed(
            radio=RadioParams.from_dict(config["radio"]),
            antenna=AntennaModel.from_dict(config["antenna"]),
            hotspot_spec=HotspotSpec(
                count=int(topo["hotspots"]) if centers is None else len(centers),
                radius=float(topo["hotspot_radius"]),
                centers=tuple(tuple(c) for c in centers) if centers is not None else None,
                min_bs_distance=float(topo["min_bs_distance"])),
            region=tuple(float(x) for x in topo["region"]),
            n_relays=int(topo["n_relays"]),
            mobility=MobilityParams(n_users=int(mob["n_users"]), speed=float(mob["speed"]),
                                    dwell_mean=float(mob["dwell_mean"]),
                                    dwell_shape=float(mob["dwell_shape"]),
                                    popularity=tuple(mob["popularity"])),
            trajectory_file=mob.get("trajectory_file"),
            location_error=LocationError(float(mob["location_error_variance"])),
            schedule=ScheduleConfig.from_dict(config["schedule"]),
            include_delivery=bool(config["metrics"]["include_delivery_energy"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from None


@dataclass
class RunResult:
    seed: int
    scenario: Scenario  # true hotspot positions
    planning: Scenario  # hotspot positions as seen by the planners
    stats: HotspotStats
    outcomes: dict[str, CacheOutcome] = field(default_factory=dict)
    schedules: dict[str, Schedule] = field(default_factory=dict)


def build_scenario(parsed: Parsed, seed: int) -> Scenario:
    try:
        return generate_scenario(parsed.region, parsed.n_relays, parsed.hotspot_spec,
                                 rng_stream(seed, "topology"), parsed.radio, parsed.antenna)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_stats(parsed: Parsed, scenario: Scenario, seed: int) -> HotspotStats:
    if parsed.trajectory_file:
        path = Path(parsed.trajectory_file)
        if not path.is_file():
            raise ConfigError(f"trajectory file not found: {path}")
        trajectories = read_trajectories_csv(path)
    else:
        trajectories = generate_synthetic_trajectories(scenario, parsed.mobility.n_users,
                                                       parsed.mobility, rng_stream(seed, "trajectories"))
    if not trajectories:
        raise ConfigError("no trajectories to estimate hotspot statistics from")
    return estimate_stats(trajectories, scenario.hotspots, parsed.radio.slot_duration)


def run_once(config: Mapping, seed: int, verify: bool = False) -> RunResult:
    """All three schemes on one seeded scenario.

    With ``verify`` the caching schedules are checked against the problem
    constraints and an :class:`AssertionError` is raised on a violation.
    """
    parsed = parse_config(config)
    scenario = build_scenario(parsed, seed)
    stats = build_stats(parsed, scenario, seed)
    moved = perturb_hotspots(scenario.hotspots, parsed.location_error, rng_stream(seed, "perturbation"))
    planning = scenario.with_hotspots(moved)
    truth = scenario.hotspots
    cfg = parsed.schedule

    res = RunResult(seed, scenario, planning, stats)
    mhrc = schedule_caching(planning, stats, cfg)
    res.schedules["MHRC"] = mhrc
    res.outcomes["MHRC"] = evaluate("MHRC", mhrc, planning, stats, truth, parsed.include_delivery)
    cachuni, out = run_cachuni(planning, stats, cfg, truth)
    if not parsed.include_delivery:
        out = evaluate("CachUni", cachuni, planning, stats, truth, False)
    res.schedules["CachUni"] = cachuni
    res.outcomes["CachUni"] = out
    res.outcomes["Unicast"] = run_unicast(scenario, stats)

    if verify:
        for name in ("MHRC", "CachUni"):
            rep = verify_p1(res.schedules[name], res.outcomes[name].delivered, planning, stats,
                            sigma=cfg.sigma, true_hotspots=truth)
            if not rep.ok:
                raise AssertionError(f"{name} seed {seed}: {rep}")
    return res
