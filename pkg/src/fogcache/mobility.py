"""User trajectories and the hotspot statistics derived from them.

Trajectories are piecewise-linear in time.  A user passes a hotspot when its
path touches the closed disk around the hotspot centre; the stay is the
total time spent inside that disk.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .topology import Hotspot, Scenario


@dataclass
class Trajectory:
    user_id: str
    samples: np.ndarray  # (n, 3) rows of t, x, y

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float).reshape(-1, 3)
        if len(self.samples) and np.any(np.diff(self.samples[:, 0]) <= 0):
            raise ValueError(f"timestamps of user {self.user_id} are not strictly increasing")


@dataclass(frozen=True)
class HotspotStats:
    """Pass probability and expected stay (in slots) per hotspot id."""

    pass_prob: dict[int, float]
    stay_slots: dict[int, int]

    def __post_init__(self):
        for u, f in self.pass_prob.items():
            if not 0.0 <= f <= 1.0:
                raise ValueError(f"pass probability of hotspot {u} outside [0, 1]")
            if f > 0 and self.stay_slots.get(u, 0) < 1:
                raise ValueError(f"visited hotspot {u} needs a stay of at least one slot")

    def schedulable(self) -> list[int]:
        return [u for u, f in self.pass_prob.items() if f > 0 and self.stay_slots.get(u, 0) > 0]

    def to_dict(self) -> dict:
        return {"hotspots": [{"id": u, "pass_prob": self.pass_prob[u],
                              "stay_slots": self.stay_slots.get(u, 0)}
                             for u in sorted(self.pass_prob)]}

    @classmethod
    def from_dict(cls, d) -> "HotspotStats":
        rows = d["hotspots"]
        return cls({r["id"]: float(r["pass_prob"]) for r in rows},
                   {r["id"]: int(r["stay_slots"]) for r in rows})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "HotspotStats":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class LocationError:
    variance: float = 0.0  # m^2 per axis

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("location error variance must be non-negative")


@dataclass(frozen=True)
class MobilityParams:
    """Synthetic walker model.

    Each hotspot gets a popularity drawn uniformly from ``popularity``; a
    user includes the hotspot in its walk with that probability, then walks
    between boundary entry, the chosen hotspot centres (random order) and a
    boundary exit at ``speed``, stopping at each centre for a gamma-distributed
    dwell time with mean ``dwell_mean`` and shape ``dwell_shape``.
    """

    n_users: int = 100
    speed: float = 1.4  # m/s
    dwell_mean: float = 600.0  # s
    dwell_shape: float = 4.0
    popularity: tuple[float, float] = (0.1, 0.9)
    start_time: float = 0.0

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["popularity"] = list(self.popularity)
        return d

    @classmethod
    def from_dict(cls, d) -> "MobilityParams":
        d = dict(d)
        if "popularity" in d:
            d["popularity"] = tuple(d["popularity"])
        return cls(**d)


def _segment_inside(p0, p1, center, radius) -> tuple[bool, float]:
    """Whether segment p0->p1 touches the closed disk, and the fraction inside."""
    d = p1 - p0
    f = p0 - center
    a = float(d @ d)
    b = 2.0 * float(f @ d)
    c = float(f @ f) - radius * radius
    if a == 0.0:
        return c <= 0.0, 1.0 if c <= 0.0 else 0.0
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return False, 0.0
    sq = math.sqrt(disc)
    t0 = (-b - sq) / (2.0 * a)
    t1 = (-b + sq) / (2.0 * a)
    lo, hi = max(t0, 0.0), min(t1, 1.0)
    if lo > hi:
        return False, 0.0
    return True, hi - lo


def pass_and_dwell(traj: Trajectory, hotspot: Hotspot) -> tuple[bool, float]:
    """(entered, seconds inside) for one trajectory against one hotspot disk."""
    s = traj.samples
    center = np.asarray(hotspot.center, dtype=float)
    if len(s) == 1:
        inside = float(np.hypot(*(s[0, 1:] - center))) <= hotspot.radius
        return inside, 0.0
    entered, dwell = False, 0.0
    for k in range(len(s) - 1):
        hit, frac = _segment_inside(s[k, 1:], s[k + 1, 1:], center, hotspot.radius)
        if hit:
            entered = True
            dwell += frac * (s[k + 1, 0] - s[k, 0])
    return entered, dwell


def estimate_stats(trajectories: Sequence[Trajectory], hotspots: Sequence[Hotspot],
                   slot_duration: float = 1.0) -> HotspotStats:
    if not trajectories:
        raise ValueError("need at least one trajectory")
    n = len(trajectories)
    pass_prob, stay = {}, {}
    for h in hotspots:
        dwells = []
        for tr in trajectories:
            entered, dwell = pass_and_dwell(tr, h)
            if entered:
                dwells.append(dwell)
        pass_prob[h.id] = len(dwells) / n
        if dwells:
            mean_slots = math.fsum(dwells) / len(dwells) / slot_duration
            stay[h.id] = max(1, int(math.floor(mean_slots + 0.5)))
        else:
            stay[h.id] = 0
    return HotspotStats(pass_prob, stay)


def generate_synthetic_trajectories(scenario: Scenario, n_users: int,
                                    params: MobilityParams | None = None,
                                    rng_seed=0) -> list[Trajectory]:
    params = params or MobilityParams()
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    if n_users <= 0:
        return []
    w, h = scenario.region
    hotspots = scenario.hotspots
    lo, hi = params.popularity
    popularity = rng.uniform(lo, hi, size=len(hotspots))
    scale = params.dwell_mean / params.dwell_shape

    def boundary_point():
        side = rng.integers(4)
        a = rng.uniform()
        return np.array([(a * w, 0.0), (a * w, h), (0.0, a * h), (w, a * h)][side])

    out = []
    for uid in range(n_users):
        chosen = [hs for hs, p in zip(hotspots, popularity) if rng.uniform() < p]
        order = rng.permutation(len(chosen))
        t = params.start_time
        pos = boundary_point()
        rows = [(t, *pos)]
        for idx in order:
            target = np.asarray(chosen[idx].center, dtype=float)
            leg = float(np.hypot(*(target - pos)))
            if leg > 0:
                t += leg / params.speed
                rows.append((t, *target))
            elif len(rows) == 1:
                rows[0] = (t, *target)
            t += float(rng.gamma(params.dwell_shape, scale))
            rows.append((t, *target))
            pos = target
        exit_pt = boundary_point()
        leg = float(np.hypot(*(exit_pt - pos)))
        if leg > 0:
            rows.append((t + leg / params.speed, *exit_pt))
        out.append(Trajectory(f"u{uid:04d}", np.array(rows)))
    return out


def perturb_hotspots(hotspots: Iterable[Hotspot], error: LocationError, rng_seed=0) -> list[Hotspot]:
    """Shift every centre by i.i.d. N(0, variance) per axis; radii unchanged."""
    hotspots = list(hotspots)
    if error.variance == 0.0:
        return hotspots
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    shifts = rng.normal(0.0, math.sqrt(error.variance), size=(len(hotspots), 2))
    return [replace(h, center=(h.center[0] + float(dx), h.center[1] + float(dy)))
            for h, (dx, dy) in zip(hotspots, shifts)]


def read_trajectories_csv(path: str | Path) -> list[Trajectory]:
    """Read ``user_id,t,x,y`` rows (header required), grouped by user."""
    rows: dict[str, list] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"user_id", "t", "x", "y"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected header user_id,t,x,y")
        for r in reader:
            rows.setdefault(r["user_id"], []).append((float(r["t"]), float(r["x"]), float(r["y"])))
    return [Trajectory(uid, np.array(sorted(s))) for uid, s in rows.items()]


def write_trajectories_csv(trajectories: Iterable[Trajectory], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["user_id", "t", "x", "y"])
        for tr in trajectories:
            for t, x, y in tr.samples:
                wr.writerow([tr.user_id, repr(float(t)), repr(float(x)), repr(float(y))])
