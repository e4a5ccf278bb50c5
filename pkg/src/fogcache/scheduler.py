"""Mobility-aware multi-hop caching schedule (MHRC).

Hotspots are served in decreasing pass probability.  For each one the target
amount is the edge node's delivery capacity over the expected stay; relay
paths are tried from the maximum hop count downwards, each hop is packed
into the earliest slots where it does not contend with links already there,
and the target is shrunk by ``beta`` whenever no hop count fits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .mobility import HotspotStats
from .pathplan import RelayPath, path_planning
from .radio import Link, aligned_rate, interference_power, signal_power, worst_case_rate
from .topology import Scenario


@dataclass(frozen=True)
class ScheduleConfig:
    total_slots: int = 5400
    sigma: float = 1e-10
    beta: float = 0.9
    max_hops: int = 8

    def __post_init__(self):
        if self.total_slots < 0:
            raise ValueError("total_slots must be non-negative")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if self.max_hops < 1:
            raise ValueError("max_hops must be at least 1")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d) -> "ScheduleConfig":
        return cls(**d)


class Transmission(NamedTuple):
    """One scheduled hop transmission: hop ``hop`` (1-based) of a hotspot's path."""

    hotspot: int
    hop: int
    tx: int
    rx: int

    @property
    def link(self) -> Link:
        return Link(self.tx, self.rx)


@dataclass
class HopRecord:
    hotspot: int
    hop: int
    link: Link
    rate: float  # budgeting rate, bit/s
    needed: int
    slots: list[int] = field(default_factory=list)  # 1-based active slots

    @property
    def first_slot(self) -> int:
        return self.slots[0]

    @property
    def last_slot(self) -> int:
        return self.slots[-1]


@dataclass
class Schedule:
    total_slots: int
    slots: list[list[Transmission]]  # slots[k - 1] is the set active in slot k
    paths: dict[int, RelayPath] = field(default_factory=dict)
    targets: dict[int, int] = field(default_factory=dict)  # bits
    hops: dict[int, list[HopRecord]] = field(default_factory=dict)
    order: list[int] = field(default_factory=list)
    abandoned: list[int] = field(default_factory=list)
    attempts: dict[int, list[int]] = field(default_factory=dict)  # targets tried, in order

    @classmethod
    def empty(cls, total_slots: int) -> "Schedule":
        return cls(total_slots, [[] for _ in range(total_slots)])

    def slot(self, k: int) -> list[Transmission]:
        return self.slots[k - 1]

    def link_slot_count(self) -> int:
        return sum(len(s) for s in self.slots)

    def add(self, k: int, tr: Transmission) -> None:
        self.slots[k - 1].append(tr)

    def to_dict(self) -> dict:
        return {
            "total_slots": self.total_slots,
            "order": self.order,
            "abandoned": self.abandoned,
            "attempts": {str(u): a for u, a in sorted(self.attempts.items())},
            "paths": {str(u): list(p.nodes) for u, p in sorted(self.paths.items())},
            "targets": {str(u): t for u, t in sorted(self.targets.items())},
            "hops": {str(u): [{"hop": r.hop, "link": list(r.link), "rate": r.rate,
                               "needed": r.needed, "slots": r.slots} for r in recs]
                     for u, recs in sorted(self.hops.items())},
            "slots": [[list(t) for t in s] for s in self.slots],
        }

    @classmethod
    def from_dict(cls, d) -> "Schedule":
        sched = cls(d["total_slots"], [[Transmission(*t) for t in s] for s in d["slots"]])
        sched.order = list(d.get("order", []))
        sched.abandoned = list(d.get("abandoned", []))
        sched.attempts = {int(u): list(a) for u, a in d.get("attempts", {}).items()}
        sched.paths = {int(u): RelayPath(int(u), tuple(n)) for u, n in d["paths"].items()}
        sched.targets = {int(u): int(t) for u, t in d["targets"].items()}
        sched.hops = {int(u): [HopRecord(int(u), r["hop"], Link(*r["link"]), r["rate"],
                                         r["needed"], list(r["slots"])) for r in recs]
                      for u, recs in d["hops"].items()}
        return sched

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


class LinkTable:
    """Memoised signal and interference powers over a scenario's nodes."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.positions = scenario.positions
        self.radio = scenario.radio
        self.antenna = scenario.antenna
        self._interf: dict[tuple[int, int, int, int], float] = {}
        self._wc: dict[tuple[int, int, float], float] = {}
        self._signal: dict[tuple[int, int], float] = {}

    def interference(self, interferer: Link, victim: Link) -> float:
        key = (interferer[0], interferer[1], victim[0], victim[1])
        val = self._interf.get(key)
        if val is None:
            val = interference_power(interferer, victim, self.positions, self.radio, self.antenna)
            self._interf[key] = val
        return val

    def signal(self, link: Link) -> float:
        key = (link[0], link[1])
        val = self._signal.get(key)
        if val is None:
            val = signal_power(Link(*link), self.positions, self.radio, self.antenna)
            self._signal[key] = val
        return val

    def worst_case_rate(self, link: Link, sigma: float) -> float:
        key = (link[0], link[1], sigma)
        val = self._wc.get(key)
        if val is None:
            val = worst_case_rate(link, self.positions, self.radio, self.antenna, sigma)
            self._wc[key] = val
        return val


class _Slot:
    """Links in one slot plus the interference each member currently suffers."""

    __slots__ = ("links", "acc", "nodes")

    def __init__(self):
        self.links: list[Link] = []
        self.acc: list[float] = []
        self.nodes: set[int] = set()

    def fits(self, link: Link, threshold: float, table: LinkTable) -> bool:
        if not self.links:
            return True
        if link[0] in self.nodes or link[1] in self.nodes:
            return False
        total = 0.0
        for m, acc in zip(self.links, self.acc):
            if acc + table.interference(link, m) >= threshold:
                return False
            total += table.interference(m, link)
            if total >= threshold:
                return False
        return True

    def add(self, link: Link, table: LinkTable) -> None:
        total = 0.0
        for idx, m in enumerate(self.links):
            self.acc[idx] += table.interference(link, m)
            total += table.interference(m, link)
        self.links.append(link)
        self.acc.append(total)
        self.nodes.update(link)


def can_add(link: Link, slot_set: Iterable[Link], sigma: float, scenario: Scenario,
            table: LinkTable | None = None) -> bool:
    """Whether ``link`` may join ``slot_set`` without contention.

    No shared node with any member, and after adding it every member's total
    interference stays strictly below ``sigma * Pt``.  A link alone in a slot
    has no interferers and is always admissible.
    """
    table = table or LinkTable(scenario)
    members = [Link(*m) for m in slot_set]
    link = Link(*link)
    if link in members:
        raise ValueError("link already in the slot set")
    if not members:
        return True
    nodes = {n for m in members for n in m}
    if link.tx in nodes or link.rx in nodes:
        return False
    threshold = sigma * scenario.radio.tx_power
    everyone = members + [link]
    for victim in everyone:
        total = sum(table.interference(o, victim) for o in everyone if o != victim)
        if total >= threshold:
            return False
    return True


def delivery_rate(scenario: Scenario, hotspot_id: int, edge_node: int | None = None,
                  center=None, min_distance: float = 1.0) -> float:
    """Noise-limited edge-node -> user rate at the hotspot centre."""
    h = scenario.hotspot(hotspot_id)
    edge = h.edge_node if edge_node is None else edge_node
    c = h.center if center is None else center
    p = scenario.positions[edge]
    d = max(math.hypot(p[0] - c[0], p[1] - c[1]), min_distance)
    return aligned_rate(d, scenario.radio, scenario.antenna)


def processing_order(stats: HotspotStats, hotspot_ids: Sequence[int]) -> list[int]:
    eligible = [u for u in hotspot_ids
                if stats.pass_prob.get(u, 0.0) > 0 and stats.stay_slots.get(u, 0) > 0]
    return sorted(eligible, key=lambda u: (-stats.pass_prob[u], u))


def schedule_caching(scenario: Scenario, stats: HotspotStats,
                     config: ScheduleConfig | None = None,
                     table: LinkTable | None = None) -> Schedule:
    config = config or ScheduleConfig()
    table = table or LinkTable(scenario)
    K = config.total_slots
    delta = scenario.radio.slot_duration
    threshold = config.sigma * scenario.radio.tx_power
    bs = scenario.bs.id
    relays = scenario.relay_ids
    positions = scenario.positions

    sched = Schedule.empty(K)
    state = [_Slot() for _ in range(K + 1)]  # index 0 unused
    path_memo: dict[tuple[int, int], RelayPath | None] = {}
    prev_hop1_end = 0

    for u in processing_order(stats, [h.id for h in scenario.hotspots]):
        sched.order.append(u)
        hs = scenario.hotspot(u)
        edge = hs.edge_node
        target = int(math.floor(delivery_rate(scenario, u) * stats.stay_slots[u] * delta))
        committed = None
        tried = sched.attempts.setdefault(u, [])
        while target > 0 and committed is None:
            tried.append(target)
            hops = config.max_hops
            while hops >= 1 and committed is None:
                key = (edge, hops)
                if key not in path_memo:
                    path_memo[key] = path_planning(positions, bs, relays, hops, edge)
                path = path_memo[key]
                if path is None:
                    hops -= 1
                    continue
                rates = [table.worst_case_rate(l, config.sigma) for l in path.hops]
                budget = K - sum(target / (r * delta) for r in rates) - prev_hop1_end
                if budget < 0:
                    hops -= 1
                    continue
                committed = _try_path(path, rates, target, budget, prev_hop1_end, K, delta,
                                      state, threshold, table)
                if committed is None:
                    hops -= 1
            if committed is None:
                target = int(math.floor(target * config.beta))
        if committed is None:
            sched.abandoned.append(u)
            continue

        path, records = committed
        sched.paths[u] = RelayPath(u, path.nodes)
        sched.targets[u] = target
        sched.hops[u] = []
        for h, rec in enumerate(records, start=1):
            link, rate, needed, slots = rec
            sched.hops[u].append(HopRecord(u, h, link, rate, needed, slots))
            for k in slots:
                state[k].add(link, table)
                sched.add(k, Transmission(u, h, link.tx, link.rx))
        prev_hop1_end = records[0][3][-1]
    return sched


def _try_path(path: RelayPath, rates, target, budget, prev_hop1_end, K, delta,
              state, threshold, table):
    """Pack every hop of ``path``; return (path, per-hop records) or None."""
    records = []
    start = prev_hop1_end + 1
    for link, rate in zip(path.hops, rates):
        needed = math.ceil(target / (rate * delta))
        slots = []
        k = start
        while k <= K and len(slots) < needed and budget >= 0:
            if state[k].fits(link, threshold, table):
                slots.append(k)
            else:
                budget -= 1
            k += 1
        if budget < 0 or len(slots) < needed:
            return None
        records.append((link, rate, needed, slots))
        start = slots[-1] + 1 if slots else start
    return path, records
