"""Comparison schemes: direct unicast and single-hop caching (CachUni)."""

from __future__ import annotations

import math
from typing import Sequence

from .metrics import CacheOutcome, delivered_data, energy_and_efficiency, evaluate, expected_cached
from .mobility import HotspotStats
from .pathplan import RelayPath
from .radio import Link, aligned_rate, rate_from_sinr
from .scheduler import HopRecord, LinkTable, Schedule, ScheduleConfig, Transmission, \
    delivery_rate, processing_order
from .topology import Hotspot, Scenario


def run_unicast(scenario: Scenario, stats: HotspotStats,
                true_hotspots: Sequence[Hotspot] | None = None) -> CacheOutcome:
    """BS serves each passing user directly for its whole stay; nothing is cached."""
    hotspots = true_hotspots or scenario.hotspots
    bs = scenario.bs.position
    delta = scenario.radio.slot_duration
    delivered = {}
    for h in hotspots:
        d = max(math.hypot(h.center[0] - bs[0], h.center[1] - bs[1]), 1.0)
        delivered[h.id] = aligned_rate(d, scenario.radio, scenario.antenna) \
            * stats.stay_slots.get(h.id, 0) * delta
    energy, eff = energy_and_efficiency(None, delivered, stats, scenario.radio)
    return CacheOutcome("Unicast", {}, {}, delivered, expected_cached(delivered, stats), energy, eff, 0)


def schedule_cachuni(scenario: Scenario, stats: HotspotStats, config: ScheduleConfig | None = None,
                     truncate: bool = False, worst_case: bool = False) -> Schedule:
    """BS -> edge node transmissions, one hotspot after another.

    Hotspots go in decreasing pass probability; each takes ceil(D''/R)
    consecutive slots.  Only one link is ever active, so R is the link's
    noise-limited rate; ``worst_case=True`` budgets with the sigma-pinned rate
    instead.  A target that no longer fits before slot K is shrunk by
    ``beta`` (or, with ``truncate``, cut at slot K).
    """
    config = config or ScheduleConfig()
    K = config.total_slots
    delta = scenario.radio.slot_duration
    table = LinkTable(scenario)
    sched = Schedule.empty(K)
    bs = scenario.bs.id
    noise = scenario.radio.noise_power
    last = 0
    for u in processing_order(stats, [h.id for h in scenario.hotspots]):
        sched.order.append(u)
        edge = scenario.hotspot(u).edge_node
        link = Link(bs, edge)
        if worst_case:
            rate = table.worst_case_rate(link, config.sigma)
        else:
            rate = rate_from_sinr(table.signal(link) / noise, scenario.radio)
        per_slot = rate * delta
        target = int(math.floor(delivery_rate(scenario, u) * stats.stay_slots[u] * delta))
        free = K - last
        needed = math.ceil(target / per_slot) if target > 0 else 0
        if truncate:
            used = min(needed, free)
        else:
            while target > 0 and needed > free:
                target = int(math.floor(target * config.beta))
                needed = math.ceil(target / per_slot)
            used = needed
        if target <= 0 or used <= 0:
            sched.abandoned.append(u)
            continue
        slots = list(range(last + 1, last + used + 1))
        sched.paths[u] = RelayPath(u, (bs, edge))
        sched.targets[u] = target
        sched.hops[u] = [HopRecord(u, 1, link, rate, needed, slots)]
        for k in slots:
            sched.add(k, Transmission(u, 1, bs, edge))
        last += used
    return sched


def run_cachuni(scenario: Scenario, stats: HotspotStats, config: ScheduleConfig | None = None,
                true_hotspots: Sequence[Hotspot] | None = None,
                truncate: bool = False, worst_case: bool = False) -> tuple[Schedule, CacheOutcome]:
    sched = schedule_cachuni(scenario, stats, config, truncate, worst_case)
    return sched, evaluate("CachUni", sched, scenario, stats, true_hotspots)
