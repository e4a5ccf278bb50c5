"""Cached-data accounting, objective, energy and constraint verification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .mobility import HotspotStats
from .radio import Link, interference_power, rate_from_sinr, signal_power
from .scheduler import LinkTable, Schedule, delivery_rate
from .topology import Hotspot, Scenario


class ScheduleError(ValueError):
    """A schedule violates a structural invariant."""


@dataclass
class CacheOutcome:
    scheme: str
    target: dict[int, float] = field(default_factory=dict)  # D'' bits
    cached: dict[int, float] = field(default_factory=dict)  # D' bits
    delivered: dict[int, float] = field(default_factory=dict)  # D bits
    expected_cached: float = 0.0
    energy_mj: float = 0.0
    energy_efficiency: float = 0.0  # bits/mJ
    link_slots: int = 0


def slot_rates(schedule: Schedule, scenario: Scenario,
               table: LinkTable | None = None) -> list[list[float]]:
    """Factual rate of every transmission in every slot, interference from its slot-mates."""
    table = table or LinkTable(scenario)
    noise = scenario.radio.noise_power
    out = []
    for members in schedule.slots:
        links = [t.link for t in members]
        rates = []
        for idx, link in enumerate(links):
            interf = sum(table.interference(o, link) for j, o in enumerate(links) if j != idx)
            rates.append(rate_from_sinr(table.signal(link) / (noise + interf), scenario.radio))
        out.append(rates)
    return out


def data_update(schedule: Schedule, scenario: Scenario,
                table: LinkTable | None = None) -> dict[int, float]:
    """Actual cached bits per scheduled hotspot: the bottleneck hop's total."""
    rates = slot_rates(schedule, scenario, table)
    delta = scenario.radio.slot_duration
    per_hop: dict[tuple[int, int], float] = {}
    for k, members in enumerate(schedule.slots):
        for t, r in zip(members, rates[k]):
            per_hop[(t.hotspot, t.hop)] = per_hop.get((t.hotspot, t.hop), 0.0) + r * delta
    cached = {}
    for u, path in schedule.paths.items():
        if len(schedule.hops.get(u, ())) != path.hop_count:
            raise ScheduleError(f"hotspot {u}: hop records do not match its path")
        cached[u] = min(per_hop.get((u, h), 0.0) for h in range(1, path.hop_count + 1))
    return cached


def delivery_caps(scenario: Scenario, stats: HotspotStats,
                  true_hotspots: Sequence[Hotspot] | None = None) -> dict[int, float]:
    """Most a passing user can download at each hotspot: edge rate * stay."""
    truth = {h.id: h for h in (true_hotspots or scenario.hotspots)}
    delta = scenario.radio.slot_duration
    caps = {}
    for h in scenario.hotspots:
        tau = stats.stay_slots.get(h.id, 0)
        caps[h.id] = delivery_rate(scenario, h.id, center=truth[h.id].center) * tau * delta
    return caps


def delivered_data(cached: Mapping[int, float], stats: HotspotStats, scenario: Scenario,
                   true_hotspots: Sequence[Hotspot] | None = None) -> dict[int, float]:
    """Delivered bits per hotspot, capped by the edge->user link at the true centre.

    ``scenario`` carries the (possibly perturbed) hotspots used for planning,
    hence the edge nodes; ``true_hotspots`` gives where users really are.
    """
    caps = delivery_caps(scenario, stats, true_hotspots)
    return {u: min(cached.get(u, 0.0), caps[u]) for u in caps}


def expected_cached(delivered: Mapping[int, float], stats: HotspotStats) -> float:
    return math.fsum(stats.pass_prob.get(u, 0.0) * d for u, d in delivered.items())


def energy_and_efficiency(schedule: Schedule | None, delivered: Mapping[int, float],
                          stats: HotspotStats, radio, include_delivery: bool = True,
                          ) -> tuple[float, float]:
    """(total energy in mJ, expected delivered bits per mJ).

    Caching costs Pt for every transmitting link in every slot; delivery costs
    Pt over the expected stay at every hotspot that has data to hand out.
    """
    delta = radio.slot_duration
    link_slots = schedule.link_slot_count() if schedule is not None else 0
    energy = radio.tx_power * delta * link_slots
    if include_delivery:
        energy += math.fsum(stats.pass_prob.get(u, 0.0) * radio.tx_power * delta
                            * stats.stay_slots.get(u, 0)
                            for u, d in delivered.items() if d > 0)
    ed = expected_cached(delivered, stats)
    return energy, (ed / energy if energy > 0 else 0.0)


def evaluate(scheme: str, schedule: Schedule, scenario: Scenario, stats: HotspotStats,
             true_hotspots: Sequence[Hotspot] | None = None, include_delivery: bool = True,
             table: LinkTable | None = None) -> CacheOutcome:
    cached = data_update(schedule, scenario, table)
    delivered = delivered_data(cached, stats, scenario, true_hotspots)
    energy, eff = energy_and_efficiency(schedule, delivered, stats, scenario.radio, include_delivery)
    return CacheOutcome(scheme, dict(schedule.targets), cached, delivered,
                        expected_cached(delivered, stats), energy, eff, schedule.link_slot_count())


# --- constraint verification -------------------------------------------------

@dataclass
class ConstraintResult:
    name: str
    ok: bool = True
    witness: str | None = None

    def fail(self, witness: str) -> None:
        if self.ok:
            self.ok = False
            self.witness = witness


@dataclass
class P1Report:
    adjacency: ConstraintResult
    precedence: ConstraintResult
    interference: ConstraintResult
    delivery_cap: ConstraintResult
    hop_cap: ConstraintResult

    @property
    def results(self) -> list[ConstraintResult]:
        return [self.adjacency, self.precedence, self.interference, self.delivery_cap, self.hop_cap]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def __str__(self) -> str:
        return "; ".join(f"{r.name}: {'ok' if r.ok else 'FAIL ' + str(r.witness)}"
                         for r in self.results)


def verify_p1(schedule: Schedule, delivered: Mapping[int, float], scenario: Scenario,
              stats: HotspotStats, sigma: float | None = None,
              true_hotspots: Sequence[Hotspot] | None = None, rel_tol: float = 1e-9,
              precedence: str = "data") -> P1Report:
    """Check a schedule and its delivered amounts against the problem constraints.

    Everything is recomputed from node positions and the slot contents, without
    the scheduler's bookkeeping.  ``sigma`` enables the concurrency-threshold
    check.

    Hop precedence comes in two forms.  ``"data"`` (default) is causal: hop h
    may not start before hop h-1 has transmitted, and by any slot the bits it
    has forwarded, up to the path's end-to-end amount, never exceed what hop
    h-1 delivered in earlier slots.  ``"slots"`` compares prefix slot counts
    instead, which only coincides with the causal form when every hop moves
    the same number of bits per slot.
    """
    if precedence not in ("data", "slots"):
        raise ValueError("precedence must be 'data' or 'slots'")
    rep = P1Report(ConstraintResult("adjacency"), ConstraintResult("hop-precedence"),
                   ConstraintResult("interference"), ConstraintResult("delivery-cap"),
                   ConstraintResult("hop-cap"))
    pos, radio, ant = scenario.positions, scenario.radio, scenario.antenna
    delta = radio.slot_duration

    # bits moved by each (hotspot, hop) in each slot it is active in
    active: dict[tuple[int, int], list[tuple[int, float]]] = {}
    for k, members in enumerate(schedule.slots, start=1):
        seen: dict[int, Link] = {}
        for t in members:
            for n in (t.tx, t.rx):
                if n in seen:
                    rep.adjacency.fail(f"slot {k}: {seen[n]} and {t.link} share node {n}")
                seen[n] = t.link
            path = schedule.paths.get(t.hotspot)
            if path is None or not 1 <= t.hop <= path.hop_count or path.hops[t.hop - 1] != t.link:
                rep.adjacency.fail(f"slot {k}: {t} is not a hop of a recorded path")
        for v in members:
            # node-sharing pairs were reported above and have no defined SINR
            interf = sum(interference_power(o.link, v.link, pos, radio, ant)
                         for o in members if o is not v and not set(o.link) & set(v.link))
            if sigma is not None and len(members) > 1 and interf >= sigma * radio.tx_power:
                rep.interference.fail(
                    f"slot {k}: {v.link} sees {interf:.3e} mW >= {sigma * radio.tx_power:.3e} mW")
            gamma = signal_power(v.link, pos, radio, ant) / (radio.noise_power + interf)
            active.setdefault((v.hotspot, v.hop), []).append((k, rate_from_sinr(gamma, radio) * delta))

    totals = {key: math.fsum(b for _, b in seq) for key, seq in active.items()}
    for u, path in schedule.paths.items():
        end_to_end = min(totals.get((u, h), 0.0) for h in range(1, path.hop_count + 1))
        for h in range(2, path.hop_count + 1):
            before = active.get((u, h - 1), [])
            after = active.get((u, h), [])
            if precedence == "slots":
                for i, (k, _) in enumerate(after):
                    if i >= len(before) or before[i][0] > k:
                        rep.precedence.fail(f"hotspot {u}: hop {h} slot {k} outnumbers hop {h - 1}")
                        break
                continue
            j, got, sent = 0, 0.0, 0.0
            for k, bits in after:
                while j < len(before) and before[j][0] < k:
                    got += before[j][1]
                    j += 1
                sent += bits
                if j == 0 or min(sent, end_to_end) > got * (1 + rel_tol):
                    rep.precedence.fail(f"hotspot {u}: hop {h} slot {k} forwards data hop {h - 1} "
                                        f"has not delivered yet")
                    break

    caps = delivery_caps(scenario, stats, true_hotspots)
    for u, d in delivered.items():
        if d > caps.get(u, 0.0) * (1 + rel_tol):
            rep.delivery_cap.fail(f"hotspot {u}: {d:.6e} > cap {caps.get(u, 0.0):.6e}")
        if d <= 0:
            continue
        path = schedule.paths.get(u)
        if path is None:
            rep.hop_cap.fail(f"hotspot {u}: delivers {d:.3e} bits without a path")
            continue
        for h in range(1, path.hop_count + 1):
            bits = totals.get((u, h), 0.0)
            if d > bits * (1 + rel_tol):
                rep.hop_cap.fail(f"hotspot {u}: {d:.6e} > hop {h} total {bits:.6e}")
    return rep
