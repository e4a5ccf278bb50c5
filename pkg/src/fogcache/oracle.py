"""Exact caching schedule for toy instances by exhaustive enumeration.

For every choice of relay path per hotspot (any simple path of at most three
hops, or none) the feasible slot contents are enumerated: node-disjoint
transmission sets that meet the interference threshold.  A schedule is then a
multiset of at most K slot contents plus an ordering; its value only depends
on the multiset, so all multisets are scored at once and the best one that
admits an ordering respecting hop precedence wins.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .metrics import delivery_caps
from .mobility import HotspotStats
from .pathplan import RelayPath
from .radio import Link, rate_from_sinr
from .scheduler import HopRecord, LinkTable, Schedule, Transmission
from .topology import HotspotSpec, Scenario, generate_scenario

MAX_HOTSPOTS = 2
MAX_RELAYS = 4
MAX_SLOTS = 8
MAX_PATH_HOPS = 3


class InstanceTooLarge(ValueError):
    pass


@dataclass
class OracleResult:
    expected_cached: float
    schedule: Schedule
    delivered: dict[int, float]
    combos_scored: int = 0


def candidate_paths(scenario: Scenario, edge: int, max_hops: int = MAX_PATH_HOPS) -> list[RelayPath]:
    bs = scenario.bs.id
    others = [r for r in scenario.relay_ids if r != edge]
    out = []
    for n_mid in range(0, max_hops):
        for mid in itertools.permutations(others, n_mid):
            out.append(RelayPath(None, (bs, *mid, edge)))
    return out


@lru_cache(maxsize=16)
def _multiset_counts(m: int, k: int) -> np.ndarray:
    """Every multiset of at most ``k`` items out of ``m`` as an (n, m) count matrix."""
    combos = np.fromiter(itertools.chain.from_iterable(
        itertools.combinations_with_replacement(range(m + 1), k)), dtype=np.int16)
    combos = combos.reshape(-1, k) if k else np.zeros((1, 0), dtype=np.int16)
    counts = np.zeros((len(combos), m + 1), dtype=np.int16)
    rows = np.arange(len(combos))
    for col in range(k):
        np.add.at(counts, (rows, combos[:, col]), 1)
    return counts[:, :m]  # column m is the idle filler


def _feasible_sets(entities, table: LinkTable, threshold: float, delta: float, radio):
    """Non-empty node-disjoint entity sets meeting the threshold, with bits per entity."""
    sets, bits = [], []
    n = len(entities)
    for size in range(1, n + 1):
        found = False
        for combo in itertools.combinations(range(n), size):
            links = [entities[i][2] for i in combo]
            nodes = [x for l in links for x in l]
            if len(set(nodes)) != len(nodes):
                continue
            ok = True
            row = np.zeros(n)
            for idx, l in zip(combo, links):
                interf = sum(table.interference(o, l) for o in links if o is not l)
                if size > 1 and interf >= threshold:
                    ok = False
                    break
                row[idx] = rate_from_sinr(table.signal(l) / (radio.noise_power + interf), radio) * delta
            if ok:
                found = True
                sets.append(combo)
                bits.append(row)
        if not found:
            break
    return sets, np.array(bits).reshape(len(sets), n)


def _order(counts, sets, bits, entities, end_to_end) -> list[int] | None:
    """A slot order of the multiset in which no hop forwards undelivered data, or None.

    Same causal rule as the constraint checker: hop h waits for hop h-1's
    first slot, and its forwarded bits (capped by the path's end-to-end
    amount) never exceed what hop h-1 delivered in earlier slots.
    """
    index = {(u, h): i for i, (u, h, _) in enumerate(entities)}
    pred = {i: index[(u, h - 1)] for i, (u, h, _) in enumerate(entities) if h > 1}
    used_sets = [s for s, c in enumerate(counts) if c > 0]
    dead: set = set()

    def placeable(s, cum) -> bool:
        for e in sets[s]:
            p = pred.get(e)
            if p is None:
                continue
            if cum[p] <= 0 or min(cum[e] + bits[s, e], end_to_end[e]) > cum[p] * (1 + 1e-9):
                return False
        return True

    def dfs(remaining: tuple, cum: tuple, seq: list) -> list | None:
        if not any(remaining):
            return seq
        if remaining in dead:
            return None
        for j, s in enumerate(used_sets):
            if remaining[j] == 0 or not placeable(s, cum):
                continue
            new = list(cum)
            for e in sets[s]:
                new[e] += bits[s, e]
            rem = list(remaining)
            rem[j] -= 1
            got = dfs(tuple(rem), tuple(new), seq + [s])
            if got is not None:
                return got
        # cumulative bits are fixed by what was placed, so the remaining multiset decides
        dead.add(remaining)
        return None

    return dfs(tuple(int(counts[s]) for s in used_sets), tuple([0.0] * len(entities)), [])


def exact_schedule(scenario: Scenario, stats: HotspotStats, total_slots: int, sigma: float,
                   max_path_hops: int = MAX_PATH_HOPS) -> OracleResult:
    """Maximum expected delivered bits over all feasible schedules of a toy instance."""
    hotspots = [h for h in scenario.hotspots
                if stats.pass_prob.get(h.id, 0) > 0 and stats.stay_slots.get(h.id, 0) > 0]
    if (len(hotspots) > MAX_HOTSPOTS or len(scenario.relays) > MAX_RELAYS
            or total_slots > MAX_SLOTS or max_path_hops > MAX_PATH_HOPS):
        raise InstanceTooLarge(
            f"oracle limited to {MAX_HOTSPOTS} hotspots, {MAX_RELAYS} relays, "
            f"K <= {MAX_SLOTS}, paths <= {MAX_PATH_HOPS} hops")
    table = LinkTable(scenario)
    radio = scenario.radio
    delta = radio.slot_duration
    threshold = sigma * radio.tx_power
    caps = delivery_caps(scenario, stats)
    f = {h.id: stats.pass_prob[h.id] for h in hotspots}
    options = {h.id: [None] + candidate_paths(scenario, h.edge_node, max_path_hops) for h in hotspots}
    ids = [h.id for h in hotspots]

    # optimistic value of a path: hops 1 and 2 never share a slot, and every
    # slot runs at most at the noise-limited rate
    def bound(u, path):
        if path is None or total_slots == 0:
            return 0.0
        rates = [rate_from_sinr(table.signal(l) / radio.noise_power, radio) * delta
                 for l in path.hops[:2]]
        best_bits = total_slots / sum(1.0 / r for r in rates)
        return f[u] * min(caps[u], best_bits)

    combos = []
    for choice in itertools.product(*(options[u] for u in ids)):
        combos.append((sum(bound(u, p) for u, p in zip(ids, choice)), choice))
    combos.sort(key=lambda c: -c[0])

    best_val, best = 0.0, (None, None, None, None)
    scored = 0
    for ub, choice in combos:
        if ub <= best_val * (1 + 1e-12) and best[0] is not None:
            break
        entities = [(u, h, l) for u, p in zip(ids, choice) if p is not None
                    for h, l in enumerate(p.hops, start=1)]
        if not entities:
            continue
        scored += 1
        sets, bits = _feasible_sets(entities, table, threshold, delta, radio)
        counts = _multiset_counts(len(sets), total_slots)
        per_entity = counts.astype(float) @ bits  # (n, entities)
        value = np.zeros(len(counts))
        for u, p in zip(ids, choice):
            if p is None:
                continue
            cols = [i for i, e in enumerate(entities) if e[0] == u]
            value += f[u] * np.minimum(per_entity[:, cols].min(axis=1), caps[u])
        for row in np.argsort(-value, kind="stable"):
            if value[row] <= best_val:
                break
            e2e = np.array([per_entity[row, [j for j, f2 in enumerate(entities) if f2[0] == e[0]]].min()
                            for e in entities])
            seq = _order(counts[row], sets, bits, entities, e2e)
            if seq is not None:
                best_val = float(value[row])
                best = (choice, entities, sets, seq)
                break

    sched = Schedule.empty(total_slots)
    delivered = {h.id: 0.0 for h in scenario.hotspots}
    choice, entities, sets, seq = best
    if choice is not None:
        per_entity_bits: dict[int, float] = {}
        for k, s in enumerate(seq, start=1):
            links = [entities[i][2] for i in sets[s]]
            for i in sets[s]:
                u, h, l = entities[i]
                sched.add(k, Transmission(u, h, l.tx, l.rx))
                interf = sum(table.interference(o, l) for o in links if o is not l)
                per_entity_bits[i] = per_entity_bits.get(i, 0.0) + rate_from_sinr(
                    table.signal(l) / (radio.noise_power + interf), radio) * delta
        for u, p in zip(ids, choice):
            if p is None:
                continue
            sched.paths[u] = RelayPath(u, p.nodes)
            sched.hops[u] = []
            for h, l in enumerate(p.hops, start=1):
                slots = [k for k in range(1, total_slots + 1)
                         if any(t.hotspot == u and t.hop == h for t in sched.slot(k))]
                sched.hops[u].append(HopRecord(u, h, Link(*l), 0.0, len(slots), slots))
            i_u = [i for i, e in enumerate(entities) if e[0] == u]
            delivered[u] = min(caps[u], min(per_entity_bits.get(i, 0.0) for i in i_u))
            sched.targets[u] = int(delivered[u])
    ed = math.fsum(stats.pass_prob.get(u, 0.0) * d for u, d in delivered.items())
    return OracleResult(ed, sched, delivered, scored)


def toy_instance(seed: int, n_relays: int = 4, n_hotspots: int = 2,
                 region: tuple[float, float] = (100.0, 100.0)) -> tuple[Scenario, HotspotStats]:
    """Small random instance inside the oracle's bounds.

    Pass probabilities are uniform in [0.1, 1) and stays are 1 to 3 slots, so
    both hotspots are always worth caching for.
    """
    rng = np.random.default_rng(seed)
    sc = generate_scenario(region, n_relays, HotspotSpec(count=n_hotspots, radius=5.0), rng)
    f = {h.id: float(rng.uniform(0.1, 1.0)) for h in sc.hotspots}
    tau = {h.id: int(rng.integers(1, 4)) for h in sc.hotspots}
    return sc, HotspotStats(f, tau)
