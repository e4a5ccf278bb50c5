"""Relay path search with a predetermined hop count.

The search grows a tree from the base station by repeatedly attaching the
unvisited relay closest to any visited node (Prim-style frontier).  When the
edge node gets attached with the wrong depth, the link that reached it is
disabled for the rest of the call and the tree is rebuilt from scratch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .radio import Link


@dataclass(frozen=True)
class RelayPath:
    hotspot_id: int | None
    nodes: tuple[int, ...]  # BS first, edge node last

    @property
    def hops(self) -> tuple[Link, ...]:
        return tuple(Link(a, b) for a, b in zip(self.nodes, self.nodes[1:]))

    @property
    def hop_count(self) -> int:
        return len(self.nodes) - 1

    def to_dict(self) -> dict:
        return {"hotspot": self.hotspot_id, "nodes": list(self.nodes)}


def plan_path_traced(positions: Mapping[int, Sequence[float]], bs: int, relays: Sequence[int],
                     hop_count: int, edge_node: int,
                     hotspot_id: int | None = None) -> tuple[RelayPath | None, int]:
    """Same as :func:`path_planning` but also returns the number of frontier expansions."""
    if hop_count < 1:
        raise ValueError("hop count must be at least 1")
    if edge_node not in relays:
        raise ValueError("edge node must be one of the relays")
    relays = sorted(set(relays))
    nodes = [bs] + relays
    dist = {a: {b: math.hypot(positions[a][0] - positions[b][0], positions[a][1] - positions[b][1])
                for b in relays} for a in nodes}
    disabled: set[int] = set()  # predecessors s whose link s->E is disabled
    predecessors = [n for n in nodes if n != edge_node]
    expansions = 0

    def length(i, v):
        if v == edge_node and i in disabled:
            return math.inf
        return dist[i][v]

    while any(s not in disabled for s in predecessors):
        tree: dict[int, tuple[int, ...]] = {bs: (bs,)}
        # best (length, visited endpoint) per unvisited relay, updated as the tree grows
        key = {v: (length(bs, v), bs) for v in relays}
        restarted = False
        while key:
            r, s, c = min((lk, i, v) for v, (lk, i) in key.items())
            if math.isinf(r):
                break
            expansions += 1
            path = tree[s] + (c,)
            if c == edge_node:
                if len(path) - 1 == hop_count:
                    return RelayPath(hotspot_id, path), expansions
                disabled.add(s)
                restarted = True
                break
            tree[c] = path
            del key[c]
            for v, old in key.items():
                cand = (length(c, v), c)
                if cand < old:
                    key[v] = cand
        if not restarted:
            break
    return None, expansions


def path_planning(positions: Mapping[int, Sequence[float]], bs: int, relays: Sequence[int],
                  hop_count: int, edge_node: int, hotspot_id: int | None = None) -> RelayPath | None:
    """Path BS -> ``edge_node`` with exactly ``hop_count`` hops, or None.

    Ties between equidistant candidates go to the lowest (visited id,
    candidate id).  Disabled last hops persist across the rebuilds of one
    call, so the number of rebuilds is bounded by the edge node's in-degree.
    """
    return plan_path_traced(positions, bs, relays, hop_count, edge_node, hotspot_id)[0]
