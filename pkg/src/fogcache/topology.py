"""Network geometry: base station, relay nodes, hotspots and edge nodes."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .radio import AntennaModel, RadioParams

BS_ID = 0
MIN_RELAY_SEPARATION = 1.0  # m


@dataclass(frozen=True)
class Node:
    id: int
    kind: str  # "BS" or "Relay"
    position: tuple[float, float]


@dataclass(frozen=True)
class Hotspot:
    id: int
    center: tuple[float, float]
    radius: float = 15.0
    edge_node: int | None = None

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("hotspot radius must be positive")


@dataclass(frozen=True)
class HotspotSpec:
    """How to place hotspots: explicit ``centers`` or ``count`` random ones."""

    count: int = 6
    radius: float = 15.0
    centers: tuple[tuple[float, float], ...] | None = None
    # keep random centers at least this far from the BS
    min_bs_distance: float = 0.0


def nearest_relay(point: Sequence[float], relays: Sequence[Node]) -> Node:
    """Relay closest to ``point``; ties go to the lowest id."""
    if not relays:
        raise ValueError("no relays")
    return min(relays, key=lambda r: (math.hypot(r.position[0] - point[0],
                                                 r.position[1] - point[1]), r.id))


@dataclass(frozen=True)
class Scenario:
    region: tuple[float, float]
    bs: Node
    relays: tuple[Node, ...]
    hotspots: tuple[Hotspot, ...]
    radio: RadioParams = field(default_factory=RadioParams)
    antenna: AntennaModel = field(default_factory=AntennaModel)

    def __post_init__(self):
        ids = [self.bs.id] + [r.id for r in self.relays]
        if len(set(ids)) != len(ids):
            raise ValueError("node ids must be unique")
        if not self.relays:
            raise ValueError("scenario needs at least one relay")
        pts = np.array([self.bs.position] + [r.position for r in self.relays], dtype=float)
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(dist, np.inf)
        if dist.min() <= 0.0:
            raise ValueError("nodes must not coincide")
        object.__setattr__(self, "_positions",
                           {n.id: n.position for n in (self.bs, *self.relays)})

    @property
    def positions(self) -> Mapping[int, tuple[float, float]]:
        return self._positions

    @property
    def relay_ids(self) -> list[int]:
        return [r.id for r in self.relays]

    def hotspot(self, hid: int) -> Hotspot:
        for h in self.hotspots:
            if h.id == hid:
                return h
        raise KeyError(hid)

    def with_hotspots(self, hotspots: Sequence[Hotspot]) -> "Scenario":
        """Copy with new hotspots, edge nodes reassigned by proximity."""
        return replace(self, hotspots=assign_edge_nodes(hotspots, self.relays))

    def with_params(self, radio: RadioParams | None = None,
                    antenna: AntennaModel | None = None) -> "Scenario":
        return replace(self, radio=radio or self.radio, antenna=antenna or self.antenna)

    def to_dict(self) -> dict:
        return {
            "region": list(self.region),
            "bs": {"id": self.bs.id, "position": list(self.bs.position)},
            "relays": [{"id": r.id, "position": list(r.position)} for r in self.relays],
            "hotspots": [{"id": h.id, "center": list(h.center), "radius": h.radius,
                          "edge_node": h.edge_node} for h in self.hotspots],
            "radio": self.radio.to_dict(),
            "antenna": self.antenna.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Scenario":
        bs = Node(d["bs"]["id"], "BS", tuple(d["bs"]["position"]))
        relays = tuple(Node(r["id"], "Relay", tuple(r["position"])) for r in d["relays"])
        hotspots = tuple(Hotspot(h["id"], tuple(h["center"]), h["radius"], h.get("edge_node"))
                         for h in d["hotspots"])
        if any(h.edge_node is None for h in hotspots):
            hotspots = assign_edge_nodes(hotspots, relays)
        return cls(tuple(d["region"]), bs, relays, hotspots,
                   RadioParams.from_dict(d.get("radio", {})),
                   AntennaModel.from_dict(d.get("antenna", {})))

    def to_json(self) -> str:
        # repr-based float output round-trips exactly
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        return cls.from_dict(json.loads(text))


def assign_edge_nodes(hotspots: Sequence[Hotspot], relays: Sequence[Node]) -> tuple[Hotspot, ...]:
    return tuple(replace(h, edge_node=nearest_relay(h.center, relays).id) for h in hotspots)


def _uniform_relays(rng: np.random.Generator, region, n: int, taken: list) -> list[tuple[float, float]]:
    w, h = region
    out = []
    while len(out) < n:
        p = (float(rng.uniform(0.0, w)), float(rng.uniform(0.0, h)))
        if all(math.hypot(p[0] - q[0], p[1] - q[1]) >= MIN_RELAY_SEPARATION for q in taken + out):
            out.append(p)
    return out


def generate_scenario(region: tuple[float, float] = (300.0, 300.0), n_relays: int = 30,
                      hotspot_spec: HotspotSpec | None = None, rng_seed=0,
                      radio: RadioParams | None = None,
                      antenna: AntennaModel | None = None) -> Scenario:
    """Random scenario with the BS at the region centre.

    Relays are i.i.d. uniform (a Poisson field conditioned on its count) with
    a minimum separation enforced by rejection.  ``rng_seed`` may be an int or
    a ``numpy.random.Generator``.
    """
    w, h = region
    if not (w > 0 and h > 0):
        raise ValueError("region must have positive width and height")
    if n_relays < 1:
        raise ValueError("need at least one relay")
    spec = hotspot_spec or HotspotSpec()
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)

    bs_pos = (w / 2.0, h / 2.0)
    if spec.centers is not None:
        centers = [tuple(map(float, c)) for c in spec.centers]
    else:
        centers = []
        r = spec.radius
        while len(centers) < spec.count:
            c = (float(rng.uniform(r, w - r)), float(rng.uniform(r, h - r)))
            if math.hypot(c[0] - bs_pos[0], c[1] - bs_pos[1]) >= spec.min_bs_distance:
                centers.append(c)
    for c in centers:
        if not (0.0 <= c[0] <= w and 0.0 <= c[1] <= h):
            raise ValueError(f"hotspot centre {c} outside region")

    relay_pos = _uniform_relays(rng, region, n_relays, [bs_pos])
    bs = Node(BS_ID, "BS", bs_pos)
    relays = tuple(Node(i + 1, "Relay", p) for i, p in enumerate(relay_pos))
    hotspots = assign_edge_nodes([Hotspot(i, c, spec.radius) for i, c in enumerate(centers)], relays)
    return Scenario(region, bs, relays, hotspots, radio or RadioParams(), antenna or AntennaModel())
