import math

import pytest
from hypothesis import given, settings, strategies as st

from fogcache.topology import (Hotspot, HotspotSpec, Node, Scenario, generate_scenario,
                               nearest_relay)


def test_generation_is_deterministic():
    a = generate_scenario(rng_seed=7)
    b = generate_scenario(rng_seed=7)
    assert a == b
    assert a != generate_scenario(rng_seed=8)


def test_defaults_match_setup():
    sc = generate_scenario(rng_seed=1)
    assert sc.region == (300.0, 300.0)
    assert sc.bs.position == (150.0, 150.0)
    assert len(sc.relays) == 30 and len(sc.hotspots) == 6
    for r in sc.relays:
        assert 0 <= r.position[0] <= 300 and 0 <= r.position[1] <= 300
    for h in sc.hotspots:
        assert 15 <= h.center[0] <= 285 and 15 <= h.center[1] <= 285


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_edge_node_is_brute_force_nearest(seed):
    sc = generate_scenario(rng_seed=seed)
    for h in sc.hotspots:
        dists = sorted((math.dist(r.position, h.center), r.id) for r in sc.relays)
        assert h.edge_node == dists[0][1]


def test_nearest_tie_goes_to_lowest_id():
    relays = [Node(5, "Relay", (10.0, 0.0)), Node(2, "Relay", (-10.0, 0.0)),
              Node(9, "Relay", (0.0, 30.0))]
    assert nearest_relay((0.0, 0.0), relays).id == 2
    with pytest.raises(ValueError):
        nearest_relay((0.0, 0.0), [])


def test_json_roundtrip_is_exact():
    sc = generate_scenario(rng_seed=3)
    back = Scenario.from_json(sc.to_json())
    assert back == sc
    assert back.to_json() == sc.to_json()


def test_explicit_centres_and_min_bs_distance():
    sc = generate_scenario(hotspot_spec=HotspotSpec(centers=((30.0, 30.0), (200.0, 90.0))), rng_seed=0)
    assert [h.center for h in sc.hotspots] == [(30.0, 30.0), (200.0, 90.0)]
    far = generate_scenario(hotspot_spec=HotspotSpec(count=6, min_bs_distance=100.0), rng_seed=0)
    assert all(math.dist(h.center, far.bs.position) >= 100.0 for h in far.hotspots)


def test_with_hotspots_reassigns_edges():
    sc = generate_scenario(rng_seed=4)
    r = sc.relays[0]
    moved = sc.with_hotspots([Hotspot(0, r.position)])
    assert moved.hotspots[0].edge_node == r.id


@pytest.mark.parametrize("kwargs", [dict(region=(0.0, 10.0)), dict(n_relays=0),
                                    dict(hotspot_spec=HotspotSpec(centers=((400.0, 1.0),)))])
def test_invalid_generation(kwargs):
    with pytest.raises(ValueError):
        generate_scenario(**kwargs)


def test_coincident_nodes_rejected():
    bs = Node(0, "BS", (0.0, 0.0))
    with pytest.raises(ValueError):
        Scenario((10.0, 10.0), bs, (Node(1, "Relay", (0.0, 0.0)),), ())
    with pytest.raises(ValueError):
        Scenario((10.0, 10.0), bs, (Node(0, "Relay", (1.0, 0.0)),), ())
