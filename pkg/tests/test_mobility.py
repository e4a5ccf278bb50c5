import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fogcache.mobility import (HotspotStats, LocationError, MobilityParams, Trajectory,
                               estimate_stats, generate_synthetic_trajectories, pass_and_dwell,
                               perturb_hotspots, read_trajectories_csv, write_trajectories_csv)
from fogcache.topology import Hotspot, generate_scenario

A = Hotspot(0, (0.0, 0.0), 15.0)
B = Hotspot(1, (200.0, 200.0), 15.0)


def parked(uid, center, dwell, t0=0.0):
    return Trajectory(uid, [(t0, *center), (t0 + dwell, *center)])


def test_everyone_passes():
    users = [parked(f"u{i}", A.center, 10.0) for i in range(10)]
    assert estimate_stats(users, [A]).pass_prob[0] == 1.0


def test_three_of_ten_with_30_60_90():
    users = [parked(f"p{i}", B.center, d) for i, d in enumerate((30.0, 60.0, 90.0))]
    users += [parked(f"a{i}", A.center, 5.0) for i in range(7)]
    st_ = estimate_stats(users, [A, B], slot_duration=1.0)
    assert st_.pass_prob[1] == pytest.approx(0.3)
    assert st_.stay_slots[1] == 60


def test_boundary_graze_counts_as_inside():
    graze = Trajectory("g", [(0.0, -15.0, 15.0), (30.0, 15.0, 15.0)])
    entered, dwell = pass_and_dwell(graze, A)
    assert entered and dwell == 0.0
    st_ = estimate_stats([graze], [A])
    assert st_.pass_prob[0] == 1.0 and st_.stay_slots[0] == 1
    miss = Trajectory("m", [(0.0, -15.0, 15.001), (30.0, 15.0, 15.001)])
    assert not pass_and_dwell(miss, A)[0]


def test_walk_through_dwell_is_chord_time():
    tr = Trajectory("w", [(0.0, -30.0, 0.0), (60.0, 30.0, 0.0)])  # 1 m/s through the centre
    assert pass_and_dwell(tr, A)[1] == pytest.approx(30.0)


def test_unvisited_hotspot_and_empty_input():
    st_ = estimate_stats([parked("x", A.center, 4.0)], [A, B])
    assert st_.pass_prob[1] == 0.0 and st_.stay_slots[1] == 0
    assert st_.schedulable() == [0]
    with pytest.raises(ValueError):
        estimate_stats([], [A])


def test_stats_json_roundtrip_and_validation():
    s = HotspotStats({0: 0.4, 1: 0.0}, {0: 12, 1: 0})
    assert HotspotStats.from_json(s.to_json()) == s
    with pytest.raises(ValueError):
        HotspotStats({0: 1.5}, {0: 3})
    with pytest.raises(ValueError):
        HotspotStats({0: 0.5}, {0: 0})


def test_timestamps_must_increase():
    with pytest.raises(ValueError):
        Trajectory("bad", [(0.0, 0, 0), (0.0, 1, 1)])


walks = st.lists(st.tuples(st.floats(-60, 60), st.floats(-60, 60)), min_size=2, max_size=6)


@settings(max_examples=60, deadline=None)
@given(st.lists(walks, min_size=1, max_size=6), st.randoms(use_true_random=False))
def test_permutation_invariance(paths, rnd):
    trajs = [Trajectory(f"u{i}", [(float(t), x, y) for t, (x, y) in enumerate(p)])
             for i, p in enumerate(paths)]
    shuffled = trajs[:]
    rnd.shuffle(shuffled)
    assert estimate_stats(trajs, [A]) == estimate_stats(shuffled, [A])


@settings(max_examples=60, deadline=None)
@given(walks)
def test_resampling_keeps_pass_detection(points):
    coarse = Trajectory("c", [(10.0 * k, x, y) for k, (x, y) in enumerate(points)])
    rows = []
    for k in range(len(points) - 1):
        (x0, y0), (x1, y1) = points[k], points[k + 1]
        for j in range(4):
            a = j / 4
            rows.append((10.0 * k + 10.0 * a, x0 + a * (x1 - x0), y0 + a * (y1 - y0)))
    rows.append((10.0 * (len(points) - 1), *points[-1]))
    fine = Trajectory("f", rows)
    c, f = pass_and_dwell(coarse, A), pass_and_dwell(fine, A)
    if abs(min(math.dist(p, A.center) for p in points) - A.radius) > 1e-6:
        assert c[0] == f[0]
    assert c[1] == pytest.approx(f[1], abs=1e-6)


def test_synthetic_determinism_and_empty():
    sc = generate_scenario(rng_seed=2)
    a = generate_synthetic_trajectories(sc, 20, rng_seed=5)
    b = generate_synthetic_trajectories(sc, 20, rng_seed=5)
    assert [t.user_id for t in a] == [t.user_id for t in b]
    assert all(np.array_equal(x.samples, y.samples) for x, y in zip(a, b))
    assert generate_synthetic_trajectories(sc, 0, rng_seed=5) == []


def _stops(traj):
    s = traj.samples
    return [s[k + 1, 0] - s[k, 0] for k in range(len(s) - 1) if np.array_equal(s[k, 1:], s[k + 1, 1:])]


def test_dwell_mean_within_three_standard_errors():
    params = MobilityParams(dwell_mean=300.0, dwell_shape=4.0, popularity=(0.5, 0.5))
    sc = generate_scenario(rng_seed=0)
    trajs = generate_synthetic_trajectories(sc, 1000, params, rng_seed=11)
    dwells = np.array([d for t in trajs for d in _stops(t)])
    se = params.dwell_mean / math.sqrt(params.dwell_shape) / math.sqrt(len(dwells))
    assert len(dwells) > 1000
    assert abs(dwells.mean() - params.dwell_mean) < 3 * se


def test_perturbation():
    hs = [Hotspot(i, (100.0, 100.0)) for i in range(10_000)]
    assert perturb_hotspots(hs, LocationError(0.0), 3) == hs
    assert perturb_hotspots(hs[:5], LocationError(4.0), 3) == perturb_hotspots(hs[:5], LocationError(4.0), 3)
    moved = perturb_hotspots(hs, LocationError(25.0), 3)
    xs = np.array([h.center[0] for h in moved])
    ys = np.array([h.center[1] for h in moved])
    assert xs.var() == pytest.approx(25.0, rel=0.05)
    assert ys.var() == pytest.approx(25.0, rel=0.05)
    assert all(h.radius == 15.0 for h in moved)
    with pytest.raises(ValueError):
        LocationError(-1.0)


def test_csv_roundtrip(tmp_path):
    sc = generate_scenario(rng_seed=1)
    trajs = generate_synthetic_trajectories(sc, 8, rng_seed=1)
    path = tmp_path / "t.csv"
    write_trajectories_csv(trajs, path)
    back = read_trajectories_csv(path)
    assert [t.user_id for t in back] == [t.user_id for t in trajs]
    assert all(np.array_equal(x.samples, y.samples) for x, y in zip(back, trajs))
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_trajectories_csv(bad)
