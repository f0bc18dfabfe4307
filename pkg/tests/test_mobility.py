"""Waypoint motion, hello rounds, neighbor table freshness and expiry."""

import numpy as np

from nwbsim.config import LossModelConfig, MobilityConfig, Scenario
from nwbsim.engine import make_streams
from nwbsim.mobility import MobilityModel, NeighborTable
from nwbsim.simulation import ScenarioRun
from nwbsim.topology import Position, k_hop_neighbors, place_nodes


def rwp_scenario(seed=0, speed=5.0, **kw):
    return Scenario(
        node_count=kw.pop("node_count", 10),
        seed=seed,
        mobility=MobilityConfig(kind="random_waypoint", mean_speed=speed, **kw),
    )


def build_model(scenario, horizon=100.0):
    streams = make_streams(scenario.seed)
    topo = place_nodes(scenario, streams["placement"])
    return MobilityModel(scenario, topo.positions, streams["mobility"], horizon), topo


def test_static_position_is_placement_forever():
    sc = Scenario(node_count=5, seed=1)
    model, topo = build_model(sc)
    for t in (0.0, 3.7, 99.0):
        for n in topo.positions:
            assert model.position_at(n, t) == topo.positions[n]


def test_waypoint_starts_at_placement():
    sc = rwp_scenario(seed=2)
    model, topo = build_model(sc)
    for n in topo.positions:
        assert model.position_at(n, 0.0) == topo.positions[n]


def test_waypoint_positions_stay_in_area():
    sc = rwp_scenario(seed=3, speed=15.0)
    model, _ = build_model(sc)
    for n in range(sc.node_count):
        for t in np.linspace(0, 100, 500):
            p = model.position_at(n, float(t))
            assert 0.0 <= p.x <= sc.area_width
            assert 0.0 <= p.y <= sc.area_height


def test_average_speed_within_uniform_law_bounds():
    # Path length over moving time must sit inside [0.5, 1.5] x mean_speed.
    sc = rwp_scenario(seed=4, speed=5.0)
    model, _ = build_model(sc, horizon=100.0)
    for n in range(sc.node_count):
        ts = np.linspace(0.0, 100.0, 10_001)
        pts = [model.position_at(n, float(t)) for t in ts]
        dist = sum(
            ((a.x - b.x) ** 2 + (a.y - b.y) ** 2) ** 0.5 for a, b in zip(pts, pts[1:])
        )
        speed = dist / 100.0  # pause_time = 0, so all time is moving time
        assert 2.5 - 1e-6 <= speed <= 7.5 + 1e-6


def test_pause_time_holds_position_at_waypoints():
    sc = rwp_scenario(seed=5, speed=5.0, pause_time=4.0)
    model, _ = build_model(sc)
    times, xs, ys = model._legs[0]
    pauses = [(times[i], times[i + 1]) for i in range(len(times) - 1) if xs[i] == xs[i + 1] and ys[i] == ys[i + 1]]
    assert pauses, "expected pause legs"
    t0, t1 = pauses[0]
    assert abs((t1 - t0) - 4.0) < 1e-9
    mid = model.position_at(0, (t0 + t1) / 2)
    assert mid == model.position_at(0, t0)


def test_hello_phases_deterministic_and_within_period():
    sc = rwp_scenario(seed=6)
    m1, _ = build_model(sc)
    m2, _ = build_model(sc)
    assert m1.hello_phase == m2.hello_phase
    assert all(0.0 <= ph < 1.0 for ph in m1.hello_phase.values())


def test_neighbor_table_expiry_drops_stale_entries():
    table = NeighborTable()
    table.record_hello(1, [2, 3], now=0.0)
    table.record_hello(4, [5], now=9.0)
    table.expire(now=10.0, window=2.5)
    assert 1 not in table.one_hop and 1 not in table.two_hop
    assert table.neighbors_of(4) == {5}


def test_fresh_table_unchanged_by_expiry():
    table = NeighborTable()
    table.record_hello(1, [2], now=9.5)
    table.record_hello(7, [1, 2], now=10.0)
    table.expire(now=10.0, window=2.5)
    assert table.known_one_hop() == {1, 7}


def test_expiry_matches_filter_then_rebuild_oracle():
    rng = np.random.default_rng(17)
    for _ in range(200):
        entries = {int(n): float(rng.random() * 10) for n in rng.choice(50, size=8, replace=False)}
        sets = {n: set(map(int, rng.choice(50, size=3))) for n in entries}
        table = NeighborTable(one_hop=dict(entries), two_hop={n: set(s) for n, s in sets.items()})
        now, window = 10.0, 2.5
        table.expire(now, window)
        keep = {n for n, t in entries.items() if t >= now - window}
        assert table.known_one_hop() == keep
        assert set(table.two_hop) == keep
        for n in keep:
            assert table.neighbors_of(n) == sets[n]


def test_two_hello_rounds_build_two_hop_knowledge():
    # Chain A-B-C: after two hello rounds with zero loss, A knows C through B.
    pos = {0: Position(0, 0), 1: Position(200, 0), 2: Position(400, 0)}
    run = ScenarioRun(Scenario(node_count=3, seed=0, protocol="sba"), positions=pos, n_nwbs=1)
    run.execute()
    table = run.tables[0]
    assert table.known_one_hop() == {1}
    assert 2 in table.neighbors_of(1)


def test_isolated_node_hello_reaches_nobody():
    pos = {0: Position(0, 0), 1: Position(200, 0), 2: Position(950, 950)}
    run = ScenarioRun(Scenario(node_count=3, seed=0, protocol="sba"), positions=pos, n_nwbs=1)
    run.execute()
    assert run.tables[2].known_one_hop() == set()  # nobody heard the loner
    assert all(2 not in t.known_one_hop() for n, t in run.tables.items() if n != 2)
    assert run.hello_total > 0  # it still ticked, with an empty neighbor list


def test_full_hello_drop_leaves_tables_empty():
    pos = {0: Position(0, 0), 1: Position(200, 0), 2: Position(400, 0)}
    sc = Scenario(
        node_count=3,
        seed=0,
        protocol="sba",
        loss=LossModelConfig(drop_probability=1.0, drop_applies_to_hellos=True),
    )
    run = ScenarioRun(sc, positions=pos, n_nwbs=1)
    run.execute()
    assert all(not t.one_hop for t in run.tables.values())


def test_static_tables_match_true_khop_after_warmup():
    # Under static mobility and zero loss the tables converge to the truth:
    # 1-hop equals the unit-disk neighbors, 2-hop equals distance-2 nodes.
    for seed in range(100):
        sc = Scenario(node_count=30, seed=seed, protocol="sba")
        run = ScenarioRun(sc, n_nwbs=1)
        run.execute()
        for node in run.nodes:
            table = run.tables[node]
            truth_1 = k_hop_neighbors(run.topo, node, 1)
            assert table.known_one_hop() == truth_1
            two_hop_via_table = set()
            for b in table.known_one_hop():
                two_hop_via_table |= table.neighbors_of(b)
            two_hop_via_table -= truth_1 | {node}
            assert two_hop_via_table == k_hop_neighbors(run.topo, node, 2) - truth_1
