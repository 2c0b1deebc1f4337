import math
import random

import pytest

from meshesd.metric import NodeState
from meshesd.routing import (MetricKind, SourceRoute, bellman_ford,
                             compute_route, link_weights)
from meshesd.topology import MeshGraph, build_grid

from conftest import (dijkstra_oracle, enumerate_simple_paths, path_weight,
                      random_connected_graph)


def ns(fd, etau=18.0):
    return NodeState(flowdesc=fd, etau=etau, timestamp=0)


def uniform_states(n, fd=1, etau=18.0):
    return {k: ns(fd, etau) for k in range(n)}


def bfs_distance(g, src, dst):
    from collections import deque
    dist = {src: 0}
    q = deque([src])
    while q:
        u = q.popleft()
        if u == dst:
            return dist[u]
        for v in g.neighbors(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return math.inf


def test_metric_kind_parse():
    assert MetricKind.parse("esd") is MetricKind.ESD
    assert MetricKind.parse("hopcount") is MetricKind.HOP_COUNT
    with pytest.raises(ValueError):
        MetricKind.parse("etx")


def test_source_route_invariants():
    with pytest.raises(ValueError):
        SourceRoute((0,))
    with pytest.raises(ValueError):
        SourceRoute((0, 1, 0))
    g = build_grid(1, 3)
    with pytest.raises(ValueError):
        SourceRoute.for_graph(g, (0, 2))
    route = SourceRoute.for_graph(g, (0, 1, 2))
    assert route.src == 0 and route.dst == 2
    assert route.reversed().nodes == (2, 1, 0)


def test_hopcount_weights_are_unit():
    g = build_grid(3, 3)
    weights = link_weights(g, {}, MetricKind.HOP_COUNT)
    assert set(weights.values()) == {1.0}
    assert len(weights) == 12


def test_esd_weights_zero_when_idle():
    g = build_grid(3, 3)
    weights = link_weights(g, uniform_states(9, fd=0), MetricKind.ESD)
    assert set(weights.values()) == {0.0}


def test_esd_weights_hotspot():
    g = build_grid(3, 3)
    states = uniform_states(9, fd=1)
    states[4] = ns(4)
    weights = link_weights(g, states, MetricKind.ESD)
    for (a, b), w in weights.items():
        assert w == (45.0 if 4 in (a, b) else 18.0)


def test_esd_weights_require_full_table():
    g = build_grid(2, 2)
    partial = {0: ns(1), 1: ns(1), 2: ns(1)}
    with pytest.raises(KeyError):
        link_weights(g, partial, MetricKind.ESD)


def test_bellman_ford_source_is_zero():
    g = build_grid(1, 3)
    dist, pred = bellman_ford(g, link_weights(g, {}, MetricKind.HOP_COUNT), 0)
    assert dist[0] == 0.0
    assert pred[0] is None
    assert dist[2] == 2.0 and pred[2] == 1


def test_bellman_ford_unreachable_inf():
    g = MeshGraph(3, [(0, 1)])
    dist, pred = bellman_ford(g, {(0, 1): 1.0}, 0)
    assert math.isinf(dist[2]) and pred[2] is None


def test_bellman_ford_rejects_negative_weights():
    g = build_grid(1, 2)
    with pytest.raises(ValueError):
        bellman_ford(g, {(0, 1): -0.5}, 0)


def test_bellman_ford_matches_dijkstra_on_random_graphs():
    rng = random.Random(42)
    for _ in range(60):
        g = random_connected_graph(rng, rng.randrange(2, 26))
        weights = {link: rng.uniform(0.0, 10.0) for link in sorted(g.links)}
        src = rng.randrange(g.node_count)
        dist, _ = bellman_ford(g, weights, src)
        oracle = dijkstra_oracle(g, weights, src)
        for k in range(g.node_count):
            assert dist[k] == pytest.approx(oracle[k], rel=1e-12, abs=1e-12)


def test_route_cost_matches_enumeration_on_small_graphs():
    rng = random.Random(1234)
    for _ in range(40):
        g = random_connected_graph(rng, rng.randrange(2, 11))
        weights = {link: rng.uniform(0.0, 5.0) for link in sorted(g.links)}
        src = rng.randrange(g.node_count)
        dst = rng.randrange(g.node_count - 1)
        if dst >= src:
            dst += 1
        dist, _ = bellman_ford(g, weights, src)
        best = min(
            path_weight(p, weights)
            for p in enumerate_simple_paths(g, src, dst)
        )
        assert dist[dst] == pytest.approx(best, rel=1e-12, abs=1e-12)


def test_compute_route_tie_break_matches_enumeration():
    rng = random.Random(77)
    for _ in range(25):
        g = random_connected_graph(rng, rng.randrange(2, 9))
        states = {
            k: ns(rng.randrange(0, 3), etau=18.0) for k in range(g.node_count)
        }
        src = rng.randrange(g.node_count)
        dst = rng.randrange(g.node_count - 1)
        if dst >= src:
            dst += 1
        weights = link_weights(g, states, MetricKind.ESD)
        route = compute_route(g, states, MetricKind.ESD, src, dst)
        expected = min(
            enumerate_simple_paths(g, src, dst),
            key=lambda p: (path_weight(p, weights), len(p), p),
        )
        assert list(route.nodes) == expected


def test_compute_route_hopcount_is_bfs_length():
    rng = random.Random(3)
    for _ in range(20):
        g = random_connected_graph(rng, rng.randrange(2, 15))
        src = rng.randrange(g.node_count)
        dst = rng.randrange(g.node_count - 1)
        if dst >= src:
            dst += 1
        route = compute_route(g, {}, MetricKind.HOP_COUNT, src, dst)
        assert len(route.nodes) - 1 == bfs_distance(g, src, dst)


def test_grid_hopcount_route_is_manhattan():
    g = build_grid(3, 3)
    route = compute_route(g, {}, MetricKind.HOP_COUNT, 0, 8)
    assert len(route.nodes) - 1 == 4


def test_hotspot_route_avoids_center():
    g = build_grid(3, 3)
    states = uniform_states(9, fd=1)
    states[4] = ns(4)
    route = compute_route(g, states, MetricKind.ESD, 0, 8)
    assert 4 not in route.nodes
    assert route.nodes in ((0, 1, 2, 5, 8), (0, 3, 6, 7, 8))
    weights = link_weights(g, states, MetricKind.ESD)
    assert path_weight(list(route.nodes), weights) == 72.0
    through_center = min(
        path_weight(p, weights)
        for p in enumerate_simple_paths(g, 0, 8)
        if 4 in p
    )
    assert through_center > 72.0


def test_zero_load_esd_degenerates_to_hop_count():
    g = build_grid(3, 3)
    idle = uniform_states(9, fd=0)
    esd_route = compute_route(g, idle, MetricKind.ESD, 0, 8)
    hop_route = compute_route(g, {}, MetricKind.HOP_COUNT, 0, 8)
    assert len(esd_route.nodes) == len(hop_route.nodes)
    assert esd_route.nodes == hop_route.nodes  # shared tie-break chain


def test_routes_always_simple_paths():
    rng = random.Random(8)
    for _ in range(30):
        g = random_connected_graph(rng, rng.randrange(2, 12))
        states = {
            k: ns(rng.randrange(0, 4), etau=rng.uniform(17, 40))
            for k in range(g.node_count)
        }
        src = rng.randrange(g.node_count)
        dst = rng.randrange(g.node_count - 1)
        if dst >= src:
            dst += 1
        for kind in (MetricKind.ESD, MetricKind.HOP_COUNT):
            route = compute_route(g, states, kind, src, dst)
            assert len(set(route.nodes)) == len(route.nodes)
            for a, b in zip(route.nodes, route.nodes[1:]):
                assert g.has_link(a, b)


def test_route_determinism():
    rng = random.Random(15)
    g = random_connected_graph(rng, 10)
    states = {k: ns(rng.randrange(0, 4)) for k in range(10)}
    first = compute_route(g, states, MetricKind.ESD, 0, 9)
    for _ in range(5):
        assert compute_route(g, states, MetricKind.ESD, 0, 9) == first


def test_compute_route_rejects_same_endpoints():
    g = build_grid(2, 2)
    with pytest.raises(ValueError):
        compute_route(g, {}, MetricKind.HOP_COUNT, 1, 1)


def test_compute_route_unreachable():
    g = MeshGraph(3, [(0, 1)])
    with pytest.raises(ValueError):
        compute_route(g, {}, MetricKind.HOP_COUNT, 0, 2)
