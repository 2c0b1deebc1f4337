"""Shared test oracles, independent of the implementation paths they check."""

from __future__ import annotations

import heapq
import random

import pytest

from meshesd.topology import MeshGraph


def dijkstra_oracle(g: MeshGraph, weights: dict[tuple[int, int], float],
                    src: int) -> list[float]:
    """Plain binary-heap Dijkstra; distances only."""
    adj: dict[int, list[tuple[int, float]]] = {k: [] for k in range(g.node_count)}
    for (a, b), w in weights.items():
        adj[a].append((b, w))
        adj[b].append((a, w))
    dist = [float("inf")] * g.node_count
    dist[src] = 0.0
    heap = [(0.0, src)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def enumerate_simple_paths(g: MeshGraph, src: int, dst: int) -> list[list[int]]:
    """All simple src->dst paths by DFS; exponential, for tiny graphs only."""
    paths: list[list[int]] = []
    stack = [src]
    seen = {src}

    def walk(u: int) -> None:
        if u == dst:
            paths.append(list(stack))
            return
        for v in g.neighbors(u):
            if v not in seen:
                seen.add(v)
                stack.append(v)
                walk(v)
                stack.pop()
                seen.remove(v)

    walk(src)
    return paths


def path_weight(path: list[int], weights: dict[tuple[int, int], float]) -> float:
    return sum(
        weights[(min(a, b), max(a, b))] for a, b in zip(path, path[1:])
    )


def random_connected_graph(rng: random.Random, n: int,
                           extra_edge_prob: float = 0.3) -> MeshGraph:
    """Random spanning tree plus a sprinkle of extra edges."""
    links = []
    order = list(range(n))
    rng.shuffle(order)
    for i in range(1, n):
        links.append((order[i], order[rng.randrange(i)]))
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < extra_edge_prob:
                links.append((a, b))
    return MeshGraph(n, links)


def random_graph(rng: random.Random, n: int, edge_prob: float = 0.3) -> MeshGraph:
    """Erdos-Renyi style graph; possibly disconnected."""
    links = [
        (a, b)
        for a in range(n)
        for b in range(a + 1, n)
        if rng.random() < edge_prob
    ]
    return MeshGraph(n, links)


def assert_no_election_violations(g: MeshGraph, holdoffs: list[int],
                                  winners_by_slot) -> None:
    """Independent replay of the two election safety rules."""
    last_win: dict[int, int] = {}
    for s, winners in enumerate(winners_by_slot):
        for i, k in enumerate(winners):
            for j in winners[i + 1:]:
                assert j not in g.two_hop_neighborhood(k), (
                    f"slot {s}: winners {k} and {j} within 2 hops"
                )
            if k in last_win:
                assert s - last_win[k] > holdoffs[k], (
                    f"node {k}: wins at {last_win[k]} and {s} violate "
                    f"holdoff {holdoffs[k]}"
                )
            last_win[k] = s


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xE5D)
