"""Loop-free source-route computation under a pluggable link metric.

Paths are found with Bellman-Ford over non-negative link weights. Ties are
broken deterministically: least cost, then fewest hops, then lexicographically
smallest node sequence, which makes every route a reproducible pure function
of (graph, state snapshot). With the flow-weighted metric an idle network has
all-zero weights, so the tie-break chain degenerates to hop-count routing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .dissemination import StateTable
from .metric import NodeState, esd_link
from .topology import MeshGraph


class MetricKind(Enum):
    ESD = "esd"
    HOP_COUNT = "hopcount"

    @classmethod
    def parse(cls, text: str) -> MetricKind:
        for kind in cls:
            if kind.value == text:
                return kind
        raise ValueError(f"unknown metric {text!r}; expected esd or hopcount")


@dataclass(frozen=True)
class SourceRoute:
    """Ordered node sequence from source to destination; always a simple path."""

    nodes: tuple[int, ...]

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise ValueError("a route needs at least source and destination")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError(f"route {self.nodes} repeats a node")

    @classmethod
    def for_graph(cls, g: MeshGraph, nodes: tuple[int, ...]) -> SourceRoute:
        route = cls(nodes)
        for u, v in zip(nodes, nodes[1:]):
            if not g.has_link(u, v):
                raise ValueError(f"route hop {u}->{v} is not a link")
        return route

    @property
    def src(self) -> int:
        return self.nodes[0]

    @property
    def dst(self) -> int:
        return self.nodes[-1]

    def reversed(self) -> SourceRoute:
        return SourceRoute(tuple(reversed(self.nodes)))


def link_weights(
    g: MeshGraph,
    states: Mapping[int, NodeState] | StateTable,
    kind: MetricKind,
) -> dict[tuple[int, int], float]:
    """Per-link costs keyed by (min,max) node pair."""
    if isinstance(states, StateTable):
        states = states.entries
    if kind is MetricKind.HOP_COUNT:
        return {link: 1.0 for link in sorted(g.links)}
    weights = {}
    for a, b in sorted(g.links):
        if a not in states or b not in states:
            missing = a if a not in states else b
            raise KeyError(f"no state entry for node {missing}; table not converged")
        weights[(a, b)] = esd_link(states[a], states[b])
    return weights


def _best_paths(
    g: MeshGraph, weights: Mapping[tuple[int, int], float], src: int
) -> list[tuple[float, int, tuple[int, ...]] | None]:
    """Bellman-Ford keeping (cost, hops, path) keys for deterministic ties."""
    for link, w in weights.items():
        if w < 0:
            raise ValueError(f"negative weight {w} on link {link}")
    n = g.node_count
    best: list[tuple[float, int, tuple[int, ...]] | None] = [None] * n
    best[src] = (0.0, 0, (src,))
    # Optimal keys use simple paths only, so n-1 relaxation rounds suffice;
    # stop early once a full round changes nothing.
    for _ in range(n - 1):
        changed = False
        for (a, b), w in weights.items():
            for u, v in ((a, b), (b, a)):
                ku = best[u]
                if ku is None:
                    continue
                cand = (ku[0] + w, ku[1] + 1, ku[2] + (v,))
                if best[v] is None or cand < best[v]:
                    best[v] = cand
                    changed = True
        if not changed:
            break
    return best


def bellman_ford(
    g: MeshGraph, weights: Mapping[tuple[int, int], float], src: int
) -> tuple[list[float], list[int | None]]:
    """Distances and predecessors from src; unreachable nodes get inf/None."""
    g._check_node(src)
    best = _best_paths(g, weights, src)
    dist = [math.inf] * g.node_count
    pred: list[int | None] = [None] * g.node_count
    for v, entry in enumerate(best):
        if entry is None:
            continue
        dist[v] = entry[0]
        if len(entry[2]) >= 2:
            pred[v] = entry[2][-2]
    return dist, pred


def compute_route(
    g: MeshGraph,
    states: Mapping[int, NodeState] | StateTable,
    kind: MetricKind,
    src: int,
    dst: int,
) -> SourceRoute:
    """Minimal-cost route under the chosen metric, with deterministic ties."""
    g._check_node(src)
    g._check_node(dst)
    if src == dst:
        raise ValueError("source and destination must differ")
    weights = link_weights(g, states, kind)
    best = _best_paths(g, weights, src)
    entry = best[dst]
    if entry is None:
        raise ValueError(f"destination {dst} unreachable from {src}")
    return SourceRoute.for_graph(g, entry[2])
