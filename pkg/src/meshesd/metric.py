"""Flow-weighted expected-waiting link costs and path costs.

A link's cost is the average of the two endpoints' expected waiting
contributions E[tau] * flowdesc; over a multi-hop path every interior node is
then counted exactly once, while the path's source and sink contribute their
full (undivided) terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .topology import MeshGraph


@dataclass
class NodeState:
    """Disseminated per-node state: flow count, expected interval, freshness."""

    flowdesc: int
    etau: float
    timestamp: int

    def __post_init__(self):
        if self.flowdesc < 0:
            raise ValueError(f"flowdesc must be >= 0, got {self.flowdesc}")
        if not self.etau > 0:
            raise ValueError(f"etau must be > 0, got {self.etau}")


def esd_link(a: NodeState, b: NodeState) -> float:
    """Link cost in slots: mean of the endpoints' flow-weighted intervals."""
    return (a.etau * a.flowdesc + b.etau * b.flowdesc) / 2.0


def path_cost(g: MeshGraph, path: Sequence[int], states: Mapping[int, NodeState]) -> float:
    """Total cost of a path with full weight at source and sink.

    Equals the sum of per-link costs plus half the endpoint terms; the two
    formulations agree up to float rounding.
    """
    if len(path) < 2:
        raise ValueError(f"path needs at least 2 nodes, got {len(path)}")
    for u, v in zip(path, path[1:]):
        if not g.has_link(u, v):
            raise ValueError(f"consecutive nodes {u},{v} not adjacent")
    return sum(states[k].etau * states[k].flowdesc for k in path)


def apply_flow(fd_map: dict[int, int], route: Sequence[int], delta: int) -> dict[int, int]:
    """Adjust flow counts along a route: endpoints by |delta|, relays by 2|delta|.

    delta=+1 admits a flow, delta=-1 reverses an admission. The map is
    validated before any mutation, so a rejected teardown leaves it intact.
    """
    if delta not in (1, -1):
        raise ValueError(f"delta must be +1 or -1, got {delta}")
    if len(route) < 2:
        raise ValueError(f"route needs at least 2 nodes, got {len(route)}")
    increments = {route[0]: delta, route[-1]: delta}
    for k in route[1:-1]:
        increments[k] = increments.get(k, 0) + 2 * delta
    for k, inc in increments.items():
        if fd_map.get(k, 0) + inc < 0:
            raise ValueError(f"flow count underflow at node {k}")
    for k, inc in increments.items():
        fd_map[k] = fd_map.get(k, 0) + inc
    return fd_map
