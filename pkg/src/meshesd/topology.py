"""Mesh connectivity graphs and their 1-hop / 2-hop neighborhoods.

Graphs are simple, undirected and immutable after construction; the 2-hop
neighborhoods (the contention domains of the distributed scheduler) are
precomputed once and cached on the instance.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable


class MeshGraph:
    """Static connectivity graph over nodes 0..node_count-1."""

    def __init__(self, node_count: int, links: Iterable[tuple[int, int]]):
        if node_count < 0:
            raise ValueError(f"node_count must be >= 0, got {node_count}")
        self.node_count = node_count
        normalized: set[tuple[int, int]] = set()
        for a, b in links:
            if a == b:
                raise ValueError(f"self-link at node {a}")
            if not (0 <= a < node_count and 0 <= b < node_count):
                raise ValueError(f"link ({a},{b}) outside 0..{node_count - 1}")
            normalized.add((a, b) if a < b else (b, a))
        self.links: frozenset[tuple[int, int]] = frozenset(normalized)

        nbrs: list[set[int]] = [set() for _ in range(node_count)]
        for a, b in self.links:
            nbrs[a].add(b)
            nbrs[b].add(a)
        self._neighbors: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(s)) for s in nbrs
        )
        two_hop: list[frozenset[int]] = []
        for k in range(node_count):
            reach = set(nbrs[k])
            for j in nbrs[k]:
                reach.update(nbrs[j])
            reach.discard(k)
            two_hop.append(frozenset(reach))
        self._two_hop: tuple[frozenset[int], ...] = tuple(two_hop)

    def _check_node(self, k: int) -> None:
        if not (0 <= k < self.node_count):
            raise ValueError(f"node {k} outside 0..{self.node_count - 1}")

    def neighbors(self, k: int) -> tuple[int, ...]:
        """1-hop neighbors of k, ascending."""
        self._check_node(k)
        return self._neighbors[k]

    def two_hop_neighborhood(self, k: int) -> frozenset[int]:
        """All nodes at graph distance 1 or 2 from k, excluding k."""
        self._check_node(k)
        return self._two_hop[k]

    def has_link(self, a: int, b: int) -> bool:
        self._check_node(a)
        self._check_node(b)
        return (min(a, b), max(a, b)) in self.links

    def is_connected(self) -> bool:
        """True iff the graph has a single connected component (or is empty)."""
        if self.node_count <= 1:
            return True
        seen = {0}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v in self._neighbors[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return len(seen) == self.node_count

    def __repr__(self) -> str:
        return f"MeshGraph(node_count={self.node_count}, links={len(self.links)})"


def build_grid(rows: int, cols: int) -> MeshGraph:
    """rows x cols lattice with 4-connectivity; node id = row*cols + col."""
    if rows < 1 or cols < 1:
        raise ValueError(f"grid dimensions must be >= 1, got {rows}x{cols}")
    links = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if c + 1 < cols:
                links.append((u, u + 1))
            if r + 1 < rows:
                links.append((u, u + cols))
    return MeshGraph(rows * cols, links)


def load_topology(path: str) -> MeshGraph:
    """Parse a topology file: one `nodes N` line, then `link A B` lines."""
    node_count = None
    links: list[tuple[int, int]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "nodes" and len(parts) == 2:
                if node_count is not None:
                    raise ValueError(f"{path}:{lineno}: duplicate nodes line")
                node_count = int(parts[1])
            elif parts[0] == "link" and len(parts) == 3:
                if node_count is None:
                    raise ValueError(f"{path}:{lineno}: link before nodes line")
                links.append((int(parts[1]), int(parts[2])))
            else:
                raise ValueError(f"{path}:{lineno}: unrecognized line {line!r}")
    if node_count is None:
        raise ValueError(f"{path}: missing nodes line")
    return MeshGraph(node_count, links)
