"""Slot-by-slot pseudo-random election for control transmission opportunities.

Each slot, every node whose holdoff has expired competes against the eligible
members of its 2-hop neighborhood; the contender with the strictly greatest
mixing value wins (ties go to the smaller node id). The mixing value is a
keyed integer hash of (node, slot), so the whole election is a pure function
of the graph and the exponent configuration; there is no seeded RNG.

A node that loses a slot re-contends on the very next slot. A winner at slot
s with holdoff h may not contend again before slot s + h + 1.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analytic import SchedulerConfig
from .topology import MeshGraph

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mixing_value(node: int, slot: int) -> int:
    """Deterministic 32-bit election key for (node, slot)."""
    z = (((node + 1) * _GOLDEN) & _MASK64) ^ (((slot + 1) * _MIX1) & _MASK64)
    z ^= z >> 30
    z = (z * _MIX1) & _MASK64
    z ^= z >> 27
    z = (z * _MIX2) & _MASK64
    z ^= z >> 31
    return z >> 32


@dataclass
class ElectionState:
    """Mutable per-node election bookkeeping."""

    next_eligible: list[int]
    win_history: list[list[int]]

    @classmethod
    def fresh(cls, node_count: int) -> ElectionState:
        return cls(
            next_eligible=[0] * node_count,
            win_history=[[] for _ in range(node_count)],
        )


def contenders(g: MeshGraph, st: ElectionState, k: int, s: int) -> set[int]:
    """k plus its currently eligible 2-hop neighbors."""
    if st.next_eligible[k] > s:
        raise ValueError(f"node {k} is in holdoff at slot {s}")
    out = {k}
    for j in g.two_hop_neighborhood(k):
        if st.next_eligible[j] <= s:
            out.add(j)
    return out


class WinnerSchedule:
    """Lazily extended winner trace for a fixed (graph, config) pair.

    The trace is independent of everything else in a scenario, so one
    instance can be shared across every run over the same topology and
    exponents.
    """

    def __init__(self, g: MeshGraph, cfg: SchedulerConfig):
        if len(cfg.exponents) != g.node_count:
            raise ValueError(
                f"config covers {len(cfg.exponents)} nodes, graph has {g.node_count}"
            )
        self.graph = g
        self.config = cfg
        self.state = ElectionState.fresh(g.node_count)
        self.winners_by_slot: list[tuple[int, ...]] = []
        self._holdoff = [cfg.holdoff(k) for k in range(g.node_count)]
        self._two_hop = [tuple(sorted(g.two_hop_neighborhood(k))) for k in range(g.node_count)]

    def extend_to(self, total_slots: int) -> None:
        """Compute winners for every slot < total_slots."""
        ne = self.state.next_eligible
        two_hop = self._two_hop
        hold = self._holdoff
        history = self.state.win_history
        for s in range(len(self.winners_by_slot), total_slots):
            eligible = [k for k, t in enumerate(ne) if t <= s]
            # Tie-break on smaller id: key (value, -id) under > comparison.
            keys = {k: (mixing_value(k, s), -k) for k in eligible}
            winners = []
            for k in eligible:
                key = keys[k]
                best = True
                for j in two_hop[k]:
                    other = keys.get(j)
                    if other is not None and other > key:
                        best = False
                        break
                if best:
                    winners.append(k)
            for k in winners:
                ne[k] = s + hold[k] + 1
                history[k].append(s)
            self.winners_by_slot.append(tuple(winners))

    def winners(self, s: int) -> tuple[int, ...]:
        if s >= len(self.winners_by_slot):
            self.extend_to(s + 1)
        return self.winners_by_slot[s]


def run_election(
    g: MeshGraph, cfg: SchedulerConfig, total_slots: int
) -> tuple[list[tuple[int, ...]], ElectionState]:
    """Run the election for total_slots slots from a fresh state."""
    if total_slots < 1:
        raise ValueError(f"total_slots must be >= 1, got {total_slots}")
    sched = WinnerSchedule(g, cfg)
    sched.extend_to(total_slots)
    return sched.winners_by_slot, sched.state


def measured_interval(win_history: list[list[int]] | ElectionState, node: int) -> float:
    """Mean gap between the node's successive win slots."""
    history = win_history.win_history if isinstance(win_history, ElectionState) else win_history
    wins = history[node]
    if len(wins) < 2:
        raise ValueError(f"node {node} has {len(wins)} wins; need at least 2")
    return (wins[-1] - wins[0]) / (len(wins) - 1)


def verify_election_safety(
    g: MeshGraph,
    cfg: SchedulerConfig,
    winners_by_slot: list[tuple[int, ...]],
) -> None:
    """Raise AssertionError on any 2-hop collision or holdoff violation."""
    last_win = [-(10**9)] * g.node_count
    for s, winners in enumerate(winners_by_slot):
        for i, k in enumerate(winners):
            n2 = g.two_hop_neighborhood(k)
            for j in winners[i + 1:]:
                assert j not in n2, f"2-hop collision at slot {s}: {k} and {j}"
            gap = s - last_win[k]
            if last_win[k] >= 0:
                assert gap > cfg.holdoff(k), (
                    f"holdoff violation at node {k}: wins {last_win[k]} and {s}"
                )
            last_win[k] = s
