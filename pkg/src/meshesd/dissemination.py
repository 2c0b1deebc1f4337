"""Piggybacked state dissemination over control-message wins.

Each node keeps a table of (flowdesc, E[tau], timestamp) for every node it
has heard of. When a node wins a control slot it advertises up to L entries:
changed ("dirty") entries first, then the least-recently-advertised others so
the whole table keeps cycling through the channel. Receivers adopt an entry
only if its timestamp is strictly newer than their local copy, and re-mark
adopted entries dirty so updates keep propagating outward hop by hop.

Timestamps are frame numbers; merging therefore never moves an entry
backwards in time, and replayed messages are no-ops.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .metric import NodeState

DEFAULT_CAPACITY = 8


@dataclass(frozen=True)
class DsChMessage:
    """One control message payload: sender plus up to L table entries."""

    sender: int
    entries: tuple[tuple[int, int, float, int], ...]  # (node, flowdesc, etau, timestamp)


class StateTable:
    """One node's view of every node's state, plus advertisement bookkeeping."""

    def __init__(self, owner: int, own_state: NodeState):
        self.owner = owner
        self.entries: dict[int, NodeState] = {owner: own_state}
        self.dirty: set[int] = {owner}
        self._last_sent: dict[int, int] = {}
        self._adv_counter = 0

    def touch_self(self, timestamp: int, flowdesc: int | None = None,
                   etau: float | None = None) -> None:
        """Update the authoritative self entry and mark it for advertisement."""
        own = self.entries[self.owner]
        if timestamp < own.timestamp:
            raise ValueError(
                f"timestamp {timestamp} older than current {own.timestamp}"
            )
        if flowdesc is not None:
            own.flowdesc = flowdesc
        if etau is not None:
            own.etau = etau
        own.timestamp = timestamp
        self.dirty.add(self.owner)

    def build_advertisement(self, capacity: int = DEFAULT_CAPACITY) -> DsChMessage:
        """Assemble the next message: dirty entries first, then stale refresh.

        Dirty entries go self-first then by ascending node id, capped at
        `capacity`; whatever they are, they leave the dirty set. Spare
        capacity carries the least-recently-advertised clean entries.
        """
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self._adv_counter += 1
        picked: list[int] = []
        dirty_order = sorted(self.dirty)
        if self.owner in self.dirty:
            dirty_order.remove(self.owner)
            dirty_order.insert(0, self.owner)
        for node in dirty_order[:capacity]:
            picked.append(node)
            self.dirty.discard(node)
        if len(picked) < capacity:
            clean = [n for n in self.entries if n not in self.dirty and n not in picked]
            clean.sort(key=lambda n: (self._last_sent.get(n, 0), n))
            picked.extend(clean[: capacity - len(picked)])
        for node in picked:
            self._last_sent[node] = self._adv_counter
        return DsChMessage(
            sender=self.owner,
            entries=tuple(
                (n, self.entries[n].flowdesc, self.entries[n].etau,
                 self.entries[n].timestamp)
                for n in picked
            ),
        )

    def merge(self, msg: DsChMessage) -> list[int]:
        """Adopt strictly newer entries from a received message.

        Returns the adopted node ids. Adopted entries become dirty so they
        are forwarded on this node's next win; the self entry is never
        overwritten.
        """
        adopted = []
        for node, flowdesc, etau, timestamp in msg.entries:
            if node == self.owner:
                continue
            local = self.entries.get(node)
            if local is None or timestamp > local.timestamp:
                self.entries[node] = NodeState(flowdesc, etau, timestamp)
                self.dirty.add(node)
                adopted.append(node)
        return adopted


def is_converged(tables: Iterable[StateTable], node_count: int) -> bool:
    """True iff every table covers every node and all tables agree entry-wise."""
    reference: dict[int, tuple[int, float, int]] | None = None
    for table in tables:
        if len(table.entries) < node_count:
            return False
        view = {
            n: (st.flowdesc, st.etau, st.timestamp)
            for n, st in table.entries.items()
        }
        if reference is None:
            reference = view
        elif view != reference:
            return False
    return True
