"""Frame/slot simulator for control-scheduled mesh forwarding.

Time advances in frames of `control_slots_per_frame` transmission
opportunities. Each slot runs the pseudo-random election; every winner
piggybacks a state advertisement to its 1-hop neighbors and gains a
forwarding opportunity of up to `burst` packets, drained from its per-flow
queues in fair round-robin order. A forwarded packet advances one hop along
its pinned source route and becomes available at the next node from the
following slot, so every hop costs at least one slot.

A traffic-free warm-up phase disseminates state tables until every node
knows every other node (required before flow-weighted routes may be
computed), then flows are admitted at their start frames with routes pinned
from the source's table snapshot at that moment.

Everything is single-threaded and seedless: the full trace is a pure
function of the scenario description.
"""

from __future__ import annotations

import bisect
import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import IO, Sequence

from .analytic import SchedulerConfig, solve_expected_contention
from .dissemination import DEFAULT_CAPACITY, StateTable, is_converged
from .election import WinnerSchedule
from .metric import NodeState, apply_flow
from .routing import MetricKind, SourceRoute, compute_route
from .topology import MeshGraph

DEFAULT_QUEUE_CAP = 512
DEFAULT_WARMUP_CAP = 400  # frames


class FlowKind(Enum):
    ONE_WAY = "oneway"
    RTT_PROBE = "rtt"


@dataclass(frozen=True)
class TimingConfig:
    """Frame geometry and the per-win forwarding budget."""

    frame_ms: float = 10.0
    control_slots_per_frame: int = 16
    burst: int = 16

    def __post_init__(self):
        if self.frame_ms <= 0:
            raise ValueError(f"frame_ms must be > 0, got {self.frame_ms}")
        if self.control_slots_per_frame < 1:
            raise ValueError(
                f"control_slots_per_frame must be >= 1, got {self.control_slots_per_frame}"
            )
        if self.burst < 1:
            raise ValueError(f"burst must be >= 1, got {self.burst}")

    @property
    def slot_ms(self) -> float:
        return self.frame_ms / self.control_slots_per_frame


@dataclass(frozen=True)
class FlowSpec:
    """One traffic flow; frames are relative to the start of traffic."""

    flow_id: int
    src: int
    dst: int
    rate: float  # packets per frame
    packet_bytes: int
    start_frame: int
    stop_frame: int
    kind: FlowKind = FlowKind.ONE_WAY

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError(f"flow {self.flow_id}: src == dst == {self.src}")
        if not self.start_frame < self.stop_frame:
            raise ValueError(
                f"flow {self.flow_id}: start_frame {self.start_frame} "
                f"not before stop_frame {self.stop_frame}"
            )
        if self.start_frame < 0:
            raise ValueError(f"flow {self.flow_id}: negative start_frame")
        if not self.rate > 0:
            raise ValueError(f"flow {self.flow_id}: rate must be > 0")
        if self.packet_bytes < 1:
            raise ValueError(f"flow {self.flow_id}: packet_bytes must be >= 1")


@dataclass
class PacketRecord:
    """Delivery record for one packet."""

    flow_id: int
    packet_id: int
    created_slot: int
    delivered_slot: int
    hops: int
    route: tuple[int, ...]


@dataclass(frozen=True)
class MetricsReport:
    """Scenario outcome; delay and RTT in ms, throughput in bps."""

    metric: MetricKind
    frames: int
    warmup_frames: int
    converged_at_slot: int | None
    mean_delay_ms: float
    p95_delay_ms: float
    mean_rtt_ms: float
    throughput_bps: float
    delivered: int
    dropped: int
    created: int
    in_queue: int
    flowdesc: tuple[int, ...]  # snapshot at peak concurrent admissions


class _Packet:
    __slots__ = ("lane", "flow_id", "packet_id", "created_slot", "route",
                 "hop_idx", "nbytes", "probe_origin")

    def __init__(self, lane, flow_id, packet_id, created_slot, route, nbytes,
                 probe_origin=None):
        self.lane = lane
        self.flow_id = flow_id
        self.packet_id = packet_id
        self.created_slot = created_slot
        self.route = route
        self.hop_idx = 0
        self.nbytes = nbytes
        self.probe_origin = probe_origin  # request creation slot, RTT flows


class FairRoundRobin:
    """Per-flow queues served one packet per non-empty queue per round.

    The round-robin pointer survives across forwarding opportunities: after
    serving lane L, the next credit goes to the smallest non-empty lane id
    greater than L (cyclically).
    """

    def __init__(self, queue_cap: int):
        self.queue_cap = queue_cap
        self.lanes: dict[int, deque] = {}
        self._next_lane = 0

    def enqueue(self, lane: int, item) -> bool:
        q = self.lanes.get(lane)
        if q is None:
            q = deque()
            self.lanes[lane] = q
        if len(q) >= self.queue_cap:
            return False
        q.append(item)
        return True

    def drain(self, burst: int) -> list:
        served = []
        ids = sorted(lane for lane, q in self.lanes.items() if q)
        if not ids:
            return served
        n = len(ids)
        pos = bisect.bisect_left(ids, self._next_lane) % n
        for _ in range(burst):
            scanned = 0
            while scanned < n and not self.lanes[ids[pos]]:
                pos = (pos + 1) % n
                scanned += 1
            if scanned == n:
                break
            lane = ids[pos]
            served.append(self.lanes[lane].popleft())
            self._next_lane = lane + 1
            pos = (pos + 1) % n
        return served

    def pending(self) -> int:
        return sum(len(q) for q in self.lanes.values())


class TraceWriter:
    """Line-oriented event trace: event,frame,slot,node,flow,pkt,detail."""

    HEADER = "event,frame,slot,node,flow,pkt,detail"

    def __init__(self, stream: IO[str]):
        self._stream = stream
        self._stream.write(self.HEADER + "\n")

    def emit(self, event: str, frame: int, slot: int, node: int | str,
             flow: int | str = "", pkt: int | str = "", detail: str = ""):
        self._stream.write(f"{event},{frame},{slot},{node},{flow},{pkt},{detail}\n")


def _fwd_lane(flow_id: int) -> int:
    return 2 * flow_id


def _rev_lane(flow_id: int) -> int:
    return 2 * flow_id + 1


class _Simulation:
    def __init__(self, g: MeshGraph, cfg: SchedulerConfig, timing: TimingConfig,
                 flows: Sequence[FlowSpec], kind: MetricKind, total_frames: int,
                 queue_cap: int, adv_capacity: int, warmup_cap: int,
                 schedule: WinnerSchedule | None, trace: TraceWriter | None,
                 collect_packets: bool):
        if not g.is_connected():
            raise ValueError("scenario graph must be connected")
        if total_frames < 0:
            raise ValueError(f"total_frames must be >= 0, got {total_frames}")
        seen_ids = set()
        for f in flows:
            if f.flow_id in seen_ids:
                raise ValueError(f"duplicate flow id {f.flow_id}")
            seen_ids.add(f.flow_id)
            g._check_node(f.src)
            g._check_node(f.dst)
            if f.start_frame >= total_frames:
                raise ValueError(
                    f"flow {f.flow_id} starts at frame {f.start_frame}, "
                    f"beyond the {total_frames}-frame run"
                )
        self.g = g
        self.cfg = cfg
        self.timing = timing
        self.flows = list(flows)
        self.kind = kind
        self.total_frames = total_frames
        self.queue_cap = queue_cap
        self.adv_capacity = adv_capacity
        self.warmup_cap = warmup_cap
        self.trace = trace
        self.collect_packets = collect_packets

        self.schedule = schedule if schedule is not None else WinnerSchedule(g, cfg)
        expected = solve_expected_contention(g, cfg)
        if not expected.converged:
            raise RuntimeError("analytic schedule solve did not converge")
        self.etau = expected.etau

        n = g.node_count
        self.tables = [StateTable(k, NodeState(0, self.etau[k], 0)) for k in range(n)]
        self.queues = [FairRoundRobin(queue_cap) for _ in range(n)]
        self.fd = {k: 0 for k in range(n)}
        self.routes: dict[int, SourceRoute] = {}
        self.credits = {f.flow_id: 0.0 for f in self.flows}
        self.next_packet_id = {f.flow_id: 0 for f in self.flows}

        self.created = 0
        self.delivered = 0
        self.dropped = 0
        self.delivered_bits = 0
        self.delay_slots: list[int] = []
        self.rtt_slots: list[int] = []
        self.packet_records: list[PacketRecord] = []
        self.active_flows = 0
        self._peak_active = 0
        self.fd_peak: tuple[int, ...] = tuple(self.fd[k] for k in range(n))
        self.converged_at_slot: int | None = None
        self.warmup_frames = 0

    # -- control plane ----------------------------------------------------

    def _process_slot(self, frame: int, s: int, forwarding: bool) -> None:
        winners = self.schedule.winners(s)
        if not winners:
            return
        arrivals: list[tuple[int, _Packet]] = []
        for k in winners:
            msg = self.tables[k].build_advertisement(self.adv_capacity)
            for nb in self.g.neighbors(k):
                self.tables[nb].merge(msg)
            if self.trace:
                self.trace.emit("win", frame, s, k, detail=f"adv={len(msg.entries)}")
            if forwarding:
                for pkt in self.queues[k].drain(self.timing.burst):
                    self._forward(frame, s, k, pkt, arrivals)
        for node, pkt in arrivals:
            if not self.queues[node].enqueue(pkt.lane, pkt):
                self.dropped += 1
                if self.trace:
                    self.trace.emit("drop", frame, s, node, pkt.flow_id,
                                    pkt.packet_id, "queue_full")

    def _forward(self, frame: int, s: int, k: int, pkt: _Packet,
                 arrivals: list[tuple[int, _Packet]]) -> None:
        nxt = pkt.route[pkt.hop_idx + 1]
        pkt.hop_idx += 1
        if self.trace:
            self.trace.emit("fwd", frame, s, k, pkt.flow_id, pkt.packet_id,
                            f"to={nxt}")
        if pkt.hop_idx == len(pkt.route) - 1:
            self._deliver(frame, s, pkt, arrivals)
        else:
            arrivals.append((nxt, pkt))

    def _deliver(self, frame: int, s: int, pkt: _Packet,
                 arrivals: list[tuple[int, _Packet]]) -> None:
        arrival_slot = s + 1
        self.delivered += 1
        self.delivered_bits += pkt.nbytes * 8
        if self.trace:
            self.trace.emit("deliver", frame, s, pkt.route[-1], pkt.flow_id,
                            pkt.packet_id, f"delay={arrival_slot - pkt.created_slot}")
        if self.collect_packets:
            self.packet_records.append(PacketRecord(
                pkt.flow_id, pkt.packet_id, pkt.created_slot, arrival_slot,
                pkt.hop_idx, pkt.route))
        if pkt.probe_origin is None:
            self.delay_slots.append(arrival_slot - pkt.created_slot)
        elif pkt.lane == _fwd_lane(pkt.flow_id):
            # Request reached the probe target: send the response back.
            resp = _Packet(_rev_lane(pkt.flow_id), pkt.flow_id, pkt.packet_id,
                           arrival_slot, tuple(reversed(pkt.route)), pkt.nbytes,
                           probe_origin=pkt.probe_origin)
            self.created += 1
            arrivals.append((resp.route[0], resp))
        else:
            self.rtt_slots.append(arrival_slot - pkt.probe_origin)
            if self.trace:
                self.trace.emit("rtt", frame, s, pkt.route[-1], pkt.flow_id,
                                pkt.packet_id,
                                f"rtt={arrival_slot - pkt.probe_origin}")

    # -- flow management --------------------------------------------------

    def _admit(self, flow: FlowSpec, abs_frame: int) -> None:
        src_table = self.tables[flow.src]
        route = compute_route(self.g, src_table, self.kind, flow.src, flow.dst)
        self.routes[flow.flow_id] = route
        apply_flow(self.fd, route.nodes, +1)
        if flow.kind is FlowKind.RTT_PROBE:
            apply_flow(self.fd, tuple(reversed(route.nodes)), +1)
        for k in route.nodes:
            self.tables[k].touch_self(abs_frame, flowdesc=self.fd[k])
        self.active_flows += 1
        if self.active_flows >= self._peak_active:
            self._peak_active = self.active_flows
            self.fd_peak = tuple(self.fd[k] for k in range(self.g.node_count))
        if self.trace:
            self.trace.emit("admit", abs_frame, abs_frame * self.timing.control_slots_per_frame,
                            flow.src, flow.flow_id,
                            detail=">".join(map(str, route.nodes)))

    def _teardown(self, flow: FlowSpec, abs_frame: int) -> None:
        route = self.routes[flow.flow_id]
        apply_flow(self.fd, route.nodes, -1)
        if flow.kind is FlowKind.RTT_PROBE:
            apply_flow(self.fd, tuple(reversed(route.nodes)), -1)
        for k in route.nodes:
            self.tables[k].touch_self(abs_frame, flowdesc=self.fd[k])
        self.active_flows -= 1
        if self.trace:
            self.trace.emit("teardown", abs_frame,
                            abs_frame * self.timing.control_slots_per_frame,
                            flow.src, flow.flow_id)

    def _generate(self, flow: FlowSpec, abs_frame: int) -> None:
        self.credits[flow.flow_id] += flow.rate
        slot = abs_frame * self.timing.control_slots_per_frame
        route = self.routes[flow.flow_id]
        while self.credits[flow.flow_id] >= 1.0:
            self.credits[flow.flow_id] -= 1.0
            pid = self.next_packet_id[flow.flow_id]
            self.next_packet_id[flow.flow_id] = pid + 1
            probe_origin = slot if flow.kind is FlowKind.RTT_PROBE else None
            pkt = _Packet(_fwd_lane(flow.flow_id), flow.flow_id, pid, slot,
                          route.nodes, flow.packet_bytes, probe_origin)
            self.created += 1
            if self.trace:
                self.trace.emit("create", abs_frame, slot, flow.src,
                                flow.flow_id, pid)
            if not self.queues[flow.src].enqueue(pkt.lane, pkt):
                self.dropped += 1
                if self.trace:
                    self.trace.emit("drop", abs_frame, slot, flow.src,
                                    flow.flow_id, pid, "queue_full")

    # -- phases -------------------------------------------------------------

    def run_warmup(self) -> None:
        spf = self.timing.control_slots_per_frame
        n = self.g.node_count
        frame = 0
        if is_converged(self.tables, n):
            self.converged_at_slot = 0
        else:
            while frame < self.warmup_cap:
                for i in range(spf):
                    self._process_slot(frame, frame * spf + i, forwarding=False)
                frame += 1
                if is_converged(self.tables, n):
                    self.converged_at_slot = frame * spf
                    break
        self.warmup_frames = frame
        if self.converged_at_slot is None and self.kind is MetricKind.ESD:
            raise RuntimeError(
                f"state tables not converged after {self.warmup_cap} warm-up frames; "
                "cannot compute flow-weighted routes"
            )
        if self.trace and self.converged_at_slot is not None:
            self.trace.emit("converged", self.warmup_frames,
                            self.converged_at_slot, "")

    def run_traffic(self) -> None:
        spf = self.timing.control_slots_per_frame
        starting: dict[int, list[FlowSpec]] = {}
        stopping: dict[int, list[FlowSpec]] = {}
        for f in self.flows:
            starting.setdefault(f.start_frame, []).append(f)
            if f.stop_frame < self.total_frames:
                stopping.setdefault(f.stop_frame, []).append(f)
        active: list[FlowSpec] = []
        for rel in range(self.total_frames):
            abs_frame = self.warmup_frames + rel
            for f in stopping.get(rel, ()):
                self._teardown(f, abs_frame)
                active.remove(f)
            for f in starting.get(rel, ()):
                self._admit(f, abs_frame)
                active.append(f)
            for f in active:
                self._generate(f, abs_frame)
            base = abs_frame * spf
            for i in range(spf):
                self._process_slot(abs_frame, base + i, forwarding=True)

    def report(self) -> MetricsReport:
        slot_ms = self.timing.slot_ms
        delays = sorted(self.delay_slots)
        if delays:
            mean_delay = sum(delays) / len(delays) * slot_ms
            p95 = delays[max(0, math.ceil(0.95 * len(delays)) - 1)] * slot_ms
        else:
            mean_delay = math.nan
            p95 = math.nan
        mean_rtt = (
            sum(self.rtt_slots) / len(self.rtt_slots) * slot_ms
            if self.rtt_slots else math.nan
        )
        seconds = self.total_frames * self.timing.frame_ms / 1000.0
        throughput = self.delivered_bits / seconds if seconds > 0 else 0.0
        return MetricsReport(
            metric=self.kind,
            frames=self.total_frames,
            warmup_frames=self.warmup_frames,
            converged_at_slot=self.converged_at_slot,
            mean_delay_ms=mean_delay,
            p95_delay_ms=p95,
            mean_rtt_ms=mean_rtt,
            throughput_bps=throughput,
            delivered=self.delivered,
            dropped=self.dropped,
            created=self.created,
            in_queue=sum(q.pending() for q in self.queues),
            flowdesc=self.fd_peak,
        )


def run_scenario(
    g: MeshGraph,
    cfg: SchedulerConfig,
    timing: TimingConfig,
    flows: Sequence[FlowSpec],
    kind: MetricKind,
    total_frames: int,
    *,
    queue_cap: int = DEFAULT_QUEUE_CAP,
    adv_capacity: int = DEFAULT_CAPACITY,
    warmup_cap: int = DEFAULT_WARMUP_CAP,
    schedule: WinnerSchedule | None = None,
    trace: TraceWriter | None = None,
    collect_packets: bool = False,
) -> MetricsReport:
    """Simulate one scenario end to end and return its metrics.

    `schedule` may carry a precomputed winner trace shared across runs over
    the same (graph, exponents); it is extended on demand and never altered
    by the data plane.
    """
    sim = _Simulation(g, cfg, timing, flows, kind, total_frames, queue_cap,
                      adv_capacity, warmup_cap, schedule, trace, collect_packets)
    sim.run_warmup()
    sim.run_traffic()
    return sim.report()


def run_scenario_detailed(
    g: MeshGraph,
    cfg: SchedulerConfig,
    timing: TimingConfig,
    flows: Sequence[FlowSpec],
    kind: MetricKind,
    total_frames: int,
    *,
    queue_cap: int = DEFAULT_QUEUE_CAP,
    adv_capacity: int = DEFAULT_CAPACITY,
    warmup_cap: int = DEFAULT_WARMUP_CAP,
    schedule: WinnerSchedule | None = None,
    trace: TraceWriter | None = None,
) -> tuple[MetricsReport, list[PacketRecord], dict[int, SourceRoute]]:
    """run_scenario plus per-packet delivery records and the pinned routes."""
    sim = _Simulation(g, cfg, timing, flows, kind, total_frames, queue_cap,
                      adv_capacity, warmup_cap, schedule, trace,
                      collect_packets=True)
    sim.run_warmup()
    sim.run_traffic()
    return sim.report(), sim.packet_records, dict(sim.routes)
