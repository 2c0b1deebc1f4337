"""Scenario configuration, single runs, and experiment sweeps.

A scenario is described by a flat set of fields (topology, traffic shape,
scheduler exponents, timing, output paths). Flow endpoints are drawn from a
deterministic generator keyed by (scenario id, sweep index), so repeated
invocations are byte-identical and the two metric kinds always see the same
traffic. Results are emitted as CSV rows with a fixed schema.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, replace
from typing import IO

from .analytic import DEFAULT_BASE, SchedulerConfig, solve_expected_contention
from .dissemination import DEFAULT_CAPACITY
from .election import WinnerSchedule, measured_interval, run_election
from .engine import (DEFAULT_QUEUE_CAP, DEFAULT_WARMUP_CAP, FlowKind, FlowSpec,
                     MetricsReport, TimingConfig, TraceWriter, run_scenario)
from .routing import MetricKind
from .topology import MeshGraph, build_grid, load_topology

CSV_HEADER = ("scenario,metric,rows,cols,flows,holdoff_exp,frames,"
              "mean_delay_ms,p95_delay_ms,mean_rtt_ms,throughput_bps,"
              "delivered,dropped")

DEFAULT_STAGGER_FRAMES = 30
DEFAULT_STEADY_FRAMES = 200
DEFAULT_DRAIN_FRAMES = 200


@dataclass
class ScenarioConfig:
    """Everything needed to run one scenario (or one sweep point)."""

    rows: int = 5
    cols: int = 5
    topology_file: str | None = None
    flows: int = 4
    flow_rate: float = 1.5  # packets per frame per flow
    packet_bytes: int = 1024
    holdoff_exp: int = 0
    holdoff_exp_file: str | None = None
    base: int = DEFAULT_BASE
    metric: str = "both"  # esd | hopcount | both
    frames: int | None = None  # traffic frames; derived when omitted
    frame_ms: float = 10.0
    control_slots: int = 16
    burst: int = 16
    queue_cap: int = DEFAULT_QUEUE_CAP
    adv_capacity: int = DEFAULT_CAPACITY
    warmup_cap: int = DEFAULT_WARMUP_CAP
    rtt_probes: int = 1
    probe_rate: float = 0.5
    probe_bytes: int = 64
    probe_start_frames: int | None = None  # default: once all flows are up
    stagger_frames: int = DEFAULT_STAGGER_FRAMES
    steady_frames: int = DEFAULT_STEADY_FRAMES
    drain_frames: int = DEFAULT_DRAIN_FRAMES
    scenario_id: str = "default"

    def metric_kinds(self) -> list[MetricKind]:
        if self.metric == "both":
            return [MetricKind.ESD, MetricKind.HOP_COUNT]
        return [MetricKind.parse(self.metric)]

    def build_graph(self) -> MeshGraph:
        if self.topology_file is not None:
            g = load_topology(self.topology_file)
        else:
            if self.rows < 1 or self.cols < 1:
                raise ValueError(
                    f"rows/cols must be >= 1, got {self.rows}x{self.cols}"
                )
            g = build_grid(self.rows, self.cols)
        if not g.is_connected():
            raise ValueError("topology: experiment graphs must be connected")
        return g

    def scheduler_config(self, node_count: int) -> SchedulerConfig:
        if self.holdoff_exp_file is not None:
            exps = _load_exponents(self.holdoff_exp_file)
            if len(exps) != node_count:
                raise ValueError(
                    f"holdoff-exp-file: {len(exps)} exponents for "
                    f"{node_count} nodes"
                )
            return SchedulerConfig(exponents=tuple(exps), base=self.base)
        if not (0 <= self.holdoff_exp <= 7):
            raise ValueError(
                f"holdoff-exp: exponent {self.holdoff_exp} outside 0..7"
            )
        return SchedulerConfig.uniform(node_count, self.holdoff_exp, self.base)

    def timing(self) -> TimingConfig:
        return TimingConfig(frame_ms=self.frame_ms,
                            control_slots_per_frame=self.control_slots,
                            burst=self.burst)

    def total_frames(self) -> int:
        if self.frames is not None:
            if self.frames < 1:
                raise ValueError(f"frames must be >= 1, got {self.frames}")
            return self.frames
        admission_span = self.flows * self.stagger_frames
        return admission_span + self.steady_frames + self.drain_frames

    def validate(self) -> None:
        g = self.build_graph()
        self.scheduler_config(g.node_count)
        self.timing()
        if self.flows < 0:
            raise ValueError(f"flows must be >= 0, got {self.flows}")
        if self.flows + self.rtt_probes > 0 and g.node_count < 2:
            raise ValueError("flows need at least 2 nodes")
        if self.flow_rate <= 0:
            raise ValueError(f"flow-rate must be > 0, got {self.flow_rate}")
        if self.packet_bytes < 1:
            raise ValueError(f"packet-bytes must be >= 1, got {self.packet_bytes}")
        if self.queue_cap < 1:
            raise ValueError(f"queue-cap must be >= 1, got {self.queue_cap}")
        if self.rtt_probes < 0:
            raise ValueError(f"rtt-probes must be >= 0, got {self.rtt_probes}")
        self.total_frames()


def _load_exponents(path: str) -> list[int]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if line:
                out.append(int(line))
    return out


def _hop_distances(g: MeshGraph) -> dict[tuple[int, int], int]:
    from collections import deque

    dist: dict[tuple[int, int], int] = {}
    for src in range(g.node_count):
        seen = {src: 0}
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in g.neighbors(u):
                if v not in seen:
                    seen[v] = seen[u] + 1
                    queue.append(v)
        for v, d in seen.items():
            dist[(src, v)] = d
    return dist


def _endpoint_pair(scenario_id: str, label: str, index: int, g: MeshGraph,
                   min_distance: int) -> tuple[int, int]:
    """Deterministic uniform draw among pairs at least min_distance apart.

    Keyed by (scenario, label, index) only, so the pair for a given flow
    index never depends on how many flows a scenario carries; sweep points
    then extend each other's traffic instead of redrawing it.
    """
    key = f"{scenario_id}:{label}:{index}".encode()
    seed = int.from_bytes(hashlib.sha256(key).digest()[:8], "big")
    rng = random.Random(seed)
    dist = _pair_distances_cached(g)
    n = g.node_count
    for _ in range(10000):
        src = rng.randrange(n)
        dst = rng.randrange(n - 1)
        if dst >= src:
            dst += 1
        if dist.get((src, dst), -1) >= min_distance:
            return src, dst
    raise ValueError("no endpoint pair satisfies the distance constraint")


def _pair_distances_cached(g: MeshGraph) -> dict[tuple[int, int], int]:
    cached = getattr(g, "_pair_distances", None)
    if cached is None:
        cached = _hop_distances(g)
        g._pair_distances = cached  # graphs are immutable once built
    return cached


def traffic_min_distance(g: MeshGraph) -> int:
    """Half the topology diameter: flows must cross the shared fabric."""
    dist = _pair_distances_cached(g)
    diameter = max(dist.values(), default=0)
    return max(1, diameter // 2)


def build_flows(cfg: ScenarioConfig, g: MeshGraph) -> list[FlowSpec]:
    """Deterministic flow set: staggered one-way flows plus RTT probes.

    Endpoints are uniform over pairs at least half the topology diameter
    apart, keyed by (scenario id, flow index): every flow crosses the shared
    fabric, and a sweep point with more flows extends the previous point's
    traffic instead of redrawing it, so load grows monotonically along a
    sweep and both metric kinds always see identical traffic. Data flows are
    admitted `stagger_frames` apart and all stop together after the steady
    window, leaving `drain_frames` for in-flight packets. Probe flows start
    once all data flows are up, so their samples reflect the loaded network.
    """
    min_dist = traffic_min_distance(g)
    total = cfg.total_frames()
    admission_span = cfg.flows * cfg.stagger_frames
    # an explicit --frames smaller than the drain window would leave no
    # traffic at all; fall back to draining a third of the run
    drain = cfg.drain_frames if cfg.drain_frames < total else total // 3
    stop = max(1, total - drain)
    flows: list[FlowSpec] = []
    for i in range(cfg.flows):
        src, dst = _endpoint_pair(cfg.scenario_id, "flow", i, g, min_dist)
        start = min(i * cfg.stagger_frames, stop - 1)
        flows.append(FlowSpec(
            flow_id=i, src=src, dst=dst, rate=cfg.flow_rate,
            packet_bytes=cfg.packet_bytes, start_frame=start, stop_frame=stop,
            kind=FlowKind.ONE_WAY))
    probe_start = (cfg.probe_start_frames if cfg.probe_start_frames is not None
                   else admission_span)
    for p in range(cfg.rtt_probes):
        src, dst = _endpoint_pair(cfg.scenario_id, "probe", p, g, min_dist)
        start = min(probe_start, stop - 1)
        flows.append(FlowSpec(
            flow_id=cfg.flows + p, src=src, dst=dst, rate=cfg.probe_rate,
            packet_bytes=cfg.probe_bytes, start_frame=start, stop_frame=stop,
            kind=FlowKind.RTT_PROBE))
    return flows


def _fmt(value: float) -> str:
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return f"{value:.6f}"


def report_row(cfg: ScenarioConfig, kind: MetricKind, report: MetricsReport) -> str:
    exp = "mixed" if cfg.holdoff_exp_file is not None else str(cfg.holdoff_exp)
    rows = cfg.rows if cfg.topology_file is None else 0
    cols = cfg.cols if cfg.topology_file is None else 0
    return ",".join([
        cfg.scenario_id,
        kind.value,
        str(rows),
        str(cols),
        str(cfg.flows),
        exp,
        str(report.frames),
        _fmt(report.mean_delay_ms),
        _fmt(report.p95_delay_ms),
        _fmt(report.mean_rtt_ms),
        _fmt(report.throughput_bps),
        str(report.delivered),
        str(report.dropped),
    ])


@dataclass
class RunResult:
    """CSV row plus the underlying report, one per metric kind."""

    row: str
    config: ScenarioConfig
    kind: MetricKind
    report: MetricsReport


class _ScheduleCache:
    """Shares winner traces across runs over the same (graph, exponents)."""

    def __init__(self):
        self._cache: dict[tuple, WinnerSchedule] = {}

    def get(self, g: MeshGraph, sched_cfg: SchedulerConfig) -> WinnerSchedule:
        key = (id(g), sched_cfg.exponents, sched_cfg.base)
        if key not in self._cache:
            self._cache[key] = WinnerSchedule(g, sched_cfg)
        return self._cache[key]


def run_config(
    cfg: ScenarioConfig,
    graph: MeshGraph | None = None,
    cache: _ScheduleCache | None = None,
    trace_path: str | None = None,
) -> list[RunResult]:
    """Run one scenario for each requested metric kind."""
    cfg.validate()
    g = graph if graph is not None else cfg.build_graph()
    sched_cfg = cfg.scheduler_config(g.node_count)
    timing = cfg.timing()
    total = cfg.total_frames()
    flows = build_flows(cfg, g)
    if cache is None:
        cache = _ScheduleCache()  # still shares the trace across metric kinds
    schedule = cache.get(g, sched_cfg)
    results = []
    trace_fh: IO[str] | None = None
    try:
        if trace_path is not None:
            trace_fh = open(trace_path, "w", encoding="utf-8")
        for kind in cfg.metric_kinds():
            writer = None
            if trace_fh is not None:
                trace_fh.write(f"# metric={kind.value}\n")
                writer = TraceWriter(trace_fh)
            report = run_scenario(
                g, sched_cfg, timing, flows, kind, total,
                queue_cap=cfg.queue_cap, adv_capacity=cfg.adv_capacity,
                warmup_cap=cfg.warmup_cap, schedule=schedule, trace=writer)
            results.append(RunResult(report_row(cfg, kind, report), cfg, kind, report))
    finally:
        if trace_fh is not None:
            trace_fh.close()
    return results


def sweep_flows(cfg: ScenarioConfig, lo: int, hi: int, step: int = 1) -> list[RunResult]:
    """Run the scenario at each flow count in [lo, hi]; shared topology/trace."""
    if lo < 0 or hi < lo or step < 1:
        raise ValueError(f"bad flow sweep range {lo}..{hi} step {step}")
    g = cfg.build_graph()
    cache = _ScheduleCache()
    out: list[RunResult] = []
    for n_flows in range(lo, hi + 1, step):
        point = replace(cfg, flows=n_flows)
        out.extend(run_config(point, graph=g, cache=cache))
    return out


def sweep_grid(cfg: ScenarioConfig, sizes: list[tuple[int, int]]) -> list[RunResult]:
    """Run the scenario at each grid size; flow count fixed."""
    if not sizes:
        raise ValueError("grid sweep needs at least one size")
    out: list[RunResult] = []
    for r, c in sizes:
        point = replace(cfg, rows=r, cols=c, topology_file=None)
        out.extend(run_config(point))
    return out


def analytic_table(cfg: ScenarioConfig) -> list[str]:
    """CSV rows `node,x,holdoff,ES,Etau` for the configured topology."""
    g = cfg.build_graph()
    sched_cfg = cfg.scheduler_config(g.node_count)
    schedule = solve_expected_contention(g, sched_cfg)
    rows = ["node,x,holdoff,ES,Etau"]
    for k in range(g.node_count):
        rows.append(",".join([
            str(k),
            str(sched_cfg.exponents[k]),
            str(sched_cfg.holdoff(k)),
            _fmt(schedule.es[k]),
            _fmt(schedule.etau[k]),
        ]))
    return rows


def election_check(cfg: ScenarioConfig, slots: int) -> list[str]:
    """CSV rows `node,wins,mean_interval,analytic_Etau` from a raw election."""
    if slots < 1:
        raise ValueError(f"slots must be >= 1, got {slots}")
    g = cfg.build_graph()
    sched_cfg = cfg.scheduler_config(g.node_count)
    expected = solve_expected_contention(g, sched_cfg)
    _, state = run_election(g, sched_cfg, slots)
    rows = ["node,wins,mean_interval,analytic_Etau"]
    for k in range(g.node_count):
        wins = state.win_history[k]
        mean = (measured_interval(state, k) if len(wins) >= 2 else math.nan)
        rows.append(",".join([
            str(k), str(len(wins)), _fmt(mean), _fmt(expected.etau[k]),
        ]))
    return rows
