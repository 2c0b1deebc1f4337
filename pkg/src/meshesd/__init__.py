"""Deterministic mesh control-scheduling simulator and routing-metric toolkit."""

from .analytic import (ExpectedSchedule, NeighborhoodKnowledge, SchedulerConfig,
                       expected_interval, holdoff_time, solve_expected_contention)
from .dissemination import DsChMessage, StateTable, is_converged
from .election import (ElectionState, WinnerSchedule, contenders,
                       measured_interval, mixing_value, run_election)
from .engine import (FlowKind, FlowSpec, MetricsReport, TimingConfig,
                     run_scenario, run_scenario_detailed)
from .harness import ScenarioConfig, build_flows, run_config, sweep_flows, sweep_grid
from .metric import NodeState, apply_flow, esd_link, path_cost
from .routing import MetricKind, SourceRoute, bellman_ford, compute_route, link_weights
from .topology import MeshGraph, build_grid, load_topology

__all__ = [
    "ExpectedSchedule", "NeighborhoodKnowledge", "SchedulerConfig",
    "expected_interval", "holdoff_time", "solve_expected_contention",
    "DsChMessage", "StateTable", "is_converged",
    "ElectionState", "WinnerSchedule", "contenders", "measured_interval",
    "mixing_value", "run_election",
    "FlowKind", "FlowSpec", "MetricsReport", "TimingConfig",
    "run_scenario", "run_scenario_detailed",
    "ScenarioConfig", "build_flows", "run_config", "sweep_flows", "sweep_grid",
    "NodeState", "apply_flow", "esd_link", "path_cost",
    "MetricKind", "SourceRoute", "bellman_ford", "compute_route", "link_weights",
    "MeshGraph", "build_grid", "load_topology",
]
