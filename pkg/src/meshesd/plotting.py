"""Figure rendering for sweep results.

Renders one PNG per measure (delay, RTT, throughput) next to the delimited
output, with one line per metric kind. The x axis is whatever the sweep
varied: flow count for flow sweeps, node count for grid sweeps.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import RunResult

_MEASURES = [
    ("mean_delay_ms", "Mean end-to-end delay (ms)", "delay"),
    ("p95_delay_ms", "95th percentile delay (ms)", "p95_delay"),
    ("mean_rtt_ms", "Mean RTT (ms)", "rtt"),
    ("throughput_bps", "Throughput (bps)", "throughput"),
]

_STYLE = {
    "esd": {"color": "tab:blue", "marker": "o"},
    "hopcount": {"color": "tab:red", "marker": "s"},
}


def _x_axis(results: list[RunResult]) -> tuple[str, list[float]]:
    flow_counts = {r.config.flows for r in results}
    if len(flow_counts) > 1:
        return "Number of flows", [r.config.flows for r in results]
    grid_sizes = {(r.config.rows, r.config.cols) for r in results}
    if len(grid_sizes) > 1:
        return "Grid nodes", [r.config.rows * r.config.cols for r in results]
    return "Number of flows", [r.config.flows for r in results]


def render_figures(results: list[RunResult], out_dir: str, prefix: str = "sweep") -> list[str]:
    """Write one figure per measure; returns the paths written."""
    if not results:
        return []
    os.makedirs(out_dir, exist_ok=True)
    x_label, xs = _x_axis(results)
    written = []
    for attr, y_label, stem in _MEASURES:
        fig, ax = plt.subplots(figsize=(5.5, 3.6))
        plotted = False
        for kind in ("esd", "hopcount"):
            pts = [
                (x, getattr(r.report, attr))
                for x, r in zip(xs, results)
                if r.kind.value == kind and not math.isnan(getattr(r.report, attr))
            ]
            if not pts:
                continue
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts],
                    label=kind, **_STYLE[kind])
            plotted = True
        if not plotted:
            plt.close(fig)
            continue
        ax.set_xlabel(x_label)
        ax.set_ylabel(y_label)
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = os.path.join(out_dir, f"{prefix}_{stem}.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
