"""Command-line front end.

Subcommands: run, sweep-flows, sweep-grid, analytic, election-check.
Options can also come from a flat key=value config file (--config); explicit
flags win over file values. Exit codes: 0 success, 1 validation error,
2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields

from .harness import (RunResult, ScenarioConfig, CSV_HEADER, analytic_table,
                      election_check, run_config, sweep_flows, sweep_grid)

_CONFIG_FIELDS = {f.name for f in fields(ScenarioConfig)}


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file; flags win")
    p.add_argument("--rows", type=int, help="grid rows")
    p.add_argument("--cols", type=int, help="grid cols")
    p.add_argument("--topology", dest="topology_file",
                   help="topology file (`nodes N` + `link A B` lines)")
    p.add_argument("--flows", type=int, help="number of one-way data flows")
    p.add_argument("--flow-rate", dest="flow_rate", type=float,
                   help="packets per frame per flow")
    p.add_argument("--packet-bytes", dest="packet_bytes", type=int)
    p.add_argument("--holdoff-exp", dest="holdoff_exp", type=int,
                   help="uniform holdoff exponent (0..7)")
    p.add_argument("--holdoff-exp-file", dest="holdoff_exp_file",
                   help="per-node exponents, one per line")
    p.add_argument("--metric", choices=["esd", "hopcount", "both"])
    p.add_argument("--frames", type=int, help="total traffic frames")
    p.add_argument("--frame-ms", dest="frame_ms", type=float)
    p.add_argument("--control-slots", dest="control_slots", type=int)
    p.add_argument("--burst", type=int)
    p.add_argument("--queue-cap", dest="queue_cap", type=int)
    p.add_argument("--rtt-probes", dest="rtt_probes", type=int)
    p.add_argument("--scenario-id", dest="scenario_id")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.add_argument("--trace", help="event trace output path")
    p.add_argument("--plot-dir", dest="plot_dir",
                   help="also render figures into this directory")


def _parse_config_file(path: str) -> dict:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(name: str, text: str):
    blank = ScenarioConfig()
    current = getattr(blank, name)
    if isinstance(current, bool):
        return text.lower() in ("1", "true", "yes")
    if isinstance(current, int):
        return int(text)
    if isinstance(current, float):
        return float(text)
    if current is None:  # optional ints (frames) and paths
        return int(text) if name == "frames" else text
    return text


def build_scenario(args: argparse.Namespace) -> ScenarioConfig:
    cfg = ScenarioConfig()
    if getattr(args, "config", None):
        for key, text in _parse_config_file(args.config).items():
            if key not in _CONFIG_FIELDS:
                raise ValueError(f"config: unknown key {key!r}")
            setattr(cfg, key, _coerce(key, text))
    for name in _CONFIG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    return cfg


def _emit(lines: list[str], out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit_results(results: list[RunResult], args: argparse.Namespace) -> None:
    _emit([CSV_HEADER] + [r.row for r in results], args.out)
    if getattr(args, "plot_dir", None):
        from .plotting import render_figures

        prefix = results[0].config.scenario_id if results else "sweep"
        render_figures(results, args.plot_dir, prefix=prefix)


def _cmd_run(args: argparse.Namespace) -> None:
    cfg = build_scenario(args)
    _emit_results(run_config(cfg, trace_path=args.trace), args)


def _cmd_sweep_flows(args: argparse.Namespace) -> None:
    cfg = build_scenario(args)
    results = sweep_flows(cfg, args.flows_min, args.flows_max, args.flows_step)
    _emit_results(results, args)


def _cmd_sweep_grid(args: argparse.Namespace) -> None:
    cfg = build_scenario(args)
    sizes = []
    for token in args.grids.split(","):
        token = token.strip().lower()
        try:
            r, c = token.split("x")
            sizes.append((int(r), int(c)))
        except ValueError:
            raise ValueError(f"grids: expected RxC tokens, got {token!r}") from None
    results = sweep_grid(cfg, sizes)
    _emit_results(results, args)


def _cmd_analytic(args: argparse.Namespace) -> None:
    cfg = build_scenario(args)
    _emit(analytic_table(cfg), args.out)


def _cmd_election_check(args: argparse.Namespace) -> None:
    cfg = build_scenario(args)
    _emit(election_check(cfg, args.slots), args.out)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meshesd",
        description="Mesh control-scheduling simulator and routing-metric testbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    _add_scenario_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sf = sub.add_parser("sweep-flows", help="sweep the number of flows")
    _add_scenario_flags(p_sf)
    p_sf.add_argument("--flows-min", type=int, default=1)
    p_sf.add_argument("--flows-max", type=int, default=8)
    p_sf.add_argument("--flows-step", type=int, default=1)
    p_sf.set_defaults(func=_cmd_sweep_flows)

    p_sg = sub.add_parser("sweep-grid", help="sweep the grid size")
    _add_scenario_flags(p_sg)
    p_sg.add_argument("--grids", default="3x3,4x4,5x5",
                      help="comma-separated RxC list")
    p_sg.set_defaults(func=_cmd_sweep_grid)

    p_an = sub.add_parser("analytic", help="print the solved schedule table")
    _add_scenario_flags(p_an)
    p_an.set_defaults(func=_cmd_analytic)

    p_ec = sub.add_parser("election-check",
                          help="compare measured win intervals to the model")
    _add_scenario_flags(p_ec)
    p_ec.add_argument("--slots", type=int, default=100000)
    p_ec.set_defaults(func=_cmd_election_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failures exit 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
