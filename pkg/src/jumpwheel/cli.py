"""Command-line entry point.

    jumpwheel run --scenario vertical --out runs/vertical
    jumpwheel run --config my.json --set controller.kp=0.05
    jumpwheel sweep --scenario vertical --grid profile.segments.2.value=100,150,200

Exit codes: 0 success, 1 every sweep cell failed, 2 configuration error,
3 numerical failure (divergence, degenerate model, event chatter).
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .analysis import diagnostics, jump_metrics
from .config import ScenarioConfig, _parse_value, apply_overrides, default_config, effective_config, load_config, resolve, set_path
from .errors import DegenerateSegmentError, JumpwheelError, ParameterError
from .sim import COLUMNS, EventKind, TrajectoryRecord, run_scenario

log = logging.getLogger("jumpwheel")

EXIT_OK, EXIT_ALL_FAILED, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

SWEEP_METRICS = (
    "status", "error", "n_jumps", "takeoff_time", "landing_time", "apex_height_m",
    "apex_height_bl", "horizontal_span_m", "horizontal_span_bl", "com_apex_height_m",
)  # fmt: skip


def _fmt(value: float) -> str:
    return format(value, ".17g")


def write_trajectory_csv(record: TrajectoryRecord, path: Path) -> None:
    """SI-unit trajectory, one row per sample; phase and slip_flag as integers."""
    int_cols = {COLUMNS.index("phase"), COLUMNS.index("slip_flag")}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in record.data:
            writer.writerow([str(int(v)) if i in int_cols else _fmt(v) for i, v in enumerate(row)])


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def _ramp_end_speed(record: TrajectoryRecord, scenario: ScenarioConfig) -> tuple[float, float]:
    """Wheel speed at the end of the first reference segment."""
    t_ramp = scenario.profile.segments[0].t_end
    t = record["t"]
    if not math.isfinite(t_ramp) or t_ramp > t[-1]:
        t_ramp = float(t[-1])
    i = min(int(t.searchsorted(t_ramp)), len(t) - 1)
    return float(t[i]), float(record["dphi"][i])


def summarize(record: TrajectoryRecord, scenario: ScenarioConfig) -> dict:
    try:
        jumps = jump_metrics(record, scenario.robot)
    except DegenerateSegmentError as exc:
        log.warning("%s", exc)
        jumps = []
    t_ramp, speed = _ramp_end_speed(record, scenario)
    landed = any(ev.kind == EventKind.LANDING for ev in record.events)
    return {
        "jumps": [m.to_dict() for m in jumps],
        "events": [{"time": ev.time, "kind": ev.kind.value} for ev in record.events],
        "body_length_m": scenario.robot.body_length,
        "ramp_end_time": t_ramp,
        "ramp_end_wheel_speed": speed,
        "terminated_by": "first landing" if landed else "t_end",
        "impact_model": False,
    }


def summary_line(summary: dict) -> str:
    jumps = summary["jumps"]
    parts = [f"jumps={len(jumps)}"]
    if jumps:
        j = jumps[0]
        parts += [
            f"takeoff_t={j['takeoff_time']:.4f}s",
            f"apex_bl={j['apex_height_bl']:.3f}",
            f"span_bl={j['horizontal_span_bl']:.3f}",
        ]
    parts.append(f"wheel_speed@{summary['ramp_end_time']:.2f}s={abs(summary['ramp_end_wheel_speed']):.2f}rad/s")
    parts.append(f"end={summary['terminated_by']}")
    return " ".join(parts)


def execute(scenario: ScenarioConfig, out_dir: Path | None = None) -> tuple[TrajectoryRecord, dict]:
    """Run one scenario and write the requested output files."""
    record = run_scenario(scenario.robot, scenario.sim, scenario.profile, scenario.controller)
    summary = summarize(record, scenario)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        if scenario.output["trajectory_csv"]:
            write_trajectory_csv(record, out_dir / "trajectory.csv")
        if scenario.output["metrics_json"]:
            (out_dir / "metrics.json").write_text(json.dumps(_json_safe(summary), indent=2) + "\n")
        if scenario.output["diagnostics_json"]:
            report = diagnostics(record, scenario.robot)
            (out_dir / "diagnostics.json").write_text(json.dumps(_json_safe(report.to_dict()), indent=2) + "\n")
    return record, summary


def _base_config(args) -> dict:
    if args.config:
        return load_config(args.config, args.scenario or "vertical")
    return default_config(args.scenario or "vertical")


def cmd_run(args) -> int:
    try:
        config = apply_overrides(_base_config(args), args.set)
        if args.out:
            config["output"]["dir"] = args.out
        scenario = resolve(config)
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dump_config:
        print(json.dumps(effective_config(scenario), indent=2))
        return EXIT_OK
    try:
        _, summary = execute(scenario, Path(scenario.output["dir"]))
    except JumpwheelError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(summary_line(summary))
    return EXIT_OK


def parse_grid(items: list[str], spec_path: str | None) -> dict[str, list]:
    grid: dict[str, list] = {}
    if spec_path:
        try:
            doc = json.loads(Path(spec_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParameterError("sweep_spec", str(exc)) from exc
        if not isinstance(doc, dict):
            raise ParameterError("sweep_spec", "expected an object mapping keys to value lists")
        grid.update(doc)
    for item in items:
        if "=" not in item:
            raise ParameterError(item, "grid entry must look like KEY=V1,V2,...")
        key, text = item.split("=", 1)
        values = [v.strip() for v in text.split(",")]
        if not all(values):
            raise ParameterError(key.strip(), "empty value in grid")
        grid[key.strip()] = [_parse_value(v) for v in values]
    for key, values in grid.items():
        if not isinstance(values, list) or not values:
            raise ParameterError(key, "grid needs a non-empty list of values")
    if not grid:
        raise ParameterError("grid", "empty sweep grid")
    return grid


def _sweep_cell(config: dict, assignment: dict) -> dict:
    row = dict(assignment)
    try:
        for key, value in assignment.items():
            config = set_path(config, key, value)
        scenario = resolve(config)
        _, summary = execute(scenario)
    except JumpwheelError as exc:
        row.update(status="error", error=str(exc), n_jumps=0)
        return row
    row.update(status="ok", error="", n_jumps=len(summary["jumps"]))
    if summary["jumps"]:
        first = summary["jumps"][0]
        for key in SWEEP_METRICS[3:]:
            row[key] = first[key]
    return row


def cmd_sweep(args) -> int:
    try:
        config = apply_overrides(_base_config(args), args.set)
        resolve(config)
        grid = parse_grid(args.grid, args.spec)
        for key, values in grid.items():
            set_path(config, key, values[0])  # unknown paths fail up front
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    keys = list(grid)
    cells = [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]
    if args.workers == 1:
        rows = [_sweep_cell(config, cell) for cell in cells]
    else:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_cell, itertools.repeat(config), cells))

    out_dir = Path(args.out or config["output"]["dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    header = keys + list(SWEEP_METRICS)
    with open(out_dir / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [_fmt(v) if isinstance(v, float) else ("" if v is None else v) for v in (row.get(k) for k in header)]
            )
    ok = sum(r["status"] == "ok" for r in rows)
    print(f"cells={len(rows)} ok={ok} failed={len(rows) - ok} -> {out_dir / 'sweep.csv'}")
    return EXIT_OK if ok else EXIT_ALL_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jumpwheel", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="JSON scenario config")
        p.add_argument("--scenario", choices=["vertical", "horizontal"], help="built-in scenario (default: vertical)")
        p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[], help="dotted-path override, repeatable")
        p.add_argument("--out", metavar="DIR", help="output directory")

    run = sub.add_parser("run", help="simulate one scenario")
    common(run)
    run.add_argument("--dump-config", action="store_true", help="print the effective config and exit")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="simulate a Cartesian grid of overrides")
    common(sweep)
    sweep.add_argument("--grid", metavar="KEY=V1,V2", action="append", default=[], help="grid axis, repeatable")
    sweep.add_argument("--spec", metavar="PATH", help="JSON object mapping keys to value lists")
    sweep.add_argument("--workers", type=int, default=None, help="worker processes (default: CPU count)")
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
