"""Command-line entry points: headless scenario runs, UWB log solving, and the
operator service."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .building import load_building_file
from .scenario import load_scenario, run_scenario
from .uwb import RangeObservation, locate_anchors


def _cmd_run_scenario(args: argparse.Namespace) -> int:
    scenario_path = Path(args.scenario)
    if not scenario_path.exists():
        print(f"error: scenario file not found: {scenario_path}", file=sys.stderr)
        return 2
    try:
        config = load_scenario(scenario_path)
    except (KeyError, ValueError) as exc:
        print(f"error: bad scenario file: {exc}", file=sys.stderr)
        return 2
    summary = run_scenario(config, args.out, seed=args.seed)
    for mission in summary["missions"]:
        rooms = mission["semantic_path"]["semantic_path"][0::2]
        status = "ok" if mission["arrived"] else "FAILED"
        print(f"[{status}] -> {mission['goal']}: {' / '.join(rooms)} "
              f"(weight {mission['semantic_path']['total_weight']}, "
              f"{mission['metric_length']:.2f} m)")
    if "uwb" in summary and summary["uwb"].get("error_stats"):
        planar = summary["uwb"]["error_stats"]["planar"]
        print(f"uwb: {len(summary['uwb']['anchors'])} anchors, "
              f"mean planar error {planar['mean']:.3f} m")
    print(f"telemetry: {Path(args.out) / 'telemetry.jsonl'}")
    return 0 if summary["success"] else 1


def _read_ranging_log(path: Path) -> list[RangeObservation]:
    observations = []
    with path.open(encoding="utf-8") as stream:
        for line_no, line in enumerate(stream, 1):
            line = line.strip()
            if not line:
                continue
            try:
                observations.append(RangeObservation.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{line_no}: bad ranging record ({exc})") from None
    return observations


def _cmd_locate_anchors(args: argparse.Namespace) -> int:
    log_path = Path(args.ranging_log)
    if not log_path.exists():
        print(f"error: ranging log not found: {log_path}", file=sys.stderr)
        return 2
    try:
        log = _read_ranging_log(log_path)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    heights: dict[str, float] = {}
    if args.heights:
        heights = {str(k): float(v) for k, v in json.loads(Path(args.heights).read_text()).items()}
    ground_truth = None
    if args.ground_truth:
        ground_truth = {
            str(k): [float(x) for x in v]
            for k, v in json.loads(Path(args.ground_truth).read_text()).items()
        }

    report = locate_anchors(log, heights, ground_truth=ground_truth)

    if args.building:
        graph = load_building_file(args.building)
        for entry in report["anchors"]:
            x, y = entry["position"]
            entry["room"] = graph.room_of_point(x, y)

    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    if report.get("error_stats"):
        planar = report["error_stats"]["planar"]
        print(f"# planar error mean/min/max: {planar['mean']:.4f} / "
              f"{planar['min']:.4f} / {planar['max']:.4f} m", file=sys.stderr)
    return 0 if not report["failures"] else 1


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import OperatorService, serve_forever

    service = OperatorService(
        building_path=args.building,
        seed=args.seed,
        tick_sleep=args.tick_sleep,
        scenario_path=args.scenario,
    )
    print(f"operator service on http://127.0.0.1:{args.port}")
    serve_forever(service, port=args.port, static_dir=args.static)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semnav", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run-scenario", help="run a scenario headless and write logs")
    run.add_argument("scenario", help="scenario JSON file")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.add_argument("--out", default="out", help="output directory")
    run.set_defaults(func=_cmd_run_scenario)

    locate = sub.add_parser("locate-anchors", help="solve beacon positions from a ranging log")
    locate.add_argument("ranging_log", help="JSON-lines ranging log")
    locate.add_argument("building", nargs="?", default=None,
                        help="building JSON, used to tag each anchor with its room")
    locate.add_argument("--heights", default=None, help="JSON file {anchor_id: height}")
    locate.add_argument("--ground-truth", default=None,
                        help="JSON file {anchor_id: [x, y, z]} for error statistics")
    locate.add_argument("--out", default=None, help="write the report here instead of stdout")
    locate.set_defaults(func=_cmd_locate_anchors)

    serve = sub.add_parser("serve", help="start the operator console service")
    serve.add_argument("--building", default=os.environ.get("SEMNAV_BUILDING"),
                       help="building JSON file (env SEMNAV_BUILDING)")
    serve.add_argument("--scenario", default=os.environ.get("SEMNAV_SCENARIO"),
                       help="optional scenario JSON supplying pose/anchors/weights")
    serve.add_argument("--port", type=int, default=int(os.environ.get("SEMNAV_PORT", "8750")))
    serve.add_argument("--seed", type=int, default=int(os.environ.get("SEMNAV_SEED", "0")))
    serve.add_argument("--tick-sleep", type=float, default=0.1,
                       help="wall-clock pacing per simulation tick (0 = as fast as possible)")
    serve.add_argument("--static", default=None, help="directory with the console bundle")
    serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve" and not args.building:
        print("error: serve needs --building (or SEMNAV_BUILDING)", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
