"""``arbiter`` command line: plan, simulate and compare on a scenario."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import metrics
from .planner import PlanningError
from .scenario import Scenario, ScenarioError, load_scenario, prepare
from .selector import Strategy
from .sim import RunOutcome, RunStatus, run_simulation
from .track import TrackError

EXIT_CODES = {RunStatus.SUCCESS: 0, RunStatus.OFF_ROUTE: 3, RunStatus.TIMEOUT: 4}
EXIT_PLANNING = 2
EXIT_USAGE = 1


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", default=None,
                        help="scenario file, or 'benchmark' for the bundled one (default)")
    common.add_argument("--track", type=Path, help="override the scenario's track file")
    common.add_argument("--start", type=_floats, help="x,y,heading")
    common.add_argument("--goal", type=_floats, help="x,y")
    common.add_argument("--strategy", choices=[s.value for s in Strategy])
    common.add_argument("--coeff", choices=["turn", "distance"])
    common.add_argument("--blend", choices=["speed", "both"])
    common.add_argument("--turn-distance", type=float)
    common.add_argument("--dt", type=float)
    common.add_argument("--out-dir", type=Path)
    common.add_argument("--seedless", action="store_true",
                        help="accepted for scripting symmetry; runs are always deterministic")

    parser = argparse.ArgumentParser(prog="arbiter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("plan", parents=[common], help="print the driving instructions")
    sub.add_parser("simulate", parents=[common], help="run one strategy and write telemetry")
    sub.add_parser("compare", parents=[common], help="run all four strategies")
    return parser


def _scenario(args: argparse.Namespace) -> Scenario:
    if args.scenario is None and args.track is not None:
        if args.start is None or args.goal is None:
            raise ScenarioError("--track without --scenario needs --start and --goal")
        sc = Scenario(args.track, args.start, args.goal)
    else:
        sc = load_scenario(args.scenario or "benchmark")
        if args.track is not None:
            sc.track_path = args.track
    if args.start is not None:
        if len(args.start) != 3:
            raise ScenarioError("--start expects x,y,heading")
        sc.start = args.start
    if args.goal is not None:
        if len(args.goal) != 2:
            raise ScenarioError("--goal expects x,y")
        sc.goal = args.goal
    overrides = {
        "strategy": args.strategy,
        "coefficient_mode": args.coeff,
        "blend_mode": args.blend,
        "turn_distance": None if args.turn_distance is None else repr(args.turn_distance),
    }
    sc.selector.update({k: v for k, v in overrides.items() if v is not None})
    if args.dt is not None:
        sc.sim["dt"] = repr(args.dt)
    if args.out_dir is not None:
        sc.out_dir = args.out_dir
    return sc


def _out_dir(sc: Scenario) -> Path:
    out = sc.out_dir or Path(os.environ.get("ARBITER_OUT", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_artifacts(outcome: RunOutcome, out: Path) -> None:
    stem = f"run_{outcome.strategy}"
    (out / f"{stem}.csv").write_bytes(metrics.emit_csv(outcome))
    (out / f"{stem}.svg").write_text(metrics.emit_chart(outcome), encoding="utf-8")


def cmd_plan(sc: Scenario) -> int:
    prepared = prepare(sc)
    for i, instr in enumerate(prepared.route.instructions):
        print(f"{i} {instr.kind.value} at {instr.anchor_arc:.3f}m")
    return 0


def _run(sc: Scenario, strategy: Strategy | None = None) -> RunOutcome:
    if strategy is not None:
        sc.selector["strategy"] = strategy.value
    p = prepare(sc)
    return run_simulation(p.track, p.route, p.selector, p.behavior, p.vehicle, p.sim, p.start)


def cmd_simulate(sc: Scenario) -> int:
    outcome = _run(sc)
    _write_artifacts(outcome, _out_dir(sc))
    s = metrics.summarize(outcome)
    print(f"strategy: {s.strategy}")
    print(f"outcome: {s.outcome.value}")
    print(f"completion_time: {s.completion_time:.2f} s")
    print(f"mean_squared_speed_error: {s.mean_squared_speed_error:.4f}")
    print(f"peak_squared_speed_error: {s.peak_squared_speed_error:.4f}")
    print(f"mean_controllers_per_tick: {s.mean_controllers_per_tick:.3f}")
    print(f"switches: {len(s.switch_times)}")
    return EXIT_CODES[outcome.status]


def cmd_compare(sc: Scenario) -> int:
    out = _out_dir(sc)
    summaries = []
    for strategy in Strategy:
        outcome = _run(sc, strategy)
        _write_artifacts(outcome, out)
        summaries.append(metrics.summarize(outcome))
    table = metrics.emit_comparison(summaries)
    (out / "comparison.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return 0


COMMANDS = {"plan": cmd_plan, "simulate": cmd_simulate, "compare": cmd_compare}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = _scenario(args)
        return COMMANDS[args.command](sc)
    except PlanningError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PLANNING
    except (ScenarioError, TrackError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
