"""``mna validate|plan|run|compare <file>``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from . import report
from .entries import DEFAULT_INDICATOR, RESERVED_LABEL_MAX
from .errors import PlanningError
from .planner import Strategy, plan
from .scenario import ScenarioError, load_scenario
from .simulator import Scenario, compare, run

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def indicator_from_env() -> int:
    raw = os.environ.get("MNA_INDICATOR")
    if raw is None:
        return DEFAULT_INDICATOR
    value = int(raw, 0)
    if not 0 <= value <= RESERVED_LABEL_MAX:
        raise ValueError(f"MNA_INDICATOR must be a reserved label 0-{RESERVED_LABEL_MAX}, got {value}")
    return value


def _write_json(path: str | None, document) -> None:
    if path is None:
        return
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load(args, out) -> Scenario | None:
    try:
        scenario = load_scenario(args.file, args.indicator)
    except ScenarioError as exc:
        for err in exc.errors:
            print(f"{args.file}: {err}", file=out)
        return None
    if getattr(args, "strategy", None):
        scenario = replace(scenario, strategy=Strategy(args.strategy))
    return scenario


def cmd_validate(args, out) -> int:
    if _load(args, out) is None:
        return EXIT_FAIL
    print("ok", file=out)
    return EXIT_OK


def cmd_plan(args, out) -> int:
    scenario = _load(args, out)
    if scenario is None:
        return EXIT_USAGE
    if scenario.strategy is Strategy.EXPLICIT:
        print("explicit scenarios carry their own stack; nothing to plan", file=out)
        return EXIT_FAIL
    try:
        result = plan(scenario.path, scenario.requests, scenario.strategy, scenario.indicator)
    except PlanningError as exc:
        print(f"infeasible: {exc}", file=out)
        _write_json(args.json, {"error": str(exc), "node": exc.node_id, "deficit": exc.deficit})
        return EXIT_FAIL
    out.write(report.render_plan(result))
    _write_json(args.json, report.plan_json(result))
    return EXIT_OK


def cmd_run(args, out) -> int:
    scenario = _load(args, out)
    if scenario is None:
        return EXIT_USAGE
    try:
        result = run(scenario)
    except PlanningError as exc:
        print(f"infeasible: {exc}", file=out)
        _write_json(args.json, {"error": str(exc), "node": exc.node_id, "deficit": exc.deficit})
        return EXIT_FAIL
    out.write(report.render_run(result))
    _write_json(args.json, report.report_json(result))
    return EXIT_OK if result.delivered else EXIT_FAIL


def cmd_compare(args, out) -> int:
    scenario = _load(args, out)
    if scenario is None:
        return EXIT_USAGE
    try:
        result = compare(scenario)
    except PlanningError as exc:
        print(f"infeasible: {exc}", file=out)
        _write_json(args.json, {"error": str(exc), "node": exc.node_id, "deficit": exc.deficit})
        return EXIT_FAIL
    out.write(report.render_comparison(result))
    _write_json(args.json, report.comparison_json(result))
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "plan": cmd_plan, "run": cmd_run, "compare": cmd_compare}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mna", description="MPLS network action stack planner and simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("file", help="scenario file")
        p.add_argument("--json", metavar="PATH", help="write a machine-readable report")
        p.add_argument("--strategy", choices=["baseline", "preserving"],
                       help="override the scenario's strategy")
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        args.indicator = indicator_from_env()
    except ValueError as exc:
        print(f"error: {exc}", file=out)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except OSError as exc:
        print(f"error: {exc}", file=out)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
