"""
session command: a measurement session bracketed by two procedures.

Writes event1/ and event2/, each laid out like the output of `simulate`,
plus session.json.
"""

import argparse
from pathlib import Path

from app.cli.common import (
    SCENARIO_FILE,
    add_scenario_overrides,
    emit,
    scenario_from_args,
    write_procedure,
)
from app.core.logging_config import get_logger
from app.io.reports import write_json
from app.services.simulator import run_session

logger = get_logger(__name__)

SESSION_FILE = "session.json"


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("session", help="Simulate a two-event session")
    parser.add_argument("scenario", type=Path, help="Scenario JSON file")
    parser.add_argument("--out", type=Path, required=True, help="Output directory")
    parser.add_argument(
        "--gap",
        type=float,
        default=3600.0,
        help="Seconds between the end of the first and the start of the second procedure",
    )
    add_scenario_overrides(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    scenario = scenario_from_args(args)
    output = run_session(scenario, args.gap)

    write_procedure(output.first, args.out / "event1")
    write_procedure(output.second, args.out / "event2")
    write_json(args.out / SCENARIO_FILE, scenario.to_dict())
    summary = {
        "gap_duration_s": output.gap_duration,
        "t0_true_first": output.first.ground_truth.t0_true,
        "t0_true_second": output.second.ground_truth.t0_true,
        "sensor_ids": scenario.sensor_ids,
    }
    write_json(args.out / SESSION_FILE, summary)
    logger.info("Session written", out=str(args.out), gap=args.gap)

    emit({"out": str(args.out), **summary})
    return 0
