"""
simulate command: one synchronisation procedure from a scenario file.
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
from app.services.simulator import check_scenario, run_sync_procedure

logger = get_logger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "simulate",
        help="Simulate one synchronisation procedure",
        description="Write one CSV per sensor, the ADC channel and groundtruth.json.",
    )
    parser.add_argument("scenario", type=Path, help="Scenario JSON file")
    parser.add_argument("--out", type=Path, required=True, help="Output directory")
    add_scenario_overrides(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    scenario = scenario_from_args(args)
    beats = check_scenario(scenario)
    output = run_sync_procedure(scenario, check=False)

    written = write_procedure(output, args.out)
    written.append(write_json(args.out / SCENARIO_FILE, scenario.to_dict()))
    logger.info("Simulation written", out=str(args.out), n_files=len(written))

    emit(
        {
            "out": str(args.out),
            "files": sorted(p.name for p in written),
            "t0_true": output.ground_truth.t0_true,
            "beat": {sid: report.to_dict() for sid, report in beats.items()},
        }
    )
    return 0
