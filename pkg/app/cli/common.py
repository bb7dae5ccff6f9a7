"""
Shared CLI helpers: scenario flags, output of simulated procedures and
result documents.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, List, Optional

from app.io.reports import dumps_json, write_json
from app.io.scenario_file import load_scenario
from app.io.series_file import series_filename, write_series
from app.models.scenario import Scenario, SyncProcedureOutput

GROUND_TRUTH_FILE = "groundtruth.json"
SCENARIO_FILE = "scenario.json"


def add_scenario_overrides(parser: argparse.ArgumentParser) -> None:
    """Flags that override scenario-file values."""
    parser.add_argument("--seed", type=int, default=None, help="Override the master seed")
    parser.add_argument(
        "--L", dest="inductance", type=float, default=None, help="Inductance in henry"
    )
    parser.add_argument(
        "--R", dest="resistance", type=float, default=None, help="Resistance in ohm"
    )
    parser.add_argument(
        "--drive-freq", dest="drive_freq", type=float, default=None, help="Drive frequency in Hz"
    )


def scenario_from_args(args: argparse.Namespace) -> Scenario:
    return load_scenario(
        args.scenario,
        seed=args.seed,
        inductance=args.inductance,
        resistance=args.resistance,
        drive_freq=args.drive_freq,
    )


def write_procedure(output: SyncProcedureOutput, directory: Path) -> List[Path]:
    """Write every series of one procedure plus its ground truth."""
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for sensor_id in sorted(output.magnetometer):
        series = output.magnetometer[sensor_id]
        written.append(write_series(series, directory / series_filename(series)))
    if output.adc is not None:
        written.append(write_series(output.adc, directory / series_filename(output.adc)))
    written.append(write_json(directory / GROUND_TRUTH_FILE, output.ground_truth.to_dict()))
    return written


def emit(payload: Any, out: Optional[Path] = None) -> None:
    """Write a JSON document to `out`, or to stdout when no path is given."""
    if out is not None:
        write_json(out, payload)
    else:
        sys.stdout.write(dumps_json(payload).decode("utf-8"))
