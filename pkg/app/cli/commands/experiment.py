"""
experiment command: run one of the simulation studies and write its tables.

    accuracy → accuracy.csv, accuracy_runs.csv, accuracy_summary.json
    duration → duration.csv, duration_runs.csv, duration_summary.json
    drift    → drift.csv, drift_summary.json
"""

import argparse
from pathlib import Path
from typing import Callable, Dict, List

from app.cli.common import add_scenario_overrides, emit, scenario_from_args
from app.core.logging_config import get_logger
from app.io.reports import write_json, write_table
from app.models.scenario import Scenario
from app.services import experiments

logger = get_logger(__name__)

ACCURACY_COLUMNS = [
    "sensor_id",
    "mean_dt_ms",
    "std_dt_ms",
    "min_dt_ms",
    "max_dt_ms",
    "mean_k",
    "std_k",
    "mean_r2",
    "std_r2",
    "n_runs",
    "skewness",
]
RUN_COLUMNS = [
    "repetition",
    "sensor_id",
    "duration_s",
    "n_hits",
    "t_meas_s",
    "t_calc_s",
    "dt_ms",
    "r2_time",
    "failure",
]
DURATION_COLUMNS = [
    "duration_s",
    "n_runs",
    "n_failures",
    "mean_hits",
    "std_hits",
    "mean_dt_ms",
    "std_dt_ms",
    "mean_r2",
]
DRIFT_COLUMNS = [
    "sensor_id",
    "event",
    "reference_time_s",
    "event_time_local_s",
    "deviation_ms",
]


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("experiment", help="Run a simulation study")
    parser.add_argument("name", choices=sorted(EXPERIMENTS), help="Study to run")
    parser.add_argument("scenario", type=Path, help="Scenario JSON file")
    parser.add_argument("--out", type=Path, required=True, help="Output directory")
    parser.add_argument(
        "--repetitions",
        type=int,
        default=None,
        help="Repetitions (accuracy: 200, duration: 10 per duration)",
    )
    parser.add_argument(
        "--durations",
        type=float,
        nargs="+",
        default=None,
        help="Procedure durations in seconds for the duration study (default 1..30)",
    )
    parser.add_argument("--sensors", type=int, default=8, help="Fleet size of the drift study")
    parser.add_argument("--interval", type=float, default=300.0, help="Drift study interval, s")
    parser.add_argument("--total", type=float, default=3600.0, help="Drift study length, s")
    parser.add_argument(
        "--trigger-delay", type=float, default=0.0, help="Drift study trigger delay, s"
    )
    parser.add_argument("--workers", type=int, default=None, help="Worker threads")
    add_scenario_overrides(parser)
    parser.set_defaults(handler=run)


def _accuracy(scenario: Scenario, args: argparse.Namespace) -> List[Path]:
    report = experiments.experiment_accuracy(
        scenario, repetitions=args.repetitions or 200, workers=args.workers
    )
    rows = [stats.to_row() for stats in report.per_sensor] + [report.overall.to_row()]
    summary = report.to_dict()
    summary["accuracy_bound_ms"] = (
        experiments.accuracy_bound(report.overall, scenario.adc_rate) * 1e3
    )
    summary["seed"] = scenario.seed
    return [
        write_table(args.out / "accuracy.csv", rows, ACCURACY_COLUMNS),
        write_table(
            args.out / "accuracy_runs.csv", [run.to_row() for run in report.runs], RUN_COLUMNS
        ),
        write_json(args.out / "accuracy_summary.json", summary),
    ]


def _duration(scenario: Scenario, args: argparse.Namespace) -> List[Path]:
    report = experiments.experiment_duration(
        scenario,
        durations=args.durations,
        reps_per_duration=args.repetitions or 10,
        workers=args.workers,
    )
    summary = report.to_dict()
    summary["seed"] = scenario.seed
    return [
        write_table(
            args.out / "duration.csv", [row.to_row() for row in report.rows], DURATION_COLUMNS
        ),
        write_table(
            args.out / "duration_runs.csv", [run.to_row() for run in report.runs], RUN_COLUMNS
        ),
        write_json(args.out / "duration_summary.json", summary),
    ]


def _drift(scenario: Scenario, args: argparse.Namespace) -> List[Path]:
    records = experiments.experiment_drift(
        scenario,
        n_sensors=args.sensors,
        interval=args.interval,
        total=args.total,
        trigger_delay=args.trigger_delay,
        workers=args.workers,
    )
    rows = [row for record in records for row in record.to_rows()]
    summary = {"seed": scenario.seed, "sensors": [record.to_dict() for record in records]}
    return [
        write_table(args.out / "drift.csv", rows, DRIFT_COLUMNS),
        write_json(args.out / "drift_summary.json", summary),
    ]


EXPERIMENTS: Dict[str, Callable[[Scenario, argparse.Namespace], List[Path]]] = {
    "accuracy": _accuracy,
    "duration": _duration,
    "drift": _drift,
}


def run(args: argparse.Namespace) -> int:
    scenario = scenario_from_args(args)
    written = EXPERIMENTS[args.name](scenario, args)
    logger.info("Experiment written", name=args.name, out=str(args.out))
    emit({"experiment": args.name, "out": str(args.out), "files": sorted(p.name for p in written)})
    return 0
