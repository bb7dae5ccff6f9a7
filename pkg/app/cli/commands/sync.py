"""
sync command: estimate the procedure start t0 from magnetometer series.

A single series file yields one estimate document. A directory yields
{"estimates": [...], "failures": [...]} over all its magnetometer series;
any rejected series makes the command exit with status 2.
"""

import argparse
from pathlib import Path
from typing import Any, Dict, List

from app.cli.common import emit
from app.core.errors import EstimationError, MagSyncError, ReasonCode
from app.core.logging_config import get_logger, log_error
from app.io.scenario_file import load_scenario
from app.io.series_file import list_series, read_series
from app.models.inductor import InductorSpec
from app.models.scenario import DEFAULT_DRIVE_FREQ_HZ
from app.models.series import Channel, SampleSeries
from app.services.sync_core import estimate_t0, sync_quality

logger = get_logger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("sync", help="Estimate t0 from magnetometer series")
    parser.add_argument("series", type=Path, help="Series CSV file or simulation directory")
    parser.add_argument("--out", type=Path, default=None, help="Output JSON (default: stdout)")
    parser.add_argument(
        "--scenario",
        type=Path,
        default=None,
        help="Take inductor and drive frequency from a scenario file",
    )
    default = InductorSpec.default()
    parser.add_argument(
        "--L",
        dest="inductance",
        type=float,
        default=None,
        help=f"Inductance in henry (default {default.inductance})",
    )
    parser.add_argument(
        "--R",
        dest="resistance",
        type=float,
        default=None,
        help=f"Resistance in ohm (default {default.resistance})",
    )
    parser.add_argument(
        "--drive-freq",
        dest="drive_freq",
        type=float,
        default=None,
        help=f"Drive frequency in Hz (default {DEFAULT_DRIVE_FREQ_HZ})",
    )
    parser.set_defaults(handler=run)


def _drive_parameters(args: argparse.Namespace) -> tuple:
    if args.scenario is not None:
        scenario = load_scenario(
            args.scenario,
            inductance=args.inductance,
            resistance=args.resistance,
            drive_freq=args.drive_freq,
        )
        return scenario.inductor, scenario.drive_freq

    default = InductorSpec.default()
    inductor = InductorSpec(
        inductance=args.inductance if args.inductance is not None else default.inductance,
        resistance=args.resistance if args.resistance is not None else default.resistance,
    )
    drive_freq = args.drive_freq if args.drive_freq is not None else DEFAULT_DRIVE_FREQ_HZ
    return inductor, drive_freq


def estimate_document(
    series: SampleSeries, inductor: InductorSpec, drive_freq: float
) -> Dict[str, Any]:
    """Estimate plus quality report as one JSON-ready dict."""
    if series.channel != Channel.MAGNETOMETER:
        raise EstimationError(
            "The estimator needs a magnetometer series",
            reason=ReasonCode.INVALID_ARGUMENT,
            context={"sensor_id": series.sensor_id, "channel": series.channel.value},
        )
    estimate = estimate_t0(series, inductor, drive_freq)
    quality = sync_quality(estimate).to_dict()
    document = estimate.to_dict()
    document["quality"] = quality
    document["warnings"] = quality["warnings"]
    return document


def run(args: argparse.Namespace) -> int:
    inductor, drive_freq = _drive_parameters(args)

    if not args.series.is_dir():
        document = estimate_document(read_series(args.series), inductor, drive_freq)
        logger.info("Series synchronised", sensor_id=document["sensor_id"], t0=document["t0"])
        emit(document, args.out)
        return 0

    estimates: List[Dict[str, Any]] = []
    failures: List[Dict[str, Any]] = []
    for path in list_series(args.series):
        try:
            estimates.append(estimate_document(read_series(path), inductor, drive_freq))
        except MagSyncError as e:
            log_error(e, {"path": str(path)}, level="warning")
            failures.append({"file": path.name, **e.to_dict()})

    emit({"estimates": estimates, "failures": failures}, args.out)
    logger.info("Directory synchronised", n_estimates=len(estimates), n_failures=len(failures))
    return 2 if failures or not estimates else 0
