"""
align command: per-sensor alignment maps from two sync estimates.

Inputs are estimate documents written by `sync` (single estimate or
directory form). With only one event, or for a sensor missing from the
second event, an offset-only map with a=1 is emitted and a single-event
warning is reported.
"""

import argparse
from pathlib import Path
from typing import Any, Dict, List, Optional

from app.cli.common import emit
from app.core.errors import AlignmentError, MagSyncError, ReasonCode
from app.core.logging_config import get_logger
from app.io.reports import read_json
from app.io.series_file import read_series, write_series
from app.models.alignment import AlignmentMap, SyncEventPair
from app.services.align import align_fleet, apply_alignment, build_offset_alignment

logger = get_logger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("align", help="Build alignment maps from two sync events")
    parser.add_argument("first", type=Path, help="Estimates of the first procedure (JSON)")
    parser.add_argument(
        "second", type=Path, nargs="?", default=None, help="Estimates of the second procedure"
    )
    parser.add_argument("--reference", default=None, help="Reference sensor id")
    parser.add_argument(
        "--external",
        type=float,
        nargs=2,
        metavar=("T_FIRST", "T_SECOND"),
        default=None,
        help="Align onto an external clock's timestamps of both events instead",
    )
    parser.add_argument("--out", type=Path, default=None, help="Output JSON (default: stdout)")
    parser.add_argument("--series", type=Path, default=None, help="Directory of series to rewrite")
    parser.add_argument("--series-out", type=Path, default=None, help="Rewritten series directory")
    parser.set_defaults(handler=run)


def load_event_times(path: Path) -> Dict[str, float]:
    """sensor_id → t0 from an estimate document."""
    document = read_json(path)
    try:
        entries = document["estimates"] if "estimates" in document else [document]
        return {str(entry["sensor_id"]): float(entry["t0"]) for entry in entries}
    except (KeyError, TypeError, ValueError) as e:
        raise MagSyncError(
            f"Not an estimate document: {path}",
            reason=ReasonCode.INVALID_ARGUMENT,
            context={"path": str(path)},
        ) from e


def build_maps(
    first: Dict[str, float],
    second: Optional[Dict[str, float]],
    reference_id: Optional[str],
    external: Optional[SyncEventPair] = None,
) -> tuple:
    """Alignment maps for every sensor of the first event, plus warnings."""
    warnings: List[Dict[str, Any]] = []
    if external is None and reference_id not in first:
        raise AlignmentError(
            f"Unknown reference sensor {reference_id!r}",
            reason=ReasonCode.UNKNOWN_REFERENCE,
            context={"reference_id": reference_id, "sensor_ids": sorted(first)},
        )

    second = second or {}
    if external is None and reference_id not in second:
        two_event: List[str] = []
    else:
        two_event = [sid for sid in sorted(first) if sid in second]

    pairs = [SyncEventPair(sid, first[sid], second[sid]) for sid in two_event]
    maps: Dict[str, AlignmentMap] = {}
    if pairs:
        for mapping in align_fleet(pairs, reference_id, external_reference=external):
            maps[mapping.sensor_id] = mapping

    reference_t0 = external.t0_first if external is not None else first[reference_id]
    for sid in sorted(set(first) - set(maps)):
        maps[sid] = build_offset_alignment(sid, first[sid], reference_t0)
        warnings.append(
            {
                "sensor_id": sid,
                "warning": ReasonCode.SINGLE_EVENT.value,
                "message": "single-event: offset-only map emitted with a=1",
            }
        )
        logger.warning(
            "Offset-only alignment", sensor_id=sid, reason=ReasonCode.SINGLE_EVENT.value
        )
    return [maps[sid] for sid in sorted(maps)], warnings


def _rewrite_series(maps: List[AlignmentMap], source: Path, target: Path) -> List[str]:
    by_id = {mapping.sensor_id: mapping for mapping in maps}
    written = []
    for path in sorted(source.glob("*.csv")):
        series = read_series(path)
        mapping = by_id.get(series.sensor_id)
        if mapping is None:
            logger.warning("No alignment map for series", path=str(path))
            continue
        write_series(apply_alignment(mapping, series), target / path.name)
        written.append(path.name)
    return written


def run(args: argparse.Namespace) -> int:
    external = None
    if args.external is not None:
        external = SyncEventPair("external", args.external[0], args.external[1])

    first = load_event_times(args.first)
    second = load_event_times(args.second) if args.second is not None else None
    maps, warnings = build_maps(first, second, args.reference, external)

    document: Dict[str, Any] = {
        "reference_id": "external" if external is not None else args.reference,
        "maps": [mapping.to_dict() for mapping in maps],
        "warnings": warnings,
    }
    if args.series is not None:
        target = args.series_out or args.series.parent / f"{args.series.name}_aligned"
        document["rewritten"] = _rewrite_series(maps, args.series, target)

    emit(document, args.out)
    return 0
