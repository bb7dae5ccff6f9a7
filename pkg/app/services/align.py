"""
Alignment Service

This module builds and applies per-sensor affine time maps
t_ref = a·t_local + b from the start times of two synchronisation
procedures, compensating offset and the linear part of the clock drift.
"""

from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from app.core.config import settings
from app.core.errors import AlignmentError, ReasonCode
from app.core.logging_config import get_logger
from app.models.alignment import AlignmentMap, SyncEventPair
from app.models.series import SampleSeries

logger = get_logger(__name__)

ArrayLike = Union[float, np.ndarray]


def build_alignment(sensor: SyncEventPair, reference: SyncEventPair) -> AlignmentMap:
    """
    Two-point affine map sending the sensor's event times onto the reference's.

    Args:
        sensor: Sync event pair in the sensor's local time
        reference: Sync event pair on the reference timeline

    Returns:
        AlignmentMap with a = ref interval / sensor interval, b = ref.t0_first − a·sen.t0_first
    """
    a = reference.interval / sensor.interval
    b = reference.t0_first - a * sensor.t0_first
    return AlignmentMap(sensor_id=sensor.sensor_id, a=a, b=b)


def build_offset_alignment(
    sensor_id: str, sensor_t0: float, reference_t0: float
) -> AlignmentMap:
    """Offset-only map from a single sync event (no drift compensation)."""
    return AlignmentMap(sensor_id=sensor_id, a=1.0, b=reference_t0 - sensor_t0)


def map_time(mapping: AlignmentMap, t_local: ArrayLike) -> ArrayLike:
    """Map local timestamp(s) onto the reference timeline."""
    t = np.asarray(t_local, dtype=float)
    mapped = mapping.a * t + mapping.b
    return float(mapped) if np.ndim(mapped) == 0 else mapped


def apply_alignment(mapping: AlignmentMap, series: SampleSeries) -> SampleSeries:
    """Return the series with every timestamp mapped; values are untouched."""
    return series.with_times(np.asarray(map_time(mapping, series.times)))


def invert_alignment(mapping: AlignmentMap) -> AlignmentMap:
    """Map from the reference timeline back onto the sensor's local time."""
    return AlignmentMap(
        sensor_id=mapping.sensor_id,
        a=1.0 / mapping.a,
        b=-mapping.b / mapping.a,
    )


def compose_alignment(first: AlignmentMap, second: AlignmentMap) -> AlignmentMap:
    """Map that applies first, then second (A→B then B→C gives A→C)."""
    return AlignmentMap(
        sensor_id=first.sensor_id,
        a=second.a * first.a,
        b=second.a * first.b + second.b,
    )


def align_fleet(
    events: Sequence[SyncEventPair],
    reference_id: Optional[str] = None,
    external_reference: Optional[SyncEventPair] = None,
    scale_tolerance: Optional[float] = None,
) -> List[AlignmentMap]:
    """
    One alignment map per sensor onto a reference.

    The reference is either one of the sensors (its own map is the identity)
    or an external clock's sync event pair.

    Args:
        events: One sync event pair per sensor
        reference_id: Sensor whose timeline is the reference
        external_reference: Event pair timestamped by an external clock
        scale_tolerance: |a − 1| above which a warning is logged (ALIGN_SCALE_TOLERANCE)

    Returns:
        Maps in the order of events

    Raises:
        AlignmentError: unknown-reference, or duplicate sensor ids
    """
    tolerance = scale_tolerance if scale_tolerance is not None else settings.ALIGN_SCALE_TOLERANCE

    by_id: Dict[str, SyncEventPair] = {}
    for pair in events:
        if pair.sensor_id in by_id:
            raise AlignmentError(
                f"Duplicate sync events for sensor {pair.sensor_id!r}",
                reason=ReasonCode.INVALID_ARGUMENT,
                context={"sensor_id": pair.sensor_id},
            )
        by_id[pair.sensor_id] = pair

    if external_reference is not None:
        reference = external_reference
    elif reference_id is not None and reference_id in by_id:
        reference = by_id[reference_id]
    else:
        raise AlignmentError(
            f"Unknown reference sensor {reference_id!r}",
            reason=ReasonCode.UNKNOWN_REFERENCE,
            context={"reference_id": reference_id, "sensor_ids": sorted(by_id)},
        )

    maps = []
    for pair in events:
        if external_reference is None and pair.sensor_id == reference_id:
            mapping = AlignmentMap.identity(pair.sensor_id)
        else:
            mapping = build_alignment(pair, reference)
        if not mapping.is_sane(tolerance):
            logger.warning(
                "Alignment scale outside the expected clock range",
                sensor_id=mapping.sensor_id,
                a=mapping.a,
                tolerance=tolerance,
            )
        maps.append(mapping)

    logger.debug("Fleet aligned", n_sensors=len(maps), reference_id=reference_id)
    return maps
