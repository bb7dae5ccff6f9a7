"""
Alignment Model

This module defines the sync-event pair recorded per sensor and the affine
map t_ref = a·t_local + b built from two such pairs.
"""

from dataclasses import dataclass
from typing import Any, Dict

from app.core.errors import AlignmentError, ReasonCode


@dataclass(frozen=True)
class SyncEventPair:
    """Start times of the first and second synchronisation procedure."""

    sensor_id: str
    t0_first: float
    t0_second: float

    def __post_init__(self) -> None:
        if not self.t0_second > self.t0_first:
            raise AlignmentError(
                f"Second sync event of {self.sensor_id!r} must follow the first",
                reason=ReasonCode.NON_POSITIVE_INTERVAL,
                context={"sensor_id": self.sensor_id},
            )

    @property
    def interval(self) -> float:
        return self.t0_second - self.t0_first

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sensor_id": self.sensor_id,
            "t0_first": self.t0_first,
            "t0_second": self.t0_second,
        }


@dataclass(frozen=True)
class AlignmentMap:
    """Affine map from a sensor's local time onto the reference timeline."""

    sensor_id: str
    a: float
    b: float

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise AlignmentError(
                f"Alignment scale must be positive, got {self.a}",
                reason=ReasonCode.NON_POSITIVE_INTERVAL,
                context={"sensor_id": self.sensor_id},
            )

    @classmethod
    def identity(cls, sensor_id: str) -> "AlignmentMap":
        return cls(sensor_id=sensor_id, a=1.0, b=0.0)

    def is_sane(self, tolerance: float) -> bool:
        """True when the implied relative drift stays within tolerance."""
        return abs(self.a - 1.0) < tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {"sensor_id": self.sensor_id, "a": self.a, "b": self.b}
