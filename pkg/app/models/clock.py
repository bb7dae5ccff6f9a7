"""
Clock Model

This module defines the ClockModel describing how a sensor's local clock
runs against true time: constant offset, linear drift, an optional quadratic
term and per-sample timestamp jitter.
"""

from dataclasses import dataclass, replace
from typing import Any, Dict

from app.core.errors import ClockError, ReasonCode

PPM = 1e-6
PPB = 1e-9

MAX_DRIFT = 1e-3
MAX_QUAD_EXCURSION = 1e-4


@dataclass(frozen=True)
class ClockModel:
    """
    Local time = offset + (1 + drift)·t + quad·t² for true time t.

    The quadratic term exists for robustness tests only. `horizon` bounds the
    session length over which the mapping must stay strictly increasing.
    """

    offset: float = 0.0  # seconds
    drift: float = 0.0  # dimensionless
    quad: float = 0.0  # 1/seconds
    jitter_sigma: float = 0.0  # seconds
    horizon: float = 86400.0  # seconds

    def __post_init__(self) -> None:
        if abs(self.drift) >= MAX_DRIFT:
            raise ClockError(
                f"Clock drift {self.drift} must satisfy |drift| < {MAX_DRIFT}",
                reason=ReasonCode.NON_MONOTONE_CLOCK,
                context={"field": "drift"},
            )
        if self.horizon <= 0:
            raise ClockError(
                "Clock horizon must be positive",
                reason=ReasonCode.NON_MONOTONE_CLOCK,
                context={"field": "horizon"},
            )
        if abs(self.quad) * self.horizon >= MAX_QUAD_EXCURSION:
            raise ClockError(
                f"Quadratic term {self.quad} is too large for a {self.horizon} s horizon",
                reason=ReasonCode.NON_MONOTONE_CLOCK,
                context={"field": "quad"},
            )
        if self.jitter_sigma < 0:
            raise ClockError(
                "Jitter sigma must be non-negative",
                reason=ReasonCode.JITTER_TOO_LARGE,
                context={"field": "jitter_sigma"},
            )

    @classmethod
    def from_ppm(
        cls,
        offset: float = 0.0,
        drift_ppm: float = 0.0,
        quad: float = 0.0,
        jitter_sigma: float = 0.0,
    ) -> "ClockModel":
        """Build a clock from a drift given in parts per million."""
        return cls(offset=offset, drift=drift_ppm * PPM, quad=quad, jitter_sigma=jitter_sigma)

    @classmethod
    def disciplined(cls, stability_ppb: float = 1.0) -> "ClockModel":
        """A GPS-disciplined drive clock with the given stability."""
        return cls(drift=stability_ppb * PPB)

    @property
    def drift_ppm(self) -> float:
        return self.drift / PPM

    @property
    def is_linear(self) -> bool:
        return self.quad == 0.0

    def without_jitter(self) -> "ClockModel":
        return replace(self, jitter_sigma=0.0)

    def to_dict(self) -> Dict[str, Any]:
        """Serialize using the scenario-file keys."""
        return {
            "offset_s": self.offset,
            "drift_ppm": self.drift_ppm,
            "quad": self.quad,
            "jitter_s": self.jitter_sigma,
        }
