"""
Estimate Model

This module defines the estimator's intermediate and final results:
baselines, hits, first-order fits, the SyncEstimate and its quality report.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional


class QualityWarning(str, Enum):
    """Quality flags raised by sync_quality."""

    BELOW_RECOMMENDED_DURATION = "below-recommended-duration"
    NEAR_SATURATION_HIT = "near-saturation-hit"


@dataclass(frozen=True)
class BaselineEstimate:
    """Flux levels before (b_low) and after (b_high) a transient response."""

    b_low: float
    b_high: float
    noise_sigma_hat: float

    @property
    def K(self) -> float:
        return self.b_high - self.b_low

    def to_dict(self) -> Dict[str, Any]:
        return {
            "b_low": self.b_low,
            "b_high": self.b_high,
            "K": self.K,
            "noise_sigma_hat": self.noise_sigma_hat,
        }


@dataclass(frozen=True)
class Hit:
    """A sample acquired during a rising transient response."""

    t: float  # local seconds
    k: float  # tesla above b_low
    index: Optional[int] = None  # response index i, 1-based

    def with_index(self, index: int) -> "Hit":
        return replace(self, index=int(index))

    def to_dict(self) -> Dict[str, Any]:
        return {"i": self.index, "t": self.t, "k": self.k}


@dataclass(frozen=True)
class FitResult:
    """First-order least-squares fit y = slope·x + intercept."""

    slope: float
    intercept: float
    r_squared: float
    n_points: int

    def at(self, x: float) -> float:
        return float(self.slope * x + self.intercept)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "theta1": self.slope,
            "theta2": self.intercept,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
        }


@dataclass(frozen=True)
class SyncEstimate:
    """
    Estimated start t0 of one synchronisation procedure, in local time.

    t0 = t1_hat − t_TR, where t1_hat and k1_hat are the time and flux fits
    evaluated on the first transient response.
    """

    sensor_id: str
    t1_hat: float
    k1_hat: float
    t_TR: float
    t0: float
    time_fit: FitResult
    flux_fit: FitResult
    baseline: BaselineEstimate
    tau: float
    hits: List[Hit] = field(default_factory=list)

    @property
    def n_hits(self) -> int:
        return len(self.hits)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sensor_id": self.sensor_id,
            "t0": self.t0,
            "t1_hat": self.t1_hat,
            "k1_hat": self.k1_hat,
            "t_TR": self.t_TR,
            "tau": self.tau,
            "n_hits": self.n_hits,
            "time_fit": self.time_fit.to_dict(),
            "flux_fit": self.flux_fit.to_dict(),
            "baseline": self.baseline.to_dict(),
            "hits": [hit.to_dict() for hit in self.hits],
        }


@dataclass(frozen=True)
class QualityReport:
    """Quality metrics of one SyncEstimate."""

    n_hits: int
    r2_time: float
    r2_flux: float
    ttr_over_tau: float
    hit_spacing: Optional[float]
    warnings: List[QualityWarning] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.warnings

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_hits": self.n_hits,
            "r2_time": self.r2_time,
            "r2_flux": self.r2_flux,
            "ttr_over_tau": self.ttr_over_tau,
            "hit_spacing_s": self.hit_spacing,
            "warnings": [w.value for w in self.warnings],
        }
