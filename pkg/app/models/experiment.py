"""
Experiment Model

This module defines the result records of the accuracy, duration and
drift studies. Times are seconds internally; the `to_row()` helpers convert
to the milliseconds used in report tables.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from app.models.estimate import FitResult

SKEW_LIMIT = 0.5


@dataclass(frozen=True)
class DescriptiveStats:
    """Sample statistics of one list of values."""

    mean: float
    std: float
    min: float
    max: float
    skewness: float
    n: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mean": self.mean,
            "std": self.std,
            "min": self.min,
            "max": self.max,
            "skewness": self.skewness,
            "n": self.n,
        }


@dataclass(frozen=True)
class AccuracyStats:
    """Descriptive statistics of Δt = t_meas − t_calc, hit counts and time-fit R²."""

    mean_dt: float
    std_dt: float
    min_dt: float
    max_dt: float
    mean_k: float
    std_k: float
    mean_r2: float
    std_r2: float
    n_runs: int
    skewness: float
    sensor_id: Optional[str] = None

    @property
    def skew_ok(self) -> bool:
        return abs(self.skewness) < SKEW_LIMIT

    def to_row(self) -> Dict[str, Any]:
        """Table row in milliseconds."""
        return {
            "sensor_id": self.sensor_id or "all",
            "mean_dt_ms": self.mean_dt * 1e3,
            "std_dt_ms": self.std_dt * 1e3,
            "min_dt_ms": self.min_dt * 1e3,
            "max_dt_ms": self.max_dt * 1e3,
            "mean_k": self.mean_k,
            "std_k": self.std_k,
            "mean_r2": self.mean_r2,
            "std_r2": self.std_r2,
            "n_runs": self.n_runs,
            "skewness": self.skewness,
        }


@dataclass(frozen=True)
class RunRecord:
    """One estimator run inside an experiment."""

    repetition: int
    sensor_id: str
    n_hits: int
    t_meas: float
    t_calc: Optional[float] = None
    r2_time: Optional[float] = None
    failure: Optional[str] = None
    duration: Optional[float] = None

    @property
    def dt(self) -> Optional[float]:
        if self.t_calc is None:
            return None
        return self.t_meas - self.t_calc

    @property
    def ok(self) -> bool:
        return self.failure is None

    def to_row(self) -> Dict[str, Any]:
        return {
            "repetition": self.repetition,
            "sensor_id": self.sensor_id,
            "duration_s": self.duration,
            "n_hits": self.n_hits,
            "t_meas_s": self.t_meas,
            "t_calc_s": self.t_calc,
            "dt_ms": None if self.dt is None else self.dt * 1e3,
            "r2_time": self.r2_time,
            "failure": self.failure,
        }


@dataclass(frozen=True)
class AccuracyReport:
    """Outcome of the accuracy study."""

    overall: AccuracyStats
    per_sensor: List[AccuracyStats]
    runs: List[RunRecord]
    failures: Dict[str, int] = field(default_factory=dict)
    mean_hit_spacing: Optional[float] = None

    @property
    def dts(self) -> List[float]:
        return [run.dt for run in self.runs if run.dt is not None]

    @property
    def n_failures(self) -> int:
        return sum(self.failures.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "overall": self.overall.to_row(),
            "per_sensor": [stats.to_row() for stats in self.per_sensor],
            "failures": dict(sorted(self.failures.items())),
            "n_failures": self.n_failures,
            "mean_hit_spacing_s": self.mean_hit_spacing,
            "skew_ok": self.overall.skew_ok,
        }


@dataclass(frozen=True)
class DurationRow:
    """Hit and Δt statistics of one procedure duration."""

    duration: float
    n_runs: int
    n_failures: int
    mean_hits: float
    std_hits: float
    mean_dt: Optional[float]
    std_dt: Optional[float]
    mean_r2: Optional[float]

    def to_row(self) -> Dict[str, Any]:
        return {
            "duration_s": self.duration,
            "n_runs": self.n_runs,
            "n_failures": self.n_failures,
            "mean_hits": self.mean_hits,
            "std_hits": self.std_hits,
            "mean_dt_ms": None if self.mean_dt is None else self.mean_dt * 1e3,
            "std_dt_ms": None if self.std_dt is None else self.std_dt * 1e3,
            "mean_r2": self.mean_r2,
        }


@dataclass(frozen=True)
class DurationReport:
    """Outcome of the duration study."""

    rows: List[DurationRow]
    runs: List[RunRecord]
    hits_regression: Optional[FitResult]  # None with fewer than three durations
    std_dt_few_hits: Optional[float]  # runs with 15-20 hits
    std_dt_many_hits: Optional[float]  # runs with more than 20 hits
    recommended_duration: Optional[float]

    @property
    def relative_improvement(self) -> Optional[float]:
        """Relative std_dt reduction from the 15-20 group to the >20 group."""
        if not self.std_dt_few_hits or self.std_dt_many_hits is None:
            return None
        return 1.0 - self.std_dt_many_hits / self.std_dt_few_hits

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_durations": len(self.rows),
            "hits_regression": None
            if self.hits_regression is None
            else self.hits_regression.to_dict(),
            "std_dt_15_20_hits_ms": None
            if self.std_dt_few_hits is None
            else self.std_dt_few_hits * 1e3,
            "std_dt_over_20_hits_ms": None
            if self.std_dt_many_hits is None
            else self.std_dt_many_hits * 1e3,
            "relative_improvement": self.relative_improvement,
            "recommended_duration_s": self.recommended_duration,
        }


@dataclass(frozen=True)
class DriftRecord:
    """
    Deviation of one sensor's clock from the reference over periodic sync events.

    Events whose estimate was rejected are counted in `n_failed_events` and
    left out of the lists; `events` holds the 1-based numbers of the kept
    events. With fewer than two usable events there is no
    regression.
    """

    sensor_id: str
    drift: float
    event_times_local: List[float]
    reference_times: List[float]
    deviations: List[float]
    events: List[int]
    regression: Optional[FitResult]
    n_failed_events: int = 0

    @property
    def final_deviation(self) -> Optional[float]:
        return self.deviations[-1] if self.deviations else None

    def to_rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "sensor_id": self.sensor_id,
                "event": event,
                "reference_time_s": ref,
                "event_time_local_s": local,
                "deviation_ms": dev * 1e3,
            }
            for event, ref, local, dev in zip(
                self.events, self.reference_times, self.event_times_local, self.deviations
            )
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sensor_id": self.sensor_id,
            "drift_ppm": self.drift * 1e6,
            "n_events": len(self.deviations),
            "n_failed_events": self.n_failed_events,
            "final_deviation_ms": None
            if self.final_deviation is None
            else self.final_deviation * 1e3,
            "slope_ppm": None if self.regression is None else self.regression.slope * 1e6,
            "r_squared": None if self.regression is None else self.regression.r_squared,
        }
