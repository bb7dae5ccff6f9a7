"""
Experiments Service

This module runs the three simulation studies of the estimator:

- accuracy: repeated 10 s procedures, Δt = t_meas − t_calc per sensor
- duration: hit count and Δt as a function of procedure length
- drift: periodic procedures over a long session, deviation of each local
  clock from the reference timeline

Every repetition owns a seed spawned from the scenario's master seed, so the
results do not depend on the worker count.
"""

from collections import Counter
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from app.core.config import settings
from app.core.errors import EstimationError, MagSyncError, ReasonCode
from app.core.logging_config import get_logger, log_error
from app.models.estimate import FitResult
from app.models.experiment import (
    AccuracyReport,
    AccuracyStats,
    DescriptiveStats,
    DriftRecord,
    DurationReport,
    DurationRow,
    RunRecord,
)
from app.models.scenario import Scenario, SyncProcedureOutput
from app.services import sync_core
from app.services.executor import run_parallel
from app.services.simulator import measure_reference_edge, run_sync_procedure

logger = get_logger(__name__)

DRIFT_PPM_RANGE = (21.0, 28.0)
FEW_HITS_RANGE = (15, 20)


@dataclass(frozen=True)
class _RunOutcome:
    record: RunRecord
    hit_spacing: Optional[float] = None


def spawn_seeds(seed: int, count: int) -> List[int]:
    """Independent integer seeds derived from a master seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]


def descriptive_stats(values: Iterable[float]) -> DescriptiveStats:
    """
    Sample statistics of a list of values.

    Args:
        values: At least two numbers

    Returns:
        DescriptiveStats with n−1 denominator std and sample skewness
        (0 when undefined, e.g. fewer than three values or zero spread)

    Raises:
        MagSyncError: fewer than two values
    """
    data = pd.Series(list(values), dtype=float)
    if data.size < 2:
        raise MagSyncError(
            "Descriptive statistics need at least two values",
            reason=ReasonCode.INVALID_ARGUMENT,
            context={"n": int(data.size)},
        )
    skewness = data.skew()
    return DescriptiveStats(
        mean=float(data.mean()),
        std=float(data.std(ddof=1)),
        min=float(data.min()),
        max=float(data.max()),
        skewness=0.0 if pd.isna(skewness) else float(skewness),
        n=int(data.size),
    )


def _count_hits(series, drive_freq: float) -> int:
    try:
        base = sync_core.estimate_baselines(series)
    except EstimationError:
        return 0
    return len(sync_core.detect_hits(series, base, drive_freq))


def _score_procedure(
    scenario: Scenario,
    output: SyncProcedureOutput,
    repetition: int,
) -> List[_RunOutcome]:
    """Estimate t0 for every sensor of one simulated procedure."""
    truth = output.ground_truth
    adc_edge = None
    if output.adc is not None:
        adc_edge = measure_reference_edge(output.adc)

    outcomes = []
    for sensor in scenario.sensors:
        series = output.magnetometer[sensor.sensor_id]
        t_meas = truth.t0_local_edge[sensor.sensor_id]
        if adc_edge is not None and sensor.sensor_id == output.adc.sensor_id:
            t_meas = adc_edge

        try:
            estimate = sync_core.estimate_t0(series, scenario.inductor, scenario.drive_freq)
        except EstimationError as e:
            log_error(
                e,
                {"sensor_id": sensor.sensor_id, "repetition": repetition},
                level="warning",
            )
            record = RunRecord(
                repetition=repetition,
                sensor_id=sensor.sensor_id,
                n_hits=_count_hits(series, scenario.drive_freq),
                t_meas=t_meas,
                failure=e.reason.value,
                duration=scenario.sync_duration,
            )
            outcomes.append(_RunOutcome(record))
            continue

        quality = sync_core.sync_quality(estimate)
        record = RunRecord(
            repetition=repetition,
            sensor_id=sensor.sensor_id,
            n_hits=estimate.n_hits,
            t_meas=t_meas,
            t_calc=estimate.t0,
            r2_time=estimate.time_fit.r_squared,
            duration=scenario.sync_duration,
        )
        outcomes.append(_RunOutcome(record, quality.hit_spacing))
    return outcomes


def _run_repetition(scenario: Scenario, repetition: int) -> List[_RunOutcome]:
    output = run_sync_procedure(scenario, check=False, workers=1)
    return _score_procedure(scenario, output, repetition)


def accuracy_stats(runs: Sequence[RunRecord], sensor_id: Optional[str] = None) -> AccuracyStats:
    """Aggregate successful runs into Δt, hit-count and R² statistics."""
    ok = [run for run in runs if run.ok]
    dt = descriptive_stats(run.dt for run in ok)
    hits = descriptive_stats(run.n_hits for run in ok)
    r2 = descriptive_stats(run.r2_time for run in ok)
    return AccuracyStats(
        mean_dt=dt.mean,
        std_dt=dt.std,
        min_dt=dt.min,
        max_dt=dt.max,
        mean_k=hits.mean,
        std_k=hits.std,
        mean_r2=r2.mean,
        std_r2=r2.std,
        n_runs=len(ok),
        skewness=dt.skewness,
        sensor_id=sensor_id,
    )


def _failure_counts(runs: Sequence[RunRecord]) -> Dict[str, int]:
    return dict(Counter(run.failure for run in runs if not run.ok))


def experiment_accuracy(
    scenario: Scenario,
    repetitions: int = 200,
    workers: Optional[int] = None,
) -> AccuracyReport:
    """
    Repeat the procedure with fresh seeds and score every sensor's estimate.

    t_meas is the ground-truth local edge time, or the ADC edge for the sensor
    that records the reference channel when the ADC is enabled. Estimator
    rejections are recorded as failures.

    Args:
        scenario: Scenario; its seed is the master seed
        repetitions: Number of procedures, at least 2
        workers: Thread count (EXPERIMENT_WORKERS)

    Returns:
        AccuracyReport with pooled and per-sensor statistics

    Raises:
        MagSyncError: fewer than 2 repetitions, or fewer than 2 successful runs
    """
    if repetitions < 2:
        raise MagSyncError(
            "The accuracy study needs at least two repetitions",
            reason=ReasonCode.INVALID_ARGUMENT,
            context={"repetitions": repetitions},
        )

    seeds = spawn_seeds(scenario.seed, repetitions)
    logger.info(
        "Accuracy study started",
        repetitions=repetitions,
        n_sensors=len(scenario.sensors),
        seed=scenario.seed,
    )
    batches = run_parallel(
        lambda item: _run_repetition(scenario.with_seed(item[1]), item[0]),
        list(enumerate(seeds)),
        workers=workers,
    )
    outcomes = [outcome for batch in batches for outcome in batch]
    runs = [outcome.record for outcome in outcomes]
    failures = _failure_counts(runs)

    if sum(run.ok for run in runs) < 2:
        most_common = max(failures, key=failures.get)
        raise EstimationError(
            "Too few successful runs to compute statistics",
            reason=ReasonCode(most_common),
            context={"failures": failures},
        )

    per_sensor = []
    for sensor_id in scenario.sensor_ids:
        sensor_runs = [run for run in runs if run.sensor_id == sensor_id]
        if sum(run.ok for run in sensor_runs) >= 2:
            per_sensor.append(accuracy_stats(sensor_runs, sensor_id))

    spacings = [o.hit_spacing for o in outcomes if o.hit_spacing is not None]
    report = AccuracyReport(
        overall=accuracy_stats(runs),
        per_sensor=per_sensor,
        runs=runs,
        failures=failures,
        mean_hit_spacing=float(np.mean(spacings)) if spacings else None,
    )
    logger.info(
        "Accuracy study finished",
        mean_dt_ms=report.overall.mean_dt * 1e3,
        std_dt_ms=report.overall.std_dt * 1e3,
        mean_hits=report.overall.mean_k,
        n_failures=report.n_failures,
    )
    if not report.overall.skew_ok:
        logger.warning("Δt distribution is skewed", skewness=report.overall.skewness)
    return report


def accuracy_bound(stats: AccuracyStats, adc_rate: float) -> float:
    """Achievable accuracy once the constant offset is removed: 3·σ plus one ADC interval."""
    reference_uncertainty = 1.0 / adc_rate if adc_rate > 0 else 0.0
    return 3.0 * stats.std_dt + reference_uncertainty


def recommend_duration(
    rows: Sequence[DurationRow], target_hits: Optional[int] = None
) -> Optional[float]:
    """Shortest duration whose mean hit count reaches target_hits (RECOMMENDED_HITS)."""
    target = target_hits if target_hits is not None else settings.RECOMMENDED_HITS
    for row in sorted(rows, key=lambda r: r.duration):
        if row.mean_hits >= target:
            return row.duration
    return None


def _std_or_none(values: List[float]) -> Optional[float]:
    return descriptive_stats(values).std if len(values) >= 2 else None


def _duration_row(duration: float, runs: Sequence[RunRecord]) -> DurationRow:
    hits = pd.Series([run.n_hits for run in runs], dtype=float)
    ok = [run for run in runs if run.ok]
    dts = [run.dt for run in ok]
    return DurationRow(
        duration=duration,
        n_runs=len(runs),
        n_failures=len(runs) - len(ok),
        mean_hits=float(hits.mean()),
        std_hits=float(hits.std(ddof=1)) if hits.size >= 2 else 0.0,
        mean_dt=float(np.mean(dts)) if dts else None,
        std_dt=_std_or_none(dts),
        mean_r2=float(np.mean([run.r2_time for run in ok])) if ok else None,
    )


def experiment_duration(
    scenario: Scenario,
    durations: Optional[Sequence[float]] = None,
    reps_per_duration: int = 10,
    workers: Optional[int] = None,
) -> DurationReport:
    """
    Hit count and Δt as a function of the procedure duration.

    Args:
        scenario: Scenario; its seed is the master seed
        durations: Procedure lengths in seconds (default 1..30 s in 1 s steps)
        reps_per_duration: Repetitions per duration
        workers: Thread count (EXPERIMENT_WORKERS)

    Returns:
        DurationReport with one row per duration, the linear regression of mean
        hits on duration and the Δt spread of the 15-20 and >20 hit groups
    """
    durations = list(durations) if durations is not None else [float(d) for d in range(1, 31)]
    if not durations or reps_per_duration < 1:
        raise MagSyncError(
            "The duration study needs at least one duration and one repetition",
            reason=ReasonCode.INVALID_ARGUMENT,
        )

    tasks: List[Tuple[float, int, int]] = []
    for duration, duration_seed in zip(durations, spawn_seeds(scenario.seed, len(durations))):
        for rep, seed in enumerate(spawn_seeds(duration_seed, reps_per_duration)):
            tasks.append((float(duration), rep, seed))

    logger.info(
        "Duration study started",
        n_durations=len(durations),
        reps_per_duration=reps_per_duration,
        seed=scenario.seed,
    )
    batches = run_parallel(
        lambda task: _run_repetition(
            scenario.with_duration(task[0]).with_seed(task[2]), task[1]
        ),
        tasks,
        workers=workers,
    )
    runs = [outcome.record for batch in batches for outcome in batch]

    rows = [
        _duration_row(float(d), [run for run in runs if run.duration == float(d)])
        for d in durations
    ]
    regression = None
    if len({row.duration for row in rows}) >= 3:
        regression = sync_core.fit_linear(
            [row.duration for row in rows], [row.mean_hits for row in rows]
        )

    low, high = FEW_HITS_RANGE
    few = [run.dt for run in runs if run.ok and low <= run.n_hits <= high]
    many = [run.dt for run in runs if run.ok and run.n_hits > high]
    report = DurationReport(
        rows=rows,
        runs=runs,
        hits_regression=regression,
        std_dt_few_hits=_std_or_none(few),
        std_dt_many_hits=_std_or_none(many),
        recommended_duration=recommend_duration(rows),
    )
    logger.info(
        "Duration study finished",
        hits_per_second=None if regression is None else regression.slope,
        r_squared=None if regression is None else regression.r_squared,
        recommended_duration=report.recommended_duration,
    )
    return report


def _drift_fleet(
    scenario: Scenario, n_sensors: int, drifts: Optional[Sequence[float]]
) -> Scenario:
    """n_sensors copies of the first sensor, each with its own clock drift."""
    if drifts is None:
        rng = np.random.default_rng(np.random.SeedSequence(scenario.seed))
        low, high = DRIFT_PPM_RANGE
        drifts = list(rng.uniform(low, high, size=n_sensors) * 1e-6)
    elif len(drifts) != n_sensors:
        raise MagSyncError(
            "One drift per sensor is required",
            reason=ReasonCode.INVALID_ARGUMENT,
            context={"n_sensors": n_sensors, "n_drifts": len(drifts)},
        )

    template = scenario.sensors[0]
    sensors = [
        replace(
            template,
            sensor_id=f"imu{n + 1}",
            clock=replace(template.clock, drift=float(drift)),
        )
        for n, drift in enumerate(drifts)
    ]
    return replace(scenario, sensors=tuple(sensors), adc_rate=0.0, adc_sensor_id=None)


def _drift_regression(
    reference: List[float], deviations: List[float]
) -> Optional[FitResult]:
    """Least-squares line of deviation over reference time; exact through two events."""
    if len(reference) < 2:
        return None
    if len(reference) == 2:
        slope = (deviations[1] - deviations[0]) / (reference[1] - reference[0])
        return FitResult(
            slope=slope,
            intercept=deviations[0] - slope * reference[0],
            r_squared=1.0,
            n_points=2,
        )
    return sync_core.fit_linear(reference, deviations)


def experiment_drift(
    scenario: Scenario,
    n_sensors: int = 8,
    interval: float = 300.0,
    total: float = 3600.0,
    drifts: Optional[Sequence[float]] = None,
    trigger_delay: float = 0.0,
    workers: Optional[int] = None,
) -> List[DriftRecord]:
    """
    Periodic procedures over a long session and each clock's deviation.

    A procedure is triggered every `interval` seconds up to and including
    `total` (twelve events for 300 s over one hour). The reference time of an
    event is its trigger instant plus the lead-in; the drive actually starts
    `trigger_delay` later. The deviation of an event is the estimated local
    start time minus the reference time.

    A rejected estimate is logged and counted in the sensor's
    `n_failed_events`; it never aborts the study.

    Args:
        scenario: Template scenario; the first sensor's configuration is
            replicated with the given drifts
        n_sensors: Fleet size
        interval: Seconds between procedures
        total: Session length in seconds, at least 2·interval
        drifts: Per-sensor drifts (dimensionless); drawn uniformly in
            [21, 28] ppm from the master seed when omitted
        trigger_delay: Constant delay between trigger and procedure start
        workers: Thread count (EXPERIMENT_WORKERS)

    Returns:
        One DriftRecord per sensor
    """
    if n_sensors < 1 or interval <= 0 or total < 2 * interval:
        raise MagSyncError(
            "The drift study needs total ≥ 2·interval and at least one sensor",
            reason=ReasonCode.INVALID_ARGUMENT,
            context={"n_sensors": n_sensors, "interval": interval, "total": total},
        )
    if scenario.sync_duration + trigger_delay > interval:
        raise MagSyncError(
            "Procedures must not overlap",
            reason=ReasonCode.INVALID_ARGUMENT,
            context={"sync_duration": scenario.sync_duration, "interval": interval},
        )

    fleet = _drift_fleet(scenario, n_sensors, drifts)
    n_events = int(np.floor(total / interval + 1e-9))
    triggers = [(k + 1) * interval for k in range(n_events)]
    logger.info("Drift study started", n_sensors=n_sensors, n_events=n_events, seed=fleet.seed)

    def run_event(k: int) -> Dict[str, Optional[float]]:
        output = run_sync_procedure(
            fleet, triggers[k] + trigger_delay, event_index=k, check=False, workers=1
        )
        estimates: Dict[str, Optional[float]] = {}
        for sensor_id, series in output.magnetometer.items():
            try:
                estimates[sensor_id] = sync_core.estimate_t0(
                    series, fleet.inductor, fleet.drive_freq
                ).t0
            except EstimationError as e:
                log_error(e, {"sensor_id": sensor_id, "event": k}, level="warning")
                estimates[sensor_id] = None
        return estimates

    events = run_parallel(run_event, range(n_events), workers=workers)

    records = []
    for sensor in fleet.sensors:
        local, reference, kept = [], [], []
        for k, estimates in enumerate(events):
            t0 = estimates[sensor.sensor_id]
            if t0 is not None:
                local.append(t0)
                reference.append(triggers[k] + fleet.lead_in)
                kept.append(k + 1)
        deviations = [t - r for t, r in zip(local, reference)]
        records.append(
            DriftRecord(
                sensor_id=sensor.sensor_id,
                drift=sensor.clock.drift,
                event_times_local=local,
                reference_times=reference,
                deviations=deviations,
                events=kept,
                regression=_drift_regression(reference, deviations),
                n_failed_events=n_events - len(kept),
            )
        )

    logger.info(
        "Drift study finished",
        final_deviation_ms=[
            None if r.final_deviation is None else round(r.final_deviation * 1e3, 3)
            for r in records
        ],
        n_failed_events=sum(r.n_failed_events for r in records),
    )
    return records
