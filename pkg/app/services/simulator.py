"""
Simulator Service

This module generates, deterministically from a seed, the traces a rig of
IMUs records while the drive inductor is switched by a square wave:
one magnetometer series per sensor, an optional fast ADC series of the
control signal, and the ground truth needed to score the estimator.

Per-sensor random streams are derived from (seed, event, sensor id), so a
sensor's trace does not depend on its position in the fleet or on how many
other sensors are simulated.
"""

import zlib
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.errors import ReasonCode, ScenarioError
from app.core.logging_config import get_logger
from app.models.scenario import (
    GroundTruth,
    Scenario,
    SensorConfig,
    SessionOutput,
    SyncProcedureOutput,
)
from app.models.series import Channel, SampleSeries, Unit
from app.services import clocks, physics
from app.services.executor import run_parallel

logger = get_logger(__name__)

CONTROL_HIGH_VOLT = 5.0
ADC_STREAM_KEY = 0xADC


@dataclass(frozen=True)
class BeatReport:
    """How well the sampling grid covers the transient windows of one sensor."""

    sensor_id: str
    n_edges: int
    phase_classes: int
    max_phase_gap: float  # seconds
    expected_hits_per_second: float
    degenerate: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sensor_id": self.sensor_id,
            "n_edges": self.n_edges,
            "phase_classes": self.phase_classes,
            "max_phase_gap_s": self.max_phase_gap,
            "expected_hits_per_second": self.expected_hits_per_second,
            "degenerate": self.degenerate,
        }


def _stream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(keys)))


def _sensor_key(sensor_id: str) -> int:
    return zlib.crc32(sensor_id.encode("utf-8"))


def rising_edge_count(scenario: Scenario) -> int:
    """Number of rising edges inside one procedure's recording window."""
    active = scenario.sync_duration - scenario.lead_in
    return int(np.ceil(active * scenario.drive_freq - 1e-9))


def expected_hits_per_second(
    scenario: Scenario,
    sensor: SensorConfig,
    flux_fraction: Optional[float] = None,
) -> float:
    """Mean hit rate for a non-degenerate beat: f · window · rate."""
    fraction = flux_fraction if flux_fraction is not None else settings.HIT_FLUX_FRACTION
    t_lo, t_hi = physics.usable_window(scenario.inductor, fraction)
    return scenario.drive_freq * min((t_hi - t_lo) * sensor.mag_rate, 1.0)


def beat_coverage(scenario: Scenario, sensor: SensorConfig) -> BeatReport:
    """
    Sampling phases of all rising edges of a procedure relative to the sample grid.

    The beat is degenerate when the largest circular gap between phases exceeds
    the transient duration (some start phases then never produce a hit), or when
    the sampling rate is an exact multiple of the drive frequency.
    """
    interval = 1.0 / sensor.mag_rate
    n_edges = rising_edge_count(scenario)
    if n_edges == 0:
        return BeatReport(
            sensor_id=sensor.sensor_id,
            n_edges=0,
            phase_classes=0,
            max_phase_gap=interval,
            expected_hits_per_second=expected_hits_per_second(scenario, sensor),
            degenerate=True,
        )
    edges = np.arange(n_edges) / scenario.drive_freq
    phases = np.sort(np.mod(edges, interval))
    gaps = np.diff(np.concatenate([phases, [phases[0] + interval]]))
    max_gap = float(gaps.max()) if gaps.size else interval
    classes = int(np.unique(np.mod(np.round(phases / interval, 9), 1.0)).size)

    ratio = sensor.mag_rate / scenario.drive_freq
    integer_ratio = bool(np.isclose(ratio, np.round(ratio), rtol=0.0, atol=1e-9))
    degenerate = integer_ratio or max_gap > physics.transient_duration(scenario.inductor)
    return BeatReport(
        sensor_id=sensor.sensor_id,
        n_edges=n_edges,
        phase_classes=classes,
        max_phase_gap=max_gap,
        expected_hits_per_second=expected_hits_per_second(scenario, sensor),
        degenerate=degenerate,
    )


def check_scenario(scenario: Scenario) -> Dict[str, BeatReport]:
    """Log a warning for every sensor whose beat against the drive is degenerate."""
    reports = {}
    for sensor in scenario.sensors:
        report = beat_coverage(scenario, sensor)
        reports[sensor.sensor_id] = report
        if report.degenerate:
            logger.warning(
                "Degenerate beat between sampling and drive",
                sensor_id=sensor.sensor_id,
                mag_rate=sensor.mag_rate,
                drive_freq=scenario.drive_freq,
                phase_classes=report.phase_classes,
                max_phase_gap=report.max_phase_gap,
            )
    return reports


def drive_flux_ratio(scenario: Scenario, t_true: np.ndarray, t0_true: float) -> np.ndarray:
    """
    Drive flux as a fraction of B_sat at the given true instants.

    The square wave (50 % duty) runs on the drive clock from its first rising
    edge at t0_true: rising transient while connected, exponential decay after
    disconnect, zero before the procedure starts.
    """
    spec = scenario.inductor
    drive = scenario.drive_clock
    t = np.asarray(t_true, dtype=float)
    start_local = clocks.local_from_true(drive, t0_true)
    phase = (np.asarray(clocks.local_from_true(drive, t)) - start_local) * scenario.drive_freq
    cycle = np.floor(phase)
    connected = (phase - cycle) < 0.5
    started = phase >= 0

    rising = np.asarray(clocks.true_from_local(drive, start_local + cycle / scenario.drive_freq))
    falling = np.asarray(
        clocks.true_from_local(drive, start_local + (cycle + 0.5) / scenario.drive_freq)
    )

    ratio = np.zeros_like(t)
    on = started & connected
    off = started & ~connected
    if np.any(on):
        ratio[on] = np.asarray(physics.flux_at(spec, np.maximum(t[on] - rising[on], 0.0)))
    if np.any(off):
        ratio[off] = np.asarray(
            physics.decay_flux_at(spec, np.maximum(t[off] - falling[off], 0.0))
        )
    return ratio / spec.b_sat


def control_signal(scenario: Scenario, t_true: np.ndarray, t0_true: float) -> np.ndarray:
    """Square-wave control voltage at the given true instants."""
    drive = scenario.drive_clock
    t = np.asarray(t_true, dtype=float)
    start_local = clocks.local_from_true(drive, t0_true)
    phase = (np.asarray(clocks.local_from_true(drive, t)) - start_local) * scenario.drive_freq
    high = (phase >= 0) & ((phase - np.floor(phase)) < 0.5)
    return np.where(high, CONTROL_HIGH_VOLT, 0.0)


def quantize(values: np.ndarray, quant_range: float, quant_bits: int) -> np.ndarray:
    """Signed converter: round to the nearest code and clip to the code range."""
    step = quant_range * 2.0 ** (1 - quant_bits)
    half = 2 ** (quant_bits - 1)
    codes = np.clip(np.round(values / step), -half, half - 1)
    return codes * step


def simulate_sensor(
    scenario: Scenario,
    sensor: SensorConfig,
    t_start_true: float,
    event_index: int = 0,
) -> SampleSeries:
    """
    Magnetometer trace of one sensor for one procedure.

    Values are measured at true sample instants and stamped with the sensor's
    local time plus its firmware delay.
    """
    rng = _stream(scenario.seed, event_index, _sensor_key(sensor.sensor_id))
    t0_true = t_start_true + scenario.lead_in
    t_true, t_local = clocks.sample_times(
        sensor.clock, sensor.mag_rate, t_start_true, scenario.sync_duration, rng
    )
    flux = sensor.baseline_field + sensor.flux_delta * drive_flux_ratio(scenario, t_true, t0_true)
    noise = rng.normal(0.0, sensor.noise_sigma, size=t_true.size)
    values = quantize(flux + noise, sensor.quant_range, sensor.quant_bits)

    logger.debug(
        "Sensor trace simulated",
        sensor_id=sensor.sensor_id,
        event_index=event_index,
        n_samples=int(t_true.size),
        seed=scenario.seed,
    )
    return SampleSeries(
        sensor_id=sensor.sensor_id,
        channel=Channel.MAGNETOMETER,
        nominal_rate=sensor.mag_rate,
        unit=Unit.TESLA,
        times=t_local + sensor.firmware_delay,
        values=values,
    )


def simulate_adc(scenario: Scenario, t_start_true: float, event_index: int = 0) -> SampleSeries:
    """Control signal sampled at adc_rate on the reference sensor's clock (jitter-free)."""
    sensor = scenario.reference_sensor
    rng = _stream(scenario.seed, event_index, ADC_STREAM_KEY)
    t_true, t_local = clocks.sample_times(
        sensor.clock.without_jitter(),
        scenario.adc_rate,
        t_start_true,
        scenario.sync_duration,
        rng,
    )
    return SampleSeries(
        sensor_id=sensor.sensor_id,
        channel=Channel.ADC,
        nominal_rate=scenario.adc_rate,
        unit=Unit.VOLT,
        times=t_local,
        values=control_signal(scenario, t_true, t_start_true + scenario.lead_in),
    )


def ground_truth(scenario: Scenario, t_start_true: float = 0.0) -> GroundTruth:
    """First rising edge in true time and as each sensor timestamps it."""
    t0_true = t_start_true + scenario.lead_in
    edge = {
        sensor.sensor_id: float(clocks.local_from_true(sensor.clock, t0_true))
        for sensor in scenario.sensors
    }
    stamped = {
        sensor.sensor_id: edge[sensor.sensor_id] + sensor.firmware_delay
        for sensor in scenario.sensors
    }
    return GroundTruth(t0_true=t0_true, t0_local_true=stamped, t0_local_edge=edge)


def run_sync_procedure(
    scenario: Scenario,
    t_start_true: float = 0.0,
    event_index: int = 0,
    check: bool = True,
    workers: Optional[int] = None,
) -> SyncProcedureOutput:
    """
    Simulate one synchronisation procedure.

    Args:
        scenario: Validated scenario
        t_start_true: True time at which recording starts
        event_index: Which procedure of a session this is (selects random streams)
        check: Run the beat-coverage check and log degenerate beats
        workers: Thread count for per-sensor generation

    Returns:
        Per-sensor magnetometer series, optional ADC series, ground truth
    """
    if check:
        check_scenario(scenario)

    series = run_parallel(
        lambda sensor: simulate_sensor(scenario, sensor, t_start_true, event_index),
        scenario.sensors,
        workers=workers,
    )
    adc = simulate_adc(scenario, t_start_true, event_index) if scenario.adc_enabled else None
    truth = ground_truth(scenario, t_start_true)

    logger.debug(
        "Sync procedure simulated",
        event_index=event_index,
        t0_true=truth.t0_true,
        n_sensors=len(series),
        adc=adc is not None,
    )
    return SyncProcedureOutput(
        magnetometer={s.sensor_id: s for s in series},
        adc=adc,
        ground_truth=truth,
    )


def run_session(
    scenario: Scenario,
    gap_duration: float,
    workers: Optional[int] = None,
) -> SessionOutput:
    """
    Simulate a session bracketed by two procedures gap_duration apart.

    Clocks run continuously: the second procedure starts recording at true
    time sync_duration + gap_duration.
    """
    if gap_duration < 0:
        raise ScenarioError(
            "Gap duration must be non-negative",
            reason=ReasonCode.SCHEMA_VIOLATION,
            context={"field": "gap_duration"},
        )
    check_scenario(scenario)
    first = run_sync_procedure(scenario, 0.0, event_index=0, check=False, workers=workers)
    second = run_sync_procedure(
        scenario,
        scenario.sync_duration + gap_duration,
        event_index=1,
        check=False,
        workers=workers,
    )
    logger.info(
        "Session simulated",
        gap_duration=gap_duration,
        t0_first=first.ground_truth.t0_true,
        t0_second=second.ground_truth.t0_true,
    )
    return SessionOutput(first=first, second=second, gap_duration=gap_duration)


def measure_reference_edge(adc: SampleSeries) -> float:
    """
    Local timestamp of the first low→high transition of the control signal.

    The first sample at or above half amplitude that follows a sample below
    it; uncertainty is bounded by one ADC sample interval.

    Raises:
        ScenarioError: if the series contains no rising edge
    """
    values = adc.values
    low, high = float(values.min()), float(values.max())
    if high <= low:
        raise ScenarioError(
            "Reference channel contains no edge",
            reason=ReasonCode.NO_REFERENCE_EDGE,
            context={"sensor_id": adc.sensor_id},
        )
    threshold = 0.5 * (low + high)
    above = values >= threshold
    crossings = np.flatnonzero(~above[:-1] & above[1:])
    if crossings.size == 0:
        raise ScenarioError(
            "Reference channel contains no low-to-high transition",
            reason=ReasonCode.NO_REFERENCE_EDGE,
            context={"sensor_id": adc.sensor_id},
        )
    return float(adc.times[crossings[0] + 1])


def edge_times(scenario: Scenario, t_start_true: float = 0.0) -> Tuple[float, ...]:
    """True times of all rising edges inside one procedure."""
    t0_true = t_start_true + scenario.lead_in
    start_local = clocks.local_from_true(scenario.drive_clock, t0_true)
    n = np.arange(rising_edge_count(scenario))
    edges = clocks.true_from_local(scenario.drive_clock, start_local + n / scenario.drive_freq)
    return tuple(float(t) for t in np.atleast_1d(edges))
