# -*- coding: utf-8 -*-
"""
Tests for the rig simulator
"""
from dataclasses import replace

import numpy as np
import pytest

from app.core.errors import ReasonCode, ScenarioError
from app.models.clock import ClockModel
from app.models.scenario import Scenario, SensorConfig
from app.models.series import Channel, SampleSeries, Unit
from app.services import clocks, simulator


def test_rising_edges_of_a_ten_second_procedure(scenario):
    assert simulator.rising_edge_count(scenario) == 60
    edges = simulator.edge_times(scenario)
    assert edges[0] == pytest.approx(0.1, abs=1e-12)
    assert np.diff(edges) == pytest.approx(np.full(59, 1 / 6.0), abs=1e-9)


def test_sample_count_at_exactly_100_hz(inductor):
    scenario = Scenario(inductor=inductor, sensors=(SensorConfig("a", mag_rate=100.0),), seed=5)
    series = simulator.run_sync_procedure(scenario).magnetometer["a"]
    assert len(series) == 1000


def test_same_seed_same_traces(scenario):
    first = simulator.run_sync_procedure(scenario)
    second = simulator.run_sync_procedure(scenario)
    for sensor_id in scenario.sensor_ids:
        np.testing.assert_array_equal(
            first.magnetometer[sensor_id].values, second.magnetometer[sensor_id].values
        )
        np.testing.assert_array_equal(
            first.magnetometer[sensor_id].times, second.magnetometer[sensor_id].times
        )
    np.testing.assert_array_equal(first.adc.values, second.adc.values)


def test_different_seed_different_traces(scenario):
    first = simulator.run_sync_procedure(scenario)
    second = simulator.run_sync_procedure(scenario.with_seed(8))
    assert not np.array_equal(first.magnetometer["imu1"].times, second.magnetometer["imu1"].times)


def test_trace_does_not_depend_on_fleet_order(scenario):
    reversed_scenario = scenario.with_sensors(list(reversed(scenario.sensors)))
    first = simulator.run_sync_procedure(scenario)
    second = simulator.run_sync_procedure(reversed_scenario)
    for sensor_id in scenario.sensor_ids:
        np.testing.assert_array_equal(
            first.magnetometer[sensor_id].values, second.magnetometer[sensor_id].values
        )


def test_worker_count_does_not_change_traces(scenario):
    first = simulator.run_sync_procedure(scenario, workers=1)
    second = simulator.run_sync_procedure(scenario, workers=3)
    for sensor_id in scenario.sensor_ids:
        np.testing.assert_array_equal(
            first.magnetometer[sensor_id].values, second.magnetometer[sensor_id].values
        )


def test_noiseless_samples_follow_the_flux_model(noiseless_scenario):
    sensor = noiseless_scenario.sensors[0]
    output = simulator.run_sync_procedure(noiseless_scenario)
    series = output.magnetometer["imu1"]

    t_true = np.asarray(clocks.true_from_local(sensor.clock, series.times))
    expected = sensor.flux_delta * simulator.drive_flux_ratio(
        noiseless_scenario, t_true, output.ground_truth.t0_true
    )
    assert np.max(np.abs(series.values - expected)) <= 0.5 * sensor.lsb + 1e-12
    assert np.all(series.values[t_true < output.ground_truth.t0_true] == 0.0)


def test_firmware_delay_only_shifts_timestamps(scenario):
    delayed = scenario.with_sensors(
        [replace(sensor, firmware_delay=2.07e-3) for sensor in scenario.sensors]
    )
    plain = simulator.run_sync_procedure(scenario)
    shifted = simulator.run_sync_procedure(delayed)
    for sensor_id in scenario.sensor_ids:
        a = plain.magnetometer[sensor_id]
        b = shifted.magnetometer[sensor_id]
        np.testing.assert_array_equal(a.values, b.values)
        np.testing.assert_allclose(b.times - a.times, 2.07e-3, atol=1e-12)
        assert shifted.ground_truth.t0_local_true[sensor_id] == pytest.approx(
            plain.ground_truth.t0_local_true[sensor_id] + 2.07e-3, abs=1e-12
        )
        assert shifted.ground_truth.t0_local_edge == plain.ground_truth.t0_local_edge


def test_ground_truth_uses_each_sensor_clock(scenario):
    truth = simulator.ground_truth(scenario, t_start_true=100.0)
    assert truth.t0_true == pytest.approx(100.1)
    for sensor in scenario.sensors:
        assert truth.t0_local_edge[sensor.sensor_id] == pytest.approx(
            sensor.clock.offset + (1 + sensor.clock.drift) * 100.1, abs=1e-12
        )


def test_quantize_rounds_and_clips():
    step = 1.0 * 2.0 ** (1 - 8)
    values = np.array([0.0, 0.4 * step, 0.6 * step, 5.0, -5.0])
    quantized = simulator.quantize(values, 1.0, 8)
    np.testing.assert_allclose(quantized, [0.0, 0.0, step, 127 * step, -128 * step])


def test_adc_edge_within_one_sample_of_truth(scenario):
    output = simulator.run_sync_procedure(scenario)
    edge = simulator.measure_reference_edge(output.adc)
    truth = output.ground_truth.t0_local_edge["imu1"]
    assert output.adc.channel == Channel.ADC
    assert 0.0 <= edge - truth <= (1 + 24e-6) / scenario.adc_rate + 1e-9


def test_adc_without_edge_is_rejected():
    times = np.arange(10) / 1310.0
    flat = SampleSeries("imu1", Channel.ADC, 1310.0, Unit.VOLT, times, np.zeros(10))
    with pytest.raises(ScenarioError) as exc:
        simulator.measure_reference_edge(flat)
    assert exc.value.reason == ReasonCode.NO_REFERENCE_EDGE


def test_disabled_adc(single_scenario):
    assert simulator.run_sync_procedure(single_scenario).adc is None


def test_beat_at_100_hz_is_degenerate(inductor):
    scenario = Scenario(inductor=inductor, sensors=(SensorConfig("a", mag_rate=100.0),))
    report = simulator.beat_coverage(scenario, scenario.sensors[0])
    assert report.degenerate
    assert report.phase_classes == 3


def test_default_rate_covers_the_transient(scenario):
    reports = simulator.check_scenario(scenario)
    for report in reports.values():
        assert not report.degenerate
        assert report.max_phase_gap < 5 * scenario.inductor.tau
        assert report.n_edges == 60


def test_drive_frequency_bound(inductor):
    with pytest.raises(ScenarioError) as exc:
        Scenario(inductor=inductor, sensors=(SensorConfig("a"),), drive_freq=600.0)
    assert exc.value.reason == ReasonCode.DRIVE_FREQUENCY_TOO_HIGH


def test_unresolvable_flux_delta():
    with pytest.raises(ScenarioError) as exc:
        SensorConfig("a", flux_delta=1e-7)
    assert exc.value.reason == ReasonCode.UNRESOLVABLE_SIGNAL


def test_jitter_bound_in_sensor_config():
    with pytest.raises(ScenarioError) as exc:
        SensorConfig("a", clock=ClockModel(jitter_sigma=6e-3))
    assert exc.value.reason == ReasonCode.JITTER_TOO_LARGE


def test_session_events_are_gap_apart(scenario):
    session = simulator.run_session(scenario, gap_duration=3600.0)
    assert session.first.ground_truth.t0_true == pytest.approx(0.1)
    assert session.second.ground_truth.t0_true == pytest.approx(3610.1)
    first = session.first.magnetometer["imu2"]
    second = session.second.magnetometer["imu2"]
    assert second.times[0] > first.times[-1]
    assert not np.array_equal(first.values, second.values)


def test_negative_gap_rejected(scenario):
    with pytest.raises(ScenarioError):
        simulator.run_session(scenario, gap_duration=-1.0)
