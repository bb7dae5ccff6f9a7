# -*- coding: utf-8 -*-
"""
Tests for the affine alignment of sensor timelines
"""
import itertools

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings
from hypothesis import strategies as st

from app.core.errors import AlignmentError, ReasonCode
from app.models.alignment import AlignmentMap, SyncEventPair
from app.models.clock import ClockModel
from app.models.scenario import Scenario, SensorConfig
from app.services import align, clocks, simulator, sync_core

scales = st.floats(min_value=0.999, max_value=1.001, allow_nan=False)
shifts = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)
local_times = st.floats(min_value=0.0, max_value=100.0, allow_nan=False)


def test_worked_example():
    sensor = SyncEventPair("imu2", 0.0, 3600.0)
    reference = SyncEventPair("imu1", 0.0, 3600.1)
    mapping = align.build_alignment(sensor, reference)
    assert mapping.a == pytest.approx(3600.1 / 3600.0, rel=1e-12)
    assert mapping.b == pytest.approx(0.0, abs=1e-12)
    assert align.map_time(mapping, 1800.0) == pytest.approx(1800.05, abs=1e-9)


def test_map_sends_event_times_onto_reference():
    sensor = SyncEventPair("imu2", 12.25, 3612.34)
    reference = SyncEventPair("imu1", -3.5, 3596.59)
    mapping = align.build_alignment(sensor, reference)
    assert align.map_time(mapping, 12.25) == pytest.approx(-3.5, abs=1e-9)
    assert align.map_time(mapping, 3612.34) == pytest.approx(3596.59, abs=1e-9)


def test_second_event_must_follow_the_first():
    with pytest.raises(AlignmentError) as exc:
        SyncEventPair("imu1", 10.0, 10.0)
    assert exc.value.reason == ReasonCode.NON_POSITIVE_INTERVAL


def test_identity_leaves_series_untouched(single_scenario):
    series = simulator.run_sync_procedure(single_scenario, check=False).magnetometer["imu1"]
    aligned = align.apply_alignment(AlignmentMap.identity("imu1"), series)
    np.testing.assert_array_equal(aligned.times, series.times)
    np.testing.assert_array_equal(aligned.values, series.values)


@hyp_settings(max_examples=200, deadline=None)
@given(scales, shifts, local_times)
def test_inverse_round_trip(a, b, t):
    mapping = AlignmentMap("imu2", a, b)
    back = align.map_time(align.invert_alignment(mapping), align.map_time(mapping, t))
    assert back == pytest.approx(t, abs=1e-12)


@hyp_settings(max_examples=200, deadline=None)
@given(scales, shifts, scales, shifts, local_times)
def test_composition(a1, b1, a2, b2, t):
    first = AlignmentMap("imu3", a1, b1)
    second = AlignmentMap("imu3", a2, b2)
    composed = align.compose_alignment(first, second)
    expected = align.map_time(second, align.map_time(first, t))
    assert align.map_time(composed, t) == pytest.approx(expected, abs=1e-9)


def test_linear_clocks_align_exactly():
    sensor_clock = ClockModel.from_ppm(2.5, 27.0)
    reference_clock = ClockModel.from_ppm(-1.0, -8.0)
    t1, t2 = 0.1, 3610.1
    sensor = SyncEventPair(
        "imu2", clocks.local_from_true(sensor_clock, t1), clocks.local_from_true(sensor_clock, t2)
    )
    reference = SyncEventPair(
        "imu1",
        clocks.local_from_true(reference_clock, t1),
        clocks.local_from_true(reference_clock, t2),
    )
    mapping = align.build_alignment(sensor, reference)
    t_true = np.linspace(0.0, 3600.0, 37)
    mapped = align.map_time(mapping, clocks.local_from_true(sensor_clock, t_true))
    np.testing.assert_allclose(mapped, clocks.local_from_true(reference_clock, t_true), atol=1e-9)


def _pairs():
    return [
        SyncEventPair("imu1", 0.25, 3610.35),
        SyncEventPair("imu2", -1.5, 3608.55),
        SyncEventPair("imu3", 3.75, 3613.95),
    ]


def test_fleet_reference_gets_identity():
    maps = align.align_fleet(_pairs(), reference_id="imu1")
    assert [m.sensor_id for m in maps] == ["imu1", "imu2", "imu3"]
    assert maps[0] == AlignmentMap.identity("imu1")
    assert maps[1].a == pytest.approx(3610.1 / 3610.05, rel=1e-12)


def test_fleet_maps_do_not_depend_on_order():
    forward = {m.sensor_id: m for m in align.align_fleet(_pairs(), reference_id="imu2")}
    backward = {
        m.sensor_id: m for m in align.align_fleet(list(reversed(_pairs())), reference_id="imu2")
    }
    assert forward == backward


def test_single_sensor_fleet():
    maps = align.align_fleet(_pairs()[:1], reference_id="imu1")
    assert maps == [AlignmentMap.identity("imu1")]


def test_unknown_reference():
    with pytest.raises(AlignmentError) as exc:
        align.align_fleet(_pairs(), reference_id="imu9")
    assert exc.value.reason == ReasonCode.UNKNOWN_REFERENCE


def test_duplicate_sensor():
    with pytest.raises(AlignmentError) as exc:
        align.align_fleet(_pairs() + _pairs()[:1], reference_id="imu1")
    assert exc.value.reason == ReasonCode.INVALID_ARGUMENT


def test_external_reference():
    external = SyncEventPair("external", 1000.0, 4610.0)
    maps = align.align_fleet(_pairs(), external_reference=external)
    for pair, mapping in zip(_pairs(), maps):
        assert align.map_time(mapping, pair.t0_first) == pytest.approx(1000.0, abs=1e-9)
        assert align.map_time(mapping, pair.t0_second) == pytest.approx(4610.0, abs=1e-9)


def test_offset_alignment():
    mapping = align.build_offset_alignment("imu2", 5.0, 2.0)
    assert mapping.a == 1.0
    assert align.map_time(mapping, 5.0) == pytest.approx(2.0)


def test_simulated_session_aligns_mid_session(scenario):
    session = simulator.run_session(scenario, gap_duration=3600.0)
    pairs = []
    for sensor_id in scenario.sensor_ids:
        t0 = [
            sync_core.estimate_t0(
                event.magnetometer[sensor_id], scenario.inductor, scenario.drive_freq
            ).t0
            for event in (session.first, session.second)
        ]
        pairs.append(SyncEventPair(sensor_id, t0[0], t0[1]))
    maps = {m.sensor_id: m for m in align.align_fleet(pairs, reference_id="imu1")}

    t_mid = 1800.0
    reference_clock = scenario.sensor("imu1").clock
    for sensor in scenario.sensors:
        local = clocks.local_from_true(sensor.clock, t_mid)
        mapped = align.map_time(maps[sensor.sensor_id], local)
        assert abs(mapped - clocks.local_from_true(reference_clock, t_mid)) < 0.47e-3


def test_eight_sensor_fleet_agrees_pairwise(inductor):
    drifts_ppm = [-18.0, -9.5, -2.0, 4.0, 11.0, 17.5, 23.0, 29.0]
    sensors = tuple(
        SensorConfig(f"imu{n + 1}", clock=ClockModel.from_ppm(0.1 * n, drift))
        for n, drift in enumerate(drifts_ppm)
    )
    fleet = Scenario(inductor=inductor, sensors=sensors, adc_rate=0.0, seed=21)
    session = simulator.run_session(fleet, gap_duration=3600.0)
    pairs = []
    for sensor_id in fleet.sensor_ids:
        t0 = [
            sync_core.estimate_t0(
                event.magnetometer[sensor_id], fleet.inductor, fleet.drive_freq
            ).t0
            for event in (session.first, session.second)
        ]
        pairs.append(SyncEventPair(sensor_id, t0[0], t0[1]))
    maps = {m.sensor_id: m for m in align.align_fleet(pairs, reference_id="imu1")}
    assert len(maps) == 8

    t_mid = 1800.0
    mapped = {
        sensor.sensor_id: align.map_time(
            maps[sensor.sensor_id], clocks.local_from_true(sensor.clock, t_mid)
        )
        for sensor in fleet.sensors
    }
    for first, second in itertools.combinations(sorted(mapped), 2):
        assert abs(mapped[first] - mapped[second]) < 0.47e-3, (first, second)
