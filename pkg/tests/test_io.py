# -*- coding: utf-8 -*-
"""
Tests for series files, scenario files and report writers
"""
import numpy as np
import orjson
import pytest

from app.core.errors import MagSyncError, ReasonCode, ScenarioError, SeriesFormatError
from app.io import reports
from app.io.scenario_file import build_scenario, load_scenario, parse_scenario
from app.io.series_file import list_series, read_series, series_filename, write_series
from app.models.series import Channel
from app.services import simulator


def test_series_round_trip(tmp_path, scenario):
    output = simulator.run_sync_procedure(scenario, check=False)
    series = output.magnetometer["imu2"]
    path = write_series(series, tmp_path / series_filename(series))
    loaded = read_series(path)

    assert path.name == "imu2.csv"
    assert loaded.sensor_id == "imu2"
    assert loaded.channel == Channel.MAGNETOMETER
    assert loaded.nominal_rate == series.nominal_rate
    np.testing.assert_array_equal(loaded.times, series.times)
    np.testing.assert_allclose(loaded.values, series.values, rtol=1e-15, atol=0.0)


def test_adc_series_round_trip(tmp_path, scenario):
    adc = simulator.run_sync_procedure(scenario, check=False).adc
    path = write_series(adc, tmp_path / series_filename(adc))
    loaded = read_series(path)
    assert path.name == "imu1_adc.csv"
    assert loaded.channel == Channel.ADC
    np.testing.assert_array_equal(loaded.values, adc.values)


def test_series_file_header(tmp_path, single_scenario):
    series = simulator.run_sync_procedure(single_scenario, check=False).magnetometer["imu1"]
    path = write_series(series, tmp_path / "imu1.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# sensor_id=imu1"
    assert lines[1] == "# channel=magnetometer"
    assert lines[3] == "# unit=gauss"
    assert lines[4] == "t_local_s,value"


def test_plain_csv_uses_defaults(tmp_path):
    path = tmp_path / "imu7.csv"
    path.write_text("t_local_s,value\n0.0,0.0\n0.01,2.0\n", encoding="utf-8")
    series = read_series(path)
    assert series.sensor_id == "imu7"
    assert series.values[1] == pytest.approx(2e-4)


@pytest.mark.parametrize("content", ["", "# sensor_id=imu1\n", "t_local_s,value\n"])
def test_empty_series(tmp_path, content):
    path = tmp_path / "imu1.csv"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(SeriesFormatError) as exc:
        read_series(path)
    assert exc.value.reason == ReasonCode.EMPTY_SERIES


def test_wrong_columns(tmp_path):
    path = tmp_path / "imu1.csv"
    path.write_text("time,flux\n0.0,0.0\n", encoding="utf-8")
    with pytest.raises(SeriesFormatError) as exc:
        read_series(path)
    assert exc.value.reason == ReasonCode.BAD_SERIES_FILE


def test_non_increasing_timestamps(tmp_path):
    path = tmp_path / "imu1.csv"
    path.write_text("t_local_s,value\n0.02,0.0\n0.01,0.0\n", encoding="utf-8")
    with pytest.raises(SeriesFormatError) as exc:
        read_series(path)
    assert exc.value.reason == ReasonCode.BAD_SERIES_FILE


def test_list_series_skips_adc(tmp_path):
    for name in ("imu2.csv", "imu1.csv", "imu1_adc.csv", "groundtruth.json"):
        (tmp_path / name).write_text("", encoding="utf-8")
    assert [p.name for p in list_series(tmp_path)] == ["imu1.csv", "imu2.csv"]


def test_default_scenario_file(default_scenario_file):
    scenario = load_scenario(default_scenario_file)
    assert scenario.sensor_ids == ["imu1", "imu2", "imu3"]
    assert scenario.sensor("imu2").flux_delta == pytest.approx(1.8e-4)
    assert scenario.sensor("imu1").clock.drift == pytest.approx(24e-6)
    assert scenario.adc_rate == 1310.0
    assert scenario.reference_sensor.sensor_id == "imu1"


def test_overrides(default_scenario_file):
    scenario = load_scenario(default_scenario_file, seed=9, inductance=0.1, drive_freq=5.0)
    assert scenario.seed == 9
    assert scenario.inductor.inductance == 0.1
    assert scenario.inductor.resistance == 212.0
    assert scenario.drive_freq == 5.0


def test_drive_frequency_override_is_checked(default_scenario_file):
    with pytest.raises(ScenarioError) as exc:
        load_scenario(default_scenario_file, drive_freq=600.0)
    assert exc.value.reason == ReasonCode.DRIVE_FREQUENCY_TOO_HIGH


def test_unknown_key_names_the_field():
    data = {"sensors": [{"id": "imu1", "colour": "red"}]}
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(data)
    assert exc.value.reason == ReasonCode.SCHEMA_VIOLATION
    assert exc.value.context["field"] == "sensors[0].colour"


def test_out_of_range_value_names_the_field():
    with pytest.raises(ScenarioError) as exc:
        parse_scenario({"sensors": [{"id": "imu1", "mag_rate_hz": -1}]})
    assert exc.value.context["field"] == "sensors[0].mag_rate_hz"


def test_missing_sensors():
    with pytest.raises(ScenarioError) as exc:
        parse_scenario({"seed": 1})
    assert exc.value.context["field"] == "sensors"


def test_scenario_document_round_trip(scenario):
    rebuilt = build_scenario(parse_scenario(orjson.loads(orjson.dumps(scenario.to_dict()))))
    assert rebuilt.sensor_ids == scenario.sensor_ids
    assert rebuilt.seed == scenario.seed
    assert rebuilt.inductor.tau == pytest.approx(scenario.inductor.tau)
    for original, copy in zip(scenario.sensors, rebuilt.sensors):
        assert copy.clock.drift == pytest.approx(original.clock.drift)
        assert copy.flux_delta == pytest.approx(original.flux_delta)
        assert copy.noise_sigma == pytest.approx(original.noise_sigma)


def test_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ScenarioError):
        load_scenario(path)


def test_json_is_deterministic(tmp_path):
    data = {"b": np.float64(1.5), "a": [1, 2], "c": np.arange(3)}
    first = reports.write_json(tmp_path / "first.json", data).read_bytes()
    second = reports.write_json(tmp_path / "second.json", dict(reversed(list(data.items()))))
    assert first == second.read_bytes()
    assert first.startswith(b'{\n  "a"')
    assert reports.read_json(tmp_path / "first.json")["c"] == [0, 1, 2]


def test_read_json_missing_file(tmp_path):
    with pytest.raises(MagSyncError) as exc:
        reports.read_json(tmp_path / "missing.json")
    assert exc.value.reason == ReasonCode.INVALID_ARGUMENT


def test_table_column_order(tmp_path):
    rows = [{"b": 2.0, "a": 1.0 / 3.0}, {"a": None, "b": 4.0}]
    path = reports.write_table(tmp_path / "table.csv", rows, ["a", "b"])
    assert path.read_text(encoding="utf-8").splitlines() == ["a,b", "0.333333333333,2", ",4"]
    assert list(reports.read_table(path).columns) == ["a", "b"]
