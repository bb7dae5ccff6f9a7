# -*- coding: utf-8 -*-
"""
Shared fixtures for the magsync tests
"""
import sys
from pathlib import Path

import pytest

# Add the repository root to the Python path
ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from app.models.clock import ClockModel  # noqa: E402
from app.models.inductor import InductorSpec  # noqa: E402
from app.models.scenario import Scenario, SensorConfig  # noqa: E402

SCENARIO_DIR = ROOT / "scenarios"


@pytest.fixture
def inductor():
    """The 82 mH / 212 Ω drive coil."""
    return InductorSpec.default()


@pytest.fixture
def fleet_sensors():
    return (
        SensorConfig("imu1", clock=ClockModel.from_ppm(0.25, 24.0)),
        SensorConfig("imu2", clock=ClockModel.from_ppm(-1.5, -12.0), flux_delta=1.8e-4),
        SensorConfig("imu3", clock=ClockModel.from_ppm(3.75, 27.5), flux_delta=2.2e-4),
    )


@pytest.fixture
def scenario(inductor, fleet_sensors):
    """Three drifting sensors, ADC reference on imu1."""
    return Scenario(inductor=inductor, sensors=fleet_sensors, seed=7, adc_sensor_id="imu1")


@pytest.fixture
def single_scenario(inductor):
    """One sensor, no ADC: the cheapest scenario for repeated studies."""
    return Scenario(
        inductor=inductor,
        sensors=(SensorConfig("imu1", clock=ClockModel.from_ppm(0.5, 25.0)),),
        adc_rate=0.0,
        seed=11,
    )


@pytest.fixture
def noiseless_scenario(inductor):
    return Scenario(
        inductor=inductor,
        sensors=(SensorConfig("imu1", clock=ClockModel.from_ppm(1.0, 20.0), noise_sigma=0.0),),
        adc_rate=0.0,
        seed=3,
    )


@pytest.fixture
def default_scenario_file():
    return SCENARIO_DIR / "default.json"


@pytest.fixture
def drift_scenario_file():
    return SCENARIO_DIR / "drift.json"


@pytest.fixture(autouse=True)
def _run_in_tmp_cwd(tmp_path, monkeypatch):
    """Keep relative output paths out of the repository."""
    monkeypatch.chdir(tmp_path)
