"""
Scenario File

This module defines the JSON schema of a scenario file and converts it into
the Scenario domain object. Units are exactly as the key suffixes say;
flux values are given in gauss and converted to tesla here.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import orjson
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from app.core.errors import ReasonCode, ScenarioError
from app.core.logging_config import get_logger
from app.models.clock import ClockModel
from app.models.inductor import MU_0, InductorSpec
from app.models.scenario import (
    DEFAULT_ADC_RATE_HZ,
    DEFAULT_DRIVE_FREQ_HZ,
    DEFAULT_FLUX_DELTA,
    DEFAULT_LEAD_IN,
    DEFAULT_QUANT_BITS,
    DEFAULT_QUANT_RANGE,
    DEFAULT_SYNC_DURATION,
    GAUSS,
    NOMINAL_MAG_RATE_HZ,
    Scenario,
    SensorConfig,
    quantization_step,
)

logger = get_logger(__name__)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class InductorDocument(_Strict):
    L: float = Field(82e-3, gt=0, description="Inductance, henry")
    R: float = Field(212.0, gt=0, description="Resistance, ohm")
    N: int = Field(1000, ge=1, description="Windings")
    l: float = Field(9e-3, gt=0, description="Coil length, meter")  # noqa: E741
    mu: float = Field(MU_0, gt=0, description="Permeability, H/m")
    V: float = Field(5.0, gt=0, description="Supply voltage, volt")


class DriveDocument(_Strict):
    freq_hz: float = Field(DEFAULT_DRIVE_FREQ_HZ, gt=0)
    stability_ppb: float = Field(1.0)


class ClockDocument(_Strict):
    offset_s: float = 0.0
    drift_ppm: float = 0.0
    quad: float = 0.0
    jitter_s: float = Field(0.0, ge=0)


class SensorDocument(_Strict):
    id: str = Field(..., min_length=1)
    clock: ClockDocument = Field(default_factory=ClockDocument)
    mag_rate_hz: float = Field(NOMINAL_MAG_RATE_HZ, gt=0)
    noise_sigma_t: Optional[float] = Field(None, ge=0)
    quant_bits: int = Field(DEFAULT_QUANT_BITS, ge=8, le=24)
    quant_range_gauss: float = Field(DEFAULT_QUANT_RANGE / GAUSS, gt=0)
    firmware_delay_s: float = 0.0
    flux_delta_gauss: float = Field(DEFAULT_FLUX_DELTA / GAUSS, gt=0)
    baseline_gauss: float = 0.0


class ScenarioDocument(_Strict):
    """Top-level scenario file."""

    inductor: InductorDocument = Field(default_factory=InductorDocument)
    drive: DriveDocument = Field(default_factory=DriveDocument)
    sensors: List[SensorDocument] = Field(..., min_length=1)
    sync_duration_s: float = Field(DEFAULT_SYNC_DURATION, gt=0)
    adc_rate_hz: float = Field(DEFAULT_ADC_RATE_HZ, ge=0)
    seed: int = 0
    lead_in_s: float = Field(DEFAULT_LEAD_IN, ge=0)
    adc_sensor_id: Optional[str] = None


def _field_path(loc: tuple) -> str:
    path = ""
    for part in loc:
        if isinstance(part, int):
            path += f"[{part}]"
        else:
            path += f".{part}" if path else str(part)
    return path


def parse_scenario(data: Dict[str, Any]) -> ScenarioDocument:
    """
    Validate a decoded scenario document.

    Raises:
        ScenarioError: schema violation, with the offending field path in context
    """
    try:
        return ScenarioDocument.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = _field_path(tuple(first["loc"]))
        raise ScenarioError(
            f"Scenario field {field!r}: {first['msg']}",
            reason=ReasonCode.SCHEMA_VIOLATION,
            context={"field": field, "n_errors": e.error_count()},
        ) from e


def _sensor_config(doc: SensorDocument) -> SensorConfig:
    quant_range = doc.quant_range_gauss * GAUSS
    noise_sigma = doc.noise_sigma_t
    if noise_sigma is None:
        noise_sigma = 2 * quantization_step(quant_range, doc.quant_bits)
    return SensorConfig(
        sensor_id=doc.id,
        clock=ClockModel.from_ppm(
            offset=doc.clock.offset_s,
            drift_ppm=doc.clock.drift_ppm,
            quad=doc.clock.quad,
            jitter_sigma=doc.clock.jitter_s,
        ),
        mag_rate=doc.mag_rate_hz,
        noise_sigma=noise_sigma,
        quant_bits=doc.quant_bits,
        quant_range=quant_range,
        firmware_delay=doc.firmware_delay_s,
        flux_delta=doc.flux_delta_gauss * GAUSS,
        baseline_field=doc.baseline_gauss * GAUSS,
    )


def build_scenario(doc: ScenarioDocument) -> Scenario:
    """Convert a validated document into a Scenario (domain checks run here)."""
    inductor = InductorSpec(
        inductance=doc.inductor.L,
        resistance=doc.inductor.R,
        windings=doc.inductor.N,
        length=doc.inductor.l,
        permeability=doc.inductor.mu,
        supply_voltage=doc.inductor.V,
    )
    return Scenario(
        inductor=inductor,
        sensors=tuple(_sensor_config(sensor) for sensor in doc.sensors),
        drive_freq=doc.drive.freq_hz,
        drive_clock=ClockModel.disciplined(doc.drive.stability_ppb),
        sync_duration=doc.sync_duration_s,
        adc_rate=doc.adc_rate_hz,
        seed=doc.seed,
        lead_in=doc.lead_in_s,
        adc_sensor_id=doc.adc_sensor_id,
    )


def apply_overrides(
    doc: ScenarioDocument,
    seed: Optional[int] = None,
    inductance: Optional[float] = None,
    resistance: Optional[float] = None,
    drive_freq: Optional[float] = None,
) -> ScenarioDocument:
    """Return a document with command-line overrides applied."""
    update: Dict[str, Any] = {}
    if seed is not None:
        update["seed"] = seed
    inductor: Dict[str, Any] = {}
    if inductance is not None:
        inductor["L"] = inductance
    if resistance is not None:
        inductor["R"] = resistance
    if inductor:
        update["inductor"] = doc.inductor.model_copy(update=inductor)
    if drive_freq is not None:
        update["drive"] = doc.drive.model_copy(update={"freq_hz": drive_freq})
    return doc.model_copy(update=update) if update else doc


def load_scenario(path: Union[str, Path], **overrides: Any) -> Scenario:
    """
    Read, validate and build a scenario file.

    Args:
        path: JSON scenario file
        **overrides: seed, inductance, resistance, drive_freq

    Raises:
        ScenarioError: unreadable file or schema/constraint violation
    """
    path = Path(path)
    try:
        data = orjson.loads(path.read_bytes())
    except FileNotFoundError as e:
        raise ScenarioError(
            f"Scenario file not found: {path}",
            context={"path": str(path)},
        ) from e
    except orjson.JSONDecodeError as e:
        raise ScenarioError(
            f"Scenario file is not valid JSON: {e}",
            context={"path": str(path)},
        ) from e
    if not isinstance(data, dict):
        raise ScenarioError("Scenario file must contain a JSON object", context={"path": str(path)})

    doc = apply_overrides(parse_scenario(data), **overrides)
    scenario = build_scenario(doc)
    logger.debug(
        "Scenario loaded",
        path=str(path),
        n_sensors=len(scenario.sensors),
        seed=scenario.seed,
    )
    return scenario
