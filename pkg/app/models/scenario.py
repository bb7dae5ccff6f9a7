"""
Scenario Model

This module defines the simulated synchronisation rig: the per-sensor
configuration, the scenario tying inductor, drive and sensors together, and
the ground truth a simulation run records for scoring.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

from app.core.errors import ReasonCode, ScenarioError
from app.models.clock import ClockModel
from app.models.inductor import InductorSpec
from app.models.series import SampleSeries

GAUSS = 1e-4  # tesla per gauss

# A nominal 100 Hz channel on a 32.768 kHz timer (divider 328)
NOMINAL_MAG_RATE_HZ = 32768.0 / 328.0
DEFAULT_QUANT_BITS = 16
DEFAULT_QUANT_RANGE = 49.152 * GAUSS
DEFAULT_FLUX_DELTA = 2.0 * GAUSS
DEFAULT_DRIVE_FREQ_HZ = 6.0
DEFAULT_ADC_RATE_HZ = 1310.0
DEFAULT_SYNC_DURATION = 10.0
DEFAULT_LEAD_IN = 0.1


def quantization_step(quant_range: float, quant_bits: int) -> float:
    """One LSB of a signed converter spanning ±quant_range."""
    return quant_range * 2.0 ** (1 - quant_bits)


@dataclass(frozen=True)
class SensorConfig:
    """One simulated IMU: its clock and magnetometer characteristics."""

    sensor_id: str
    clock: ClockModel = field(default_factory=ClockModel)
    mag_rate: float = NOMINAL_MAG_RATE_HZ
    noise_sigma: float = 2 * quantization_step(DEFAULT_QUANT_RANGE, DEFAULT_QUANT_BITS)
    quant_bits: int = DEFAULT_QUANT_BITS
    quant_range: float = DEFAULT_QUANT_RANGE
    firmware_delay: float = 0.0
    flux_delta: float = DEFAULT_FLUX_DELTA  # K_true, tesla
    baseline_field: float = 0.0  # tesla

    def __post_init__(self) -> None:
        prefix = f"sensors[{self.sensor_id}]"
        if not self.sensor_id:
            raise ScenarioError("Sensor id must be non-empty", context={"field": "sensors.id"})
        if self.mag_rate <= 0:
            raise ScenarioError(
                "Magnetometer rate must be positive",
                context={"field": f"{prefix}.mag_rate_hz"},
            )
        if not 8 <= self.quant_bits <= 24:
            raise ScenarioError(
                "Quantization bits must lie in [8, 24]",
                context={"field": f"{prefix}.quant_bits"},
            )
        if self.quant_range <= 0:
            raise ScenarioError(
                "Quantization range must be positive",
                context={"field": f"{prefix}.quant_range_gauss"},
            )
        if self.noise_sigma < 0:
            raise ScenarioError(
                "Noise sigma must be non-negative",
                context={"field": f"{prefix}.noise_sigma_t"},
            )
        if self.flux_delta <= 10 * self.lsb:
            raise ScenarioError(
                f"Flux delta {self.flux_delta} T is not resolvable with a {self.lsb} T step",
                reason=ReasonCode.UNRESOLVABLE_SIGNAL,
                context={"field": f"{prefix}.flux_delta_gauss"},
            )
        if self.clock.jitter_sigma >= 0.5 / self.mag_rate:
            raise ScenarioError(
                "Timestamp jitter must stay below half the sampling interval",
                reason=ReasonCode.JITTER_TOO_LARGE,
                context={"field": f"{prefix}.clock.jitter_s"},
            )

    @property
    def lsb(self) -> float:
        return quantization_step(self.quant_range, self.quant_bits)

    def to_dict(self) -> Dict[str, Any]:
        """Serialize using the scenario-file keys."""
        return {
            "id": self.sensor_id,
            "clock": self.clock.to_dict(),
            "mag_rate_hz": self.mag_rate,
            "noise_sigma_t": self.noise_sigma,
            "quant_bits": self.quant_bits,
            "quant_range_gauss": self.quant_range / GAUSS,
            "firmware_delay_s": self.firmware_delay,
            "flux_delta_gauss": self.flux_delta / GAUSS,
            "baseline_gauss": self.baseline_field / GAUSS,
        }


@dataclass(frozen=True)
class Scenario:
    """
    The simulated rig for one synchronisation procedure.

    The drive's first rising edge happens `lead_in` seconds after recording
    starts; the recording lasts `sync_duration` seconds.
    """

    inductor: InductorSpec
    sensors: Tuple[SensorConfig, ...]
    drive_freq: float = DEFAULT_DRIVE_FREQ_HZ
    drive_clock: ClockModel = field(default_factory=ClockModel.disciplined)
    sync_duration: float = DEFAULT_SYNC_DURATION
    adc_rate: float = DEFAULT_ADC_RATE_HZ  # 0 disables the reference channel
    seed: int = 0
    lead_in: float = DEFAULT_LEAD_IN
    adc_sensor_id: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "sensors", tuple(self.sensors))
        if not self.sensors:
            raise ScenarioError("Scenario needs at least one sensor", context={"field": "sensors"})
        ids = [sensor.sensor_id for sensor in self.sensors]
        if len(set(ids)) != len(ids):
            raise ScenarioError("Sensor ids must be unique", context={"field": "sensors.id"})
        if self.drive_freq <= 0:
            raise ScenarioError(
                "Drive frequency must be positive",
                context={"field": "drive.freq_hz"},
            )
        limit = 1.0 / (5.0 * self.inductor.tau)
        if self.drive_freq >= limit:
            raise ScenarioError(
                f"Drive frequency {self.drive_freq} Hz violates f < 1/(5·tau) = {limit:.1f} Hz: "
                "the inductor cannot complete its transient response",
                reason=ReasonCode.DRIVE_FREQUENCY_TOO_HIGH,
                context={"field": "drive.freq_hz", "limit_hz": limit},
            )
        if self.sync_duration <= 0:
            raise ScenarioError(
                "Sync duration must be positive",
                context={"field": "sync_duration_s"},
            )
        if not 0 <= self.lead_in < self.sync_duration:
            raise ScenarioError(
                "Lead-in must lie in [0, sync_duration)",
                context={"field": "lead_in_s"},
            )
        if self.adc_rate < 0:
            raise ScenarioError("ADC rate must be non-negative", context={"field": "adc_rate_hz"})
        if self.adc_sensor_id is not None and self.adc_sensor_id not in ids:
            raise ScenarioError(
                f"ADC sensor {self.adc_sensor_id!r} is not part of the scenario",
                context={"field": "adc_sensor_id"},
            )

    @property
    def sensor_ids(self) -> List[str]:
        return [sensor.sensor_id for sensor in self.sensors]

    @property
    def adc_enabled(self) -> bool:
        return self.adc_rate > 0

    @property
    def reference_sensor(self) -> SensorConfig:
        """The sensor whose clock stamps the ADC channel."""
        target = self.adc_sensor_id or self.sensors[0].sensor_id
        return self.sensor(target)

    def sensor(self, sensor_id: str) -> SensorConfig:
        for sensor in self.sensors:
            if sensor.sensor_id == sensor_id:
                return sensor
        raise ScenarioError(f"Unknown sensor {sensor_id!r}", context={"field": "sensors.id"})

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=int(seed))

    def with_duration(self, sync_duration: float) -> "Scenario":
        return replace(self, sync_duration=float(sync_duration))

    def with_sensors(self, sensors: List[SensorConfig]) -> "Scenario":
        return replace(self, sensors=tuple(sensors))

    def to_dict(self) -> Dict[str, Any]:
        """Serialize using the scenario-file layout."""
        return {
            "inductor": self.inductor.to_dict(),
            "drive": {
                "freq_hz": self.drive_freq,
                "stability_ppb": self.drive_clock.drift / 1e-9,
            },
            "sensors": [sensor.to_dict() for sensor in self.sensors],
            "sync_duration_s": self.sync_duration,
            "adc_rate_hz": self.adc_rate,
            "seed": self.seed,
            "lead_in_s": self.lead_in,
            "adc_sensor_id": self.adc_sensor_id,
        }


@dataclass(frozen=True)
class GroundTruth:
    """
    Scoring target of one synchronisation procedure.

    `t0_local_true` is the first rising edge as the sensor's magnetometer
    timestamps it (clock plus firmware delay); `t0_local_edge` is the clock-only
    mapping a perfect reference channel would report.
    """

    t0_true: float
    t0_local_true: Dict[str, float]
    t0_local_edge: Dict[str, float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t0_true": self.t0_true,
            "t0_local_true": dict(sorted(self.t0_local_true.items())),
            "t0_local_edge": dict(sorted(self.t0_local_edge.items())),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GroundTruth":
        return cls(
            t0_true=float(data["t0_true"]),
            t0_local_true={k: float(v) for k, v in data["t0_local_true"].items()},
            t0_local_edge={k: float(v) for k, v in data["t0_local_edge"].items()},
        )


@dataclass(frozen=True)
class SyncProcedureOutput:
    """Everything one simulated synchronisation procedure records."""

    magnetometer: Dict[str, SampleSeries]
    adc: Optional[SampleSeries]
    ground_truth: GroundTruth


@dataclass(frozen=True)
class SessionOutput:
    """A measurement session bracketed by two synchronisation procedures."""

    first: SyncProcedureOutput
    second: SyncProcedureOutput
    gap_duration: float
