"""
Sample Series Model

This module defines SampleSeries, one sensor channel's timestamped trace.
Timestamps are in the sensor's local clock; magnetometer values are tesla,
ADC values volt.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict

import numpy as np

from app.core.errors import ReasonCode, SeriesFormatError


class Channel(str, Enum):
    """Recorded channel."""

    MAGNETOMETER = "magnetometer"
    ADC = "adc"


class Unit(str, Enum):
    """Internal value unit."""

    TESLA = "tesla"
    VOLT = "volt"


@dataclass(frozen=True)
class SampleSeries:
    """
    One channel trace: strictly increasing local timestamps and their values.

    Arrays are copied and made read-only on construction.
    """

    sensor_id: str
    channel: Channel
    nominal_rate: float
    unit: Unit
    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=float)
        values = np.array(self.values, dtype=float)
        if times.ndim != 1 or values.shape != times.shape:
            raise SeriesFormatError(
                "Timestamps and values must be 1-D arrays of equal length",
                context={"sensor_id": self.sensor_id},
            )
        if times.size == 0:
            raise SeriesFormatError(
                "Series contains no samples",
                reason=ReasonCode.EMPTY_SERIES,
                context={"sensor_id": self.sensor_id},
            )
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise SeriesFormatError(
                "Series contains non-finite samples",
                context={"sensor_id": self.sensor_id},
            )
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise SeriesFormatError(
                "Timestamps must be strictly increasing",
                context={"sensor_id": self.sensor_id},
            )
        if self.nominal_rate <= 0:
            raise SeriesFormatError(
                "Nominal rate must be positive",
                context={"sensor_id": self.sensor_id},
            )
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "channel", Channel(self.channel))
        object.__setattr__(self, "unit", Unit(self.unit))

    def __len__(self) -> int:
        return int(self.times.size)

    def with_times(self, times: np.ndarray) -> "SampleSeries":
        """Return a copy carrying new timestamps and the same values."""
        return SampleSeries(
            sensor_id=self.sensor_id,
            channel=self.channel,
            nominal_rate=self.nominal_rate,
            unit=self.unit,
            times=times,
            values=self.values,
        )

    def with_values(self, values: np.ndarray) -> "SampleSeries":
        """Return a copy carrying new values and the same timestamps."""
        return SampleSeries(
            sensor_id=self.sensor_id,
            channel=self.channel,
            nominal_rate=self.nominal_rate,
            unit=self.unit,
            times=self.times,
            values=values,
        )

    def to_dict(self) -> Dict[str, Any]:
        """Metadata summary (samples are written as CSV, not JSON)."""
        return {
            "sensor_id": self.sensor_id,
            "channel": self.channel.value,
            "nominal_rate": self.nominal_rate,
            "unit": self.unit.value,
            "n_samples": len(self),
            "t_first": float(self.times[0]),
            "t_last": float(self.times[-1]),
        }
