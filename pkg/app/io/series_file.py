"""
Series File

CSV format of one channel trace:

    # sensor_id=imu1
    # channel=magnetometer
    # rate_hz=99.90243902439025
    # unit=gauss
    t_local_s,value
    0.0012,0.0

Magnetometer values are stored in gauss and held in tesla in memory.
Floats are written with 17 significant digits so timestamps read back
bit-exact.
"""

from pathlib import Path
from typing import Dict, List, Tuple, Union

import pandas as pd

from app.core.errors import ReasonCode, SeriesFormatError
from app.models.scenario import GAUSS, NOMINAL_MAG_RATE_HZ
from app.models.series import Channel, SampleSeries, Unit

COLUMNS = ["t_local_s", "value"]
FLOAT_FORMAT = "%.17g"

_FILE_UNITS = {"gauss": Unit.TESLA, "volt": Unit.VOLT}


def _file_unit(unit: Unit) -> str:
    return "gauss" if unit == Unit.TESLA else "volt"


def write_series(series: SampleSeries, path: Union[str, Path]) -> Path:
    """Write a series as a commented CSV file and return its path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    scale = GAUSS if series.unit == Unit.TESLA else 1.0
    frame = pd.DataFrame({"t_local_s": series.times, "value": series.values / scale})

    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(f"# sensor_id={series.sensor_id}\n")
        handle.write(f"# channel={series.channel.value}\n")
        handle.write(f"# rate_hz={series.nominal_rate!r}\n")
        handle.write(f"# unit={_file_unit(series.unit)}\n")
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def _read_header(path: Path) -> Tuple[Dict[str, str], int]:
    meta: Dict[str, str] = {}
    n_comment = 0
    with path.open("r", encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            n_comment += 1
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                meta[key.strip()] = value.strip()
    return meta, n_comment


def read_series(path: Union[str, Path]) -> SampleSeries:
    """
    Parse a series file.

    Missing metadata falls back to: sensor id = file stem, channel
    magnetometer, nominal magnetometer rate, unit gauss.

    Raises:
        SeriesFormatError: empty-series for a file without samples,
            bad-series-file for malformed content
    """
    path = Path(path)
    if not path.exists():
        raise SeriesFormatError(f"Series file not found: {path}", context={"path": str(path)})

    meta, n_comment = _read_header(path)
    try:
        frame = pd.read_csv(path, skiprows=n_comment, float_precision="round_trip")
    except pd.errors.EmptyDataError as e:
        raise SeriesFormatError(
            "Series file contains no samples",
            reason=ReasonCode.EMPTY_SERIES,
            context={"path": str(path)},
        ) from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise SeriesFormatError(f"Malformed series file: {e}", context={"path": str(path)}) from e

    if list(frame.columns) != COLUMNS:
        raise SeriesFormatError(
            f"Series file header must be {','.join(COLUMNS)}",
            context={"path": str(path), "columns": [str(c) for c in frame.columns]},
        )
    if frame.empty:
        raise SeriesFormatError(
            "Series file contains no samples",
            reason=ReasonCode.EMPTY_SERIES,
            context={"path": str(path)},
        )

    try:
        channel = Channel(meta.get("channel", Channel.MAGNETOMETER.value))
        unit = _FILE_UNITS[meta.get("unit", "gauss")]
        rate = float(meta.get("rate_hz", NOMINAL_MAG_RATE_HZ))
        times = pd.to_numeric(frame["t_local_s"]).to_numpy(dtype=float)
        values = pd.to_numeric(frame["value"]).to_numpy(dtype=float)
    except (KeyError, ValueError) as e:
        raise SeriesFormatError(f"Malformed series file: {e}", context={"path": str(path)}) from e

    scale = GAUSS if unit == Unit.TESLA else 1.0
    return SampleSeries(
        sensor_id=meta.get("sensor_id", path.stem),
        channel=channel,
        nominal_rate=rate,
        unit=unit,
        times=times,
        values=values * scale,
    )


def series_filename(series: SampleSeries) -> str:
    """File name used for a series inside an output directory."""
    if series.channel == Channel.ADC:
        return f"{series.sensor_id}_adc.csv"
    return f"{series.sensor_id}.csv"


def list_series(directory: Union[str, Path]) -> List[Path]:
    """Magnetometer series files of a simulation output directory, sorted."""
    return sorted(p for p in Path(directory).glob("*.csv") if not p.stem.endswith("_adc"))
