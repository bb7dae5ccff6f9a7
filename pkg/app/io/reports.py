"""
Report Writers

JSON documents are written with orjson (sorted keys, two-space indent) and
tables with pandas, so reruns with the same seed are byte-identical.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import orjson
import pandas as pd

from app.core.errors import MagSyncError, ReasonCode

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY
TABLE_FLOAT_FORMAT = "%.12g"


def dumps_json(data: Any) -> bytes:
    """Serialize to deterministic JSON bytes with a trailing newline."""
    return orjson.dumps(data, option=JSON_OPTIONS) + b"\n"


def write_json(path: Union[str, Path], data: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps_json(data))
    return path


def read_json(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Load a JSON document written by this package.

    Raises:
        MagSyncError: invalid-argument for a missing or malformed file
    """
    path = Path(path)
    try:
        return orjson.loads(path.read_bytes())
    except FileNotFoundError as e:
        raise MagSyncError(
            f"File not found: {path}",
            reason=ReasonCode.INVALID_ARGUMENT,
            context={"path": str(path)},
        ) from e
    except orjson.JSONDecodeError as e:
        raise MagSyncError(
            f"Invalid JSON in {path}: {e}",
            reason=ReasonCode.INVALID_ARGUMENT,
            context={"path": str(path)},
        ) from e


def write_table(
    path: Union[str, Path],
    rows: Sequence[Dict[str, Any]],
    columns: Optional[List[str]] = None,
) -> Path:
    """Write rows as CSV; `columns` fixes the column order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(rows), columns=columns)
    frame.to_csv(path, index=False, float_format=TABLE_FLOAT_FORMAT, lineterminator="\n")
    return path


def read_table(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")
