"""
Error Types

This module defines the exception hierarchy used across magsync.
Every error carries a machine-readable reason code which the CLI reports
and maps onto its exit status.
"""

from enum import Enum
from typing import Any, Dict, Optional


class ReasonCode(str, Enum):
    """Machine-readable failure reasons."""

    # physics
    NEGATIVE_TIME = "negative-time"
    BELOW_BASELINE = "below-baseline"
    IN_SATURATION = "in-saturation"
    INVALID_INDUCTOR = "invalid-inductor"

    # clocks
    NON_MONOTONE_CLOCK = "non-monotone-clock"
    JITTER_TOO_LARGE = "jitter-too-large"
    INVALID_SAMPLING = "invalid-sampling"

    # scenario
    SCHEMA_VIOLATION = "schema-violation"
    DRIVE_FREQUENCY_TOO_HIGH = "drive-frequency-too-high"
    UNRESOLVABLE_SIGNAL = "unresolvable-signal"
    NO_REFERENCE_EDGE = "no-reference-edge"

    # estimation
    EMPTY_SERIES = "empty-series"
    TOO_FEW_SAMPLES = "too-few-samples"
    NO_DRIVE_SIGNAL = "no-drive-signal"
    TOO_FEW_HITS = "too-few-hits"
    INDEX_RESIDUAL = "index-residual"
    DEGENERATE_FIT = "degenerate-fit"
    FLUX_OUT_OF_RANGE = "extrapolated-flux-out-of-range"

    # alignment
    NON_POSITIVE_INTERVAL = "non-positive-interval"
    UNKNOWN_REFERENCE = "unknown-reference"
    SINGLE_EVENT = "single-event"

    # io
    BAD_SERIES_FILE = "bad-series-file"
    INVALID_ARGUMENT = "invalid-argument"


class MagSyncError(Exception):
    """Base error carrying a reason code and optional context."""

    default_reason = ReasonCode.INVALID_ARGUMENT

    def __init__(
        self,
        message: str,
        reason: Optional[ReasonCode] = None,
        context: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.message = message
        self.reason = reason or self.default_reason
        self.context = context or {}

    def to_dict(self) -> Dict[str, Any]:
        """Serialize the error for CLI output."""
        return {
            "error": self.reason.value,
            "message": self.message,
            "context": self.context,
        }


class PhysicsError(MagSyncError):
    """Invalid input to the inductor/flux model."""

    default_reason = ReasonCode.INVALID_INDUCTOR


class ClockError(MagSyncError):
    """Invalid clock configuration or sampling request."""

    default_reason = ReasonCode.NON_MONOTONE_CLOCK


class ScenarioError(MagSyncError):
    """Scenario constraint or schema violation."""

    default_reason = ReasonCode.SCHEMA_VIOLATION


class EstimationError(MagSyncError):
    """The estimator rejected a series."""

    default_reason = ReasonCode.NO_DRIVE_SIGNAL


class AlignmentError(MagSyncError):
    """An alignment map could not be built."""

    default_reason = ReasonCode.NON_POSITIVE_INTERVAL


class SeriesFormatError(MagSyncError):
    """A series file could not be parsed."""

    default_reason = ReasonCode.BAD_SERIES_FILE
