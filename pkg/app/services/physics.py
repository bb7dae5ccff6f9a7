"""
Inductor Physics Service

This module provides the closed-form transient response of the drive
inductor and the resulting flux density, forward and inverse.

When the supply is connected the current rises as I·(1 − e^(−t/τ)) and the
flux density at the coil follows as B_sat·(1 − e^(−t/τ)), B_sat = μ·N·I/l.
The estimator only ever needs τ and the ratio k/K of measured flux above the
baseline to the total flux delta, so the inverse is expressed on that ratio.
"""

from typing import Tuple, Union

import numpy as np

from app.core.errors import PhysicsError, ReasonCode
from app.models.inductor import InductorSpec

ArrayLike = Union[float, np.ndarray]

FULL_TRANSIENT_TAUS = 5.0


def _as_result(value: np.ndarray) -> ArrayLike:
    return float(value) if np.ndim(value) == 0 else value


def _check_non_negative(t: ArrayLike) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise PhysicsError(
            "Time since the switching edge must be non-negative",
            reason=ReasonCode.NEGATIVE_TIME,
        )
    return arr


def time_constant(spec: InductorSpec) -> float:
    """
    Time constant of the inductor.

    Args:
        spec: Inductor constants

    Returns:
        L/R in seconds
    """
    return spec.tau


def transient_duration(spec: InductorSpec, n_tau: float = FULL_TRANSIENT_TAUS) -> float:
    """Duration after which the transient counts as complete (n_tau·τ)."""
    return n_tau * spec.tau


def max_drive_frequency(spec: InductorSpec) -> float:
    """Highest drive frequency that lets every transient complete: 1/(5τ)."""
    return 1.0 / transient_duration(spec)


def flux_at(spec: InductorSpec, t: ArrayLike) -> ArrayLike:
    """
    Flux density t seconds after the supply is connected.

    Args:
        spec: Inductor constants
        t: Time since the rising edge (scalar or array), seconds

    Returns:
        B_sat·(1 − e^(−t/τ)) in tesla

    Raises:
        PhysicsError: if any t is negative
    """
    arr = _check_non_negative(t)
    return _as_result(-spec.b_sat * np.expm1(-arr / spec.tau))


def decay_flux_at(spec: InductorSpec, t: ArrayLike) -> ArrayLike:
    """
    Flux density t seconds after the supply is disconnected from saturation.

    Returns:
        B_sat·e^(−t/τ) in tesla
    """
    arr = _check_non_negative(t)
    return _as_result(spec.b_sat * np.exp(-arr / spec.tau))


def inverse_flux_time(spec: InductorSpec, flux_ratio: ArrayLike) -> ArrayLike:
    """
    Time since the rising edge at which the flux reaches a given ratio of its delta.

    Args:
        spec: Inductor constants
        flux_ratio: k/K, measured flux above baseline over the total flux delta

    Returns:
        −τ·ln(1 − k/K) in seconds

    Raises:
        PhysicsError: "below-baseline" for ratio ≤ 0, "in-saturation" for ratio ≥ 1
    """
    ratio = np.asarray(flux_ratio, dtype=float)
    if np.any(~np.isfinite(ratio)) or np.any(ratio <= 0):
        raise PhysicsError(
            "Flux ratio is at or below the baseline",
            reason=ReasonCode.BELOW_BASELINE,
            context={"flux_ratio": _as_result(ratio)},
        )
    if np.any(ratio >= 1):
        raise PhysicsError(
            "Flux ratio is at or above saturation",
            reason=ReasonCode.IN_SATURATION,
            context={"flux_ratio": _as_result(ratio)},
        )
    return _as_result(-spec.tau * np.log1p(-ratio))


def usable_window(spec: InductorSpec, flux_fraction: float) -> Tuple[float, float]:
    """
    Interval after a rising edge in which a sample can qualify as a hit.

    A hit needs its flux ratio inside (flux_fraction, 1 − flux_fraction).

    Returns:
        (t_lo, t_hi) in seconds
    """
    if not 0 < flux_fraction < 0.5:
        raise PhysicsError(
            "Flux fraction must lie in (0, 0.5)",
            reason=ReasonCode.INVALID_ARGUMENT,
            context={"flux_fraction": flux_fraction},
        )
    t_lo = inverse_flux_time(spec, flux_fraction)
    t_hi = inverse_flux_time(spec, 1.0 - flux_fraction)
    return float(t_lo), float(t_hi)
