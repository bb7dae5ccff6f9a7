"""
Clock Service

This module maps true time onto a sensor's local timeline and back, and
draws the sample instants a sensor records during a procedure.
"""

from typing import Tuple, Union

import numpy as np

from app.core.errors import ClockError, ReasonCode
from app.core.logging_config import get_logger
from app.models.clock import ClockModel

logger = get_logger(__name__)

ArrayLike = Union[float, np.ndarray]

NEWTON_TOLERANCE = 1e-12
NEWTON_MAX_ITER = 50
JITTER_TRUNCATION = 0.49  # of one sample interval


def _as_result(value: np.ndarray) -> ArrayLike:
    return float(value) if np.ndim(value) == 0 else value


def local_from_true(clock: ClockModel, t_true: ArrayLike) -> ArrayLike:
    """
    Local timestamp of a true instant (no jitter).

    Args:
        clock: Sensor clock
        t_true: True time(s) in seconds

    Returns:
        offset + (1 + drift)·t + quad·t²
    """
    t = np.asarray(t_true, dtype=float)
    return _as_result(clock.offset + (1.0 + clock.drift) * t + clock.quad * t * t)


def true_from_local(clock: ClockModel, t_local: ArrayLike) -> ArrayLike:
    """
    True instant of a local timestamp.

    Exact for linear clocks; otherwise Newton iteration from the linear
    solution until the correction is below 1e-12 s.
    """
    local = np.asarray(t_local, dtype=float)
    t = (local - clock.offset) / (1.0 + clock.drift)
    if clock.is_linear:
        return _as_result(t)

    for _ in range(NEWTON_MAX_ITER):
        residual = clock.offset + (1.0 + clock.drift) * t + clock.quad * t * t - local
        slope = 1.0 + clock.drift + 2.0 * clock.quad * t
        if np.any(slope <= 0):
            raise ClockError(
                "Clock mapping is not monotone at the requested time",
                reason=ReasonCode.NON_MONOTONE_CLOCK,
            )
        step = residual / slope
        t = t - step
        if np.all(np.abs(step) < NEWTON_TOLERANCE):
            break
    return _as_result(t)


def deviation(clock: ClockModel, t_true: ArrayLike) -> ArrayLike:
    """How far the local clock runs ahead of true time."""
    t = np.asarray(t_true, dtype=float)
    return _as_result(np.asarray(local_from_true(clock, t)) - t)


def sample_times(
    clock: ClockModel,
    rate: float,
    t_start_true: float,
    duration: float,
    seed: Union[int, np.random.SeedSequence, np.random.Generator],
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Sample instants of a sensor recording at `rate` for `duration` seconds.

    The true-time grid has 1/rate spacing, starts at a uniformly random
    phase in [0, 1/rate) after t_start_true and covers the half-open window
    [t_start_true, t_start_true + duration). Local timestamps carry Gaussian
    jitter truncated to ±0.49 sample interval so they stay strictly increasing.

    Args:
        clock: Sensor clock
        rate: Sampling rate in hertz
        t_start_true: True time at which the recording starts
        duration: Recording length in seconds
        seed: Seed, SeedSequence or Generator; same seed, same output

    Returns:
        (t_true, t_local) arrays
    """
    if rate <= 0 or duration <= 0:
        raise ClockError(
            "Sampling rate and duration must be positive",
            reason=ReasonCode.INVALID_SAMPLING,
            context={"rate": rate, "duration": duration},
        )
    interval = 1.0 / rate
    if clock.jitter_sigma >= 0.5 * interval:
        raise ClockError(
            "Timestamp jitter must stay below half the sampling interval",
            reason=ReasonCode.JITTER_TOO_LARGE,
            context={"jitter_sigma": clock.jitter_sigma, "interval": interval},
        )

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    phase = rng.uniform(0.0, interval)
    # half-open window [start, start + duration)
    n_samples = int(np.ceil((duration - phase) * rate - 1e-9))
    t_true = t_start_true + phase + np.arange(max(n_samples, 0)) * interval

    t_local = np.asarray(local_from_true(clock, t_true), dtype=float)
    if clock.jitter_sigma > 0:
        bound = JITTER_TRUNCATION * interval
        jitter = np.clip(rng.normal(0.0, clock.jitter_sigma, size=t_true.size), -bound, bound)
        t_local = t_local + jitter

    logger.debug(
        "Sample times drawn",
        rate=rate,
        n_samples=int(t_true.size),
        phase=phase,
        jitter_sigma=clock.jitter_sigma,
    )
    return t_true, t_local
