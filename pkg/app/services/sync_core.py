"""
Sync Core Service

This module recovers the start time t0 of a synchronisation procedure from
one magnetometer series, with sub-sample accuracy.

Pipeline:
    baselines → hits (samples caught mid rising transient) → response indices
    → first-order fits of hit time and hit flux over the index → evaluate both
    at the first response → invert the flux curve for the time since the edge.

Every function is pure; thresholds default to the values in settings and can
be overridden per call.
"""

from typing import List, Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.errors import EstimationError, PhysicsError, ReasonCode
from app.core.logging_config import get_logger
from app.models.estimate import (
    BaselineEstimate,
    FitResult,
    Hit,
    QualityReport,
    QualityWarning,
    SyncEstimate,
)
from app.models.inductor import InductorSpec
from app.models.series import SampleSeries
from app.services import physics

logger = get_logger(__name__)

MAD_TO_SIGMA = 1.4826
TRIM_PERCENTILES = (1.0, 99.0)
CLUSTER_SIGMAS = 3.0


def _cluster_stats(values: np.ndarray) -> tuple:
    """Median, inlier squared deviations and inlier count of one level cluster."""
    median = float(np.median(values))
    mad_sigma = MAD_TO_SIGMA * float(np.median(np.abs(values - median)))
    inliers = values[np.abs(values - median) <= CLUSTER_SIGMAS * mad_sigma]
    return median, float(np.sum((inliers - median) ** 2)), int(inliers.size)


def estimate_baselines(
    series: SampleSeries,
    min_samples: Optional[int] = None,
    snr_min: Optional[float] = None,
) -> BaselineEstimate:
    """
    Estimate the disconnected (b_low) and connected (b_high) flux levels.

    The values are split at the midpoint of their 1st/99th percentiles; each
    level is the median of its cluster. The noise estimate is the pooled
    standard deviation of samples within 3σ (MAD based) of their cluster median.

    Args:
        series: Magnetometer series
        min_samples: Minimum series length (MIN_BASELINE_SAMPLES)
        snr_min: Required K / noise_sigma_hat (BASELINE_SNR_MIN)

    Returns:
        BaselineEstimate

    Raises:
        EstimationError: too-few-samples, or no-drive-signal when the values do
            not form two levels separated by more than snr_min noise sigmas
    """
    min_samples = min_samples if min_samples is not None else settings.MIN_BASELINE_SAMPLES
    snr_min = snr_min if snr_min is not None else settings.BASELINE_SNR_MIN

    values = series.values
    if values.size < min_samples:
        raise EstimationError(
            "Series is too short to estimate baselines",
            reason=ReasonCode.TOO_FEW_SAMPLES,
            context={"sensor_id": series.sensor_id, "n_samples": int(values.size)},
        )

    lo, hi = np.percentile(values, TRIM_PERCENTILES)
    midpoint = 0.5 * (lo + hi)
    low = values[values < midpoint]
    high = values[values >= midpoint]
    if hi <= lo or low.size == 0 or high.size == 0:
        raise EstimationError(
            "Series shows no drive signal",
            reason=ReasonCode.NO_DRIVE_SIGNAL,
            context={"sensor_id": series.sensor_id},
        )

    b_low, ss_low, n_low = _cluster_stats(low)
    b_high, ss_high, n_high = _cluster_stats(high)
    dof = max(n_low + n_high - 2, 1)
    sigma = float(np.sqrt((ss_low + ss_high) / dof))

    K = b_high - b_low
    if K <= 0 or K <= snr_min * sigma:
        raise EstimationError(
            "Flux levels are not separated from the noise",
            reason=ReasonCode.NO_DRIVE_SIGNAL,
            context={"sensor_id": series.sensor_id, "K": K, "noise_sigma_hat": sigma},
        )
    return BaselineEstimate(b_low=b_low, b_high=b_high, noise_sigma_hat=sigma)


def hit_threshold(
    base: BaselineEstimate,
    noise_sigmas: Optional[float] = None,
    flux_fraction: Optional[float] = None,
) -> float:
    """ε = max(noise_sigmas·σ̂, flux_fraction·K)."""
    noise_sigmas = noise_sigmas if noise_sigmas is not None else settings.HIT_NOISE_SIGMAS
    flux_fraction = flux_fraction if flux_fraction is not None else settings.HIT_FLUX_FRACTION
    return max(noise_sigmas * base.noise_sigma_hat, flux_fraction * base.K)


def detect_hits(
    series: SampleSeries,
    base: BaselineEstimate,
    drive_freq: Optional[float] = None,
    noise_sigmas: Optional[float] = None,
    flux_fraction: Optional[float] = None,
) -> List[Hit]:
    """
    Samples acquired during a rising transient response.

    A sample is a hit when its value lies in (b_low + ε, b_high − ε), its
    predecessor is within ε of b_low and its successor is within ε of b_high.
    When drive_freq is given, a candidate closer than half a drive period to
    the previous hit is dropped.

    Returns:
        Hits in time order, k = value − b_low, indices unset
    """
    eps = hit_threshold(base, noise_sigmas, flux_fraction)
    v = series.values
    t = series.times
    if v.size < 3:
        return []

    mid = v[1:-1]
    mask = (
        (mid > base.b_low + eps)
        & (mid < base.b_high - eps)
        & (np.abs(v[:-2] - base.b_low) <= eps)
        & (np.abs(v[2:] - base.b_high) <= eps)
    )
    positions = np.flatnonzero(mask) + 1

    hits: List[Hit] = []
    min_gap = 0.5 / drive_freq if drive_freq else 0.0
    for j in positions:
        if hits and t[j] - hits[-1].t < min_gap:
            continue
        hits.append(Hit(t=float(t[j]), k=float(v[j] - base.b_low)))

    logger.debug(
        "Hits detected",
        sensor_id=series.sensor_id,
        n_hits=len(hits),
        epsilon=eps,
    )
    return hits


def find_onset(
    series: SampleSeries,
    base: BaselineEstimate,
    noise_sigmas: Optional[float] = None,
    flux_fraction: Optional[float] = None,
) -> float:
    """
    Local time of the first sample after the procedure's first rising edge.

    That is the first sample which, together with its successor, lies more
    than ε above b_low while its predecessor is still within ε of b_low.

    Raises:
        EstimationError: no-drive-signal if the series has no such transition
    """
    eps = hit_threshold(base, noise_sigmas, flux_fraction)
    v = series.values
    if v.size >= 3:
        above = v > base.b_low + eps
        low_before = np.abs(v[:-2] - base.b_low) <= eps
        onsets = np.flatnonzero(low_before & above[1:-1] & above[2:]) + 1
        if onsets.size:
            return float(series.times[onsets[0]])
    raise EstimationError(
        "Series contains no rising transition",
        reason=ReasonCode.NO_DRIVE_SIGNAL,
        context={"sensor_id": series.sensor_id},
    )


def assign_indices(
    hits: Sequence[Hit],
    drive_freq: float,
    onset: Optional[float] = None,
    residual_limit: Optional[float] = None,
) -> List[Hit]:
    """
    Assign each hit the number i of the transient response it belongs to.

    The first hit is anchored on the onset (index 1 without one); every other
    hit gets i = round((t − t_first)·drive_freq) + i_first.

    Args:
        hits: Hits in time order
        drive_freq: Drive frequency known a priori, hertz
        onset: Local time of the procedure onset (see find_onset)
        residual_limit: Maximum rounding residual in drive periods (INDEX_RESIDUAL_LIMIT)

    Returns:
        Hits with indices filled

    Raises:
        EstimationError: too-few-hits for an empty list, index-residual when a
            hit does not fall on the period grid or two hits share an index
    """
    limit = residual_limit if residual_limit is not None else settings.INDEX_RESIDUAL_LIMIT
    if not hits:
        raise EstimationError("No hits to index", reason=ReasonCode.TOO_FEW_HITS)
    if drive_freq <= 0:
        raise EstimationError(
            "Drive frequency must be positive",
            reason=ReasonCode.INVALID_ARGUMENT,
            context={"drive_freq": drive_freq},
        )

    times = np.array([hit.t for hit in hits], dtype=float)
    t_first = times[0]

    i_first = 1
    if onset is not None:
        periods = (t_first - onset) * drive_freq
        anchor_residual = abs(periods - np.round(periods))
        if periods < -limit or anchor_residual >= limit:
            raise EstimationError(
                "First hit does not align with the procedure onset",
                reason=ReasonCode.INDEX_RESIDUAL,
                context={"residual": float(anchor_residual)},
            )
        i_first = int(np.round(periods)) + 1

    periods = (times - t_first) * drive_freq
    rounded = np.round(periods)
    residuals = np.abs(periods - rounded)
    worst = float(residuals.max())
    if worst >= limit:
        raise EstimationError(
            "Hit times do not follow the drive period",
            reason=ReasonCode.INDEX_RESIDUAL,
            context={"max_residual": worst, "limit": limit},
        )

    indices = rounded.astype(int) + i_first
    if np.any(np.diff(indices) <= 0):
        raise EstimationError(
            "Two hits map onto the same transient response",
            reason=ReasonCode.INDEX_RESIDUAL,
        )
    return [hit.with_index(i) for hit, i in zip(hits, indices)]


def fit_linear(xs: Sequence[float], ys: Sequence[float]) -> FitResult:
    """
    Ordinary least-squares line through (xs, ys).

    Returns:
        FitResult with r_squared = 1 − SS_res/SS_tot (1 when ys are constant
        and fitted exactly)

    Raises:
        EstimationError: too-few-hits below 3 points, degenerate-fit when all
            xs are equal
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size != y.size:
        raise EstimationError(
            "xs and ys differ in length",
            reason=ReasonCode.INVALID_ARGUMENT,
            context={"n_x": int(x.size), "n_y": int(y.size)},
        )
    if x.size < 3:
        raise EstimationError(
            "A first-order fit needs at least three points",
            reason=ReasonCode.TOO_FEW_HITS,
            context={"n_points": int(x.size)},
        )
    if np.ptp(x) == 0:
        raise EstimationError("All abscissae are equal", reason=ReasonCode.DEGENERATE_FIT)

    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    ss_res = float(np.sum(residuals**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0:
        r_squared = 1.0
    else:
        r_squared = float(np.clip(1.0 - ss_res / ss_tot, 0.0, 1.0))
    return FitResult(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r_squared,
        n_points=int(x.size),
    )


def estimate_t0(
    series: SampleSeries,
    spec: InductorSpec,
    drive_freq: float,
    min_hits: Optional[int] = None,
    noise_sigmas: Optional[float] = None,
    flux_fraction: Optional[float] = None,
    residual_limit: Optional[float] = None,
) -> SyncEstimate:
    """
    Estimate the local start time of a synchronisation procedure.

    Args:
        series: Magnetometer series covering the procedure
        spec: Drive inductor (for τ)
        drive_freq: Drive frequency, hertz
        min_hits: Hits required for the fits (MIN_HITS)
        noise_sigmas: Hit threshold in noise sigmas (HIT_NOISE_SIGMAS)
        flux_fraction: Hit threshold as a fraction of K (HIT_FLUX_FRACTION)
        residual_limit: Index residual limit in periods (INDEX_RESIDUAL_LIMIT)

    Returns:
        SyncEstimate with t0 = t1_hat − t_TR

    Raises:
        EstimationError: any rejection of the series, including
            extrapolated-flux-out-of-range when k1_hat/K falls outside (0, 1)
            or t_TR reaches the full transient duration
    """
    min_hits = min_hits if min_hits is not None else settings.MIN_HITS

    base = estimate_baselines(series)
    hits = detect_hits(series, base, drive_freq, noise_sigmas, flux_fraction)
    if len(hits) < min_hits:
        raise EstimationError(
            "Too few hits to estimate the procedure start",
            reason=ReasonCode.TOO_FEW_HITS,
            context={"sensor_id": series.sensor_id, "n_hits": len(hits), "min_hits": min_hits},
        )
    onset = find_onset(series, base, noise_sigmas, flux_fraction)
    hits = assign_indices(hits, drive_freq, onset=onset, residual_limit=residual_limit)

    indices = [hit.index for hit in hits]
    time_fit = fit_linear(indices, [hit.t for hit in hits])
    flux_fit = fit_linear(indices, [hit.k for hit in hits])
    t1_hat = time_fit.at(1.0)
    k1_hat = flux_fit.at(1.0)

    ratio = k1_hat / base.K
    try:
        t_tr = float(physics.inverse_flux_time(spec, ratio))
    except PhysicsError as e:
        raise EstimationError(
            "Extrapolated flux of the first response is out of range",
            reason=ReasonCode.FLUX_OUT_OF_RANGE,
            context={"sensor_id": series.sensor_id, "flux_ratio": ratio, "cause": e.reason.value},
        ) from e
    if t_tr >= physics.transient_duration(spec):
        raise EstimationError(
            "Extrapolated flux of the first response lies beyond the transient",
            reason=ReasonCode.FLUX_OUT_OF_RANGE,
            context={"sensor_id": series.sensor_id, "t_TR": t_tr, "tau": spec.tau},
        )

    estimate = SyncEstimate(
        sensor_id=series.sensor_id,
        t1_hat=t1_hat,
        k1_hat=k1_hat,
        t_TR=t_tr,
        t0=t1_hat - t_tr,
        time_fit=time_fit,
        flux_fit=flux_fit,
        baseline=base,
        tau=spec.tau,
        hits=hits,
    )
    logger.debug(
        "Procedure start estimated",
        sensor_id=series.sensor_id,
        t0=estimate.t0,
        n_hits=estimate.n_hits,
        r2_time=time_fit.r_squared,
    )
    return estimate


def sync_quality(
    est: SyncEstimate,
    recommended_hits: Optional[int] = None,
    near_saturation_taus: Optional[float] = None,
) -> QualityReport:
    """Quality metrics and warnings for one estimate."""
    recommended_hits = (
        recommended_hits if recommended_hits is not None else settings.RECOMMENDED_HITS
    )
    near_saturation_taus = (
        near_saturation_taus
        if near_saturation_taus is not None
        else settings.NEAR_SATURATION_TAUS
    )

    warnings: List[QualityWarning] = []
    if est.n_hits < recommended_hits:
        warnings.append(QualityWarning.BELOW_RECOMMENDED_DURATION)
    ttr_over_tau = est.t_TR / est.tau
    if ttr_over_tau > near_saturation_taus:
        warnings.append(QualityWarning.NEAR_SATURATION_HIT)

    spacing = None
    if est.n_hits >= 2:
        spacing = float(np.mean(np.diff([hit.t for hit in est.hits])))

    return QualityReport(
        n_hits=est.n_hits,
        r2_time=est.time_fit.r_squared,
        r2_flux=est.flux_fit.r_squared,
        ttr_over_tau=ttr_over_tau,
        hit_spacing=spacing,
        warnings=warnings,
    )
