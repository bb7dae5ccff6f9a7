# -*- coding: utf-8 -*-
"""
Tests for the t0 estimator
"""
import numpy as np
import pytest
from hypothesis import assume, given, settings as hyp_settings
from hypothesis import strategies as st

from app.core.errors import EstimationError, ReasonCode
from app.models.estimate import BaselineEstimate, FitResult, Hit, QualityWarning, SyncEstimate
from app.models.series import Channel, SampleSeries, Unit
from app.services import simulator, sync_core

K = 2e-4


def make_series(values, rate=100.0, start=0.0):
    times = start + np.arange(len(values)) / rate
    return SampleSeries("imu1", Channel.MAGNETOMETER, rate, Unit.TESLA, times, values)


def simulated(scenario, sensor_id="imu1"):
    output = simulator.run_sync_procedure(scenario, check=False)
    return output.magnetometer[sensor_id], output.ground_truth


class TestBaselines:
    def test_two_level_signal(self):
        series = make_series(np.tile([0.0, 0.0, 0.0, 0.0, K, K, K, K], 25))
        base = sync_core.estimate_baselines(series)
        assert base.b_low == 0.0
        assert base.b_high == K
        assert base.noise_sigma_hat == 0.0
        assert base.K == K

    def test_constant_series_has_no_drive_signal(self):
        with pytest.raises(EstimationError) as exc:
            sync_core.estimate_baselines(make_series(np.full(200, 1e-5)))
        assert exc.value.reason == ReasonCode.NO_DRIVE_SIGNAL

    def test_pure_noise_has_no_drive_signal(self):
        noise = np.random.default_rng(0).normal(0.0, 1e-6, size=1000)
        with pytest.raises(EstimationError) as exc:
            sync_core.estimate_baselines(make_series(noise))
        assert exc.value.reason == ReasonCode.NO_DRIVE_SIGNAL

    def test_short_series(self):
        with pytest.raises(EstimationError) as exc:
            sync_core.estimate_baselines(make_series(np.tile([0.0, K], 5)))
        assert exc.value.reason == ReasonCode.TOO_FEW_SAMPLES

    def test_simulated_levels(self, single_scenario):
        series, _ = simulated(single_scenario)
        base = sync_core.estimate_baselines(series)
        sensor = single_scenario.sensors[0]
        assert base.b_low == pytest.approx(0.0, abs=2 * sensor.lsb)
        assert base.K == pytest.approx(sensor.flux_delta, rel=0.01)
        assert 0 < base.noise_sigma_hat < 4 * sensor.noise_sigma


class TestHits:
    def test_threshold(self):
        base = BaselineEstimate(b_low=0.0, b_high=K, noise_sigma_hat=1e-6)
        assert sync_core.hit_threshold(base) == pytest.approx(4e-6)
        assert sync_core.hit_threshold(base, noise_sigmas=10.0) == pytest.approx(1e-5)

    def test_steady_levels_produce_no_hits(self):
        series = make_series(np.tile([0.0] * 8 + [K] * 8, 20))
        base = sync_core.estimate_baselines(series)
        assert sync_core.detect_hits(series, base, drive_freq=6.0) == []

    def test_transient_samples_are_hits(self):
        period = [0.0] * 8 + [0.4 * K] + [K] * 7
        series = make_series(np.tile(period, 10))
        base = sync_core.estimate_baselines(series)
        hits = sync_core.detect_hits(series, base)
        assert len(hits) == 10
        assert all(hit.k == pytest.approx(0.4 * K) for hit in hits)
        assert hits[1].t - hits[0].t == pytest.approx(0.16)

    def test_hits_too_close_are_dropped(self):
        period = [0.0] * 8 + [0.4 * K] + [K] * 7
        series = make_series(np.tile(period, 10))
        base = sync_core.estimate_baselines(series)
        # 0.16 s apart is closer than half a 2 Hz period
        hits = sync_core.detect_hits(series, base, drive_freq=2.0)
        assert len(hits) == 5

    def test_hit_count_matches_beat_expectation(self, single_scenario):
        sensor = single_scenario.sensors[0]
        counts = []
        for seed in range(1, 11):
            series, _ = simulated(single_scenario.with_seed(seed))
            base = sync_core.estimate_baselines(series)
            counts.append(len(sync_core.detect_hits(series, base, single_scenario.drive_freq)))
        active = single_scenario.sync_duration - single_scenario.lead_in
        expected = simulator.expected_hits_per_second(single_scenario, sensor) * active
        assert np.mean(counts) == pytest.approx(expected, rel=0.2)

    def test_onset_is_first_sample_after_the_first_edge(self, noiseless_scenario):
        series, truth = simulated(noiseless_scenario)
        base = sync_core.estimate_baselines(series)
        onset = sync_core.find_onset(series, base)
        edge = truth.t0_local_true["imu1"]
        assert edge < onset <= edge + 2.0 / noiseless_scenario.sensors[0].mag_rate


class TestIndices:
    def test_indices_follow_the_drive_period(self):
        hits = [Hit(t=0.5 + n / 6 + 5e-4, k=1e-4) for n in (0, 2, 3, 7)]
        indexed = sync_core.assign_indices(hits, 6.0)
        assert [hit.index for hit in indexed] == [1, 3, 4, 8]

    def test_onset_anchors_the_first_index(self):
        hits = [Hit(t=0.5 + n / 6 + 5e-4, k=1e-4) for n in (0, 2, 3, 7)]
        indexed = sync_core.assign_indices(hits, 6.0, onset=0.5 - 2 / 6)
        assert [hit.index for hit in indexed] == [3, 5, 6, 10]

    def test_wrong_drive_frequency_is_rejected(self):
        hits = [Hit(t=n / 6, k=1e-4) for n in range(0, 60, 7)]
        with pytest.raises(EstimationError) as exc:
            sync_core.assign_indices(hits, 6.6)
        assert exc.value.reason == ReasonCode.INDEX_RESIDUAL

    def test_clock_drift_over_thirty_seconds_is_tolerated(self):
        hits = [Hit(t=n / 6 * (1 + 30e-6), k=1e-4) for n in range(0, 180, 5)]
        indexed = sync_core.assign_indices(hits, 6.0)
        assert [hit.index for hit in indexed] == [n + 1 for n in range(0, 180, 5)]

    def test_two_hits_in_one_response(self):
        hits = [Hit(t=1.0, k=1e-4), Hit(t=1.01, k=1.1e-4)]
        with pytest.raises(EstimationError) as exc:
            sync_core.assign_indices(hits, 6.0)
        assert exc.value.reason == ReasonCode.INDEX_RESIDUAL

    def test_no_hits(self):
        with pytest.raises(EstimationError) as exc:
            sync_core.assign_indices([], 6.0)
        assert exc.value.reason == ReasonCode.TOO_FEW_HITS


class TestFit:
    def test_exact_line(self):
        fit = sync_core.fit_linear([1, 2, 3, 4], [3, 5, 7, 9])
        assert fit.slope == pytest.approx(2.0)
        assert fit.intercept == pytest.approx(1.0)
        assert fit.r_squared == pytest.approx(1.0)
        assert fit.at(0.0) == pytest.approx(1.0)

    def test_constant_ys(self):
        fit = sync_core.fit_linear([1, 2, 3], [4.0, 4.0, 4.0])
        assert fit.slope == pytest.approx(0.0, abs=1e-12)
        assert fit.r_squared == 1.0

    def test_two_points(self):
        with pytest.raises(EstimationError) as exc:
            sync_core.fit_linear([1, 2], [1, 2])
        assert exc.value.reason == ReasonCode.TOO_FEW_HITS

    def test_equal_abscissae(self):
        with pytest.raises(EstimationError) as exc:
            sync_core.fit_linear([2, 2, 2], [1, 2, 3])
        assert exc.value.reason == ReasonCode.DEGENERATE_FIT

    @hyp_settings(max_examples=100, deadline=None)
    @given(
        st.integers(min_value=-50, max_value=50),
        st.integers(min_value=-50, max_value=50),
        st.lists(st.integers(min_value=1, max_value=200), min_size=3, max_size=40, unique=True),
    )
    def test_recovers_any_exact_line(self, slope, intercept, xs):
        assume(len(set(xs)) >= 2)
        ys = [slope * x + intercept for x in xs]
        fit = sync_core.fit_linear(xs, ys)
        assert fit.slope == pytest.approx(slope, abs=1e-6)
        assert fit.intercept == pytest.approx(intercept, abs=1e-6)
        assert fit.r_squared >= 1 - 1e-9

    def test_r_squared_drops_with_scatter(self):
        rng = np.random.default_rng(1)
        xs = np.arange(1, 41, dtype=float)
        ys = xs + rng.normal(0.0, 5.0, size=xs.size)
        fit = sync_core.fit_linear(xs, ys)
        assert 0.0 <= fit.r_squared < 0.95


class TestEstimate:
    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
    def test_noiseless_error_below_half_a_millisecond(self, noiseless_scenario, seed):
        series, truth = simulated(noiseless_scenario.with_seed(seed))
        estimate = sync_core.estimate_t0(
            series, noiseless_scenario.inductor, noiseless_scenario.drive_freq
        )
        assert abs(estimate.t0 - truth.t0_local_true["imu1"]) < 0.5e-3
        assert 0 < estimate.t_TR < 5 * noiseless_scenario.inductor.tau
        assert estimate.t0 == pytest.approx(estimate.t1_hat - estimate.t_TR)
        assert [hit.index for hit in estimate.hits] == sorted(hit.index for hit in estimate.hits)

    def test_noisy_error_is_sub_sample(self, scenario):
        output = simulator.run_sync_procedure(scenario, check=False)
        for sensor_id, series in output.magnetometer.items():
            estimate = sync_core.estimate_t0(series, scenario.inductor, scenario.drive_freq)
            error = estimate.t0 - output.ground_truth.t0_local_true[sensor_id]
            assert abs(error) < 1e-3
            assert estimate.time_fit.r_squared >= 0.999

    def test_time_translation(self, single_scenario):
        series, _ = simulated(single_scenario)
        spec, f = single_scenario.inductor, single_scenario.drive_freq
        plain = sync_core.estimate_t0(series, spec, f)
        shifted = sync_core.estimate_t0(series.with_times(series.times + 12.5), spec, f)
        assert shifted.t0 == pytest.approx(plain.t0 + 12.5, abs=1e-8)

    def test_flux_scale(self, single_scenario):
        series, _ = simulated(single_scenario)
        spec, f = single_scenario.inductor, single_scenario.drive_freq
        plain = sync_core.estimate_t0(series, spec, f)
        scaled = sync_core.estimate_t0(series.with_values(series.values * 2.0), spec, f)
        assert scaled.t0 == pytest.approx(plain.t0, abs=1e-9)
        assert scaled.n_hits == plain.n_hits

    def test_deterministic(self, single_scenario):
        series, _ = simulated(single_scenario)
        spec, f = single_scenario.inductor, single_scenario.drive_freq
        assert sync_core.estimate_t0(series, spec, f) == sync_core.estimate_t0(series, spec, f)

    def test_one_second_procedure_has_too_few_hits(self, single_scenario):
        series, _ = simulated(single_scenario.with_duration(1.0))
        with pytest.raises(EstimationError) as exc:
            sync_core.estimate_t0(series, single_scenario.inductor, single_scenario.drive_freq)
        assert exc.value.reason == ReasonCode.TOO_FEW_HITS

    def test_steady_series_is_rejected(self, inductor):
        series = make_series(np.tile([0.0] * 8 + [K] * 8, 60))
        with pytest.raises(EstimationError) as exc:
            sync_core.estimate_t0(series, inductor, 6.0)
        assert exc.value.reason == ReasonCode.TOO_FEW_HITS


def _estimate(n_hits, t_tr, tau=386.8e-6):
    fit = FitResult(slope=1 / 6, intercept=0.1, r_squared=0.9999, n_points=n_hits)
    hits = [Hit(t=0.1 + i / 6, k=1e-4, index=i + 1) for i in range(n_hits)]
    return SyncEstimate(
        sensor_id="imu1",
        t1_hat=0.2,
        k1_hat=1e-4,
        t_TR=t_tr,
        t0=0.2 - t_tr,
        time_fit=fit,
        flux_fit=fit,
        baseline=BaselineEstimate(0.0, K, 3e-7),
        tau=tau,
        hits=hits,
    )


class TestQuality:
    def test_good_estimate_has_no_warnings(self):
        report = sync_core.sync_quality(_estimate(26, 2e-4))
        assert report.ok
        assert report.hit_spacing == pytest.approx(1 / 6)

    def test_short_procedure_warning(self):
        report = sync_core.sync_quality(_estimate(5, 2e-4))
        assert report.warnings == [QualityWarning.BELOW_RECOMMENDED_DURATION]

    def test_near_saturation_warning(self):
        report = sync_core.sync_quality(_estimate(26, 4.95 * 386.8e-6))
        assert QualityWarning.NEAR_SATURATION_HIT in report.warnings
        assert report.to_dict()["warnings"] == ["near-saturation-hit"]
