"""
Tests for pitch trajectory sampling, line fitting and the estimate file adapter.
"""
import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.exceptions import CorruptEstimates, EstimateFileError, PreconditionViolation
from app.schemas.elevation import ElevationTrajectory, EstimateSeries
from app.services.elevation import fit_line, load_estimates, sample_trajectory


def write_estimates(path, rows):
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    return path


class TestSampling:
    def test_linear_rule(self):
        traj = ElevationTrajectory.from_line(10.0, 0.25, 5)
        assert traj.samples == (10.0, 10.25, 10.5, 10.75, 11.0)

    def test_zero_slope_is_constant(self):
        assert set(ElevationTrajectory.from_line(-3.0, 0.0, 7).samples) == {-3.0}

    def test_samples_are_clamped(self):
        traj = ElevationTrajectory.from_line(80.0, 5.0, 5)
        assert traj.samples == (80.0, 85.0, 90.0, 90.0, 90.0)

    def test_same_seed_same_trajectory(self):
        assert sample_trajectory(40, seed=7) == sample_trajectory(40, seed=7)
        assert sample_trajectory(40, seed=7) != sample_trajectory(40, seed=8)

    def test_draws_stay_in_range(self):
        starts, slopes = [], []
        for seed in range(1000):
            traj = sample_trajectory(3, seed)
            assert -20.0 < traj.start_deg < 20.0
            assert -0.5 < traj.slope_deg < 0.5
            assert traj.origin == "sampled"
            starts.append(traj.start_deg)
            slopes.append(traj.slope_deg)
        assert abs(np.mean(starts)) < 1.5
        assert abs(np.mean(slopes)) < 1.5

    def test_sampled_origin_checks_ranges(self):
        with pytest.raises(ValidationError):
            ElevationTrajectory.from_line(30.0, 0.0, 4, origin="sampled")
        with pytest.raises(ValidationError):
            ElevationTrajectory(start_deg=0.0, slope_deg=1.0, samples=(0.0, 2.0))

    def test_needs_a_frame(self):
        with pytest.raises(PreconditionViolation):
            sample_trajectory(0, seed=1)

    def test_to_poses(self):
        poses = ElevationTrajectory.from_line(5.0, 1.0, 3).to_poses(90.0)
        assert len(poses) == 3
        assert np.allclose(np.degrees(poses.pitches), [5.0, 6.0, 7.0])
        assert np.all(poses.yaws == 0.0)
        assert poses.fov_deg == 90.0


class TestFitLine:
    def test_noiseless_line(self):
        traj = fit_line(EstimateSeries(values=(0.0, 1.0, 2.0, 3.0)))
        assert traj.slope_deg == pytest.approx(1.0, abs=1e-12)
        assert traj.start_deg == pytest.approx(0.0, abs=1e-12)
        assert traj.origin == "fitted"

    def test_outlier_example(self):
        traj = fit_line(EstimateSeries(values=(0.0, 1.0, 2.0, 10.0)))
        assert traj.slope_deg == pytest.approx(3.1)
        assert traj.start_deg == pytest.approx(-1.4)
        assert traj.samples == pytest.approx((-1.4, 1.7, 4.8, 7.9))

    def test_fit_is_not_bound_by_sampling_ranges(self):
        traj = fit_line(EstimateSeries(values=(40.0, 42.0, 44.0)))
        assert traj.start_deg == pytest.approx(40.0)
        assert traj.slope_deg == pytest.approx(2.0)

    def test_fit_minimizes_squared_residuals(self, rng):
        values = rng.normal(size=12) * 3.0 + np.arange(12) * 0.4
        traj = fit_line(EstimateSeries(values=tuple(values)))
        t = np.arange(12)

        def sse(start, slope):
            return float(np.sum((values - start - slope * t) ** 2))

        best = sse(traj.start_deg, traj.slope_deg)
        for d_start, d_slope in [(0.01, 0), (-0.01, 0), (0, 0.001), (0, -0.001), (0.01, -0.001)]:
            assert best < sse(traj.start_deg + d_start, traj.slope_deg + d_slope)

    def test_noisy_slope_within_three_standard_errors(self):
        T, sigma, slope, start = 40, 0.5, 0.3, -5.0
        t = np.arange(T)
        bound = 3 * sigma / math.sqrt(np.sum((t - t.mean()) ** 2))
        hits = 0
        for seed in range(100):
            noise = np.random.default_rng(seed).normal(0.0, sigma, T)
            traj = fit_line(EstimateSeries(values=tuple(start + slope * t + noise)))
            hits += abs(traj.slope_deg - slope) <= bound
        assert hits >= 97

    def test_nan_estimates(self):
        with pytest.raises(CorruptEstimates) as exc_info:
            fit_line(EstimateSeries(values=(0.0, float("nan"), 1.0), first_frame=10, source="est.jsonl"))
        assert exc_info.value.exit_code == 4
        assert "11" in exc_info.value.detail

    def test_needs_two_frames(self):
        with pytest.raises(PreconditionViolation):
            fit_line(EstimateSeries(values=(1.0,)))


class TestLoadEstimates:
    def test_sorts_dedupes_and_fills_gaps(self, tmp_path):
        path = write_estimates(tmp_path / "pitch.jsonl", [
            {"frame": 4, "pitch_deg": 8.0},
            {"frame": 1, "pitch_deg": 99.0},
            {"frame": 1, "pitch_deg": 2.0},
            {"frame": 2, "pitch_deg": 4.0},
        ])
        series = load_estimates(path)
        assert series.first_frame == 1
        assert series.values == (2.0, 4.0, 6.0, 8.0)
        assert series.source == str(path)

    def test_feeds_the_fit(self, tmp_path):
        rows = [{"frame": f, "pitch_deg": 3.0 + 0.5 * f} for f in range(0, 20, 3)]
        traj = fit_line(load_estimates(write_estimates(tmp_path / "p.jsonl", rows)))
        assert traj.slope_deg == pytest.approx(0.5)
        assert len(traj) == 19

    @pytest.mark.parametrize("content", [
        "",
        "not json\n",
        '{"frame": -1, "pitch_deg": 2.0}\n',
        '{"frame": 3, "pitch_deg": 2.0}\n',
    ])
    def test_bad_files(self, tmp_path, content):
        path = tmp_path / "bad.jsonl"
        path.write_text(content)
        with pytest.raises(EstimateFileError):
            load_estimates(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(EstimateFileError) as exc_info:
            load_estimates(tmp_path / "absent.jsonl")
        assert exc_info.value.exit_code == 4
