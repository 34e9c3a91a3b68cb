"""
Tests for E2P/P2E reprojection, circular padding and the seam diagnostics.
"""
import math

import numpy as np
import pytest

from app.core.exceptions import InconsistentTrajectory, PreconditionViolation
from app.schemas.canvas import PanoCanvas, PerspView
from app.schemas.geometry import CameraPose, PoseTrajectory
from app.services.resample import (
    build_mask_video,
    build_video_projection,
    circular_pad,
    circular_unpad,
    compose_condition_stack,
    e2p,
    eval_panel,
    frustum_mask,
    p2e,
    projection_roundtrip,
    seam_score,
)
from app.services.sphere import pixel_grid_dirs, pixel_to_dir
from app.utils.patterns import ramp_pattern, reference_photo


def _cos_weighted_fraction(mask: np.ndarray) -> float:
    _, pitch = pixel_grid_dirs(mask.shape[0], mask.shape[1])
    weights = np.cos(pitch)
    return float((weights * mask).sum() / weights.sum())


class TestE2P:
    def test_constant_canvas_gives_constant_view(self, front_pose):
        canvas = PanoCanvas(data=np.full((32, 64, 3), 0.25))
        view = e2p(canvas, front_pose, 16)
        assert view.data.shape == (16, 16, 3)
        np.testing.assert_allclose(view.data, 0.25, atol=1e-12)
        assert view.pose == front_pose

    def test_bright_pixel_lands_near_view_center(self, front_pose):
        data = np.zeros((64, 128, 1))
        data[31, 63] = 1.0
        view = e2p(PanoCanvas(data=data), front_pose, 32)
        assert view.data.max() > 0
        row, col = np.unravel_index(np.argmax(view.data[..., 0]), (32, 32))
        assert abs(row - 15.5) <= 1.0
        assert abs(col - 15.5) <= 1.0

    def test_view_crosses_the_seam(self):
        # yaw ±180° straddles the first and last columns; nearest sampling must
        # pick from both halves of the canvas.
        data = np.zeros((32, 64, 1))
        data[:, :32] = 1.0
        pose = CameraPose.from_degrees(60.0, 180.0, 0.0)
        view = e2p(PanoCanvas(data=data), pose, 16, interpolation="nearest")
        assert view.data[:, :8].min() == 0.0
        assert view.data[:, 8:].max() == 1.0

    def test_bicubic_wraps_across_the_seam(self, rng):
        data = rng.uniform(size=(32, 64, 2))
        behind = e2p(PanoCanvas(data=data), CameraPose.from_degrees(60.0, 180.0, 10.0), 16)
        rolled = PanoCanvas(data=np.roll(data, 32, axis=1))
        ahead = e2p(rolled, CameraPose.from_degrees(60.0, 0.0, 10.0), 16)
        np.testing.assert_allclose(behind.data, ahead.data, atol=1e-4)

    def test_rejects_tiny_side(self, sphere_canvas, front_pose):
        with pytest.raises(PreconditionViolation):
            e2p(sphere_canvas, front_pose, 1)

    def test_rejects_unknown_interpolation(self, sphere_canvas, front_pose):
        with pytest.raises(PreconditionViolation):
            e2p(sphere_canvas, front_pose, 8, interpolation="lanczos")


class TestFrustumMask:
    def test_yaw_rotation_is_a_column_roll(self):
        H = 64
        base = frustum_mask(CameraPose.from_degrees(70.0, 0.0, 20.0), H)
        turned = frustum_mask(CameraPose.from_degrees(70.0, 90.0, 20.0), H)
        assert np.array_equal(turned, np.roll(base, 2 * H // 4, axis=1))

    def test_ninety_degree_view_covers_a_sixth_of_the_sphere(self):
        mask = frustum_mask(CameraPose.from_degrees(90.0, 0.0, 0.0), 256)
        assert _cos_weighted_fraction(mask) == pytest.approx(1.0 / 6.0, abs=0.01)

    def test_view_near_the_pole_covers_the_top_row(self):
        mask = frustum_mask(CameraPose.from_degrees(90.0, 30.0, 89.0), 512)
        assert mask[0].all()
        assert not mask[-1].any()

    def test_mask_matches_brute_force(self, rng):
        H, W, side = 16, 32, 8
        for _ in range(10):
            pose = CameraPose.from_degrees(
                float(rng.uniform(20, 150)), float(rng.uniform(-180, 180)), float(rng.uniform(-90, 90))
            )
            forward, right, up = pose.basis()
            limit = math.tan(math.radians(pose.fov_deg) / 2)
            expected = np.zeros((H, W), dtype=bool)
            for v in range(H):
                for u in range(W):
                    d = pixel_to_dir(u, v, H, W)
                    x = d.unit_vector()
                    depth = float(x @ forward)
                    if depth <= 1e-12:
                        continue
                    a = float(x @ right) / depth
                    b = float(x @ up) / depth
                    expected[v, u] = abs(a) < limit - 1e-12 and abs(b) < limit - 1e-12
            assert np.array_equal(frustum_mask(pose, H), expected)
            assert np.array_equal(p2e(PerspView(data=np.ones((side, side)), pose=pose), pose, H).mask, expected)


class TestP2E:
    def test_zero_outside_the_footprint(self, smooth_view, front_pose):
        result = p2e(smooth_view, front_pose, 64)
        assert result.canvas.data.shape == (64, 128, 3)
        assert result.mask.dtype == np.bool_
        assert np.all(result.canvas.data[~result.mask] == 0.0)
        assert result.canvas.data[result.mask].max() > 0.0

    def test_mask_centroid_rises_with_pitch(self, rising_trajectory, row_centroid):
        vmask = build_mask_video(rising_trajectory, 128)
        assert vmask.frames.shape == (40, 128, 256)
        centroids = np.array([row_centroid(frame) for frame in vmask.frames])
        assert np.all(np.diff(centroids) < 0)

    def test_round_trip_psnr(self, smooth_view):
        restored, score = projection_roundtrip(smooth_view, 512)
        assert restored.data.shape == smooth_view.data.shape
        assert score >= 35.0

    def test_photograph_round_trip(self, front_pose):
        view = PerspView(data=reference_photo(256), pose=front_pose)
        _, bicubic = projection_roundtrip(view, 512)
        _, bilinear = projection_roundtrip(view, 512, interpolation="bilinear")
        assert bicubic >= 35.0
        assert bicubic > bilinear

    def test_video_projection_matches_per_frame(self):
        trajectory = PoseTrajectory.from_pitches(90.0, [0.0, 5.0, 10.0])
        anchor = [PerspView(data=np.full((8, 8, 2), t + 1.0), pose=pose) for t, pose in enumerate(trajectory)]
        video, masks = build_video_projection(anchor, trajectory, 16, workers=2)
        assert video.shape == (3, 16, 32, 2)
        for t, pose in enumerate(trajectory):
            single = p2e(anchor[t], pose, 16)
            assert np.array_equal(masks.frames[t], single.mask)
            assert np.array_equal(video[t], single.canvas.data)

    def test_video_projection_length_mismatch(self, front_pose):
        trajectory = PoseTrajectory.constant(front_pose, 3)
        anchor = [PerspView(data=np.zeros((8, 8)), pose=front_pose)] * 2
        with pytest.raises(InconsistentTrajectory):
            build_video_projection(anchor, trajectory, 16)


class TestCircularPadding:
    def test_pad_then_unpad_is_identity(self, sphere_canvas):
        padded = circular_pad(sphere_canvas.data, 5)
        assert padded.shape == (32, 74, 3)
        assert np.array_equal(padded[:, :5], sphere_canvas.data[:, -5:])
        assert np.array_equal(padded[:, -5:], sphere_canvas.data[:, :5])
        assert np.array_equal(circular_unpad(padded, 5), sphere_canvas.data)

    def test_valid_filter_on_padded_frame_is_circular(self, rng):
        frame = rng.normal(size=(6, 20))
        weights = rng.normal(size=7)
        k = len(weights) // 2
        padded = circular_pad(frame, k)
        valid = sum(w * padded[:, j:j + frame.shape[1]] for j, w in enumerate(weights))
        circular = sum(w * np.roll(frame, k - j, axis=1) for j, w in enumerate(weights))
        np.testing.assert_allclose(valid, circular, atol=1e-12)

    def test_pad_bounds(self):
        frame = np.zeros((2, 4))
        with pytest.raises(PreconditionViolation):
            circular_pad(frame, 5)
        with pytest.raises(PreconditionViolation):
            circular_unpad(frame, 2)
        assert circular_pad(frame, 0).shape == frame.shape


class TestSeamScore:
    def test_sine_canvas_is_seamless(self):
        yaw, _ = pixel_grid_dirs(32, 64)
        score = seam_score(PanoCanvas(data=np.sin(yaw)))
        assert 0.5 <= score <= 2.0

    def test_ramp_has_a_seam(self):
        assert seam_score(PanoCanvas(data=ramp_pattern(32))) >= 10.0

    def test_rolled_periodic_canvas_stays_seamless(self):
        H = 64
        yaw, _ = pixel_grid_dirs(H, 2 * H)
        phases = 2 * np.pi * np.arange(H)[:, None] / H
        data = np.sin(yaw + phases)
        for shift in (0, 7, 40, 100):
            score = seam_score(PanoCanvas(data=np.roll(data, shift, axis=1)))
            assert score == pytest.approx(1.0, abs=0.05)

    def test_constant_canvas(self):
        assert seam_score(PanoCanvas(data=np.ones((4, 8)))) == 0.0


def test_condition_stack_channels():
    frames = np.ones((2, 4, 8, 4))
    masks = np.zeros((2, 4, 8), dtype=bool)
    masks[:, :, :2] = True
    stack = compose_condition_stack(frames, masks)
    assert stack.shape == (2, 4, 8, 9)
    assert np.all(stack[..., 4] == masks)
    assert np.all(stack[:, :, 2:, 5:] == 0.0)
    with pytest.raises(PreconditionViolation):
        compose_condition_stack(frames, masks[:, :2])


def test_eval_panel_layout(sphere_canvas):
    panel = eval_panel(sphere_canvas)
    assert panel.shape == (32 + 16, 64, 3)
    assert np.array_equal(panel[:32], sphere_canvas.data)
