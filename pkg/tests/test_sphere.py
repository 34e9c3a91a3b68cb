"""
Tests for pixel/direction conventions, antipodes and the fixed view sets.
"""
import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.exceptions import PreconditionViolation
from app.schemas.geometry import CameraPose, PoseTrajectory, SphereDir, wrap_yaw
from app.services.sphere import (
    antipode,
    dir_to_pixel,
    eval_views,
    great_circle_angle,
    icosahedron_views,
    pixel_to_dir,
    project_to_view,
)


def _angle_diff(a: float, b: float) -> float:
    return abs(wrap_yaw(a - b))


def test_canvas_center_is_forward_horizon():
    H, W = 256, 512
    d = pixel_to_dir(W / 2 - 0.5, H / 2 - 0.5, H, W)
    assert d.yaw == pytest.approx(0.0, abs=1e-15)
    assert d.pitch == pytest.approx(0.0, abs=1e-15)


def test_corner_pixel_center():
    d = pixel_to_dir(0, 0, 256, 512)
    assert d.yaw == pytest.approx(-math.pi + math.pi / 512, abs=1e-12)
    assert d.pitch == pytest.approx(math.pi / 2 - math.pi / 512, abs=1e-12)


@pytest.mark.parametrize("u, v", [(-0.5, 0), (512, 0), (0, 256), (0, -1)])
def test_pixel_out_of_range_rejected(u, v):
    with pytest.raises(PreconditionViolation):
        pixel_to_dir(u, v, 256, 512)


def test_canvas_shape_rejected():
    with pytest.raises(PreconditionViolation):
        pixel_to_dir(0, 0, 256, 500)
    with pytest.raises(PreconditionViolation):
        dir_to_pixel(SphereDir(yaw=0.0, pitch=0.0), 256, 511)


def test_dir_to_pixel_examples():
    H, W = 64, 128
    assert dir_to_pixel(SphereDir(yaw=0.0, pitch=0.0), H, W) == pytest.approx((W / 2 - 0.5, H / 2 - 0.5))
    u, v = dir_to_pixel(SphereDir(yaw=-math.pi, pitch=0.0), H, W)
    assert u == pytest.approx(W - 0.5)
    assert v == pytest.approx(H / 2 - 0.5)


def test_pixel_round_trip(rng):
    H, W = 256, 512
    us = rng.uniform(0, W, 10_000)
    vs = rng.uniform(0, H, 10_000)
    for u, v in zip(us, vs):
        back_u, back_v = dir_to_pixel(pixel_to_dir(u, v, H, W), H, W)
        # the seam column may come back wrapped by one full width
        du = min(abs(back_u - u), W - abs(back_u - u))
        assert du < 1e-9
        assert abs(back_v - v) < 1e-9


def test_antipode_examples():
    d = antipode(SphereDir(yaw=0.0, pitch=0.0))
    assert d.yaw == pytest.approx(-math.pi)
    assert d.pitch == 0.0

    d = antipode(SphereDir(yaw=math.pi / 2, pitch=math.pi / 6))
    assert d.yaw == pytest.approx(-math.pi / 2)
    assert d.pitch == pytest.approx(-math.pi / 6)


def test_antipode_involution(rng):
    yaws = rng.uniform(-math.pi, math.pi, 10_000)
    pitches = rng.uniform(-math.pi / 2, math.pi / 2, 10_000)
    for yaw, pitch in zip(yaws, pitches):
        d = SphereDir(yaw=yaw, pitch=pitch)
        twice = antipode(antipode(d))
        assert _angle_diff(twice.yaw, d.yaw) < 1e-12
        assert twice.pitch == d.pitch
        assert abs(antipode(d).pitch) == abs(d.pitch)


def test_sphere_dir_wraps_yaw_and_rejects_pitch():
    assert SphereDir(yaw=2.5 * math.pi, pitch=0.0).yaw == pytest.approx(0.5 * math.pi)
    assert -math.pi <= SphereDir(yaw=-7.0, pitch=0.0).yaw < math.pi
    with pytest.raises(ValidationError):
        SphereDir(yaw=0.0, pitch=math.pi / 2 + 1e-6)


def test_camera_pose_fov_bounds():
    with pytest.raises(ValidationError):
        CameraPose.from_degrees(180.0, 0.0, 0.0)
    with pytest.raises(ValidationError):
        CameraPose.from_degrees(0.0, 0.0, 0.0)


def test_trajectory_requires_shared_fov():
    with pytest.raises(ValidationError):
        PoseTrajectory(frames=(
            CameraPose.from_degrees(90.0, 0.0, 0.0),
            CameraPose.from_degrees(80.0, 0.0, 0.0),
        ))


def test_icosahedron_view_count_and_fov():
    views = icosahedron_views()
    assert len(views) == 20
    assert {v.fov_deg for v in views} == {80.0}


def test_icosahedron_order_is_descending_pitch():
    views = icosahedron_views()
    keys = [(-round(v.pitch, 9), round(v.yaw, 9)) for v in views]
    assert keys == sorted(keys)


def test_icosahedron_min_pairwise_angle():
    vectors = np.stack([v.dir.unit_vector() for v in icosahedron_views()])
    angles = great_circle_angle(vectors[:, None, :], vectors[None, :, :])
    np.fill_diagonal(angles, np.inf)
    expected = math.degrees(math.acos(math.sqrt(5.0) / 3.0))
    assert math.degrees(angles.min()) == pytest.approx(expected, abs=0.01)
    assert angles.min() >= math.acos(math.sqrt(5.0) / 3.0) - 1e-4


def test_icosahedron_centroid_vanishes():
    vectors = np.stack([v.dir.unit_vector() for v in icosahedron_views()])
    assert np.linalg.norm(vectors.mean(axis=0)) < 1e-9


def test_icosahedron_covers_sphere(rng):
    samples = rng.normal(size=(100_000, 3))
    samples /= np.linalg.norm(samples, axis=1, keepdims=True)
    covered = np.zeros(len(samples), dtype=bool)
    for pose in icosahedron_views(80.0):
        _, _, inside = project_to_view(samples, pose, 32)
        covered |= inside
    assert covered.all()


def test_icosahedron_preconditions():
    with pytest.raises(PreconditionViolation):
        icosahedron_views(180.0)
    with pytest.raises(PreconditionViolation):
        icosahedron_views(80.0, side=0)


def test_eval_views():
    views = eval_views()
    assert len(views) == 4
    assert [v.fov_deg for v in views] == [90.0] * 4
    assert all(v.pitch == 0.0 for v in views)
    yaws = [round(math.degrees(v.yaw)) % 360 for v in views]
    assert yaws == [0, 90, 180, 270]
    assert views == eval_views()
