"""
Shared fixtures: small synthetic canvases, views and trajectories.
Celery always runs eagerly here; no broker is needed.
"""
import numpy as np
import pytest

from app.core.celery_app import celery_app
from app.schemas.canvas import PanoCanvas, PerspView
from app.schemas.geometry import CameraPose, PoseTrajectory
from app.utils.patterns import smooth_pattern, sphere_pattern


@pytest.fixture(autouse=True)
def eager_celery():
    previous = celery_app.conf.task_always_eager
    celery_app.conf.task_always_eager = True
    yield
    celery_app.conf.task_always_eager = previous


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def front_pose():
    return CameraPose.from_degrees(90.0, 0.0, 0.0)


@pytest.fixture
def sphere_canvas():
    return PanoCanvas(data=sphere_pattern(32))


@pytest.fixture
def smooth_view(front_pose):
    return PerspView(data=smooth_pattern(256, seed=3), pose=front_pose)


@pytest.fixture
def rising_trajectory():
    return PoseTrajectory.from_pitches(90.0, [10.0 + 0.25 * t for t in range(40)])


@pytest.fixture
def row_centroid():
    def centroid(mask: np.ndarray) -> float:
        return float(np.nonzero(mask)[0].mean())
    return centroid
