"""
Equirectangular pixel conventions, antipodes and fixed view sets.

Pixel (u, v) addresses the center of column u / row v when u and v are
integers (pixel-center convention); fractional values interpolate between
centers. The scalar functions mirror the vectorized `*_array` helpers that the
resampling kernels use.
"""
import logging
import math
from functools import lru_cache

import numpy as np

from app.core.exceptions import PreconditionViolation
from app.schemas.geometry import (
    HALF_PI,
    TWO_PI,
    CameraPose,
    SphereDir,
    wrap_yaw,
    wrap_yaw_array,
)

logger = logging.getLogger(__name__)

# Rays whose forward component (or frustum margin) is within this tolerance of
# the boundary count as outside.
FRUSTUM_EPS = 1e-12

DEFAULT_ICOSAHEDRON_FOV = 80.0
EVAL_FOV = 90.0
EVAL_YAWS_DEG = (0.0, 90.0, 180.0, 270.0)


def check_canvas_shape(operation: str, height: int, width: int) -> None:
    if height < 1 or width != 2 * height:
        raise PreconditionViolation(operation, f"canvas must satisfy W = 2H, got H={height}, W={width}")


def pixel_to_dir(u: float, v: float, height: int, width: int) -> SphereDir:
    """Convert a fractional pixel position to a sphere direction."""
    check_canvas_shape("pixel_to_dir", height, width)
    if not (0 <= u < width and 0 <= v < height):
        raise PreconditionViolation(
            "pixel_to_dir", f"pixel ({u}, {v}) outside canvas {width}x{height}"
        )
    yaw = (u + 0.5) / width * TWO_PI - math.pi
    pitch = HALF_PI - (v + 0.5) / height * math.pi
    return SphereDir(yaw=yaw, pitch=pitch)


def dir_to_pixel(direction: SphereDir, height: int, width: int) -> tuple[float, float]:
    """Inverse of pixel_to_dir; the column wraps into [0, W)."""
    check_canvas_shape("dir_to_pixel", height, width)
    u = (direction.yaw + math.pi) / TWO_PI * width - 0.5
    v = (HALF_PI - direction.pitch) / math.pi * height - 0.5
    u = u % width
    if u >= width:
        u -= width
    return u, v


def antipode(direction: SphereDir) -> SphereDir:
    """Diametrically opposite direction (θ + π, -φ)."""
    return SphereDir(yaw=wrap_yaw(direction.yaw + math.pi), pitch=-direction.pitch)


# --------------------------------------------------------------------------
# Vectorized helpers
# --------------------------------------------------------------------------

def pixel_grid_dirs(height: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Yaw and pitch of every pixel center of an H×W canvas."""
    check_canvas_shape("pixel_grid_dirs", height, width)
    u = np.arange(width, dtype=np.float64)
    v = np.arange(height, dtype=np.float64)
    yaw = (u + 0.5) / width * TWO_PI - np.pi
    pitch = HALF_PI - (v + 0.5) / height * np.pi
    return np.broadcast_to(yaw, (height, width)), np.broadcast_to(pitch[:, None], (height, width))


def dirs_to_pixels(yaw: np.ndarray, pitch: np.ndarray, height: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    u = np.mod((yaw + np.pi) / TWO_PI * width - 0.5, width)
    v = (HALF_PI - pitch) / np.pi * height - 0.5
    return u, v


def dirs_to_vectors(yaw: np.ndarray, pitch: np.ndarray) -> np.ndarray:
    cos_p = np.cos(pitch)
    return np.stack([cos_p * np.cos(yaw), cos_p * np.sin(yaw), np.sin(pitch)], axis=-1)


def vectors_to_dirs(vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norm = np.linalg.norm(vectors, axis=-1)
    x, y, z = vectors[..., 0], vectors[..., 1], vectors[..., 2]
    pitch = np.arcsin(np.clip(z / norm, -1.0, 1.0))
    yaw = wrap_yaw_array(np.arctan2(y, x))
    return yaw, pitch


def antipode_arrays(yaw: np.ndarray, pitch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return wrap_yaw_array(yaw + np.pi), -pitch


def focal_length(pose: CameraPose, side: int) -> float:
    """Focal length in pixels of a square view of `side` pixels."""
    return (side / 2.0) / pose.half_fov_tan


def view_rays(pose: CameraPose, side: int) -> np.ndarray:
    """Unit ray through every pixel center of a square view, shape (S, S, 3)."""
    forward, right, up = pose.basis()
    f = focal_length(pose, side)
    offsets = np.arange(side, dtype=np.float64) + 0.5 - side / 2.0
    x = offsets[None, :, None]
    y = offsets[:, None, None]
    rays = f * forward + x * right - y * up
    return rays / np.linalg.norm(rays, axis=-1, keepdims=True)


def project_to_view(
    vectors: np.ndarray, pose: CameraPose, side: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Project unit vectors into a square view.

    Returns fractional (col, row) view coordinates and a boolean mask that is
    true only for rays strictly inside the frustum. The forward-hemisphere
    guard runs before the tangent-plane test, so rays behind the camera are
    always outside.
    """
    forward, right, up = pose.basis()
    depth = vectors @ forward
    ahead = depth > FRUSTUM_EPS
    safe_depth = np.where(ahead, depth, 1.0)
    a = (vectors @ right) / safe_depth
    b = (vectors @ up) / safe_depth
    limit = pose.half_fov_tan
    inside = ahead & (np.abs(a) < limit - FRUSTUM_EPS) & (np.abs(b) < limit - FRUSTUM_EPS)
    f = focal_length(pose, side)
    col = a * f + side / 2.0 - 0.5
    row = -b * f + side / 2.0 - 0.5
    return col, row, inside


def great_circle_angle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Angle in radians between unit vectors (broadcasting on the last axis)."""
    cross = np.linalg.norm(np.cross(a, b), axis=-1)
    dot = np.sum(a * b, axis=-1)
    return np.arctan2(cross, dot)


# --------------------------------------------------------------------------
# Fixed view sets
# --------------------------------------------------------------------------

@lru_cache(maxsize=1)
def _icosahedron_face_dirs() -> tuple[tuple[float, float], ...]:
    # Vertices: the two poles plus two rings of five at z = ±1/√5, the lower
    # ring offset by 36°; the ring height is the golden-ratio construction
    # rotated so that a vertex sits on each pole.
    ring_z = 1.0 / math.sqrt(5.0)
    ring_r = 2.0 / math.sqrt(5.0)
    north = np.array([0.0, 0.0, 1.0])
    south = np.array([0.0, 0.0, -1.0])
    upper = [
        np.array([ring_r * math.cos(a), ring_r * math.sin(a), ring_z])
        for a in (math.radians(72.0 * k) for k in range(5))
    ]
    lower = [
        np.array([ring_r * math.cos(a), ring_r * math.sin(a), -ring_z])
        for a in (math.radians(36.0 + 72.0 * k) for k in range(5))
    ]

    faces = []
    for k in range(5):
        n = (k + 1) % 5
        faces.append((north, upper[k], upper[n]))
        faces.append((upper[k], upper[n], lower[k]))
        faces.append((lower[k], lower[n], upper[n]))
        faces.append((south, lower[k], lower[n]))

    dirs = []
    for a, b, c in faces:
        center = (a + b + c) / 3.0
        center /= np.linalg.norm(center)
        yaw = wrap_yaw(math.atan2(center[1], center[0]))
        pitch = math.asin(max(-1.0, min(1.0, center[2])))
        dirs.append((yaw, pitch))

    dirs.sort(key=lambda d: (-round(d[1], 9), round(d[0], 9)))
    return tuple(dirs)


def icosahedron_views(fov_deg: float = DEFAULT_ICOSAHEDRON_FOV, side: int = 1) -> list[CameraPose]:
    """Twenty poses aimed at the face centers of a pole-aligned icosahedron.

    Ordered by descending pitch, then ascending yaw. `side` is validated here
    for the caller's view resolution but does not change the poses.
    """
    if not 0 < fov_deg < 180:
        raise PreconditionViolation("icosahedron_views", f"fov_deg must be in (0, 180), got {fov_deg}")
    if side < 1:
        raise PreconditionViolation("icosahedron_views", f"side must be >= 1, got {side}")
    return [
        CameraPose(fov_deg=fov_deg, dir=SphereDir(yaw=yaw, pitch=pitch))
        for yaw, pitch in _icosahedron_face_dirs()
    ]


def eval_views() -> list[CameraPose]:
    """The four horizon views used to inspect generated panoramas."""
    return [CameraPose.from_degrees(EVAL_FOV, yaw, 0.0) for yaw in EVAL_YAWS_DEG]
