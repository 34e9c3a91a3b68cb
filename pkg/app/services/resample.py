"""
Reprojection kernels between equirectangular canvases and perspective views.

Both directions sample target-to-source, so outputs never have holes:
E2P samples the canvas with circular wrap in u and clamping in v, P2E samples
the view only where the canvas pixel center lies strictly inside the frustum.
Sampling is spline interpolation through `scipy.ndimage.map_coordinates`;
bicubic is the default for image content.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np
from scipy import ndimage

from app.core.exceptions import InconsistentTrajectory, PreconditionViolation
from app.schemas.canvas import PanoCanvas, PerspView, ProjectionResult
from app.schemas.geometry import CameraPose, PoseTrajectory
from app.schemas.masks import VideoMask
from app.services.sphere import (
    dirs_to_pixels,
    dirs_to_vectors,
    eval_views,
    pixel_grid_dirs,
    project_to_view,
    vectors_to_dirs,
    view_rays,
)

logger = logging.getLogger(__name__)

Interpolation = Literal["bicubic", "bilinear", "nearest"]

SPLINE_ORDER: dict[str, int] = {"nearest": 0, "bilinear": 1, "bicubic": 3}

# Columns wrapped onto each side of the canvas before spline prefiltering;
# the cubic prefilter's boundary influence decays by 0.268 per column.
WRAP_PAD = 16


def spline_order(interpolation: str) -> int:
    try:
        return SPLINE_ORDER[interpolation]
    except KeyError:
        raise PreconditionViolation(
            "resample", f"interpolation must be one of {sorted(SPLINE_ORDER)}, got {interpolation!r}"
        ) from None


def _map_channels(data: np.ndarray, rows: np.ndarray, cols: np.ndarray, order: int) -> np.ndarray:
    """Sample every channel of an H×W×C array at (rows, cols), edges clamped."""
    out = np.empty(rows.shape + (data.shape[2],))
    coords = np.stack([rows, cols])
    for c in range(data.shape[2]):
        out[..., c] = ndimage.map_coordinates(data[..., c], coords, order=order, mode="nearest")
    return out


def sample_canvas(data: np.ndarray, u: np.ndarray, v: np.ndarray, interpolation: Interpolation = "bicubic") -> np.ndarray:
    """Sample an H×W×C canvas at fractional (u, v); u wraps, v clamps."""
    order = spline_order(interpolation)
    height, width = data.shape[:2]
    pad = min(WRAP_PAD, width) if order > 0 else 1
    padded = np.pad(data, ((0, 0), (pad, pad), (0, 0)), mode="wrap")
    u = np.mod(u, width) + pad
    v = np.clip(v, 0.0, height - 1)
    return _map_channels(padded, v, u, order)


def sample_view(data: np.ndarray, col: np.ndarray, row: np.ndarray, interpolation: Interpolation = "bicubic") -> np.ndarray:
    """Sample an S×S×C view at fractional (col, row), clamping both axes."""
    order = spline_order(interpolation)
    side = data.shape[0]
    col = np.clip(col, 0.0, side - 1)
    row = np.clip(row, 0.0, side - 1)
    return _map_channels(data, row, col, order)


@lru_cache(maxsize=8)
def canvas_vectors(height: int) -> np.ndarray:
    """Unit vectors of every canvas pixel center, shape (H, 2H, 3), read-only."""
    yaw, pitch = pixel_grid_dirs(height, 2 * height)
    vectors = dirs_to_vectors(yaw, pitch)
    vectors.setflags(write=False)
    return vectors


def e2p(canvas: PanoCanvas, pose: CameraPose, side: int, interpolation: Interpolation = "bicubic") -> PerspView:
    """Render a square perspective view of the canvas."""
    if side < 2:
        raise PreconditionViolation("e2p", f"view side must be >= 2, got {side}")
    rays = view_rays(pose, side)
    yaw, pitch = vectors_to_dirs(rays)
    u, v = dirs_to_pixels(yaw, pitch, canvas.height, canvas.width)
    return PerspView(data=sample_canvas(canvas.data, u, v, interpolation), pose=pose)


def frustum_mask(pose: CameraPose, height: int) -> np.ndarray:
    """Canvas pixels whose center direction lies strictly inside the frustum."""
    if height < 2:
        raise PreconditionViolation("p2e", f"canvas height must be >= 2, got {height}")
    # The view side only scales (col, row); the inside test is resolution free.
    _, _, inside = project_to_view(canvas_vectors(height), pose, 2)
    return inside


def p2e(view: PerspView, pose: CameraPose, height: int, interpolation: Interpolation = "bicubic") -> ProjectionResult:
    """Project a perspective view onto an H×2H canvas."""
    if height < 2:
        raise PreconditionViolation("p2e", f"canvas height must be >= 2, got {height}")
    vectors = canvas_vectors(height)
    col, row, inside = project_to_view(vectors, pose, view.side)
    data = np.zeros((height, 2 * height, view.channels))
    data[inside] = sample_view(view.data, col[inside], row[inside], interpolation)
    return ProjectionResult(canvas=PanoCanvas(data=data), mask=inside)


def build_mask_video(trajectory: PoseTrajectory, height: int) -> VideoMask:
    """Stack the P2E footprint of every pose without any frame content."""
    frames = np.stack([frustum_mask(pose, height) for pose in trajectory])
    return VideoMask(frames=frames, trajectory=trajectory)


def build_video_projection(
    anchor: Sequence[PerspView],
    trajectory: PoseTrajectory,
    height: int,
    interpolation: Interpolation = "bicubic",
    workers: int = 1,
) -> tuple[np.ndarray, VideoMask]:
    """Project every anchor frame with its pose; returns (T×H×W×C video, masks)."""
    if len(anchor) != len(trajectory):
        raise InconsistentTrajectory(
            f"anchor has {len(anchor)} frames but trajectory has {len(trajectory)} poses"
        )

    def project(index: int) -> ProjectionResult:
        return p2e(anchor[index], trajectory[index], height, interpolation)

    # Per-frame work stays in-process: one Celery task owns the whole sequence
    # and fans its frames out over threads, keeping output in frame order.
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(project, range(len(anchor))))
    else:
        results = [project(i) for i in range(len(anchor))]

    logger.info(f"Projected {len(results)} anchor frames onto a {height}x{2 * height} canvas")
    video = np.stack([r.canvas.data for r in results])
    masks = VideoMask(frames=np.stack([r.mask for r in results]), trajectory=trajectory)
    return video, masks


# --------------------------------------------------------------------------
# Circular padding
# --------------------------------------------------------------------------

def circular_pad(frame: np.ndarray, pad: int, axis: int = 1) -> np.ndarray:
    """Wrap `pad` columns around both sides of the width axis."""
    width = frame.shape[axis]
    if not 0 <= pad <= width:
        raise PreconditionViolation("circular_pad", f"pad must be in [0, {width}], got {pad}")
    if pad == 0:
        return frame.copy()
    left = np.take(frame, np.arange(width - pad, width), axis=axis)
    right = np.take(frame, np.arange(pad), axis=axis)
    return np.concatenate([left, frame, right], axis=axis)


def circular_unpad(frame: np.ndarray, pad: int, axis: int = 1) -> np.ndarray:
    """Drop `pad` columns from both sides of the width axis."""
    width = frame.shape[axis]
    if pad < 0 or width < 2 * pad + 1:
        raise PreconditionViolation(
            "circular_unpad", f"width {width} too small to remove {pad} columns per side"
        )
    return np.take(frame, np.arange(pad, width - pad), axis=axis)


def seam_score(canvas: PanoCanvas) -> float:
    """Seam jump between the last and first column relative to interior steps."""
    data = canvas.data
    seam = float(np.mean(np.abs(data[:, -1] - data[:, 0])))
    baseline = float(np.mean(np.abs(np.diff(data, axis=1)))) if canvas.width > 1 else 0.0
    if baseline == 0.0:
        return 0.0 if seam == 0.0 else math.inf
    return seam / baseline


# --------------------------------------------------------------------------
# Conditioning and inspection helpers
# --------------------------------------------------------------------------

def compose_condition_stack(frames: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """Concatenate [frames, mask, masked frames] along the channel axis.

    `frames` is T×H×W×C and `masks` T×H×W; the result has 2C + 1 channels
    (9 for 4-channel latents).
    """
    if frames.ndim != 4 or masks.shape != frames.shape[:3]:
        raise PreconditionViolation(
            "compose_condition_stack",
            f"frames {frames.shape} and masks {masks.shape} do not line up",
        )
    known = masks.astype(frames.dtype)[..., None]
    return np.concatenate([frames, known, frames * known], axis=-1)


def eval_panel(canvas: PanoCanvas, interpolation: Interpolation = "bicubic") -> np.ndarray:
    """Canvas frame stacked above its four horizon views, side W/4 each."""
    side = canvas.width // 4
    views = [e2p(canvas, pose, side, interpolation).data for pose in eval_views()]
    strip = np.concatenate(views, axis=1)
    return np.concatenate([canvas.data, strip], axis=0)


def psnr(reference: np.ndarray, estimate: np.ndarray, data_range: float = 1.0) -> float:
    mse = float(np.mean((np.asarray(reference) - np.asarray(estimate)) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(data_range ** 2 / mse)


def projection_roundtrip(
    view: PerspView, height: int, border: int = 2, interpolation: Interpolation = "bicubic"
) -> tuple[PerspView, float]:
    """P2E then E2P at the view's own pose; PSNR over the view eroded by `border` px."""
    projected = p2e(view, view.pose, height, interpolation)
    restored = e2p(projected.canvas, view.pose, view.side, interpolation)
    interior = slice(border, view.side - border)
    score = psnr(view.data[interior, interior], restored.data[interior, interior])
    logger.info(f"Round trip at H={height}, side={view.side}: PSNR {score:.2f} dB")
    return restored, score
