"""
Anchor-region geometry on video masks: maximum inscribed rectangles, anchor
crops and the sinusoidal encodings derived from them.
"""
import logging
import math
from typing import Literal

import numpy as np

from app.core.exceptions import AnchorSweepTooLarge, NoAnchorRegion, PreconditionViolation
from app.schemas.geometry import HALF_PI, SphereDir
from app.schemas.masks import InscribedRect, PosEncoding, VideoMask

logger = logging.getLogger(__name__)

EMBED_BASE = 10000.0

CropMode = Literal["fixed", "per_frame"]


def max_inscribed_rect(mask: np.ndarray) -> InscribedRect:
    """Largest axis-aligned all-ones rectangle (histogram-stack method).

    Ties prefer the smaller center y, then the smaller center x, then the
    wider rectangle.
    """
    grid = np.asarray(mask, dtype=bool)
    if grid.ndim != 2:
        raise PreconditionViolation("max_inscribed_rect", f"mask must be 2D, got shape {grid.shape}")
    if not grid.any():
        raise NoAnchorRegion(grid.shape)

    # Every all-ones rectangle lives inside the bounding box of the ones.
    rows = np.flatnonzero(grid.any(axis=1))
    cols = np.flatnonzero(grid.any(axis=0))
    row0, col0 = int(rows[0]), int(cols[0])
    box = grid[row0:rows[-1] + 1, col0:cols[-1] + 1]
    box_width = box.shape[1]

    best_key = None
    best = (0, 0, 0, 0)
    heights = np.zeros(box_width, dtype=np.int64)
    for i, row in enumerate(box):
        heights = np.where(row, heights + 1, 0)
        bars = heights.tolist()
        bars.append(0)
        stack: list[tuple[int, int]] = []
        for j, cur in enumerate(bars):
            start = j
            while stack and stack[-1][1] >= cur:
                left, height = stack.pop()
                start = left
                if height == 0:
                    continue
                width = j - left
                top = i - height + 1
                # doubled centers keep the tie-break in integers
                key = (height * width, -(2 * top + height), -(2 * left + width), width)
                if best_key is None or key > best_key:
                    best_key = key
                    best = (left, top, width, height)
            stack.append((start, cur))

    left, top, width, height = best
    return InscribedRect(left=left + col0, top=top + row0, width=width, height=height)


def anchor_rect(vmask: VideoMask) -> InscribedRect:
    """Inscribed rectangle of the pixels known in every frame."""
    common = np.logical_and.reduce(vmask.frames, axis=0)
    if not common.any():
        raise AnchorSweepTooLarge(vmask.frame_count)
    return max_inscribed_rect(common)


def frame_rects(vmask: VideoMask) -> list[InscribedRect]:
    """Inscribed rectangle of each frame.

    Under a rising pitch the rectangle climbs, but `top` and `height` are whole
    rows: for steps finer than a row `center_y` holds for a frame before it
    moves, so it is non-increasing rather than strictly decreasing.
    """
    return [max_inscribed_rect(frame) for frame in vmask.frames]


def anchor_crop(video: np.ndarray, vmask: VideoMask, mode: CropMode = "fixed") -> np.ndarray:
    """Crop every frame to the anchor rectangle.

    `fixed` uses one rectangle for the whole clip (the inscribed rectangle of
    the mask intersection). `per_frame` crops each frame to its own rectangle
    and zero-pads the crops to the largest height and width.
    """
    video = np.asarray(video)
    if video.ndim == 3:
        video = video[..., None]
    if video.shape[:3] != vmask.frames.shape:
        raise PreconditionViolation(
            "anchor_crop", f"video {video.shape[:3]} and mask {vmask.frames.shape} differ"
        )

    if mode == "fixed":
        rect = anchor_rect(vmask)
        rows, cols = rect.slices
        logger.info(f"Fixed anchor crop {rect.width}x{rect.height} at ({rect.left}, {rect.top})")
        return video[:, rows, cols].copy()

    if mode != "per_frame":
        raise PreconditionViolation("anchor_crop", f"unknown crop mode '{mode}'")
    rects = frame_rects(vmask)
    out_h = max(r.height for r in rects)
    out_w = max(r.width for r in rects)
    out = np.zeros((video.shape[0], out_h, out_w, video.shape[3]), dtype=video.dtype)
    for t, rect in enumerate(rects):
        rows, cols = rect.slices
        out[t, :rect.height, :rect.width] = video[t, rows, cols]
    return out


def sinusoidal_embed(value: float, dim: int) -> PosEncoding:
    """Transformer-style sin/cos embedding of a scalar normalized to [0, 1]."""
    if dim < 2 or dim % 2:
        raise PreconditionViolation("sinusoidal_embed", f"dimension must be even and >= 2, got {dim}")
    if not 0.0 <= value <= 1.0:
        raise PreconditionViolation("sinusoidal_embed", f"value must be in [0, 1], got {value}")
    exponents = np.arange(0, dim, 2, dtype=np.float64) / dim
    angles = value / np.power(EMBED_BASE, exponents)
    out = np.empty(dim)
    out[0::2] = np.sin(angles)
    out[1::2] = np.cos(angles)
    return out


def mask_pos_encoding(rect: InscribedRect, height: int, width: int, pitch: float, dim: int) -> PosEncoding:
    """Five concatenated embeddings: x/W, y/H, w/W, h/H and normalized pitch."""
    if rect.left + rect.width > width or rect.top + rect.height > height:
        raise PreconditionViolation(
            "mask_pos_encoding", f"rectangle {rect.model_dump()} exceeds canvas {width}x{height}"
        )
    if not -HALF_PI <= pitch <= HALF_PI:
        raise PreconditionViolation("mask_pos_encoding", f"pitch {pitch} outside [-π/2, π/2]")
    scalars = (
        rect.center_x / width,
        rect.center_y / height,
        rect.width / width,
        rect.height / height,
        (pitch + HALF_PI) / math.pi,
    )
    return np.concatenate([sinusoidal_embed(s, dim) for s in scalars])


def video_pos_encodings(vmask: VideoMask, dim: int) -> tuple[list[InscribedRect], np.ndarray]:
    """Per-frame rectangles and their T×5D mask positional encodings."""
    rects = frame_rects(vmask)
    encodings = np.stack([
        mask_pos_encoding(rect, vmask.height, vmask.width, pose.pitch, dim)
        for rect, pose in zip(rects, vmask.trajectory)
    ])
    return rects, encodings


def spherical_pe(direction: SphereDir, dim: int) -> PosEncoding:
    """Embed the unit vector of a direction, each component mapped to [0, 1]."""
    vec = direction.unit_vector()
    scalars = np.clip((vec + 1.0) / 2.0, 0.0, 1.0)
    return np.concatenate([sinusoidal_embed(float(s), dim) for s in scalars])
