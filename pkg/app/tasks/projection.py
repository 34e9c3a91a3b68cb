"""
Projection tasks: rendering perspective views from panoramic frames,
splatting anchor videos onto the canvas and the round-trip self-check.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from app.core.celery_app import celery_app
from app.core.exceptions import InconsistentTrajectory, PreconditionViolation, ValidationFailed
from app.schemas.canvas import PanoCanvas, PerspView
from app.schemas.geometry import CameraPose, PoseTrajectory
from app.services.resample import (
    build_video_projection,
    compose_condition_stack,
    e2p,
    eval_panel,
    projection_roundtrip,
)
from app.services.sphere import eval_views, icosahedron_views
from app.tasks.base import report_progress, run_config
from app.utils.frame_io import PNG_MODES, RAW_SUFFIX, read_frames, write_frames, write_mask_frames, write_raw
from app.utils.patterns import reference_photo, smooth_pattern
from app.utils.pose_io import read_pose_file, write_pose_file

logger = logging.getLogger(__name__)

ROUNDTRIP_MIN_PSNR = 35.0


def _frames_target(output_dir: Path, name: str, channels: int, raw: bool) -> Path:
    if raw or channels not in PNG_MODES:
        return output_dir / f"{name}{RAW_SUFFIX}"
    return output_dir / name


def _fit_trajectory(trajectory: PoseTrajectory, frame_count: int) -> PoseTrajectory:
    # a single pose is held for the whole clip
    if len(trajectory) == 1 and frame_count > 1:
        return PoseTrajectory.constant(trajectory[0], frame_count)
    if len(trajectory) != frame_count:
        raise InconsistentTrajectory(
            f"{frame_count} frames but trajectory has {len(trajectory)} poses"
        )
    return trajectory


@celery_app.task(bind=True, name="app.tasks.projection.render_views")
def render_views(
    self,
    input_path: str,
    output_dir: str,
    view_set: str = "eval",
    poses_path: Optional[str] = None,
    side: Optional[int] = None,
    config: Optional[Dict[str, Any]] = None,
    interpolation: str = "bicubic",
    panel: bool = False,
    raw: bool = False,
) -> Dict[str, Any]:
    """
    Render perspective sequences from panoramic frames (E2P).

    Args:
        input_path: Panoramic frames (PNG, PNG directory or .f32)
        output_dir: Directory receiving one sequence per view
        view_set: "eval", "icosahedron" or "poses" (per-frame poses from poses_path)
        side: View resolution; defaults to half the canvas height

    Returns:
        Dict with rendering results
    """
    try:
        cfg = run_config(config)
        out = Path(output_dir)
        video = read_frames(Path(input_path))
        frames, height, width, channels = video.shape
        if width != 2 * height:
            raise PreconditionViolation("e2p", f"canvas must satisfy W = 2H, got {height}x{width}")
        side = side or height // 2
        logger.info(f"Rendering {view_set} views from {frames} frames of {input_path}")

        canvases = [PanoCanvas(data=frame) for frame in video]
        if view_set == "poses":
            if not poses_path:
                raise PreconditionViolation("render_views", "view_set 'poses' needs a pose file")
            trajectory = _fit_trajectory(read_pose_file(Path(poses_path)), frames)
            sequences = {"view_00": [trajectory[t] for t in range(frames)]}
            view_poses: list[CameraPose] = list(trajectory)
        else:
            if view_set == "eval":
                poses = eval_views()
            elif view_set == "icosahedron":
                poses = icosahedron_views(cfg.fov_deg, side)
            else:
                raise PreconditionViolation("render_views", f"unknown view set '{view_set}'")
            sequences = {f"view_{i:02d}": [pose] * frames for i, pose in enumerate(poses)}
            view_poses = poses

        outputs = []
        with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
            for done, (name, per_frame) in enumerate(sequences.items(), start=1):
                rendered = list(executor.map(
                    lambda t: e2p(canvases[t], per_frame[t], side, interpolation).data,
                    range(frames),
                ))
                target = _frames_target(out, name, channels, raw)
                write_frames(target, np.stack(rendered))
                outputs.append(str(target))
                report_progress(self, int(90 * done / len(sequences)), f"Rendered {name}")

        write_pose_file(out / "views.json", view_poses)
        if panel:
            panels = np.stack([eval_panel(canvas, interpolation) for canvas in canvases])
            target = _frames_target(out, "panel", channels, raw)
            write_frames(target, panels)
            outputs.append(str(target))

        logger.info(f"Rendered {len(sequences)} view sequences into {out}")
        return {
            "status": "success",
            "direction": "e2p",
            "frames": frames,
            "views": len(sequences),
            "side": side,
            "outputs": outputs,
        }

    except Exception as e:
        logger.error(f"View rendering failed for {input_path}: {str(e)}")
        raise


@celery_app.task(bind=True, name="app.tasks.projection.project_anchor")
def project_anchor(
    self,
    input_path: str,
    poses_path: str,
    output_dir: str,
    config: Optional[Dict[str, Any]] = None,
    interpolation: str = "bicubic",
    stack: bool = False,
    raw: bool = False,
) -> Dict[str, Any]:
    """
    Project an anchor video onto the panoramic canvas (P2E).

    Writes the canvas frames, the per-frame masks and, with `stack`, the
    [frames, mask, masked frames] conditioning stack as a raw file.
    """
    try:
        cfg = run_config(config)
        out = Path(output_dir)
        anchor = read_frames(Path(input_path))
        trajectory = _fit_trajectory(read_pose_file(Path(poses_path)), anchor.shape[0])
        views = [PerspView(data=frame, pose=pose) for frame, pose in zip(anchor, trajectory)]
        report_progress(self, 10, "Projecting anchor frames...")

        video, vmask = build_video_projection(
            views, trajectory, cfg.height, interpolation, workers=cfg.workers
        )
        report_progress(self, 70, "Writing outputs...")

        canvas_target = _frames_target(out, "canvas", video.shape[-1], raw)
        write_frames(canvas_target, video)
        write_mask_frames(out / "mask", vmask.frames)
        write_pose_file(out / "trajectory.json", trajectory)
        outputs = [str(canvas_target), str(out / "mask")]
        if stack:
            stacked = compose_condition_stack(video, vmask.frames)
            write_raw(out / f"condition{RAW_SUFFIX}", stacked)
            outputs.append(str(out / f"condition{RAW_SUFFIX}"))

        constant_mask = bool(np.all(vmask.frames == vmask.frames[0]))
        coverage = vmask.frames.reshape(vmask.frame_count, -1).mean(axis=1)
        logger.info(f"Projected {vmask.frame_count} anchor frames into {out}")
        return {
            "status": "success",
            "direction": "p2e",
            "frames": vmask.frame_count,
            "height": cfg.height,
            "mask_constant": constant_mask,
            "coverage": [float(c) for c in coverage],
            "outputs": outputs,
        }

    except Exception as e:
        logger.error(f"Anchor projection failed for {input_path}: {str(e)}")
        raise


@celery_app.task(bind=True, name="app.tasks.projection.roundtrip")
def roundtrip(
    self,
    input_path: Optional[str] = None,
    config: Optional[Dict[str, Any]] = None,
    pitch_deg: float = 0.0,
    yaw_deg: float = 0.0,
    border: int = 2,
    min_psnr: float = ROUNDTRIP_MIN_PSNR,
    synthetic: bool = False,
    interpolation: str = "bicubic",
) -> Dict[str, Any]:
    """
    P2E followed by E2P at the same pose; fails below `min_psnr` dB.

    Without `input_path` the bundled photograph is resized to the configured
    side; `synthetic` swaps in a smooth band-limited pattern instead.
    """
    cfg = run_config(config)
    pose = CameraPose.from_degrees(cfg.anchor_fov_deg, yaw_deg, pitch_deg)
    if input_path:
        data = read_frames(Path(input_path))[0]
        source = input_path
    elif synthetic:
        data = smooth_pattern(cfg.side, seed=cfg.seed)
        source = "synthetic"
    else:
        data = reference_photo(cfg.side)
        source = "photo"
    view = PerspView(data=data, pose=pose)
    _, score = projection_roundtrip(view, cfg.height, border=border, interpolation=interpolation)

    report = {
        "status": "success",
        "source": source,
        "height": cfg.height,
        "side": view.side,
        "fov_deg": cfg.anchor_fov_deg,
        "interpolation": interpolation,
        "psnr_db": score if np.isfinite(score) else "inf",
        "threshold_db": min_psnr,
    }
    if score < min_psnr:
        logger.error(f"Round trip PSNR {score:.2f} dB below {min_psnr} dB")
        raise ValidationFailed("roundtrip", f"PSNR {score:.2f} dB < {min_psnr} dB")
    return report
