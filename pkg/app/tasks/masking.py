"""
Masking tasks: video masks with inscribed rectangles and positional
encodings, and the cross-domain attention mask.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from app.core.celery_app import celery_app
from app.core.exceptions import AnchorSweepTooLarge, PreconditionViolation, ValidationFailed
from app.schemas.masks import MaskTag
from app.services.elevation import sample_trajectory
from app.services.maskgen import anchor_crop, anchor_rect, video_pos_encodings
from app.services.resample import build_mask_video
from app.services.sphere import icosahedron_views
from app.services.spherical_mask import attention_bias, build_cross_domain_mask, validate_cross_domain_mask
from app.tasks.base import report_progress, run_config
from app.utils.frame_io import RAW_SUFFIX, read_frames, write_frames, write_mask_frames
from app.utils.mask_codec import read_cross_domain_mask, write_cross_domain_mask
from app.utils.pose_io import read_pose_file, write_pose_file

logger = logging.getLogger(__name__)

POSENC_BLOCKS = ["center_x", "center_y", "width", "height", "pitch"]


def _write_json(path: Path, payload: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n")


@celery_app.task(bind=True, name="app.tasks.masking.build_video_mask")
def build_video_mask(
    self,
    output_dir: str,
    config: Optional[Dict[str, Any]] = None,
    trajectory_path: Optional[str] = None,
    sample: bool = False,
    canvas_path: Optional[str] = None,
    crop_mode: str = "fixed",
) -> Dict[str, Any]:
    """
    Build the per-frame video mask of an anchor trajectory.

    Writes mask PNGs, rects.json (per-frame and anchor rectangles),
    posenc.json (five sinusoidal blocks per frame) and trajectory.json.
    With `canvas_path`, the panoramic frames are also cropped to the anchor
    region.
    """
    try:
        cfg = run_config(config)
        out = Path(output_dir)
        report: Dict[str, Any] = {"status": "success", "height": cfg.height}

        if sample:
            elevation = sample_trajectory(cfg.frames, cfg.seed)
            trajectory = elevation.to_poses(cfg.anchor_fov_deg)
            report["elevation"] = {
                "seed": cfg.seed,
                "start_deg": elevation.start_deg,
                "slope_deg": elevation.slope_deg,
            }
        elif trajectory_path:
            trajectory = read_pose_file(Path(trajectory_path))
        else:
            raise PreconditionViolation("build_video_mask", "need a trajectory file or sampling")

        logger.info(f"Building {len(trajectory)}-frame video mask at H={cfg.height}")
        vmask = build_mask_video(trajectory, cfg.height)
        report_progress(self, 40, "Inscribing rectangles...")
        rects, encodings = video_pos_encodings(vmask, cfg.embed_dim)

        try:
            common = anchor_rect(vmask).model_dump()
        except AnchorSweepTooLarge as e:
            # per-frame rectangles stay valid; only the fixed crop is undefined
            logger.warning(str(e))
            common = None

        write_mask_frames(out / "mask", vmask.frames)
        _write_json(out / "rects.json", {
            "anchor": common,
            "frames": [rect.model_dump() for rect in rects],
        })
        _write_json(out / "posenc.json", {
            "dim": cfg.embed_dim,
            "blocks": POSENC_BLOCKS,
            "frames": encodings.tolist(),
        })
        write_pose_file(out / "trajectory.json", trajectory)
        outputs = [str(out / name) for name in ("mask", "rects.json", "posenc.json", "trajectory.json")]

        if canvas_path:
            report_progress(self, 70, "Cropping anchor region...")
            video = read_frames(Path(canvas_path))
            cropped = anchor_crop(video, vmask, crop_mode)
            target = out / "crop" if cropped.shape[-1] in (1, 3, 4) else out / f"crop{RAW_SUFFIX}"
            write_frames(target, cropped)
            outputs.append(str(target))

        report.update({
            "frames": vmask.frame_count,
            "anchor_rect": common,
            "outputs": outputs,
        })
        return report

    except Exception as e:
        logger.error(f"Video mask build failed: {str(e)}")
        raise


@celery_app.task(bind=True, name="app.tasks.masking.build_attention_mask")
def build_attention_mask(
    self,
    output_path: str,
    config: Optional[Dict[str, Any]] = None,
    include_antipodal: bool = True,
    emit_bias: bool = False,
    bias_views: Optional[list[int]] = None,
    bias_frame: int = 0,
) -> Dict[str, Any]:
    """
    Build and store the cross-domain spherical mask for the icosahedron views.

    With `emit_bias`, dense additive bias matrices for the chosen views are
    written next to the mask as float32 .npy files.
    """
    try:
        cfg = run_config(config)
        out = Path(output_path)
        views = icosahedron_views(cfg.fov_deg, cfg.side)
        mask = build_cross_domain_mask(
            cfg.height,
            views,
            cfg.sigma,
            include_antipodal=include_antipodal,
            side=cfg.side,
            antipodal_weight=cfg.antipodal_weight,
            weight_threshold=cfg.weight_threshold,
            workers=cfg.workers,
        )
        report_progress(self, 60, "Writing mask...")
        mask_path, meta_path = write_cross_domain_mask(
            mask, out, cfg.lambda_direct, cfg.lambda_antipodal
        )
        outputs = [str(mask_path), str(meta_path)]

        if emit_bias:
            for view in bias_views or [0]:
                bias = attention_bias(
                    mask, cfg.lambda_direct, cfg.lambda_antipodal, view, frame=bias_frame, dense=True
                )
                target = out.with_name(f"{out.stem}_bias_f{bias_frame}_v{view:02d}.npy")
                np.save(target, bias.astype(np.float32))
                outputs.append(str(target))

        return {
            "status": "success",
            "height": mask.height,
            "side": mask.side,
            "sigma": mask.sigma,
            "antipodal": include_antipodal,
            "triples": len(mask),
            "direct_triples": mask.count(MaskTag.direct),
            "antipodal_triples": mask.count(MaskTag.antipodal),
            "outputs": outputs,
        }

    except Exception as e:
        logger.error(f"Attention mask build failed: {str(e)}")
        raise


@celery_app.task(bind=True, name="app.tasks.masking.validate_attention_mask")
def validate_attention_mask(
    self,
    mask_path: Optional[str] = None,
    config: Optional[Dict[str, Any]] = None,
    tolerance_px: float = 1.0,
) -> Dict[str, Any]:
    """Geometric consistency check of a stored mask, or of a freshly built one."""
    if mask_path:
        mask, _ = read_cross_domain_mask(Path(mask_path))
    else:
        cfg = run_config(config)
        mask = build_cross_domain_mask(
            cfg.height,
            icosahedron_views(cfg.fov_deg, cfg.side),
            cfg.sigma,
            side=cfg.side,
            antipodal_weight=cfg.antipodal_weight,
            weight_threshold=cfg.weight_threshold,
            workers=cfg.workers,
        )
    report = validate_cross_domain_mask(mask, tolerance_px)
    if not report["passed"]:
        raise ValidationFailed("validate-attnmask", json.dumps(report))
    return {"status": "success", **report}
