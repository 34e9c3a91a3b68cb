#!/usr/bin/env python3
"""
pano360 command-line front end.

Every command prints a JSON report on stdout; diagnostics go to stderr.
Exit code 0 means every output was written and every check passed.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional

from pydantic import ValidationError

from app.core.config import RunConfig, build_run_config, settings
from app.core.exceptions import PanoException, PreconditionViolation, ValidationFailed
from app.core.logging_config import setup_logging
from app.schemas.canvas import PanoCanvas
from app.services import datapipe
from app.services.elevation import fit_line, load_estimates
from app.services.resample import seam_score
from app.services.sphere import eval_views, icosahedron_views
from app.tasks import (
    build_attention_mask,
    build_video_mask,
    curate_manifest,
    project_anchor,
    render_views,
    roundtrip,
    run_task,
    validate_attention_mask,
)
from app.utils.frame_io import read_frames
from app.utils.pose_io import poses_to_json, write_pose_file

logger = logging.getLogger(__name__)

VALIDATE_HEIGHT = 32


def _emit(report: dict[str, Any]) -> None:
    print(json.dumps(report, indent=2, default=str))


def _config(args: argparse.Namespace, defaults: Optional[dict[str, Any]] = None) -> RunConfig:
    flags = {
        name: getattr(args, name, None)
        for name in RunConfig.model_fields
    }
    return build_run_config(args.config, defaults=defaults, **flags)


def _config_payload(cfg: RunConfig) -> dict[str, Any]:
    return cfg.model_dump(mode="json")


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def cmd_project(args: argparse.Namespace) -> dict[str, Any]:
    cfg = _config(args)
    if args.direction == "e2p":
        if args.eval_views:
            view_set = "eval"
        elif args.icosahedron:
            view_set = "icosahedron"
        elif args.poses:
            view_set = "poses"
        else:
            raise PreconditionViolation("project", "e2p needs --eval-views, --icosahedron or --poses")
        return run_task(
            render_views,
            input_path=str(args.input),
            output_dir=str(args.output),
            view_set=view_set,
            poses_path=str(args.poses) if args.poses else None,
            side=args.side,
            config=_config_payload(cfg),
            interpolation=args.interpolation,
            panel=args.panel,
            raw=args.raw,
        )

    if not args.poses:
        raise PreconditionViolation("project", "p2e needs --poses")
    return run_task(
        project_anchor,
        input_path=str(args.input),
        poses_path=str(args.poses),
        output_dir=str(args.output),
        config=_config_payload(cfg),
        interpolation=args.interpolation,
        stack=args.stack,
        raw=args.raw,
    )


def cmd_roundtrip(args: argparse.Namespace) -> dict[str, Any]:
    cfg = _config(args)
    return run_task(
        roundtrip,
        input_path=str(args.input) if args.input else None,
        config=_config_payload(cfg),
        pitch_deg=args.pitch,
        yaw_deg=args.yaw,
        border=args.border,
        min_psnr=args.min_psnr,
        synthetic=args.synthetic,
        interpolation=args.interpolation,
    )


def cmd_mask(args: argparse.Namespace) -> dict[str, Any]:
    if not args.sample and not args.trajectory:
        raise PreconditionViolation("mask", "pass --trajectory FILE or --sample")
    cfg = _config(args)
    return run_task(
        build_video_mask,
        output_dir=str(args.output),
        config=_config_payload(cfg),
        trajectory_path=str(args.trajectory) if args.trajectory else None,
        sample=args.sample,
        canvas_path=str(args.canvas) if args.canvas else None,
        crop_mode=args.crop_mode,
    )


def cmd_attnmask(args: argparse.Namespace) -> dict[str, Any]:
    cfg = _config(args, defaults={"height": settings.PANO_LATENT_HEIGHT})
    return run_task(
        build_attention_mask,
        output_path=str(args.output),
        config=_config_payload(cfg),
        include_antipodal=not args.no_antipodal,
        emit_bias=args.emit_bias,
        bias_views=args.bias_views,
        bias_frame=args.bias_frame,
    )


def cmd_validate_attnmask(args: argparse.Namespace) -> dict[str, Any]:
    cfg = _config(args, defaults={"height": VALIDATE_HEIGHT})
    return run_task(
        validate_attention_mask,
        mask_path=str(args.mask) if args.mask else None,
        config=_config_payload(cfg),
        tolerance_px=args.tolerance,
    )


def cmd_filter(args: argparse.Namespace) -> dict[str, Any]:
    if not args.flow and not args.manifest:
        raise PreconditionViolation("filter", "pass --flow FILE or --manifest FILE")
    return run_task(
        curate_manifest,
        manifest_out=str(args.output),
        flow_path=str(args.flow) if args.flow else None,
        manifest_in=str(args.manifest) if args.manifest else None,
        captions_path=str(args.captions) if args.captions else None,
        source=args.source,
        fps=args.fps,
        thresh=args.thresh,
        min_fraction=args.min_fraction,
        rule=args.rule,
    )


def cmd_smooth(args: argparse.Namespace) -> dict[str, Any]:
    cfg = _config(args)
    series = load_estimates(args.estimates)
    trajectory = fit_line(series)
    report: dict[str, Any] = {
        "status": "success",
        "source": str(args.estimates),
        "first_frame": series.first_frame,
        "frames": len(trajectory),
        "start_deg": trajectory.start_deg,
        "slope_deg": trajectory.slope_deg,
        "pitch_deg": list(trajectory.samples),
    }
    if args.output:
        write_pose_file(args.output, trajectory.to_poses(cfg.anchor_fov_deg))
        report["output"] = str(args.output)
    return report


def cmd_seamcheck(args: argparse.Namespace) -> dict[str, Any]:
    video = read_frames(args.input)
    scores = [seam_score(PanoCanvas(data=frame)) for frame in video]
    worst = max(scores)
    report = {
        "status": "success",
        "frames": len(scores),
        "scores": [s if s != float("inf") else "inf" for s in scores],
        "max_score": worst if worst != float("inf") else "inf",
    }
    if args.max_score is not None and worst > args.max_score:
        raise ValidationFailed("seamcheck", f"seam score {worst} exceeds {args.max_score}")
    return report


def cmd_windows(args: argparse.Namespace) -> dict[str, Any]:
    options = {
        "clip_seconds": args.clip_seconds,
        "out_fps": args.out_fps,
        "speedup": args.speedup,
    }
    if args.shots:
        shots = datapipe.load_shot_boundaries(args.shots)
        windows = datapipe.windows_for_shots(shots, args.fps, **options)
    elif args.total_frames is not None:
        windows = datapipe.window_clips(args.total_frames, args.fps, **options)
    else:
        raise PreconditionViolation("windows", "pass --total-frames N or --shots FILE")
    return {
        "status": "success",
        "clips": len(windows),
        "windows": [w.model_dump() for w in windows],
    }


def cmd_views(args: argparse.Namespace) -> dict[str, Any]:
    cfg = _config(args)
    poses = eval_views() if args.set == "eval" else icosahedron_views(cfg.fov_deg)
    if args.output:
        write_pose_file(args.output, poses)
    return {"status": "success", "set": args.set, "views": poses_to_json(poses)}


COMMANDS: dict[str, Callable[[argparse.Namespace], dict[str, Any]]] = {
    "project": cmd_project,
    "roundtrip": cmd_roundtrip,
    "mask": cmd_mask,
    "attnmask": cmd_attnmask,
    "validate-attnmask": cmd_validate_attnmask,
    "filter": cmd_filter,
    "smooth": cmd_smooth,
    "seamcheck": cmd_seamcheck,
    "windows": cmd_windows,
    "views": cmd_views,
}


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

def _add_geometry(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--height", type=int, help="Canvas height H (width is 2H)")
    parser.add_argument("--fov", dest="fov_deg", type=float, help="Icosahedron view FOV in degrees")
    parser.add_argument("--anchor-fov", dest="anchor_fov_deg", type=float, help="Anchor camera FOV in degrees")
    parser.add_argument("--side", type=int, help="Perspective view side in pixels")
    parser.add_argument("--workers", type=int, help="Frame-level worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pano360",
        description="Spherical geometry toolkit for 360° video generation",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  pano360 project --direction e2p --eval-views --input pano.f32 --output views/
  pano360 project --direction p2e --poses poses.json --input anchor/ --output canvas/ --height 512
  pano360 roundtrip --height 512 --side 256
  pano360 mask --sample --seed 7 --frames 40 --output mask/
  pano360 attnmask --height 64 --sigma 1.0 --output attn/mask.bin
  pano360 validate-attnmask --height 32
  pano360 filter --flow flow.jsonl --output manifest.jsonl
  pano360 smooth --estimates pitch.jsonl --output trajectory.json
  pano360 seamcheck --input generated/
  pano360 windows --total-frames 3000 --fps 30
  pano360 views --set icosahedron
        """,
    )
    parser.add_argument("--config", type=Path, help="key=value file with RunConfig overrides")
    parser.add_argument("--log-level", default=None, help="Logging level (default from LOG_LEVEL)")
    parser.add_argument("--log-file", default=None, help="Also append logs to this file")

    subparsers = parser.add_subparsers(dest="command", help="Commands")

    # Projection
    project = subparsers.add_parser("project", help="E2P or P2E reprojection of frame sequences")
    project.add_argument("--direction", choices=["e2p", "p2e"], required=True)
    project.add_argument("--input", type=Path, required=True, help="Frames: PNG, PNG directory or .f32")
    project.add_argument("--output", type=Path, required=True, help="Output directory")
    project.add_argument("--poses", type=Path, help="Pose trajectory JSON")
    project.add_argument("--eval-views", action="store_true", help="Render the four horizon views")
    project.add_argument("--icosahedron", action="store_true", help="Render the twenty icosahedron views")
    project.add_argument("--panel", action="store_true", help="Also write canvas + eval-view panels")
    project.add_argument("--stack", action="store_true", help="Also write the conditioning stack (p2e)")
    project.add_argument("--raw", action="store_true", help="Write .f32 files instead of PNGs")
    project.add_argument("--interpolation", choices=["bicubic", "bilinear", "nearest"], default="bicubic")
    _add_geometry(project)

    rt = subparsers.add_parser("roundtrip", help="P2E then E2P PSNR self-check")
    rt.add_argument("--input", type=Path, help="Square test view (default: bundled photograph)")
    rt.add_argument("--synthetic", action="store_true", help="Use a smooth synthetic view instead")
    rt.add_argument("--interpolation", choices=["bicubic", "bilinear", "nearest"], default="bicubic")
    rt.add_argument("--pitch", type=float, default=0.0, help="View pitch in degrees")
    rt.add_argument("--yaw", type=float, default=0.0, help="View yaw in degrees")
    rt.add_argument("--border", type=int, default=2, help="Pixels eroded before scoring")
    rt.add_argument("--min-psnr", type=float, default=35.0)
    rt.add_argument("--seed", type=int)
    _add_geometry(rt)

    # Masks
    mask = subparsers.add_parser("mask", help="Video mask, inscribed rectangles and encodings")
    mask.add_argument("--output", type=Path, required=True)
    mask.add_argument("--trajectory", type=Path, help="Pose trajectory JSON")
    mask.add_argument("--sample", action="store_true", help="Sample a linear pitch trajectory")
    mask.add_argument("--seed", type=int)
    mask.add_argument("--frames", type=int, help="Frames to sample")
    mask.add_argument("--embed-dim", dest="embed_dim", type=int)
    mask.add_argument("--canvas", type=Path, help="Panoramic frames to crop to the anchor region")
    mask.add_argument("--crop-mode", choices=["fixed", "per_frame"], default="fixed")
    _add_geometry(mask)

    attn = subparsers.add_parser("attnmask", help="Cross-domain spherical attention mask")
    attn.add_argument("--output", type=Path, required=True, help="Mask binary path (sidecar: .json)")
    attn.add_argument("--sigma", type=float)
    attn.add_argument("--antipodal-weight", dest="antipodal_weight", type=float)
    attn.add_argument("--lambda-direct", dest="lambda_direct", type=float)
    attn.add_argument("--lambda-antipodal", dest="lambda_antipodal", type=float)
    attn.add_argument("--weight-threshold", dest="weight_threshold", type=float)
    attn.add_argument("--no-antipodal", action="store_true")
    attn.add_argument("--emit-bias", action="store_true", help="Write dense bias matrices")
    attn.add_argument("--bias-views", type=int, nargs="+", help="Views to emit bias for (default: 0)")
    attn.add_argument("--bias-frame", type=int, default=0)
    _add_geometry(attn)

    check = subparsers.add_parser("validate-attnmask", help="Geometric consistency of an attention mask")
    check.add_argument("--mask", type=Path, help="Stored mask (default: build one)")
    check.add_argument("--sigma", type=float)
    check.add_argument("--antipodal-weight", dest="antipodal_weight", type=float)
    check.add_argument("--tolerance", type=float, default=1.0, help="Re-projection tolerance in px")
    _add_geometry(check)

    # Curation
    flt = subparsers.add_parser("filter", help="Drop static clips and write the manifest")
    flt.add_argument("--flow", type=Path, help="Flow statistics JSON lines")
    flt.add_argument("--manifest", type=Path, help="Existing manifest to filter")
    flt.add_argument("--captions", type=Path, help="Caption JSON lines")
    flt.add_argument("--output", type=Path, required=True, help="Manifest to write")
    flt.add_argument("--source", default="", help="Source video for records built from flow stats")
    flt.add_argument("--fps", type=float, default=datapipe.OUTPUT_FPS)
    flt.add_argument("--thresh", type=float, default=datapipe.FLOW_THRESHOLD)
    flt.add_argument("--min-fraction", type=float, default=datapipe.MIN_DYNAMIC_FRACTION)
    flt.add_argument("--rule", choices=["fraction", "peak"], default="fraction")

    smooth = subparsers.add_parser("smooth", help="Fit a linear pitch trajectory to estimates")
    smooth.add_argument("--estimates", type=Path, required=True, help="Pitch estimate JSON lines")
    smooth.add_argument("--output", type=Path, help="Write the fitted pose trajectory here")
    smooth.add_argument("--anchor-fov", dest="anchor_fov_deg", type=float)

    seam = subparsers.add_parser("seamcheck", help="Left/right edge continuity of canvases")
    seam.add_argument("--input", type=Path, required=True)
    seam.add_argument("--max-score", type=float, help="Fail above this seam score")

    win = subparsers.add_parser("windows", help="Clip windows for a source video or shot list")
    win.add_argument("--total-frames", type=int)
    win.add_argument("--shots", type=Path, help="Shot boundaries, one 'start end' pair per line")
    win.add_argument("--fps", type=float, required=True, help="Source frame rate")
    win.add_argument("--clip-seconds", type=float, default=datapipe.CLIP_SECONDS)
    win.add_argument("--out-fps", type=float, default=datapipe.OUTPUT_FPS)
    win.add_argument("--speedup", type=int, default=datapipe.SPEEDUP)

    views = subparsers.add_parser("views", help="Print a fixed view set")
    views.add_argument("--set", choices=["icosahedron", "eval"], default="icosahedron")
    views.add_argument("--fov", dest="fov_deg", type=float)
    views.add_argument("--output", type=Path, help="Also write the poses as a trajectory file")

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    """Main function to handle command line arguments."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 1

    setup_logging(args.log_level or settings.LOG_LEVEL, args.log_file or settings.LOG_FILE)

    try:
        report = COMMANDS[args.command](args)
    except ValidationError as e:
        error = PreconditionViolation(args.command, str(e))
        logger.error(error.detail)
        _emit({"status": "error", "detail": error.detail})
        return error.exit_code
    except PanoException as e:
        logger.error(e.detail)
        _emit({"status": "error", "detail": e.detail})
        return e.exit_code
    except Exception as e:
        logger.exception(f"{args.command} failed: {e}")
        _emit({"status": "error", "detail": str(e)})
        return 1

    _emit(report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
