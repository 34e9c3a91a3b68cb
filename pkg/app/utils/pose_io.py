"""
Pose trajectory files: a JSON array of `{fov_deg, yaw_deg, pitch_deg}` records,
one per frame. `theta` is accepted as an alias of `yaw_deg` when reading.
"""
import json
import logging
from pathlib import Path
from typing import Sequence

from pydantic import TypeAdapter, ValidationError

from app.core.exceptions import InconsistentTrajectory, PreconditionViolation
from app.schemas.geometry import CameraPose, PoseRecord, PoseTrajectory

logger = logging.getLogger(__name__)

_records = TypeAdapter(list[PoseRecord])


def read_pose_records(path: Path) -> list[PoseRecord]:
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as e:
        raise PreconditionViolation("read_pose_file", f"cannot read {path} ({e})")
    try:
        records = _records.validate_json(raw)
    except ValidationError as e:
        raise PreconditionViolation("read_pose_file", f"{path} is not a pose list ({e})")
    if not records:
        raise PreconditionViolation("read_pose_file", f"{path} contains no poses")
    return records


def read_pose_file(path: Path) -> PoseTrajectory:
    """Load a trajectory; every pose must share one FOV."""
    records = read_pose_records(path)
    fovs = sorted({r.fov_deg for r in records})
    if len(fovs) > 1:
        raise InconsistentTrajectory(f"{path} mixes FOVs {fovs}")
    trajectory = PoseTrajectory(frames=tuple(r.to_pose() for r in records))
    logger.debug(f"Read {len(trajectory)} poses from {path}")
    return trajectory


def poses_to_json(poses: Sequence[CameraPose]) -> list[dict]:
    return [pose.to_record().model_dump() for pose in poses]


def write_pose_file(path: Path, poses: Sequence[CameraPose] | PoseTrajectory) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(poses_to_json(list(poses)), indent=2) + "\n")
    return path
