"""
Spherical direction and camera pose schemas.

Conventions: yaw θ is the azimuth in [-π, π) and grows left to right across an
equirectangular canvas; pitch φ is the elevation in [-π/2, π/2] with +π/2 at
the top row. Angles are radians in memory and degrees in files.
"""
import math
from typing import Iterator, Sequence

import numpy as np
from pydantic import AliasChoices, BaseModel, ConfigDict, Field, field_validator

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi


def wrap_yaw(theta: float) -> float:
    """Wrap an azimuth into [-π, π); values already in range pass through."""
    if -math.pi <= theta < math.pi:
        return theta
    wrapped = (theta + math.pi) % TWO_PI - math.pi
    if wrapped >= math.pi:
        wrapped -= TWO_PI
    return wrapped


def wrap_yaw_array(theta: np.ndarray) -> np.ndarray:
    wrapped = np.mod(theta + np.pi, TWO_PI) - np.pi
    wrapped = np.where(wrapped >= np.pi, wrapped - TWO_PI, wrapped)
    return np.where((theta >= -np.pi) & (theta < np.pi), theta, wrapped)


class SphereDir(BaseModel):
    """A viewing direction on the unit sphere."""
    model_config = ConfigDict(frozen=True)

    yaw: float = Field(..., description="Azimuth θ in radians, wrapped into [-π, π)")
    pitch: float = Field(..., ge=-HALF_PI, le=HALF_PI, description="Elevation φ in radians")

    @field_validator("yaw")
    @classmethod
    def validate_yaw(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("yaw must be finite")
        return wrap_yaw(v)

    @classmethod
    def from_degrees(cls, yaw_deg: float, pitch_deg: float) -> "SphereDir":
        pitch = math.radians(pitch_deg)
        if abs(pitch_deg) <= 90.0:
            # degree→radian rounding must not push ±90° past the pole
            pitch = min(max(pitch, -HALF_PI), HALF_PI)
        return cls(yaw=math.radians(yaw_deg), pitch=pitch)

    def unit_vector(self) -> np.ndarray:
        cos_p = math.cos(self.pitch)
        return np.array([
            cos_p * math.cos(self.yaw),
            cos_p * math.sin(self.yaw),
            math.sin(self.pitch),
        ])


class CameraPose(BaseModel):
    """Square pinhole camera aimed along `dir`; roll is always zero."""
    model_config = ConfigDict(frozen=True)

    fov_deg: float = Field(..., gt=0, lt=180, description="Field of view in degrees")
    dir: SphereDir

    @classmethod
    def from_degrees(cls, fov_deg: float, yaw_deg: float, pitch_deg: float) -> "CameraPose":
        return cls(fov_deg=fov_deg, dir=SphereDir.from_degrees(yaw_deg, pitch_deg))

    @property
    def yaw(self) -> float:
        return self.dir.yaw

    @property
    def pitch(self) -> float:
        return self.dir.pitch

    @property
    def half_fov_tan(self) -> float:
        return math.tan(math.radians(self.fov_deg) / 2.0)

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (forward, right, up) unit vectors of the camera frame.

        `right` points toward increasing yaw and `up` toward increasing pitch.
        """
        cos_t, sin_t = math.cos(self.yaw), math.sin(self.yaw)
        cos_p, sin_p = math.cos(self.pitch), math.sin(self.pitch)
        forward = np.array([cos_p * cos_t, cos_p * sin_t, sin_p])
        right = np.array([-sin_t, cos_t, 0.0])
        up = np.array([-sin_p * cos_t, -sin_p * sin_t, cos_p])
        return forward, right, up

    def to_record(self) -> "PoseRecord":
        return PoseRecord(
            fov_deg=self.fov_deg,
            yaw_deg=math.degrees(self.yaw),
            pitch_deg=math.degrees(self.pitch),
        )


class PoseTrajectory(BaseModel):
    """Per-frame camera poses of an anchor video."""
    model_config = ConfigDict(frozen=True)

    frames: tuple[CameraPose, ...] = Field(..., min_length=1)

    @field_validator("frames")
    @classmethod
    def validate_shared_fov(cls, v: tuple[CameraPose, ...]) -> tuple[CameraPose, ...]:
        fovs = {pose.fov_deg for pose in v}
        if len(fovs) > 1:
            raise ValueError(f"all poses must share one FOV, got {sorted(fovs)}")
        return v

    @classmethod
    def constant(cls, pose: CameraPose, length: int) -> "PoseTrajectory":
        return cls(frames=tuple([pose] * length))

    @classmethod
    def from_pitches(
        cls, fov_deg: float, pitch_deg: Sequence[float], yaw_deg: float = 0.0
    ) -> "PoseTrajectory":
        return cls(frames=tuple(
            CameraPose.from_degrees(fov_deg, yaw_deg, float(p)) for p in pitch_deg
        ))

    @property
    def fov_deg(self) -> float:
        return self.frames[0].fov_deg

    @property
    def pitches(self) -> np.ndarray:
        return np.array([pose.pitch for pose in self.frames])

    @property
    def yaws(self) -> np.ndarray:
        return np.array([pose.yaw for pose in self.frames])

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self) -> Iterator[CameraPose]:  # type: ignore[override]
        return iter(self.frames)

    def __getitem__(self, index: int) -> CameraPose:
        return self.frames[index]


class PoseRecord(BaseModel):
    """One row of a pose trajectory file (angles in degrees)."""
    model_config = ConfigDict(
        populate_by_name=True,
        json_schema_extra={"example": {"fov_deg": 90.0, "yaw_deg": 0.0, "pitch_deg": 10.0}},
    )

    fov_deg: float = Field(..., gt=0, lt=180)
    yaw_deg: float = Field(default=0.0, validation_alias=AliasChoices("yaw_deg", "theta"))
    pitch_deg: float = Field(..., ge=-90, le=90)

    def to_pose(self) -> CameraPose:
        return CameraPose.from_degrees(self.fov_deg, self.yaw_deg, self.pitch_deg)
