"""
Pitch trajectory schemas (angles in degrees).
"""
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.geometry import PoseTrajectory

PITCH_LIMIT_DEG = 90.0
SAMPLED_START_RANGE = (-20.0, 20.0)
SAMPLED_SLOPE_RANGE = (-0.5, 0.5)


class ElevationTrajectory(BaseModel):
    """Linear pitch sequence φ_t = φ_s + k·t, clamped to ±90°."""
    model_config = ConfigDict(frozen=True)

    start_deg: float = Field(..., description="Pitch of frame 0")
    slope_deg: float = Field(..., description="Pitch change per frame")
    samples: tuple[float, ...] = Field(..., min_length=1)
    origin: Literal["sampled", "fitted", "manual"] = "manual"

    @model_validator(mode="after")
    def validate_samples(self) -> "ElevationTrajectory":
        expected = linear_samples(self.start_deg, self.slope_deg, len(self.samples))
        if not np.array_equal(np.asarray(self.samples), expected):
            raise ValueError("samples must follow start + slope·t (clamped to ±90°)")
        if self.origin == "sampled":
            lo, hi = SAMPLED_START_RANGE
            if not lo < self.start_deg < hi:
                raise ValueError(f"sampled start {self.start_deg} outside ({lo}, {hi})")
            lo, hi = SAMPLED_SLOPE_RANGE
            if not lo < self.slope_deg < hi:
                raise ValueError(f"sampled slope {self.slope_deg} outside ({lo}, {hi})")
        return self

    @classmethod
    def from_line(
        cls, start_deg: float, slope_deg: float, length: int,
        origin: Literal["sampled", "fitted", "manual"] = "manual",
    ) -> "ElevationTrajectory":
        samples = linear_samples(start_deg, slope_deg, length)
        return cls(start_deg=start_deg, slope_deg=slope_deg,
                   samples=tuple(samples.tolist()), origin=origin)

    def __len__(self) -> int:
        return len(self.samples)

    def to_poses(self, fov_deg: float) -> PoseTrajectory:
        """Pose trajectory with yaw normalized to zero."""
        return PoseTrajectory.from_pitches(fov_deg, self.samples)


def linear_samples(start_deg: float, slope_deg: float, length: int) -> np.ndarray:
    t = np.arange(length, dtype=np.float64)
    return np.clip(start_deg + slope_deg * t, -PITCH_LIMIT_DEG, PITCH_LIMIT_DEG)


class EstimateSeries(BaseModel):
    """Per-frame pitch estimates from an external single-image estimator."""
    model_config = ConfigDict(frozen=True)

    values: tuple[float, ...] = Field(..., min_length=1)
    first_frame: int = Field(default=0, ge=0)
    source: str = "<memory>"

    def __len__(self) -> int:
        return len(self.values)


class PitchEstimate(BaseModel):
    """One line of an estimate file."""
    frame: int = Field(..., ge=0)
    pitch_deg: float
