"""
Frame containers for equirectangular canvases and square perspective views.

Frame data is stored as float64 arrays of shape (rows, cols, channels); the
channel count is free so RGB frames and stacked latents share the kernels.
"""
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.schemas.geometry import CameraPose


def as_frame_array(value: Any) -> np.ndarray:
    """Coerce to a read-only float64 H×W×C view (2D input gains one channel)."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ValueError(f"frame data must be 2D or 3D, got shape {arr.shape}")
    view = arr.view()
    view.setflags(write=False)
    return view


class PanoCanvas(BaseModel):
    """Equirectangular frame with W = 2H."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    data: np.ndarray

    @field_validator("data", mode="before")
    @classmethod
    def validate_data(cls, v: Any) -> np.ndarray:
        arr = as_frame_array(v)
        height, width = arr.shape[:2]
        if height < 1 or width != 2 * height:
            raise ValueError(f"canvas must satisfy W = 2H, got {height}x{width}")
        return arr

    @classmethod
    def blank(cls, height: int, channels: int = 3) -> "PanoCanvas":
        return cls(data=np.zeros((height, 2 * height, channels)))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


class PerspView(BaseModel):
    """Square perspective frame rendered (or captured) at `pose`."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    data: np.ndarray
    pose: CameraPose

    @field_validator("data", mode="before")
    @classmethod
    def validate_data(cls, v: Any) -> np.ndarray:
        arr = as_frame_array(v)
        if arr.shape[0] != arr.shape[1]:
            raise ValueError(f"perspective view must be square, got {arr.shape[0]}x{arr.shape[1]}")
        return arr

    @property
    def side(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


class ProjectionResult(BaseModel):
    """A view splatted onto the canvas plus the occupancy it produced."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    canvas: PanoCanvas
    mask: np.ndarray

    @model_validator(mode="after")
    def validate_mask(self) -> "ProjectionResult":
        if self.mask.dtype != np.bool_ or self.mask.shape != self.canvas.data.shape[:2]:
            raise ValueError(
                f"mask must be a boolean {self.canvas.data.shape[:2]} grid, "
                f"got {self.mask.dtype} {self.mask.shape}"
            )
        return self
