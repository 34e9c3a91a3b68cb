"""
Mask schemas: per-frame video occupancy, inscribed rectangles and the sparse
cross-domain (panorama ↔ perspective view) activation table.
"""
from enum import IntEnum
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

from app.schemas.geometry import CameraPose, PoseTrajectory

# Sinusoidal encodings are plain float64 vectors with entries in [-1, 1].
PosEncoding = np.ndarray


class VideoMask(BaseModel):
    """Stacked per-frame anchor occupancy on the canvas."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    frames: np.ndarray
    trajectory: PoseTrajectory

    @field_validator("frames", mode="before")
    @classmethod
    def validate_frames(cls, v: Any) -> np.ndarray:
        arr = np.asarray(v)
        if arr.dtype != np.bool_:
            arr = arr.astype(bool)
        if arr.ndim != 3:
            raise ValueError(f"video mask must be T×H×W, got shape {arr.shape}")
        if arr.shape[2] != 2 * arr.shape[1]:
            raise ValueError(f"mask frames must satisfy W = 2H, got {arr.shape[1]}x{arr.shape[2]}")
        empty = [t for t in range(arr.shape[0]) if not arr[t].any()]
        if empty:
            raise ValueError(f"mask frames {empty[:10]} have no anchor pixel")
        view = arr.view()
        view.setflags(write=False)
        return view

    @model_validator(mode="after")
    def validate_length(self) -> "VideoMask":
        if self.frames.shape[0] != len(self.trajectory):
            raise ValueError(
                f"mask has {self.frames.shape[0]} frames but trajectory has {len(self.trajectory)}"
            )
        return self

    @property
    def frame_count(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]


class InscribedRect(BaseModel):
    """Axis-aligned all-known rectangle; centers use continuous edge coordinates."""
    model_config = ConfigDict(frozen=True)

    left: int = Field(..., ge=0)
    top: int = Field(..., ge=0)
    width: int = Field(..., ge=1)
    height: int = Field(..., ge=1)

    @computed_field
    @property
    def center_x(self) -> float:
        return self.left + self.width / 2.0

    @computed_field
    @property
    def center_y(self) -> float:
        return self.top + self.height / 2.0

    @property
    def area(self) -> int:
        return self.width * self.height

    @property
    def slices(self) -> tuple[slice, slice]:
        return slice(self.top, self.top + self.height), slice(self.left, self.left + self.width)


class MaskTag(IntEnum):
    direct = 0
    antipodal = 1


class CrossDomainMask(BaseModel):
    """Sparse (pano pixel, view pixel, weight) activations, one row per triple.

    Pixel indices are row-major: pano_idx = v·W + u, view_idx = row·S + col.
    `orientation` records which side acts as attention query; transposing only
    swaps that role, the triples themselves are shared.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    height: int = Field(..., ge=4)
    side: int = Field(..., ge=1)
    sigma: float = Field(..., ge=0)
    antipodal_weight: float = Field(..., gt=0, le=1)
    weight_threshold: float = Field(..., gt=0, lt=1)
    antipodal: bool = True
    views: tuple[CameraPose, ...]
    frame: np.ndarray
    view: np.ndarray
    pano_idx: np.ndarray
    view_idx: np.ndarray
    tag: np.ndarray
    weight: np.ndarray
    orientation: Literal["pano_to_view", "view_to_pano"] = "pano_to_view"

    @model_validator(mode="after")
    def validate_columns(self) -> "CrossDomainMask":
        columns = (self.frame, self.view, self.pano_idx, self.view_idx, self.tag, self.weight)
        lengths = {len(c) for c in columns}
        if len(lengths) != 1:
            raise ValueError(f"triple columns differ in length: {sorted(lengths)}")
        if len(self.weight) and (self.weight.min() <= 0 or self.weight.max() > 1):
            raise ValueError("triple weights must lie in (0, 1]")
        if len(self.view) and self.view.max() >= len(self.views):
            raise ValueError("triple references a view outside the view table")
        return self

    @property
    def width(self) -> int:
        return 2 * self.height

    @property
    def num_pano_pixels(self) -> int:
        return self.height * self.width

    @property
    def num_view_pixels(self) -> int:
        return self.side * self.side

    def __len__(self) -> int:
        return len(self.weight)

    def count(self, tag: MaskTag | None = None) -> int:
        if tag is None:
            return len(self)
        return int(np.count_nonzero(self.tag == tag))

    def selection(self, view: int | None = None, tag: MaskTag | None = None, frame: int | None = None) -> np.ndarray:
        keep = np.ones(len(self), dtype=bool)
        if view is not None:
            keep &= self.view == view
        if tag is not None:
            keep &= self.tag == tag
        if frame is not None:
            keep &= self.frame == frame
        return keep

    def transpose(self) -> "CrossDomainMask":
        flipped = "view_to_pano" if self.orientation == "pano_to_view" else "pano_to_view"
        return self.model_copy(update={"orientation": flipped})
