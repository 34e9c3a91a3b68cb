"""
Dataset curation schemas: clip manifest records and their flow statistics.
"""
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class FlowStats(BaseModel):
    """Per-frame mean optical-flow magnitude, pre-normalized to [0, 1]."""
    model_config = ConfigDict(frozen=True)

    values: tuple[float, ...]

    @field_validator("values")
    @classmethod
    def validate_values(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        for value in v:
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"flow value {value} outside [0, 1]")
        return v

    def __len__(self) -> int:
        return len(self.values)


class ClipRecord(BaseModel):
    """One curated clip in the manifest."""
    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "id": "city_tour_0007_003",
                "source": "city_tour_0007.mp4",
                "frame_count": 3,
                "fps": 20.0,
                "caption": "A tram passes a busy square.",
                "flow": {"values": [0.12, 0.2, 0.05]},
            }
        },
    )

    id: str = Field(..., min_length=1)
    source: str
    frame_count: int = Field(..., ge=1)
    fps: float = Field(..., gt=0)
    caption: Optional[str] = None
    start_frame: Optional[int] = Field(default=None, ge=0, description="First raw source frame")
    flow: FlowStats

    @model_validator(mode="after")
    def validate_flow_length(self) -> "ClipRecord":
        if len(self.flow) != self.frame_count:
            raise ValueError(
                f"flow has {len(self.flow)} values but clip has {self.frame_count} frames"
            )
        return self


class FlowStatsLine(BaseModel):
    """One line of a flow-statistics file."""
    clip_id: str = Field(..., min_length=1)
    values: list[float]


class CaptionLine(BaseModel):
    """One line of a caption file."""
    clip_id: str = Field(..., min_length=1)
    caption: str


class ClipWindow(BaseModel):
    """Raw-frame span [start, end) sampled every `stride` frames."""
    model_config = ConfigDict(frozen=True)

    start: int = Field(..., ge=0)
    end: int = Field(..., ge=1)
    stride: float = Field(..., gt=0)

    def frame_indices(self, count: int) -> list[int]:
        return [self.start + int(j * self.stride) for j in range(count)]
