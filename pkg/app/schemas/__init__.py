from .canvas import PanoCanvas, PerspView, ProjectionResult
from .dataset import CaptionLine, ClipRecord, ClipWindow, FlowStats, FlowStatsLine
from .elevation import ElevationTrajectory, EstimateSeries, PitchEstimate
from .geometry import CameraPose, PoseRecord, PoseTrajectory, SphereDir
from .masks import CrossDomainMask, InscribedRect, MaskTag, PosEncoding, VideoMask

__all__ = [
    # Geometry
    "SphereDir",
    "CameraPose",
    "PoseTrajectory",
    "PoseRecord",

    # Frames
    "PanoCanvas",
    "PerspView",
    "ProjectionResult",

    # Masks
    "VideoMask",
    "InscribedRect",
    "PosEncoding",
    "MaskTag",
    "CrossDomainMask",

    # Elevation
    "ElevationTrajectory",
    "EstimateSeries",
    "PitchEstimate",

    # Dataset
    "ClipRecord",
    "FlowStats",
    "FlowStatsLine",
    "CaptionLine",
    "ClipWindow",
]
