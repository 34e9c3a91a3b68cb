"""
Utility modules for the application
"""

from .frame_io import read_frames, write_frames, write_mask_frames
from .mask_codec import read_cross_domain_mask, write_cross_domain_mask
from .pose_io import read_pose_file, write_pose_file

__all__ = [
    "read_frames",
    "write_frames",
    "write_mask_frames",
    "read_cross_domain_mask",
    "write_cross_domain_mask",
    "read_pose_file",
    "write_pose_file",
]
