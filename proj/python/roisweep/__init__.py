"""Plane-sweep depth estimation with line-aware SGM and ROI-selective matching."""

from ._core import (
    CameraIntrinsics,
    CameraPose,
    CameraView,
    DetectionBox,
    PipelineConfig,
    RoisweepError,
    census_transform,
    depth_from_plane,
    detect_lines,
    hamming_cost,
    iou,
    plane_homography,
    read_depth_pfm,
    render_two_plane,
    run,
    sample_planes,
    soft_nms,
    write_depth_pfm,
)

__all__ = [
    "CameraIntrinsics",
    "CameraPose",
    "CameraView",
    "DetectionBox",
    "PipelineConfig",
    "RoisweepError",
    "census_transform",
    "depth_from_plane",
    "detect_lines",
    "hamming_cost",
    "iou",
    "plane_homography",
    "read_depth_pfm",
    "render_two_plane",
    "run",
    "sample_planes",
    "soft_nms",
    "write_depth_pfm",
]
