"""Normal-guided stereo refinement: propagation, filtering, metrics."""

from ._stereoprop import (
    StereopropError,
    attention_reweight,
    evaluate,
    fuse_normal_gt,
    gen_planar_scene,
    gradcheck,
    heuristic_offsets_from_normal,
    local_affinity_filter,
    normal_from_disparity,
    normalize_local_affinity,
    propagate_local,
    propagate_nonlocal,
    read_kitti_disparity,
    read_pfm,
    sparse_normal_from_disparity,
    warped_error,
    write_kitti_disparity,
    write_pfm,
)

__all__ = [
    "StereopropError",
    "attention_reweight",
    "evaluate",
    "fuse_normal_gt",
    "gen_planar_scene",
    "gradcheck",
    "heuristic_offsets_from_normal",
    "local_affinity_filter",
    "normal_from_disparity",
    "normalize_local_affinity",
    "propagate_local",
    "propagate_nonlocal",
    "read_kitti_disparity",
    "read_pfm",
    "sparse_normal_from_disparity",
    "warped_error",
    "write_kitti_disparity",
    "write_pfm",
]
