"""Stereo landmark ranging and localization toolkit."""

__version__ = "0.1.0"

from .camera import Extrinsics, Intrinsics, StereoRig, load_rig  # noqa: E402
from .depth import (  # noqa: E402
    AggregationMethod,
    aggregate_patch,
    disparity_to_depth,
    extract_patch,
)
from .detections import Detection, parse_detections, to_rect  # noqa: E402
from .estimators import DisparityToDepth, SGBMStereo, Trilaterator  # noqa: E402
from .geo import (  # noqa: E402
    build_nvc,
    eval_metrics,
    haversine,
    project_enu,
    trilaterate,
)
from .matching import (  # noqa: E402
    MatcherParams,
    aggregate_costs,
    build_cost_volume,
    compute_disparity,
    select_disparity,
    ssd_cost,
)

__all__ = [
    "AggregationMethod",
    "Detection",
    "DisparityToDepth",
    "Extrinsics",
    "Intrinsics",
    "MatcherParams",
    "SGBMStereo",
    "StereoRig",
    "Trilaterator",
    "aggregate_costs",
    "aggregate_patch",
    "build_cost_volume",
    "build_nvc",
    "compute_disparity",
    "disparity_to_depth",
    "eval_metrics",
    "extract_patch",
    "haversine",
    "load_rig",
    "parse_detections",
    "project_enu",
    "select_disparity",
    "ssd_cost",
    "to_rect",
    "trilaterate",
]
