"""Triangulation of disparity into metric depth and landmark patch statistics."""
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    EmptyAfterClampError,
    InsufficientValidDepthError,
    InvalidParameterError,
)
from .validation import check_map

D_EPS = 0.1
MIN_VALID = 10


def disparity_to_depth(disp, rig, d_eps=D_EPS):
    """Z = fx * B / d, with d <= d_eps (or NaN) mapped to NaN."""
    disp = check_map(disp, "disparity")
    if disp.shape != (rig.image_height, rig.image_width):
        raise DimensionMismatchError(
            f"disparity map is {disp.shape[1]}x{disp.shape[0]}, rig expects "
            f"{rig.image_width}x{rig.image_height}"
        )
    return triangulate(disp, rig.fx, rig.baseline_m, d_eps)


def triangulate(disp, fx, baseline_m, d_eps=D_EPS):
    disp = np.asarray(disp, dtype=np.float64)
    depth = np.full(disp.shape, np.nan)
    ok = np.isfinite(disp) & (disp > d_eps)
    depth[ok] = fx * baseline_m / disp[ok]
    return depth


def depth_to_disparity(depth, fx, baseline_m):
    depth = np.asarray(depth, dtype=np.float64)
    out = np.full(depth.shape, np.nan)
    ok = np.isfinite(depth) & (depth > 0)
    out[ok] = fx * baseline_m / depth[ok]
    return out


@dataclass(frozen=True)
class PixelRect:
    x0: int
    y0: int
    w: int
    h: int


def clamp_rect(x0, y0, w, h, image_w, image_h):
    """Intersect a rectangle with the image; raises if nothing is left."""
    x1, y1 = max(x0, 0), max(y0, 0)
    x2, y2 = min(x0 + w, image_w), min(y0 + h, image_h)
    if x2 <= x1 or y2 <= y1:
        raise EmptyAfterClampError(
            f"rect ({x0}, {y0}, {w}, {h}) does not intersect the {image_w}x{image_h} image"
        )
    return PixelRect(int(x1), int(y1), int(x2 - x1), int(y2 - y1))


@dataclass(frozen=True)
class DepthPatch:
    rect: PixelRect
    values: np.ndarray

    @property
    def valid(self):
        v = self.values[np.isfinite(self.values)]
        return v[v > 0]


def extract_patch(depth, rect):
    """Crop ``depth`` to ``rect`` (clamped to the image), keeping invalid pixels."""
    depth = check_map(depth, "depth")
    if rect.w < 1 or rect.h < 1:
        raise InvalidParameterError(f"rect must have positive area, got {rect}")
    h, w = depth.shape
    r = clamp_rect(rect.x0, rect.y0, rect.w, rect.h, w, h)
    return DepthPatch(r, depth[r.y0 : r.y0 + r.h, r.x0 : r.x0 + r.w].copy())


@dataclass(frozen=True)
class AggregationMethod:
    kind: str = "mean"
    trim: float = 0.0

    def __post_init__(self):
        if self.kind not in ("mean", "median", "trimmed_mean"):
            raise InvalidParameterError(f"unknown aggregation {self.kind!r}")
        if not 0 <= self.trim < 0.5:
            raise InvalidParameterError(f"trim fraction must be in [0, 0.5), got {self.trim}")

    @classmethod
    def parse(cls, text):
        """Accepts ``mean``, ``median`` or ``trim:F``."""
        if text in ("mean", "median"):
            return cls(text)
        if text.startswith("trim:"):
            try:
                frac = float(text[5:])
            except ValueError:
                raise InvalidParameterError(f"bad trim fraction in {text!r}") from None
            return cls("trimmed_mean", frac)
        raise InvalidParameterError(f"unknown aggregation {text!r}")


def aggregate_patch(patch, method=None, min_valid=MIN_VALID):
    """Single distance for a landmark from the valid depths under its box."""
    method = method or AggregationMethod()
    vals = np.sort(patch.valid)
    n = vals.size
    if n < min_valid:
        raise InsufficientValidDepthError(
            f"only {n} valid depth pixels in patch {patch.rect} (need {min_valid})"
        )
    if method.kind == "mean":
        return float(vals.mean())
    if method.kind == "median":
        return float(np.median(vals))
    cut = int(np.floor(method.trim * n))
    return float(vals[cut : n - cut].mean())
