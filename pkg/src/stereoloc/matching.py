"""Dense disparity from a rectified grayscale pair.

Pipeline: SSD block cost volume -> semi-global path aggregation ->
winner-take-all with parabola refinement and uniqueness test -> left/right
consistency check. Disparity follows ``d = x_left - x_right``, so a feature at
``x`` in the left image is searched at ``x - d`` in the right image.

Invalid pixels are NaN.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .exceptions import (
    DimensionMismatchError,
    InvalidParameterError,
    SearchRangeTooWideError,
)
from .validation import check_stereo_pair

INVALID = np.nan

# (dx, dy): the path reaches pixel p from p - (dx, dy)
PATHS_4 = ((1, 0), (-1, 0), (0, 1), (0, -1))
PATHS_8 = PATHS_4 + ((1, 1), (-1, 1), (1, -1), (-1, -1))


@dataclass(frozen=True)
class MatcherParams:
    """Matcher settings.

    ``p1``/``p2`` default to ``8*block_size**2`` and ``32*block_size**2``.
    ``lr_max_diff=math.inf`` disables the left/right check and
    ``uniqueness_ratio=0`` disables the uniqueness test.
    """

    block_size: int = 5
    min_disp: int = 0
    max_disp: int = 64
    p1: float = None
    p2: float = None
    num_paths: int = 8
    lr_max_diff: float = 1.0
    uniqueness_ratio: float = 0.05
    subpixel: bool = True
    n_jobs: int = 1

    def __post_init__(self):
        b = self.block_size
        if int(b) != b or b < 3 or b % 2 == 0:
            raise InvalidParameterError(f"block_size: must be odd and >= 3, got {b}")
        if int(self.min_disp) != self.min_disp or int(self.max_disp) != self.max_disp:
            raise InvalidParameterError("min_disp/max_disp: must be integers")
        if not 0 <= self.min_disp < self.max_disp:
            raise InvalidParameterError(
                f"disparity range: need 0 <= min_disp < max_disp, got "
                f"{self.min_disp}..{self.max_disp}"
            )
        if self.p1 is None:
            object.__setattr__(self, "p1", 8.0 * b * b)
        if self.p2 is None:
            object.__setattr__(self, "p2", 32.0 * b * b)
        if not 0 <= self.p1 <= self.p2:
            raise InvalidParameterError(f"penalties: need 0 <= p1 <= p2, got {self.p1}, {self.p2}")
        if self.num_paths not in (4, 8):
            raise InvalidParameterError(f"num_paths: must be 4 or 8, got {self.num_paths}")
        if not self.lr_max_diff >= 0:
            raise InvalidParameterError(f"lr_max_diff: must be >= 0, got {self.lr_max_diff}")
        if not 0 <= self.uniqueness_ratio < 1:
            raise InvalidParameterError(
                f"uniqueness_ratio: must be in [0, 1), got {self.uniqueness_ratio}"
            )
        if int(self.n_jobs) != self.n_jobs or self.n_jobs < 1:
            raise InvalidParameterError(f"n_jobs: must be a positive integer, got {self.n_jobs}")

    @property
    def disp_levels(self):
        return self.max_disp - self.min_disp + 1

    @property
    def paths(self):
        return PATHS_4 if self.num_paths == 4 else PATHS_8


@dataclass
class CostVolume:
    """Per-(row, column, disparity) costs, shape ``(height, width, disp_levels)``.

    Index ``k`` on the last axis is disparity ``min_disp + k``. Candidates whose
    match falls outside the other image hold ``sentinel``, the largest in-image
    cost. A sentinel any higher would leak through the path recurrence and
    bias flat regions toward small disparities; ties with it cannot win because
    in-image candidates always have the smaller disparity.
    """

    costs: np.ndarray
    min_disp: int
    sentinel: float

    @property
    def height(self):
        return self.costs.shape[0]

    @property
    def width(self):
        return self.costs.shape[1]

    @property
    def disp_levels(self):
        return self.costs.shape[2]

    @property
    def max_disp(self):
        return self.min_disp + self.disp_levels - 1


def ssd_cost(left_window, right_window):
    """Mean squared intensity difference between two equal-size windows."""
    a = np.asarray(left_window, dtype=np.float64)
    b = np.asarray(right_window, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"window shapes differ: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise DimensionMismatchError("empty window")
    diff = a - b
    return float(np.sum(diff * diff) / a.size)


def _box_sum(a, b):
    """Sum over every b x b window (valid positions only) via an integral image."""
    s = np.zeros((a.shape[0] + 1, a.shape[1] + 1))
    np.cumsum(a, axis=0, out=s[1:, 1:])
    np.cumsum(s[1:, 1:], axis=1, out=s[1:, 1:])
    out = s[b:, b:] - s[:-b, b:] - s[b:, :-b] + s[:-b, :-b]
    # cancellation can leave tiny negatives for non-integer input
    return np.maximum(out, 0.0, out=out)


def build_cost_volume(left, right, params):
    """Left-referenced SSD volume: cost(y, x, d) compares left(x, y) with right(x - d, y).

    Windows use edge-clamped coordinates, so every pixel is scored with a full
    ``block_size**2`` window. Exact for integer intensities.
    """
    left, right = check_stereo_pair(left, right)
    h, w = left.shape
    b = params.block_size
    if params.max_disp >= w - b:
        raise SearchRangeTooWideError(
            f"max_disp={params.max_disp} too wide for image width {w} and block {b} "
            f"(need max_disp < width - block_size)"
        )
    r = b // 2
    lp = np.pad(left, r, mode="edge")
    rp = np.pad(right, r, mode="edge")
    wp = lp.shape[1]
    costs = np.empty((h, w, params.disp_levels))
    area = float(b * b)
    sentinel = 0.0
    for k, d in enumerate(range(params.min_disp, params.max_disp + 1)):
        diff = lp[:, d:] - rp[:, : wp - d]
        costs[:, d:, k] = _box_sum(diff * diff, b) / area
        sentinel = max(sentinel, float(costs[:, d:, k].max()))
    for k, d in enumerate(range(params.min_disp, params.max_disp + 1)):
        costs[:, :d, k] = sentinel
    return CostVolume(costs, params.min_disp, sentinel)


def right_reference(volume):
    """Re-index a left-referenced volume to the right image.

    Clamping acts on each image independently, so the right-referenced cost at
    ``(x, d)`` is exactly the left-referenced cost at ``(x + d, d)``.
    """
    c = volume.costs
    w = c.shape[1]
    out = np.full_like(c, volume.sentinel)
    for k in range(c.shape[2]):
        d = volume.min_disp + k
        out[:, : w - d, k] = c[:, d:, k]
    return CostVolume(out, volume.min_disp, volume.sentinel)


def path_costs(costs, direction, p1, p2):
    """Aggregated costs along one direction ``(dx, dy)``; the path reaches p from p - (dx, dy)."""
    c = np.ascontiguousarray(costs, dtype=np.float64)
    out = np.zeros_like(c)
    _kernels.accumulate_path(c, int(direction[0]), int(direction[1]), float(p1), float(p2), out)
    return out


def aggregate_costs(volume, params):
    """Sum of the semi-global path recurrences over ``params.num_paths`` directions.

    Paths are summed in a fixed order, so the result does not depend on
    ``n_jobs``.
    """
    c = np.ascontiguousarray(volume.costs, dtype=np.float64)
    p1, p2 = float(params.p1), float(params.p2)
    total = np.zeros_like(c)
    if params.n_jobs == 1:
        for dx, dy in params.paths:
            _kernels.accumulate_path(c, dx, dy, p1, p2, total)
    else:
        with ThreadPoolExecutor(max_workers=params.n_jobs) as pool:
            parts = pool.map(lambda r: path_costs(c, r, p1, p2), params.paths)
            for part in parts:
                total += part
    return CostVolume(total, volume.min_disp, volume.sentinel * len(params.paths))


def select_disparity(aggregated, params):
    """Winner-take-all disparity with parabola refinement and a uniqueness test.

    Ties go to the smaller disparity. The uniqueness test compares the winner
    against the best candidate more than one level away; the pixel survives
    only if that cost exceeds ``best * (1 + uniqueness_ratio)``.
    """
    s = np.ascontiguousarray(aggregated.costs, dtype=np.float64)
    disp = np.empty(s.shape[:2])
    _kernels.select(
        s, aggregated.min_disp, bool(params.subpixel), float(params.uniqueness_ratio), disp
    )
    return disp


def _lr_check(disp_left, disp_right, max_diff):
    h, w = disp_left.shape
    out = disp_left.copy()
    valid = np.isfinite(disp_left)
    xs = np.arange(w)[None, :] - np.floor(np.where(valid, disp_left, 0.0) + 0.5).astype(np.int64)
    inside = valid & (xs >= 0) & (xs < w)
    rows = np.broadcast_to(np.arange(h)[:, None], (h, w))
    matched = np.full((h, w), np.nan)
    matched[inside] = disp_right[rows[inside], xs[inside]]
    agree = np.abs(disp_left - matched) <= max_diff  # NaN compares False
    out[~agree] = INVALID
    return out


def compute_disparity(left, right, params=None):
    """Disparity map for the left image of a rectified pair (NaN = invalid)."""
    params = params or MatcherParams()
    volume = build_cost_volume(left, right, params)
    w = volume.width
    disp_left = select_disparity(aggregate_costs(volume, params), params)
    # no candidate falls inside the right image
    disp_left[:, : params.min_disp] = INVALID

    if math.isfinite(params.lr_max_diff):
        rvol = right_reference(volume)
        disp_right = select_disparity(aggregate_costs(rvol, params), params)
        disp_right[:, w - params.min_disp :] = INVALID
        disp_left = _lr_check(disp_left, disp_right, params.lr_max_diff)
    return disp_left
