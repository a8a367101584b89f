"""scikit-learn style wrappers around the functional API.

These let the matcher, triangulation and trilateration steps sit in a
``Pipeline`` or be tuned with ``get_params``/``set_params``.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .depth import D_EPS, triangulate
from .exceptions import DimensionMismatchError, InvalidParameterError
from .geo import trilaterate
from .matching import MatcherParams, compute_disparity
from .validation import check_map


def _as_pairs(X):
    """Normalize input to a list of (left, right) pairs plus a 'single' flag."""
    if isinstance(X, tuple) and len(X) == 2:
        return [X], True
    arr = np.asarray(X) if not isinstance(X, list) else None
    if arr is not None and arr.ndim == 3 and arr.shape[0] == 2:
        return [(arr[0], arr[1])], True
    if arr is not None and arr.ndim == 4 and arr.shape[1] == 2:
        return [(a[0], a[1]) for a in arr], False
    if isinstance(X, list) and all(len(p) == 2 for p in X):
        return [tuple(p) for p in X], False
    raise DimensionMismatchError(
        "expected a (left, right) pair, an array of shape (2, H, W) or a batch of pairs"
    )


class SGBMStereo(TransformerMixin, BaseEstimator):
    """Semi-global block matcher with SSD cost.

    ``transform`` maps a rectified ``(left, right)`` pair, or a batch of them,
    to disparity maps with NaN marking invalid pixels.
    """

    def __init__(
        self,
        block_size=5,
        min_disp=0,
        max_disp=64,
        p1=None,
        p2=None,
        num_paths=8,
        lr_max_diff=1.0,
        uniqueness_ratio=0.05,
        subpixel=True,
        n_jobs=1,
    ):
        self.block_size = block_size
        self.min_disp = min_disp
        self.max_disp = max_disp
        self.p1 = p1
        self.p2 = p2
        self.num_paths = num_paths
        self.lr_max_diff = lr_max_diff
        self.uniqueness_ratio = uniqueness_ratio
        self.subpixel = subpixel
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        self.params_ = MatcherParams(**self.get_params())
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        pairs, single = _as_pairs(X)
        out = [compute_disparity(left, right, self.params_) for left, right in pairs]
        return out[0] if single else np.stack(out)


class DisparityToDepth(TransformerMixin, BaseEstimator):
    """Triangulate disparity maps into metric depth, Z = fx * B / d."""

    def __init__(self, fx=1000.0, baseline_m=0.2, d_eps=D_EPS):
        self.fx = fx
        self.baseline_m = baseline_m
        self.d_eps = d_eps

    @classmethod
    def from_rig(cls, rig, d_eps=D_EPS):
        return cls(fx=rig.fx, baseline_m=rig.baseline_m, d_eps=d_eps)

    def fit(self, X=None, y=None):
        if not self.fx > 0 or not self.baseline_m > 0:
            raise InvalidParameterError("fx and baseline_m must be positive")
        self.fitted_ = True
        return self

    def transform(self, X):
        check_is_fitted(self, "fitted_")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2:
            X = check_map(X, "disparity")
        elif X.ndim != 3:
            raise DimensionMismatchError(f"expected (H, W) or (n, H, W), got {X.shape}")
        return triangulate(X, self.fx, self.baseline_m, self.d_eps)


class Trilaterator(BaseEstimator):
    """Planar position from ranges to fixed anchors.

    ``fit`` takes the anchor coordinates (n_anchors, 2); ``predict`` takes
    ranges of shape (n_anchors,) or (n_samples, n_anchors).
    """

    def __init__(self, max_iter=20):
        self.max_iter = max_iter

    def fit(self, X, y=None):
        anchors = np.asarray(X, dtype=np.float64)
        if anchors.ndim != 2 or anchors.shape[1] != 2:
            raise DimensionMismatchError(f"anchors must have shape (n, 2), got {anchors.shape}")
        # fails early on too few or collinear anchors
        trilaterate(anchors, np.ones(anchors.shape[0]), max_iter=0)
        self.anchors_ = anchors
        self.n_features_in_ = anchors.shape[0]
        return self

    def _solve(self, X):
        check_is_fitted(self, "anchors_")
        d = np.asarray(X, dtype=np.float64)
        single = d.ndim == 1
        d = np.atleast_2d(d)
        if d.shape[1] != self.n_features_in_:
            raise DimensionMismatchError(
                f"expected {self.n_features_in_} ranges per sample, got {d.shape[1]}"
            )
        res = [trilaterate(self.anchors_, row, self.max_iter) for row in d]
        pts = np.array([r[0] for r in res])
        resid = np.array([r[1] for r in res])
        return (pts[0], resid[0]) if single else (pts, resid)

    def predict(self, X):
        return self._solve(X)[0]

    def predict_with_residual(self, X):
        return self._solve(X)
