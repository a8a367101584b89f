"""Landmark registry, virtual coordinates, planar trilateration and error stats."""
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .depth import AggregationMethod, MIN_VALID, aggregate_patch, extract_patch
from .detections import best_per_class, filter_confidence, to_rect
from .exceptions import (
    CollinearAnchorsError,
    EmptyAfterClampError,
    EmptyInputError,
    InsufficientAnchorsError,
    InsufficientValidDepthError,
    LengthMismatchError,
    MalformedInputError,
    FieldOutOfRangeError,
    OutOfLocalRangeError,
)

log = logging.getLogger(__name__)

EARTH_RADIUS_M = 6371008.8
LOCAL_RANGE_M = 10_000.0
COLLINEAR_RCOND = 1e-9


@dataclass(frozen=True)
class LandmarkRecord:
    class_id: int
    name: str
    lat: float
    lon: float


@dataclass(frozen=True)
class NodeVirtualCoordinate:
    landmark_id: int
    distance_m: float

    def to_dict(self):
        return {"landmarkId": self.landmark_id, "distanceM": self.distance_m}


@dataclass(frozen=True)
class ErrorStats:
    min_m: float
    max_m: float
    mean_m: float
    std_m: float
    rmse_m: float
    n: int

    def to_dict(self):
        return {
            "min": self.min_m,
            "max": self.max_m,
            "mean": self.mean_m,
            "std": self.std_m,
            "rmse": self.rmse_m,
            "n": self.n,
        }


def parse_registry(data):
    """Registry from decoded JSON: an array of {classId, name, lat, lon}."""
    if not isinstance(data, list):
        raise MalformedInputError("registry must be a JSON array")
    registry = {}
    for i, rec in enumerate(data):
        if not isinstance(rec, dict):
            raise MalformedInputError(f"registry entry {i}: expected an object")
        for key in ("classId", "lat", "lon"):
            if key not in rec:
                raise MalformedInputError(f"registry entry {i}: missing field {key!r}")
        try:
            cid = int(rec["classId"])
            lat, lon = float(rec["lat"]), float(rec["lon"])
        except (TypeError, ValueError):
            raise MalformedInputError(f"registry entry {i}: non-numeric field") from None
        if not -90 <= lat <= 90:
            raise FieldOutOfRangeError(f"registry entry {i}: lat {lat} outside [-90, 90]")
        if not -180 <= lon <= 180:
            raise FieldOutOfRangeError(f"registry entry {i}: lon {lon} outside [-180, 180]")
        if cid in registry:
            raise MalformedInputError(f"registry entry {i}: duplicate classId {cid}")
        registry[cid] = LandmarkRecord(cid, str(rec.get("name", "")), lat, lon)
    return registry


def load_registry(path):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"{path}: not valid JSON ({exc})") from None
    return parse_registry(data)


def haversine(a, b):
    """Great-circle distance in meters between two (lat, lon) points in degrees."""
    lat1, lon1 = map(math.radians, a)
    lat2, lon2 = map(math.radians, b)
    h = (
        math.sin((lat2 - lat1) / 2) ** 2
        + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    )
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def project_enu(origin, p, max_range_m=LOCAL_RANGE_M):
    """Equirectangular (east, north) offset of ``p`` from ``origin``, meters."""
    if haversine(origin, p) > max_range_m:
        raise OutOfLocalRangeError(
            f"point {p} is more than {max_range_m:g} m from origin {origin}"
        )
    lat0, lon0 = origin
    dlon = (p[1] - lon0 + 180.0) % 360.0 - 180.0
    x = EARTH_RADIUS_M * math.radians(dlon) * math.cos(math.radians(lat0))
    y = EARTH_RADIUS_M * math.radians(p[0] - lat0)
    return np.array([x, y])


def unproject_enu(origin, xy):
    lat0, lon0 = origin
    lat = lat0 + math.degrees(xy[1] / EARTH_RADIUS_M)
    lon = lon0 + math.degrees(xy[0] / (EARTH_RADIUS_M * math.cos(math.radians(lat0))))
    lon = (lon + 180.0) % 360.0 - 180.0
    return lat, lon


def registry_centroid(registry):
    recs = list(registry.values())
    if not recs:
        raise EmptyInputError("registry is empty")
    return (
        sum(r.lat for r in recs) / len(recs),
        sum(r.lon for r in recs) / len(recs),
    )


def build_nvc(
    detections,
    depth,
    registry,
    method=None,
    *,
    min_confidence=0.5,
    convention="center",
    min_valid=MIN_VALID,
):
    """(landmark id, distance) tuples for the detections over a depth map.

    Detections below ``min_confidence`` are dropped, duplicates of a class
    keep the most confident box, unknown landmarks and patches without enough
    valid depth are skipped with a warning. Output keeps detection order.
    """
    method = method or AggregationMethod()
    h, w = np.shape(depth)
    kept = best_per_class(filter_confidence(detections, min_confidence))
    out = []
    for det in kept:
        if det.class_id not in registry:
            log.warning("landmark classId=%d not in registry; skipped", det.class_id)
            continue
        try:
            rect = to_rect(det, w, h, convention)
            dist = aggregate_patch(extract_patch(depth, rect), method, min_valid)
        except (EmptyAfterClampError, InsufficientValidDepthError) as exc:
            log.warning("landmark classId=%d skipped: %s", det.class_id, exc)
            continue
        out.append(NodeVirtualCoordinate(det.class_id, dist))
    return out


def _rms_misfit(p, anchors, dists):
    r = np.linalg.norm(anchors - p, axis=1) - dists
    return float(np.sqrt(np.mean(r * r)))


def trilaterate(anchors, distances, max_iter=20):
    """Planar position from ranges to >= 3 non-collinear anchors.

    Linear least squares (first range equation subtracted from the rest),
    then up to ``max_iter`` Gauss-Newton steps on the range misfit.
    Returns ``(point, rms_residual)``.
    """
    anchors = np.asarray(anchors, dtype=np.float64).reshape(-1, 2)
    dists = np.asarray(distances, dtype=np.float64).ravel()
    if anchors.shape[0] != dists.size:
        raise LengthMismatchError(f"{anchors.shape[0]} anchors but {dists.size} distances")
    if anchors.shape[0] < 3:
        raise InsufficientAnchorsError(
            f"trilateration needs at least 3 landmarks, got {anchors.shape[0]}"
        )
    if not (np.isfinite(anchors).all() and np.isfinite(dists).all()):
        raise MalformedInputError("anchors and distances must be finite")

    center = anchors.mean(axis=0)
    a = anchors - center
    m = 2.0 * (a[1:] - a[0])
    sq = np.sum(a * a, axis=1)
    rhs = dists[0] ** 2 - dists[1:] ** 2 + sq[1:] - sq[0]
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[-1] < COLLINEAR_RCOND * sv[0] or sv[0] == 0:
        raise CollinearAnchorsError("anchors are collinear; position is not determined")
    p = np.linalg.lstsq(m, rhs, rcond=None)[0]

    cost = _rms_misfit(p, a, dists)
    for _ in range(max_iter):
        diff = p - a
        rng = np.linalg.norm(diff, axis=1)
        if np.any(rng == 0):
            break
        jac = diff / rng[:, None]
        step = np.linalg.lstsq(jac, dists - rng, rcond=None)[0]
        trial = p + step
        trial_cost = _rms_misfit(trial, a, dists)
        # a rise at rounding level is not divergence; rejecting it would make
        # the stopping point depend on where the anchors sit
        if trial_cost > cost * (1.0 + 1e-9) + 1e-15:
            break
        p, cost = trial, trial_cost
        if np.linalg.norm(step) <= 1e-12 * (1.0 + np.linalg.norm(p)):
            break
    return p + center, cost


def eval_metrics(observed, actual):
    """Absolute-error statistics (population std) for paired distances."""
    obs = np.asarray(observed, dtype=np.float64).ravel()
    act = np.asarray(actual, dtype=np.float64).ravel()
    if obs.size != act.size:
        raise LengthMismatchError(f"{obs.size} observed vs {act.size} actual values")
    if obs.size == 0:
        raise EmptyInputError("no values to evaluate")
    err = np.abs(obs - act)
    # scale by the largest error so squaring cannot under/overflow
    top = float(err.max())
    rmse = top * float(np.sqrt(np.mean((err / top) ** 2))) if top > 0 else 0.0
    return ErrorStats(
        min_m=float(err.min()),
        max_m=float(err.max()),
        mean_m=float(err.mean()),
        std_m=float(err.std()),
        rmse_m=rmse,
        n=int(err.size),
    )
