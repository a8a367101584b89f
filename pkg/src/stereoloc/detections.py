"""Landmark detector output: parsing, filtering and box-to-rect conversion.

Records follow the detector export shape::

    {"x": 430, "y": 202, "width": 420, "height": 297,
     "confidence": 0.95, "class": "...", "classId": 11,
     "imagePath": "img8.png", "predictionType": "ObjectDetectionModel"}
"""
import json
import math
from dataclasses import dataclass

from .depth import PixelRect, clamp_rect
from .exceptions import FieldOutOfRangeError, InvalidParameterError, MalformedInputError

_NUMERIC = ("x", "y", "width", "height", "confidence")


@dataclass(frozen=True)
class Detection:
    x: float
    y: float
    width: float
    height: float
    confidence: float
    class_name: str
    class_id: int
    image_path: str = ""
    prediction_type: str = ""

    def to_dict(self):
        return {
            "x": self.x,
            "y": self.y,
            "width": self.width,
            "height": self.height,
            "confidence": self.confidence,
            "class": self.class_name,
            "classId": self.class_id,
            "imagePath": self.image_path,
            "predictionType": self.prediction_type,
        }


def _record(obj, idx):
    if not isinstance(obj, dict):
        raise MalformedInputError(f"record {idx}: expected an object")
    for key in _NUMERIC + ("classId",):
        if key not in obj:
            raise MalformedInputError(f"record {idx}: missing field {key!r}")
    vals = {}
    for key in _NUMERIC:
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise MalformedInputError(f"record {idx}: field {key!r} must be a finite number")
        vals[key] = v
    cid = obj["classId"]
    if isinstance(cid, bool) or not isinstance(cid, (int, float)) or cid != int(cid):
        raise MalformedInputError(f"record {idx}: field 'classId' must be an integer")

    if not vals["width"] > 0:
        raise FieldOutOfRangeError(f"record {idx}: field 'width' must be > 0")
    if not vals["height"] > 0:
        raise FieldOutOfRangeError(f"record {idx}: field 'height' must be > 0")
    if not 0 <= vals["confidence"] <= 1:
        raise FieldOutOfRangeError(f"record {idx}: field 'confidence' must be in [0, 1]")
    if cid < 0:
        raise FieldOutOfRangeError(f"record {idx}: field 'classId' must be >= 0")

    return Detection(
        x=vals["x"],
        y=vals["y"],
        width=vals["width"],
        height=vals["height"],
        confidence=vals["confidence"],
        class_name=str(obj.get("class", "")),
        class_id=int(cid),
        image_path=str(obj.get("imagePath", "")),
        prediction_type=str(obj.get("predictionType", "")),
    )


def parse_detections(text):
    """Parse one record or an array of records (bytes or str)."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError:
            raise MalformedInputError("detections are not valid UTF-8") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"detections are not valid JSON: {exc}") from None
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list):
        raise MalformedInputError("expected a detection object or an array of them")
    return [_record(obj, i) for i, obj in enumerate(data)]


def serialize_detections(dets):
    return json.dumps([d.to_dict() for d in dets], indent=2)


def filter_confidence(dets, threshold=0.5):
    return [d for d in dets if d.confidence >= threshold]


def best_per_class(dets):
    """Highest-confidence detection per class id, in first-appearance order."""
    best = {}
    for d in dets:
        if d.class_id not in best or d.confidence > best[d.class_id].confidence:
            best[d.class_id] = d
    seen = []
    for d in dets:
        if best.get(d.class_id) is d:
            seen.append(d)
    return seen


def _round(v):
    # half-up, not banker's rounding
    return int(math.floor(v + 0.5))


def to_rect(det, image_w, image_h, convention="center"):
    """Pixel rectangle for a detection, clamped to the image.

    ``center``: (x, y) is the box center. ``corner``: (x, y) is the top-left.
    """
    if image_w <= 0 or image_h <= 0:
        raise InvalidParameterError("image dimensions must be positive")
    w = _round(det.width)
    h = _round(det.height)
    if convention == "center":
        x0 = _round(det.x - det.width / 2)
        y0 = _round(det.y - det.height / 2)
    elif convention == "corner":
        x0 = _round(det.x)
        y0 = _round(det.y)
    else:
        raise InvalidParameterError(f"unknown box convention {convention!r}")
    return clamp_rect(x0, y0, max(w, 1), max(h, 1), image_w, image_h)


__all__ = [
    "Detection",
    "PixelRect",
    "best_per_class",
    "filter_confidence",
    "parse_detections",
    "serialize_detections",
    "to_rect",
]
