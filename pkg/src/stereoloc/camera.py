"""Stereo rig calibration data and its JSON config format.

Calibration is estimated elsewhere; this module only ingests and validates
the numbers. The pair is assumed to be rectified, so disparity is purely
horizontal and ``fx`` is the focal length used for triangulation.
"""
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import (
    InvalidRigError,
    MissingFieldError,
    NonOrthonormalRotationError,
    NonPositiveBaselineError,
)

ORTHO_TOL = 1e-6

_REQUIRED = ("fx", "fy", "cx", "cy", "baseline_m", "image_width", "image_height")


def _finite(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidRigError(f"{name}: expected a number, got {value!r}") from None
    if not math.isfinite(value):
        raise InvalidRigError(f"{name}: must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def validate(self, image_width, image_height):
        if not self.fx > 0:
            raise InvalidRigError(f"fx: must be > 0, got {self.fx}")
        if not self.fy > 0:
            raise InvalidRigError(f"fy: must be > 0, got {self.fy}")
        if not 0 <= self.cx <= 4 * image_width:
            raise InvalidRigError(f"cx: {self.cx} outside [0, 4*image_width]")
        if not 0 <= self.cy <= 4 * image_height:
            raise InvalidRigError(f"cy: {self.cy} outside [0, 4*image_height]")

    @property
    def matrix(self):
        """3x3 camera matrix K."""
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )


@dataclass(frozen=True)
class Extrinsics:
    rotation: tuple  # row-major r11..r33
    translation: tuple  # meters

    @property
    def R(self):
        return np.asarray(self.rotation, dtype=float).reshape(3, 3)

    @property
    def t(self):
        return np.asarray(self.translation, dtype=float)

    def validate(self):
        R = self.R
        gram_err = np.abs(R.T @ R - np.eye(3)).max()
        if gram_err > ORTHO_TOL:
            raise NonOrthonormalRotationError(
                f"rotation: R^T R deviates from identity by {gram_err:.3g}"
            )
        det = np.linalg.det(R)
        if abs(det - 1.0) > ORTHO_TOL:
            raise NonOrthonormalRotationError(f"rotation: det(R) = {det:.9g}, expected 1")

    @property
    def homogeneous(self):
        """4x4 rigid transform [R | t]."""
        T = np.eye(4)
        T[:3, :3] = self.R
        T[:3, 3] = self.t
        return T


@dataclass(frozen=True)
class StereoRig:
    intrinsics: Intrinsics
    extrinsics: Extrinsics
    baseline_m: float
    image_width: int
    image_height: int

    def __post_init__(self):
        if not self.baseline_m > 0:
            raise NonPositiveBaselineError(f"baseline_m: must be > 0, got {self.baseline_m}")
        if self.image_width <= 0 or self.image_height <= 0:
            raise InvalidRigError(
                f"image_width/image_height: must be > 0, got "
                f"{self.image_width}x{self.image_height}"
            )
        self.intrinsics.validate(self.image_width, self.image_height)
        self.extrinsics.validate()

    @property
    def fx(self):
        return self.intrinsics.fx

    def essential_matrix(self):
        """E = [t]_x R for the right camera relative to the left."""
        tx, ty, tz = self.extrinsics.t
        skew = np.array([[0.0, -tz, ty], [tz, 0.0, -tx], [-ty, tx, 0.0]])
        return skew @ self.extrinsics.R

    def fundamental_matrix(self):
        K_inv = np.linalg.inv(self.intrinsics.matrix)
        return K_inv.T @ self.essential_matrix() @ K_inv

    def to_dict(self):
        i = self.intrinsics
        return {
            "fx": i.fx,
            "fy": i.fy,
            "cx": i.cx,
            "cy": i.cy,
            "baseline_m": self.baseline_m,
            "image_width": self.image_width,
            "image_height": self.image_height,
            "rotation": [float(v) for v in self.extrinsics.rotation],
            "translation": [float(v) for v in self.extrinsics.translation],
        }


def rig_from_dict(cfg):
    if not isinstance(cfg, dict):
        raise InvalidRigError("rig config must be a JSON object")
    for key in _REQUIRED:
        if key not in cfg:
            raise MissingFieldError(f"{key}: missing from rig config")

    vals = {k: _finite(k, cfg[k]) for k in _REQUIRED}
    for k in ("image_width", "image_height"):
        if vals[k] != int(vals[k]):
            raise InvalidRigError(f"{k}: must be an integer, got {cfg[k]!r}")
    if not vals["baseline_m"] > 0:
        raise NonPositiveBaselineError(f"baseline_m: must be > 0, got {vals['baseline_m']}")

    rotation = cfg.get("rotation", [1, 0, 0, 0, 1, 0, 0, 0, 1])
    translation = cfg.get("translation", [vals["baseline_m"], 0.0, 0.0])
    if not isinstance(rotation, (list, tuple)) or len(rotation) != 9:
        raise InvalidRigError("rotation: expected 9 numbers (row-major 3x3)")
    if not isinstance(translation, (list, tuple)) or len(translation) != 3:
        raise InvalidRigError("translation: expected 3 numbers")
    rotation = tuple(_finite(f"rotation[{n}]", v) for n, v in enumerate(rotation))
    translation = tuple(_finite(f"translation[{n}]", v) for n, v in enumerate(translation))

    return StereoRig(
        intrinsics=Intrinsics(vals["fx"], vals["fy"], vals["cx"], vals["cy"]),
        extrinsics=Extrinsics(rotation, translation),
        baseline_m=vals["baseline_m"],
        image_width=int(vals["image_width"]),
        image_height=int(vals["image_height"]),
    )


def load_rig(path):
    """Read and validate a rig config JSON file."""
    raw = Path(path).read_bytes()
    try:
        cfg = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InvalidRigError(f"{path}: not valid UTF-8 JSON ({exc})") from None
    return rig_from_dict(cfg)


def dump_rig(rig, path):
    Path(path).write_text(json.dumps(rig.to_dict(), indent=2) + "\n", encoding="utf-8")
