"""Input checks shared by the functional API and the estimators."""
import numpy as np

from .exceptions import DimensionMismatchError, ImageSizeMismatchError, StereoLocError


def check_gray_image(img, name="image"):
    """Return ``img`` as a 2-D float64 array of finite, non-negative intensities.

    8- and 16-bit integer inputs are promoted to float.
    """
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name}: expected a 2-D grayscale image, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionMismatchError(f"{name}: empty image")
    arr = arr.astype(np.float64, copy=False)
    if not np.isfinite(arr).all():
        raise StereoLocError(f"{name}: intensities must be finite")
    if (arr < 0).any():
        raise StereoLocError(f"{name}: intensities must be >= 0")
    return arr


def check_stereo_pair(left, right):
    left = check_gray_image(left, "left")
    right = check_gray_image(right, "right")
    if left.shape != right.shape:
        raise ImageSizeMismatchError(
            f"image size mismatch: left is {left.shape[1]}x{left.shape[0]}, "
            f"right is {right.shape[1]}x{right.shape[0]}"
        )
    return left, right


def check_map(arr, name="map"):
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name}: expected a 2-D array, got shape {arr.shape}")
    return arr
