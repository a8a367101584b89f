"""Exception types raised across the package.

Everything derives from :class:`StereoLocError`, which is a ``ValueError`` so
callers that only care about bad input can catch the builtin.
"""


class StereoLocError(ValueError):
    """Base class for input and validation errors."""


# rig configuration
class MissingFieldError(StereoLocError):
    pass


class NonOrthonormalRotationError(StereoLocError):
    pass


class NonPositiveBaselineError(StereoLocError):
    pass


class InvalidRigError(StereoLocError):
    pass


# images and maps
class DimensionMismatchError(StereoLocError):
    pass


class ImageSizeMismatchError(DimensionMismatchError):
    pass


class SearchRangeTooWideError(StereoLocError):
    pass


class InvalidParameterError(StereoLocError):
    pass


class ImageFormatError(StereoLocError):
    pass


# patches and detections
class EmptyAfterClampError(StereoLocError):
    pass


class InsufficientValidDepthError(StereoLocError):
    """Too few valid depth pixels under a box (occluded or textureless)."""


class MalformedInputError(StereoLocError):
    pass


class FieldOutOfRangeError(StereoLocError):
    pass


# geometry
class OutOfLocalRangeError(StereoLocError):
    pass


class InsufficientAnchorsError(StereoLocError):
    pass


class CollinearAnchorsError(StereoLocError):
    pass


class LengthMismatchError(StereoLocError):
    pass


class EmptyInputError(StereoLocError):
    pass


# dv-hop
class TooFewAnchorsError(StereoLocError):
    pass


class NoConnectedAnchorPairError(StereoLocError):
    pass
