"""Exceptions and input validation helpers shared across the package."""

import numbers

import numpy as np


class InvalidInputError(ValueError):
    """Array or argument with the wrong shape, size or content."""


class InvalidRegionError(InvalidInputError):
    """Sampling region that collapses to less than one pixel."""


class ConfigError(ValueError):
    """Invalid hyper-parameter or missing configuration resource."""


class DegenerateResponseError(ArithmeticError):
    """Object response has zero PME, so challenging factors are undefined."""


class NoPeakError(ArithmeticError):
    """Fused response map is identically zero."""


class SequenceFormatError(ValueError):
    """Malformed benchmark sequence directory or annotation file."""


def check_frame(frame):
    """Validate a decoded frame and return it as a C-contiguous uint8 array.

    Accepts ``(H, W)`` grayscale or ``(H, W, 3)`` RGB buffers. Float input in
    ``[0, 1]`` is not accepted; frames are 8-bit per channel.
    """
    frame = np.asarray(frame)
    if frame.ndim == 3 and frame.shape[2] == 1:
        frame = frame[:, :, 0]
    if frame.ndim not in (2, 3) or (frame.ndim == 3 and frame.shape[2] != 3):
        raise InvalidInputError(
            f"frame must be HxW or HxWx3, got shape {frame.shape}")
    if frame.shape[0] < 1 or frame.shape[1] < 1:
        raise InvalidInputError("frame must be at least 1x1")
    if frame.dtype != np.uint8:
        if not np.issubdtype(frame.dtype, np.integer):
            raise InvalidInputError(
                f"frame must hold 8-bit integers, got {frame.dtype}")
        if frame.min() < 0 or frame.max() > 255:
            raise InvalidInputError("frame values outside [0, 255]")
        frame = frame.astype(np.uint8)
    return np.ascontiguousarray(frame)


def check_positive(value, name, strict=True):
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ConfigError(f"{name} must be a finite real number, got {value!r}")
    if strict and value <= 0:
        raise ConfigError(f"{name} must be > 0, got {value!r}")
    if not strict and value < 0:
        raise ConfigError(f"{name} must be >= 0, got {value!r}")
    return float(value)


def check_unit_interval(value, name):
    value = check_positive(value, name, strict=False)
    if value > 1:
        raise ConfigError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def check_map(arr, name="map", ndim=2):
    """Coerce to a finite float array of the given rank."""
    arr = np.asarray(arr, dtype=float)
    if arr.ndim != ndim:
        raise InvalidInputError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInputError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def check_same_shape(a, b, names=("x", "z")):
    if np.shape(a) != np.shape(b):
        raise InvalidInputError(
            f"{names[0]} and {names[1]} differ in shape: "
            f"{np.shape(a)} vs {np.shape(b)}")
