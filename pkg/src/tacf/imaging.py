"""Frame sampling: boxes, padded patch extraction and cosine windows."""

from dataclasses import dataclass

import cv2
import numpy as np

from .validation import InvalidInputError, InvalidRegionError, check_frame


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box given by its center and size, in pixels.

    Boxes are never clamped to the frame, a target may partially leave it.
    """

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        vals = (self.cx, self.cy, self.w, self.h)
        if not all(np.isfinite(v) for v in vals):
            raise InvalidInputError(f"non-finite box {vals}")
        if self.w <= 0 or self.h <= 0:
            raise InvalidInputError(f"box size must be positive, got {self.w}x{self.h}")

    @classmethod
    def from_xywh(cls, x, y, w, h):
        """Build from the top-left convention used by annotation files."""
        return cls(x + w / 2.0, y + h / 2.0, float(w), float(h))

    def to_xywh(self):
        return (self.cx - self.w / 2.0, self.cy - self.h / 2.0, self.w, self.h)

    def moved(self, dx, dy):
        return BoundingBox(self.cx + dx, self.cy + dy, self.w, self.h)


@dataclass(frozen=True)
class Patch:
    """Resampled search region.

    ``pixels`` is ``(H, W)`` or ``(H, W, 3)`` with values in [0, 1].
    ``scale`` is template pixels per frame pixel along each axis ``(sx, sy)``.
    """

    pixels: np.ndarray
    source_box: BoundingBox
    scale: tuple


def template_size(box, padding=2.0, cell_size=4, area=150.0 ** 2):
    """Fixed template size ``(width, height)`` for a target.

    The padded region is rescaled to roughly ``area`` pixels while keeping
    its aspect ratio; each side is rounded to a multiple of ``2 * cell_size``
    so the feature grid has even dimensions.
    """
    rw, rh = box.w * padding, box.h * padding
    factor = np.sqrt(area / (rw * rh))
    step = 2 * cell_size
    tw = max(step, int(round(rw * factor / step)) * step)
    th = max(step, int(round(rh * factor / step)) * step)
    return tw, th


def _region_indices(center, extent, limit):
    n = int(np.floor(extent + 0.5))
    start = int(np.floor(center - extent / 2.0 + 0.5))
    # edge replication
    return np.clip(np.arange(start, start + n), 0, limit - 1)


def extract_patch(frame, box, padding=2.0, size=None):
    """Sample the padded region around ``box`` and resize it to ``size``.

    Parameters
    ----------
    frame : ndarray
        8-bit ``(H, W)`` or ``(H, W, 3)`` image.
    box : BoundingBox
        Target box; the sampled region is ``(w * padding, h * padding)``.
    padding : float
        Search-area scale factor, at least 1.
    size : tuple of int, optional
        Output ``(width, height)``. Defaults to the integer region size, in
        which case no interpolation happens.

    Returns
    -------
    Patch
    """
    if padding < 1:
        raise InvalidInputError(f"padding must be >= 1, got {padding}")
    frame = check_frame(frame)
    rw, rh = box.w * padding, box.h * padding
    if rw < 1 or rh < 1:
        raise InvalidRegionError(f"region {rw:.3g}x{rh:.3g} is below one pixel")
    xs = _region_indices(box.cx, rw, frame.shape[1])
    ys = _region_indices(box.cy, rh, frame.shape[0])
    crop = frame[ys[:, None], xs[None, :]]

    if size is None:
        size = (crop.shape[1], crop.shape[0])
    tw, th = int(size[0]), int(size[1])
    if tw < 1 or th < 1:
        raise InvalidRegionError(f"template size {size} is empty")
    if (tw, th) != (crop.shape[1], crop.shape[0]):
        crop = cv2.resize(crop, (tw, th), interpolation=cv2.INTER_LINEAR)
    pixels = crop.astype(np.float64) / 255.0
    region = BoundingBox(box.cx, box.cy, rw, rh)
    return Patch(pixels, region, (tw / len(xs), th / len(ys)))


def hann_window(h, w):
    """Separable 2-D Hann window of shape ``(h, w)``."""
    if h < 1 or w < 1:
        raise InvalidInputError(f"window size must be positive, got {h}x{w}")
    return np.outer(np.hanning(h), np.hanning(w))


def to_gray(pixels):
    if pixels.ndim == 2:
        return pixels
    return pixels.mean(axis=2)
