"""Context patches and the PME-driven penalty factors that weight them."""

from dataclasses import dataclass

import numpy as np

from .imaging import extract_patch
from .validation import DegenerateResponseError, InvalidInputError, check_map


@dataclass(frozen=True)
class ContextLayout:
    """Context patch centers as multiples of the target size.

    Offsets are ``(fx, fy)`` factors; a patch is centered at
    ``(cx + fx * w, cy + fy * h)``. The default is the four direct
    neighbours (up, down, left, right) at one target size.
    """

    offsets: tuple = ((0.0, -1.0), (0.0, 1.0), (-1.0, 0.0), (1.0, 0.0))

    @classmethod
    def cross(cls, n=4, distance=1.0):
        base = ((0.0, -1.0), (0.0, 1.0), (-1.0, 0.0), (1.0, 0.0),
                (-1.0, -1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, 1.0))
        if not 0 <= n <= len(base):
            raise InvalidInputError(f"context patch count must be in [0, 8], got {n}")
        return cls(tuple((fx * distance, fy * distance) for fx, fy in base[:n]))

    def __len__(self):
        return len(self.offsets)

    def centers(self, box):
        return [(box.cx + fx * box.w, box.cy + fy * box.h) for fx, fy in self.offsets]


def extract_context_patches(frame, box, layout=None, padding=2.0, size=None):
    """Sample one padded patch per layout offset around ``box``."""
    layout = layout or ContextLayout()
    return [extract_patch(frame, box.moved(fx * box.w, fy * box.h), padding, size)
            for fx, fy in layout.offsets]


def pme(response):
    """Peak-to-median energy ratio of a response map.

    ``|max - median|^2`` over the per-pixel mean of ``(R - median)^2``;
    0 for a constant map.
    """
    r = np.asarray(response, dtype=float)
    if r.size == 0:
        raise InvalidInputError("empty response map")
    if r.size < 2:
        raise InvalidInputError("PME needs at least two response values")
    r = check_map(r, "response", ndim=r.ndim)
    med = np.median(r)
    dev = r - med
    denom = np.mean(dev * dev)
    if denom == 0:
        return 0.0
    return float((r.max() - med) ** 2 / denom)


def challenging_factors(r0, rs):
    """PME of each context response relative to the object response."""
    base = pme(r0)
    if base == 0:
        raise DegenerateResponseError("object response has zero PME")
    return np.array([pme(r) / base for r in rs])


def penalty_factors(c):
    """Normalized squared challenging factors; uniform when all are zero."""
    c = np.asarray(c, dtype=float)
    if c.ndim != 1:
        raise InvalidInputError("challenging factors must be a 1-D sequence")
    if np.any(c < 0):
        raise InvalidInputError("challenging factors must be non-negative")
    if c.size == 0:
        return c
    top = c.max()
    if top == 0:
        return np.full(c.size, 1.0 / c.size)
    sq = (c / top) ** 2
    return sq / sq.sum()
