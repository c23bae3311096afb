"""Dimensional and spatiotemporal attention over per-channel responses,
fusion and peak localization.

Response maps follow the correlation convention: zero displacement sits at
index ``(0, 0)`` and offsets wrap around circularly. Displacements are
``(dx, dy)`` with ``dx`` along columns.
"""

from dataclasses import dataclass, field

import numpy as np

from .validation import InvalidInputError, NoPeakError, check_map


@dataclass
class AttentionState:
    """Mutable per-tracker attention memory, updated once per frame."""

    gamma: float = 0.3
    beta_t: float = 0.1
    last_displacement: tuple = (0.0, 0.0)
    window: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.gamma < 0 or self.beta_t < 0:
            raise InvalidInputError("gamma and beta_t must be non-negative")


def dim_weights(stack):
    """Per-channel statistic: global mean plus global max."""
    stack = check_map(stack, "response stack", ndim=3)
    return stack.mean(axis=(0, 1)) + stack.max(axis=(0, 1))


def gate(z, beta_t=0.1):
    """Channel weights ``max(z - mean(z), 0) + beta_t``."""
    if beta_t < 0:
        raise InvalidInputError(f"beta_t must be >= 0, got {beta_t}")
    z = np.asarray(z, dtype=float)
    return np.maximum(z - z.mean(), 0.0) + beta_t


def apply_dim_attention(stack, s):
    stack = np.asarray(stack, dtype=float)
    s = np.asarray(s, dtype=float)
    if stack.ndim != 3 or stack.shape[2] != s.size:
        raise InvalidInputError(f"{s.size} weights for stack of shape {stack.shape}")
    return stack * s


def origin_hann(h, w):
    """Hann window in correlation convention: ``0.5 + 0.5 cos(2 pi tau / n)``
    per axis, peaking exactly at zero displacement for odd and even sizes."""
    if h < 1 or w < 1:
        raise InvalidInputError(f"window size must be positive, got {h}x{w}")
    wy = 0.5 + 0.5 * np.cos(2 * np.pi * np.arange(h) / h)
    wx = 0.5 + 0.5 * np.cos(2 * np.pi * np.arange(w) / w)
    return np.outer(wy, wx)


def static_spatial_map(stack, window):
    """Exponential spatial prior from the windowed channel sum.

    The summed map is scaled to [0, 1] and mean-subtracted; positive entries
    become ``exp(v)``, the rest 1. ``window`` must already be in the same
    (circular) convention as ``stack``. A constant sum carries no location
    information and gives the neutral map of ones.
    """
    stack = np.asarray(stack, dtype=float)
    total = stack.sum(axis=2) if stack.ndim == 3 else stack
    if total.shape != np.shape(window):
        raise InvalidInputError(f"window {np.shape(window)} vs response {total.shape}")
    if total.max() == total.min():
        return np.ones_like(total)
    m = total * window
    lo, hi = m.min(), m.max()
    if hi > lo:
        v = (m - lo) / (hi - lo)
        v = v - v.mean()
    else:
        v = np.zeros_like(m)
    return np.where(v > 0, np.exp(np.maximum(v, 0.0)), 1.0)


def motion_factor(displacement, size, gamma=0.3):
    """``gamma * |displacement| / |size|``."""
    dx, dy = displacement
    X, Y = size
    if X <= 0 or Y <= 0:
        raise InvalidInputError(f"target size must be positive, got {size}")
    return gamma * np.sqrt((dx * dx + dy * dy) / (X * X + Y * Y))


def dynamic_map(static, gamma_t, displacement):
    """``S + gamma_t * roll(S, displacement)`` with the shift rounded to cells."""
    if gamma_t < 0:
        raise InvalidInputError(f"gamma_t must be >= 0, got {gamma_t}")
    static = np.asarray(static, dtype=float)
    if gamma_t == 0:
        return static.copy()
    dx, dy = (int(np.round(v)) for v in displacement)
    return static + gamma_t * np.roll(static, (dy, dx), axis=(0, 1))


def wrap_offsets(shape):
    """Signed circular offsets for each row and column index."""
    h, w = shape
    rows = np.arange(h)
    cols = np.arange(w)
    return (np.where(rows > h // 2, rows - h, rows),
            np.where(cols > w // 2, cols - w, cols))


# least-squares fit of a + b x + c y + d x^2 + e xy + f y^2 on a 3x3 stencil
_QX, _QY = np.meshgrid([-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0])
_QFIT = np.linalg.pinv(np.stack([np.ones(9), _QX.ravel(), _QY.ravel(), _QX.ravel() ** 2,
                                 _QX.ravel() * _QY.ravel(), _QY.ravel() ** 2], axis=1))


def _subcell_offset(fused, row, col):
    h, w = fused.shape
    nb = fused[np.ix_((row + np.arange(-1, 2)) % h, (col + np.arange(-1, 2)) % w)]
    _, b, c, d, e, f = _QFIT @ nb.ravel()
    hess = np.array([[2 * d, e], [e, 2 * f]])
    if not (hess[0, 0] < 0 and np.linalg.det(hess) > 0):
        return 0.0, 0.0
    ox, oy = np.linalg.solve(hess, [-b, -c])
    return float(np.clip(ox, -0.5, 0.5)), float(np.clip(oy, -0.5, 0.5))


def locate_peak(fused, subcell=True):
    """Argmax of a correlation-convention map as a signed ``(dx, dy)``.

    Ties go to the smallest displacement magnitude, then row-major order.
    Returns ``(dx, dy, peak_value)`` in cells.
    """
    fused = np.asarray(fused, dtype=float)
    if not np.any(fused):
        raise NoPeakError("fused response is identically zero")
    peak = fused.max()
    flat = np.flatnonzero(fused == peak)
    oy, ox = wrap_offsets(fused.shape)
    if flat.size > 1:
        rows, cols = np.unravel_index(flat, fused.shape)
        mag = oy[rows] ** 2 + ox[cols] ** 2
        flat = flat[np.lexsort((flat, mag))]
    row, col = np.unravel_index(flat[0], fused.shape)
    dx, dy = float(ox[col]), float(oy[row])
    if subcell:
        sx, sy = _subcell_offset(fused, row, col)
        dx, dy = dx + sx, dy + sy
    return dx, dy, float(peak)


def fuse_and_locate(stack, spatial=None, cell_size=1, subcell=True):
    """Channel-sum fusion, optional spatial attention product, peak search.

    Returns ``(dx, dy, peak_value, fused)`` with the displacement scaled by
    ``cell_size``.
    """
    stack = np.asarray(stack, dtype=float)
    fused = stack.sum(axis=2) if stack.ndim == 3 else stack
    if spatial is not None:
        if np.shape(spatial) != fused.shape:
            raise InvalidInputError(f"spatial map {np.shape(spatial)} vs response {fused.shape}")
        fused = spatial * fused
    dx, dy, peak = locate_peak(fused, subcell)
    return dx * cell_size, dy * cell_size, peak, fused
