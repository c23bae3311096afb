"""Hand-crafted features (FHOG, color names, intensity) and regression labels."""

import functools
import os
from importlib import resources

import cv2
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .imaging import hann_window, to_gray
from .validation import ConfigError, InvalidInputError

N_HOG = 31
N_CN = 10
CN_TABLE_ENV = "TACF_CN_TABLE"
CN_NAMES = ("black", "blue", "brown", "gray", "green",
            "orange", "purple", "red", "white", "yellow")

_HOG_CLIP = 0.2
_HOG_TEXTURE_GAIN = 0.2357
_HOG_EPS = 1e-4
_COS = np.cos(np.arange(9) * np.pi / 9)
_SIN = np.sin(np.arange(9) * np.pi / 9)


def _gradients(img):
    """Central differences with replicated borders; max-magnitude channel."""
    if img.ndim == 2:
        img = img[:, :, None]
    p = np.pad(img, ((1, 1), (1, 1), (0, 0)), mode="edge")
    dx = p[1:-1, 2:] - p[1:-1, :-2]
    dy = p[2:, 1:-1] - p[:-2, 1:-1]
    mag2 = dx * dx + dy * dy
    best = np.argmax(mag2, axis=2)[..., None]
    dx = np.take_along_axis(dx, best, 2)[..., 0]
    dy = np.take_along_axis(dy, best, 2)[..., 0]
    return dx, dy


def extract_hog(pixels, cell_size=4):
    """31-channel Felzenszwalb HOG pooled on a ``cell_size`` grid.

    Orientation is hard-assigned to one of 18 signed bins: the axis among 9
    (multiples of 20 degrees) with the largest absolute projection, shifted
    by 9 when the projection is negative. Gradient magnitude is spread
    over the four nearest cells bilinearly. Channels are ordered as 18
    signed bins, 9 unsigned bins, 4 texture (normalizer) channels.
    """
    pixels = np.asarray(pixels, dtype=float)
    h, w = pixels.shape[:2]
    if h < cell_size or w < cell_size:
        raise InvalidInputError(f"patch {h}x{w} smaller than one {cell_size}px cell")
    if h % cell_size or w % cell_size:
        raise InvalidInputError(f"patch {h}x{w} not divisible by cell size {cell_size}")
    hc, wc = h // cell_size, w // cell_size

    dx, dy = _gradients(pixels)
    mag = np.sqrt(dx * dx + dy * dy)
    dots = dx[..., None] * _COS + dy[..., None] * _SIN
    best = np.argmax(np.abs(dots), axis=2)
    # opposite direction of the best axis maps to the second half of the bins
    orient = best + 9 * (np.take_along_axis(dots, best[..., None], 2)[..., 0] < 0)

    # bilinear spatial binning into a grid with one guard cell on each side
    cx = (np.arange(w) + 0.5) / cell_size - 0.5
    cy = (np.arange(h) + 0.5) / cell_size - 0.5
    ix, iy = np.floor(cx).astype(int), np.floor(cy).astype(int)
    fx, fy = cx - ix, cy - iy
    hist = np.zeros((hc + 2) * (wc + 2) * 18)
    for oy, wy in ((0, 1 - fy), (1, fy)):
        for ox, wx in ((0, 1 - fx), (1, fx)):
            idx = ((iy + oy + 1)[:, None] * (wc + 2) + (ix + ox + 1)[None, :]) * 18 + orient
            hist += np.bincount(idx.ravel(), (mag * wy[:, None] * wx[None, :]).ravel(),
                                minlength=hist.size)
    hist = hist.reshape(hc + 2, wc + 2, 18)[1:-1, 1:-1]

    unsigned = hist[..., :9] + hist[..., 9:]
    energy = np.pad((unsigned ** 2).sum(axis=2), 1, mode="edge")
    quad = energy[:-1, :-1] + energy[1:, :-1] + energy[:-1, 1:] + energy[1:, 1:]
    # normalizer of each of the four 2x2 blocks touching a cell
    norms = np.stack([quad[1:, 1:], quad[:-1, 1:], quad[1:, :-1], quad[:-1, :-1]], axis=2)
    norms = np.where(norms > 0, 1.0 / np.sqrt(norms + _HOG_EPS), 0.0)

    signed_t = np.minimum(hist[..., None, :] * norms[..., None], _HOG_CLIP)
    unsigned_t = np.minimum(unsigned[..., None, :] * norms[..., None], _HOG_CLIP)
    out = np.empty((hc, wc, N_HOG))
    out[..., :18] = 0.5 * signed_t.sum(axis=2)
    out[..., 18:27] = 0.5 * unsigned_t.sum(axis=2)
    out[..., 27:] = _HOG_TEXTURE_GAIN * signed_t.sum(axis=3)
    return out


def cn_index(rgb8):
    """Row of the 32x32x32 lookup table for 8-bit RGB values."""
    rgb8 = np.asarray(rgb8).astype(np.int64) // 8
    return rgb8[..., 0] + 32 * rgb8[..., 1] + 1024 * rgb8[..., 2]


def build_cn_table(temperature=14.0):
    """Soft color-name table from ten prototype colors in CIELAB.

    Each RGB bin center is assigned a Gaussian-weighted probability over
    the prototypes, rows sum to one.
    """
    protos = np.array([
        (0, 0, 0), (0, 60, 220), (120, 70, 30), (128, 128, 128), (40, 160, 40),
        (255, 140, 0), (130, 40, 160), (210, 20, 30), (255, 255, 255), (245, 225, 40),
    ], dtype=np.float32)
    b, g, r = np.meshgrid(np.arange(32), np.arange(32), np.arange(32), indexing="ij")
    centers = (np.stack([r, g, b], axis=-1).reshape(-1, 3) * 8 + 4).astype(np.float32)

    def lab(rgb):
        return cv2.cvtColor((rgb / 255.0)[None].astype(np.float32),
                            cv2.COLOR_RGB2Lab)[0].astype(np.float64)

    d2 = ((lab(centers)[:, None, :] - lab(protos)[None, :, :]) ** 2).sum(axis=2)
    logits = -(d2 - d2.min(axis=1, keepdims=True)) / (2 * temperature ** 2)
    p = np.exp(logits)
    return p / p.sum(axis=1, keepdims=True)


def write_cn_table(path, table):
    table = np.asarray(table, dtype="<f4")
    if table.shape != (32768, N_CN):
        raise ConfigError(f"color-name table must be 32768x{N_CN}, got {table.shape}")
    table.tofile(path)


def default_cn_table_path():
    env = os.environ.get(CN_TABLE_ENV)
    if env:
        return env
    return str(resources.files("tacf").joinpath("data", "cn_table.bin"))


@functools.lru_cache(maxsize=4)
def _load_cn_table(path):
    if not os.path.isfile(path):
        raise ConfigError(f"color-name lookup table not found: {path}")
    table = np.fromfile(path, dtype="<f4")
    if table.size != 32768 * N_CN:
        raise ConfigError(
            f"{path}: expected {32768 * N_CN} float32 values, got {table.size}")
    table = table.reshape(32768, N_CN).astype(np.float64)
    table.setflags(write=False)
    return table


def load_cn_table(path=None):
    """Load (and cache) the ``32768 x 10`` little-endian float32 table."""
    return _load_cn_table(os.fspath(path or default_cn_table_path()))


def _cell_mean(maps, cell_size):
    h, w = maps.shape[:2]
    hc, wc = h // cell_size, w // cell_size
    maps = maps[:hc * cell_size, :wc * cell_size]
    return maps.reshape(hc, cell_size, wc, cell_size, -1).mean(axis=(1, 3))


def gray_channel(pixels, cell_size=4):
    """Cell-averaged intensity with the patch mean removed, shape ``(h, w, 1)``."""
    g = _cell_mean(to_gray(np.asarray(pixels, dtype=float))[..., None], cell_size)
    return g - g.mean()


def extract_cn(pixels, cell_size=4, table=None):
    """Color-name probabilities averaged per cell, shape ``(h, w, 10)``.

    Grayscale input has no color information, so the single intensity
    channel of :func:`gray_channel` is returned instead.
    """
    pixels = np.asarray(pixels, dtype=float)
    if pixels.ndim == 2:
        return gray_channel(pixels, cell_size)
    if table is None:
        table = load_cn_table()
    rgb8 = np.clip(np.floor(pixels * 255.0 + 0.5), 0, 255)
    probs = table[cn_index(rgb8)]
    return _cell_mean(probs, cell_size)


def stack_features(maps, window=None):
    """Concatenate feature maps along channels and apply a Hann window."""
    maps = [np.asarray(m, dtype=float) for m in maps]
    if not maps:
        raise InvalidInputError("no feature maps to stack")
    maps = [m[..., None] if m.ndim == 2 else m for m in maps]
    shape = maps[0].shape[:2]
    for m in maps[1:]:
        if m.shape[:2] != shape:
            raise InvalidInputError(f"feature grids differ: {shape} vs {m.shape[:2]}")
    if window is None:
        window = hann_window(*shape)
    return np.concatenate(maps, axis=2) * window[..., None]


def gaussian_label(h, w, sigma_factor=0.1):
    """Gaussian regression target with its unit peak at index (0, 0).

    The bandwidth is ``sigma_factor * sqrt(h * w)`` cells and distances are
    measured circularly, so the map wraps around like a correlation output.
    """
    if h < 1 or w < 1:
        raise InvalidInputError(f"label size must be positive, got {h}x{w}")
    if sigma_factor <= 0:
        raise InvalidInputError(f"sigma_factor must be > 0, got {sigma_factor}")
    sigma = sigma_factor * np.sqrt(h * w)
    dy = np.minimum(np.arange(h), h - np.arange(h))
    dx = np.minimum(np.arange(w), w - np.arange(w))
    return np.exp(-(dy[:, None] ** 2 + dx[None, :] ** 2) / (2 * sigma ** 2))


class FeatureExtractor(TransformerMixin, BaseEstimator):
    """Patch to windowed ``(h, w, D)`` feature map.

    Color input yields ``D = 42`` (HOG, color names, intensity); grayscale
    yields ``D = 32`` (HOG, intensity).
    """

    def __init__(self, cell_size=4, cn_table=None):
        self.cell_size = cell_size
        self.cn_table = cn_table

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        X = np.asarray(X, dtype=float)
        maps = [extract_hog(X, self.cell_size)]
        if X.ndim == 3:
            maps.append(extract_cn(X, self.cell_size, load_cn_table(self.cn_table)))
        maps.append(gray_channel(X, self.cell_size))
        return stack_features(maps)
