"""Closed-form ridge-regression filters, with and without context patches."""

import struct
from dataclasses import dataclass

import numpy as np

from .correlation import AXES, fft2, gaussian_kernel_spectral
from .validation import ConfigError, InvalidInputError, check_unit_interval


@dataclass(frozen=True)
class FilterBank:
    """Per-channel filters in the frequency domain plus the stored template.

    ``filters`` and ``template_spec`` have shape ``(H, W, D)``; ``template``
    is the real feature map the filters were trained on and is what new
    patches are correlated against at detection time.
    """

    filters: np.ndarray
    label_spec: np.ndarray
    template: np.ndarray
    template_spec: np.ndarray
    template_energy: np.ndarray

    @property
    def shape(self):
        return self.filters.shape


@dataclass(frozen=True)
class TrainContext:
    """Self-kernel spectra of the context patches and their penalty factors.

    ``kernel_specs`` has shape ``(S, H, W, D)``, ``penalties`` holds the
    normalized factors ``p_s`` (the regularization weight applied is
    ``lambda2 * p_s**2``).
    """

    kernel_specs: np.ndarray
    penalties: np.ndarray

    def __post_init__(self):
        if len(self.kernel_specs) != len(self.penalties):
            raise InvalidInputError(
                f"{len(self.kernel_specs)} context kernels but "
                f"{len(self.penalties)} penalties")
        if np.any(np.asarray(self.penalties) < 0):
            raise InvalidInputError("penalties must be non-negative")


def self_kernel_spectrum(feats, sigma):
    """Spectrum of the Gaussian self-correlation of each channel."""
    xf = fft2(feats)
    xx = np.sum(feats * feats, axis=AXES)
    size = feats.shape[0] * feats.shape[1]
    return fft2(gaussian_kernel_spectral(xf, xf, xx, xx, sigma, size)), xf, xx


def solve_filters(k0_spec, label_spec, lambda1, ctx_specs=(), ctx_weights=()):
    """Element-wise closed form.

    ``w = K0 * y / (K0 * conj(K0) + lambda1 + sum_s P_s^2 * Ks * conj(Ks))``
    with ``P_s^2`` given directly in ``ctx_weights``.
    """
    if not lambda1 > 0:
        raise ConfigError(f"lambda1 must be > 0, got {lambda1}")
    k0_spec = np.asarray(k0_spec)
    label_spec = np.asarray(label_spec)
    if label_spec.ndim < k0_spec.ndim:
        label_spec = label_spec.reshape(label_spec.shape + (1,) * (k0_spec.ndim - label_spec.ndim))
    denom = (k0_spec * np.conj(k0_spec)).real + lambda1
    for ks, weight in zip(ctx_specs, ctx_weights):
        denom = denom + weight * (ks * np.conj(ks)).real
    return k0_spec * label_spec / denom


def _bank(filters, label, feats, xf, xx):
    return FilterBank(filters, fft2(label), feats, xf, xx)


def train_plain(obj, label, lambda1, sigma=0.5):
    """Filters trained on the object patch alone."""
    obj = np.asarray(obj, dtype=float)
    label = np.asarray(label, dtype=float)
    if obj.shape[:2] != label.shape:
        raise InvalidInputError(f"label {label.shape} does not match features {obj.shape[:2]}")
    k0, xf, xx = self_kernel_spectrum(obj, sigma)
    return _bank(solve_filters(k0, fft2(label), lambda1), label, obj, xf, xx)


def context_from_features(ctx_feats, penalties, sigma=0.5):
    specs = np.stack([self_kernel_spectrum(np.asarray(c, dtype=float), sigma)[0]
                      for c in ctx_feats]) if len(ctx_feats) else np.empty((0,))
    return TrainContext(specs, np.asarray(penalties, dtype=float))


def train_with_context(obj, ctx, label, lambda1, lambda2, sigma=0.5):
    """Filters trained on the object patch with context patches as hard
    negatives whose desired response is zero."""
    if lambda2 < 0:
        raise ConfigError(f"lambda2 must be >= 0, got {lambda2}")
    obj = np.asarray(obj, dtype=float)
    label = np.asarray(label, dtype=float)
    if obj.shape[:2] != label.shape:
        raise InvalidInputError(f"label {label.shape} does not match features {obj.shape[:2]}")
    k0, xf, xx = self_kernel_spectrum(obj, sigma)
    weights = lambda2 * np.asarray(ctx.penalties, dtype=float) ** 2
    filters = solve_filters(k0, fft2(label), lambda1, ctx.kernel_specs, weights)
    return _bank(filters, label, obj, xf, xx)


def update_model(old, new, eta):
    """Linear interpolation ``(1 - eta) * old + eta * new`` of filters and template."""
    eta = check_unit_interval(eta, "eta")
    if old.shape != new.shape:
        raise InvalidInputError(f"filter banks differ in shape: {old.shape} vs {new.shape}")
    if eta == 0:
        return old
    if eta == 1:
        return new
    template = (1 - eta) * old.template + eta * new.template
    return FilterBank(
        (1 - eta) * old.filters + eta * new.filters,
        new.label_spec,
        template,
        (1 - eta) * old.template_spec + eta * new.template_spec,
        np.sum(template * template, axis=AXES),
    )


_MAGIC = b"TACFFB"
_VERSION = 1
_HEADER = struct.Struct("<6sHIII")


def save_filter_bank(path, bank):
    """Write a debugging snapshot: header, label spectrum, per-channel
    complex filters, then the real template (all little-endian)."""
    h, w, d = bank.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, h, w, d))
        fh.write(np.ascontiguousarray(bank.label_spec, dtype="<c16").tobytes())
        for n in range(d):
            fh.write(np.ascontiguousarray(bank.filters[:, :, n], dtype="<c16").tobytes())
        for n in range(d):
            fh.write(np.ascontiguousarray(bank.template[:, :, n], dtype="<f8").tobytes())


def load_filter_bank(path):
    with open(path, "rb") as fh:
        magic, version, h, w, d = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != _MAGIC or version != _VERSION:
            raise InvalidInputError(f"{path}: not a version {_VERSION} filter snapshot")
        label_spec = np.frombuffer(fh.read(16 * h * w), "<c16").reshape(h, w)
        filters = np.stack([np.frombuffer(fh.read(16 * h * w), "<c16").reshape(h, w)
                            for _ in range(d)], axis=2)
        template = np.stack([np.frombuffer(fh.read(8 * h * w), "<f8").reshape(h, w)
                             for _ in range(d)], axis=2)
    return FilterBank(filters, label_spec, template, fft2(template),
                      np.sum(template * template, axis=AXES))
