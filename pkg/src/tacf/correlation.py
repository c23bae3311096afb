"""Frequency-domain correlation engine.

Transforms run over the first two axes so ``(H, W)`` maps and ``(H, W, D)``
channel stacks go through the same code. The forward transform is
unnormalized (DC bin = sum of entries), matching ``scipy.fft`` defaults;
``scipy.fft`` keeps its own per-shape plan cache.
"""

import numpy as np
import scipy.fft

from .validation import InvalidInputError, check_same_shape

AXES = (0, 1)
FFT_NORM = "backward"


def fft2(x):
    return scipy.fft.fft2(x, axes=AXES, norm=FFT_NORM)


def ifft2(xf):
    """Inverse transform, returning the real part."""
    return scipy.fft.ifft2(xf, axes=AXES, norm=FFT_NORM).real


def _half(xf):
    return xf[:, :xf.shape[1] // 2 + 1]


def hermitian_ifft2(xf):
    """Inverse of a spectrum known to come from a real map, via the real
    transform on the non-redundant half (about half the work of ``ifft2``)."""
    return scipy.fft.irfft2(_half(xf), s=xf.shape[:2], axes=AXES, norm=FFT_NORM)


def _cross_term(xf, zf):
    # c(tau) = sum_t x(t + tau) z(t)
    return hermitian_ifft2(xf * np.conj(zf))


def _energy(x):
    return np.sum(x * x, axis=AXES)


def gaussian_kernel_spectral(xf, zf, xx, zz, sigma, size):
    """Gaussian kernel correlation from precomputed spectra and energies."""
    d = np.maximum(0.0, xx + zz - 2.0 * _cross_term(xf, zf))
    return np.exp(-d / (sigma * sigma * size))


def kernel_correlation(x, z, sigma=0.5):
    """Gaussian kernel evaluated between ``x`` shifted by every circular
    offset and ``z``.

    ``k(tau) = exp(-max(0, |x|^2 + |z|^2 - 2 c(tau)) / (sigma^2 M))`` where
    ``c(tau) = sum_t x(t + tau) z(t)`` and ``M = H * W``. A trailing channel
    axis is handled independently per channel.
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    check_same_shape(x, z)
    if x.ndim not in (2, 3):
        raise InvalidInputError(f"expected 2-D or 3-D maps, got shape {x.shape}")
    if sigma <= 0:
        raise InvalidInputError(f"kernel sigma must be > 0, got {sigma}")
    size = x.shape[0] * x.shape[1]
    return gaussian_kernel_spectral(fft2(x), fft2(z), _energy(x), _energy(z),
                                    sigma, size)


def linear_correlation(x, z):
    """Linear-kernel counterpart: the raw circular cross-correlation ``c``."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    check_same_shape(x, z)
    return _cross_term(fft2(x), fft2(z))


def filter_response(kernel, filter_spec):
    """``ifft2(fft2(kernel) * filter_spec)`` for a real kernel and a filter
    trained from real data, computed with real transforms."""
    kf = scipy.fft.rfft2(kernel, axes=AXES, norm=FFT_NORM)
    return scipy.fft.irfft2(kf * _half(filter_spec), s=kernel.shape[:2], axes=AXES,
                            norm=FFT_NORM)


def correlate(filter_spec, kernel):
    """Correlation output ``ifft2(fft2(kernel) * filter_spec)``; the filter
    spectrum must be Hermitian (trained from real samples and labels)."""
    filter_spec = np.asarray(filter_spec)
    kernel = np.asarray(kernel, dtype=float)
    check_same_shape(filter_spec, kernel, ("filter", "kernel"))
    return filter_response(kernel, filter_spec)
