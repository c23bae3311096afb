"""Online tracking loop: the tri-attention tracker and its KCC baseline."""

import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .attention import (AttentionState, apply_dim_attention, origin_hann,
                        dim_weights, dynamic_map, fuse_and_locate, gate,
                        motion_factor, static_spatial_map)
from .context import (ContextLayout, challenging_factors, extract_context_patches,
                      penalty_factors, pme)
from .correlation import AXES, fft2, filter_response, gaussian_kernel_spectral
from .features import FeatureExtractor, gaussian_label
from .imaging import BoundingBox, extract_patch, template_size
from .training import (TrainContext, self_kernel_spectrum, train_plain,
                       train_with_context, update_model)
from .validation import (ConfigError, DegenerateResponseError, NoPeakError,
                         check_frame, check_positive, check_unit_interval)


@dataclass
class FrameTelemetry:
    frame: int
    box: BoundingBox
    peak: float = float("nan")
    pme_object: float = float("nan")
    gamma_t: float = 0.0
    context_trained: bool = False
    held: bool = False
    penalties: np.ndarray = field(default=None, repr=False)
    dim_z: np.ndarray = field(default=None, repr=False)
    dim_s: np.ndarray = field(default=None, repr=False)
    ms_detect: float = 0.0
    ms_attention: float = 0.0
    ms_train: float = 0.0
    ms_total: float = 0.0


def _normalize_channels(feats):
    # unit mean-square energy per channel; all-zero channels stay zero
    ms = np.mean(feats * feats, axis=AXES)
    scale = np.where(ms > 0, 1.0 / np.sqrt(np.where(ms > 0, ms, 1.0)), 0.0)
    return feats * scale


class _CorrelationTracker(BaseEstimator):
    """Shared plumbing: feature extraction, detection responses, training."""

    def _check_params(self):
        check_positive(self.lambda1, "lambda1")
        check_positive(self.padding, "padding")
        if self.padding < 1:
            raise ConfigError(f"padding must be >= 1, got {self.padding}")
        if int(self.cell_size) != self.cell_size or self.cell_size < 1:
            raise ConfigError(f"cell_size must be a positive integer, got {self.cell_size}")
        check_positive(self.kernel_sigma, "kernel_sigma")
        check_positive(self.sigma_factor, "sigma_factor")
        check_unit_interval(self.eta, "eta")
        check_positive(self.template_area, "template_area")

    def _features(self, patch):
        return _normalize_channels(self.extractor_.transform(patch.pixels))

    def _responses(self, feats):
        """Per-channel responses of ``feats`` against the current model."""
        model = self.model_
        h, w = feats.shape[:2]
        k = gaussian_kernel_spectral(fft2(feats), model.template_spec,
                                     np.sum(feats * feats, axis=AXES),
                                     model.template_energy, self.kernel_sigma, h * w)
        return filter_response(k, model.filters)

    def _init_model(self, frame, box):
        self._check_params()
        frame = check_frame(frame)
        if not isinstance(box, BoundingBox):
            box = BoundingBox.from_xywh(*box)
        self.size_ = template_size(box, self.padding, int(self.cell_size), self.template_area)
        self.extractor_ = FeatureExtractor(int(self.cell_size), self.cn_table)
        patch = extract_patch(frame, box, self.padding, self.size_)
        feats = self._features(patch)
        self.scale_ = patch.scale
        # label bandwidth is relative to the target extent, not the padded region
        self.label_ = gaussian_label(feats.shape[0], feats.shape[1],
                                     self.sigma_factor / self.padding)
        self.model_ = train_plain(feats, self.label_, self.lambda1, self.kernel_sigma)
        self.box_ = box
        self.frame_index_ = 1
        self.n_channels_ = feats.shape[2]
        self.telemetry_ = [FrameTelemetry(1, box)]
        return frame

    def _move(self, dx, dy):
        """Template-pixel displacement to a frame-pixel box update."""
        dxp, dyp = dx / self.scale_[0], dy / self.scale_[1]
        return self.box_.moved(dxp, dyp), (dxp, dyp)

    def predict(self, frame):
        """Alias of :meth:`update` returning the box as ``(x, y, w, h)``."""
        return self.update(frame).to_xywh()

    def track(self, frames, box):
        """Run over an iterable of frames, initializing on the first one.

        Returns an ``(N, 4)`` array of top-left ``(x, y, w, h)`` boxes.
        """
        it = iter(frames)
        self.fit(next(it), box)
        out = [self.box_.to_xywh()]
        for frame in it:
            out.append(self.update(frame).to_xywh())
        return np.array(out)


class TACFTracker(_CorrelationTracker):
    """Tri-attention correlation-filter tracker.

    Per-channel Gaussian-kernel filters are trained in closed form. Context
    patches around the target act as hard negatives every ``fc`` frames,
    weighted by their PME relative to the object response (``use_ca``).
    Detection responses are reweighted per channel (``use_da``) and by a
    spatial map with a motion-shifted copy (``use_sa``) before the peak
    search. With all three switches off the tracker reduces to plain KCC.

    Parameters
    ----------
    lambda1, lambda2 : float
        Filter and context regularization.
    fc : int
        Context-learning interval in frames.
    context_patches : int
        Number of context patches (4 = up, down, left, right).
    beta_t : float
        Activation floor of the channel gate.
    gamma : float
        Base motion gain for the dynamic spatial map.
    eta : float
        Model learning rate.
    padding : float
        Search region size relative to the target.
    cell_size : int
        Feature cell size in template pixels.
    kernel_sigma : float
        Gaussian kernel bandwidth.
    sigma_factor : float
        Label bandwidth relative to ``sqrt(h * w)`` of the feature grid.
    template_area : float
        Pixel area the padded search region is resampled to.
    context_distance : float
        Context patch offset in target sizes.
    use_ca, use_da, use_sa : bool
        Contextual, dimensional and spatiotemporal attention switches.
    cn_table : str, optional
        Path of the color-name lookup table.
    """

    def __init__(self, lambda1=5e-5, lambda2=0.0625, fc=2, context_patches=4,
                 beta_t=0.1, gamma=0.3, eta=0.02, padding=2.0, cell_size=4,
                 kernel_sigma=0.5, sigma_factor=0.1, template_area=150.0 ** 2,
                 context_distance=1.0, use_ca=True, use_da=True, use_sa=True,
                 cn_table=None):
        self.lambda1 = lambda1
        self.lambda2 = lambda2
        self.fc = fc
        self.context_patches = context_patches
        self.beta_t = beta_t
        self.gamma = gamma
        self.eta = eta
        self.padding = padding
        self.cell_size = cell_size
        self.kernel_sigma = kernel_sigma
        self.sigma_factor = sigma_factor
        self.template_area = template_area
        self.context_distance = context_distance
        self.use_ca = use_ca
        self.use_da = use_da
        self.use_sa = use_sa
        self.cn_table = cn_table

    def _check_params(self):
        super()._check_params()
        check_positive(self.lambda2, "lambda2", strict=False)
        check_positive(self.beta_t, "beta_t", strict=False)
        check_positive(self.gamma, "gamma", strict=False)
        if int(self.fc) != self.fc or self.fc < 1:
            raise ConfigError(f"fc must be an integer >= 1, got {self.fc}")
        if int(self.context_patches) != self.context_patches or self.context_patches < 0:
            raise ConfigError(f"context_patches must be an integer >= 0, got {self.context_patches}")

    def fit(self, frame, box):
        """Train the initial filters on the first frame.

        ``box`` is a :class:`BoundingBox` or top-left ``(x, y, w, h)``.
        Context is not used here since penalties need a trained filter.
        """
        self._init_model(frame, box)
        self.layout_ = ContextLayout.cross(int(self.context_patches), self.context_distance)
        self.attention_ = AttentionState(self.gamma, self.beta_t, (0.0, 0.0),
                                         origin_hann(*self.model_.shape[:2]))
        self.penalties_ = None
        return self

    def update(self, frame):
        """Locate the target in the next frame and update the model."""
        check_is_fitted(self, "model_")
        t_start = time.perf_counter()
        frame = check_frame(frame)
        self.frame_index_ += 1
        tel = FrameTelemetry(self.frame_index_, self.box_)

        t0 = time.perf_counter()
        z = self._features(extract_patch(frame, self.box_, self.padding, self.size_))
        resp = self._responses(z)
        tel.ms_detect = 1e3 * (time.perf_counter() - t0)

        t0 = time.perf_counter()
        tel.pme_object = pme(resp.sum(axis=2))
        if self.use_da:
            tel.dim_z = dim_weights(resp)
            tel.dim_s = gate(tel.dim_z, self.beta_t)
            resp = apply_dim_attention(resp, tel.dim_s)
        spatial = None
        if self.use_sa:
            att = self.attention_
            static = static_spatial_map(resp, att.window)
            tel.gamma_t = motion_factor(att.last_displacement,
                                        (self.box_.w, self.box_.h), att.gamma)
            shift = (att.last_displacement[0] * self.scale_[0] / self.cell_size,
                     att.last_displacement[1] * self.scale_[1] / self.cell_size)
            spatial = dynamic_map(static, tel.gamma_t, shift)
        try:
            dx, dy, tel.peak, _ = fuse_and_locate(resp, spatial, self.cell_size)
        except NoPeakError:
            tel.held = True
        tel.ms_attention = 1e3 * (time.perf_counter() - t0)

        if not tel.held:
            t0 = time.perf_counter()
            self.box_, disp = self._move(dx, dy)
            self.attention_.last_displacement = disp
            tel.box = self.box_
            tel.context_trained = self._train(frame, tel)
            tel.ms_train = 1e3 * (time.perf_counter() - t0)

        tel.ms_total = 1e3 * (time.perf_counter() - t_start)
        self.telemetry_.append(tel)
        return self.box_

    def _train(self, frame, tel):
        x = self._features(extract_patch(frame, self.box_, self.padding, self.size_))
        use_context = (self.use_ca and len(self.layout_) > 0
                       and self.frame_index_ % int(self.fc) == 0)
        if use_context:
            patches = extract_context_patches(frame, self.box_, self.layout_,
                                              self.padding, self.size_)
            ctx = [self._features(p) for p in patches]
            r0 = self._responses(x).sum(axis=2)
            rs = [self._responses(c).sum(axis=2) for c in ctx]
            try:
                p = penalty_factors(challenging_factors(r0, rs))
            except DegenerateResponseError:
                p = np.full(len(ctx), 1.0 / len(ctx))
            specs = np.stack([self_kernel_spectrum(c, self.kernel_sigma)[0] for c in ctx])
            new = train_with_context(x, TrainContext(specs, p), self.label_,
                                     self.lambda1, self.lambda2, self.kernel_sigma)
            self.penalties_ = tel.penalties = p
        else:
            new = train_plain(x, self.label_, self.lambda1, self.kernel_sigma)
        self.model_ = update_model(self.model_, new, self.eta)
        return use_context


class KCCTracker(_CorrelationTracker):
    """Baseline kernel cross-correlator: plain filters, channel-sum peak."""

    def __init__(self, lambda1=5e-5, eta=0.02, padding=2.0, cell_size=4,
                 kernel_sigma=0.5, sigma_factor=0.1, template_area=150.0 ** 2,
                 cn_table=None):
        self.lambda1 = lambda1
        self.eta = eta
        self.padding = padding
        self.cell_size = cell_size
        self.kernel_sigma = kernel_sigma
        self.sigma_factor = sigma_factor
        self.template_area = template_area
        self.cn_table = cn_table

    def fit(self, frame, box):
        self._init_model(frame, box)
        return self

    def update(self, frame):
        check_is_fitted(self, "model_")
        frame = check_frame(frame)
        self.frame_index_ += 1
        tel = FrameTelemetry(self.frame_index_, self.box_)
        resp = self._responses(self._features(
            extract_patch(frame, self.box_, self.padding, self.size_)))
        try:
            dx, dy, tel.peak, _ = fuse_and_locate(resp, None, self.cell_size)
        except NoPeakError:
            tel.held = True
        else:
            self.box_, _ = self._move(dx, dy)
            tel.box = self.box_
            x = self._features(extract_patch(frame, self.box_, self.padding, self.size_))
            new = train_plain(x, self.label_, self.lambda1, self.kernel_sigma)
            self.model_ = update_model(self.model_, new, self.eta)
        self.telemetry_.append(tel)
        return self.box_
