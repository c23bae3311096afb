import numpy as np
import pytest

from tacf.bench.synth import synth_sequence
from tacf.correlation import fft2, ifft2, kernel_correlation
from tacf.imaging import BoundingBox, extract_patch
from tacf.tracker import KCCTracker, TACFTracker
from tacf.validation import ConfigError, InvalidInputError

BASELINE = dict(use_ca=False, use_da=False, use_sa=False)


def textured_frame(seed=0, size=(120, 160)):
    import cv2
    rng = np.random.default_rng(seed)
    low = rng.random((size[0] // 8, size[1] // 8, 3)).astype(np.float32)
    img = cv2.resize(low, (size[1], size[0]), interpolation=cv2.INTER_CUBIC)
    return (np.clip(img, 0, 1) * 255).astype(np.uint8)


def test_static_frame_keeps_box():
    frame = textured_frame()
    box = (60, 40, 32, 24)
    for params in ({}, BASELINE):
        t = TACFTracker(**params).fit(frame, box)
        out = t.predict(frame)
        assert np.allclose(out[:2], box[:2], atol=4)
        assert out[2:] == box[2:]


def test_circular_shift_is_recovered():
    frame = textured_frame(1, (128, 128))
    box = BoundingBox(64, 64, 32, 32)
    moved = np.roll(frame, 8, axis=1)
    t = TACFTracker(**BASELINE).fit(frame, box)
    new = t.update(moved)
    assert new.cx - box.cx == pytest.approx(8, abs=2)
    assert new.cy == pytest.approx(box.cy, abs=2)


def test_self_detection_on_first_frame():
    frame = textured_frame(2)
    t = TACFTracker().fit(frame, (60, 40, 32, 24))
    feats = t._features(extract_patch(frame, t.box_, t.padding, t.size_))
    resp = t._responses(feats).sum(axis=2)
    assert np.unravel_index(resp.argmax(), resp.shape) == (0, 0)


def test_context_on_even_frames_only():
    seq = synth_sequence({"n_frames": 9, "seed": 1})
    t = TACFTracker(fc=2)
    t.track(seq.iter_frames(), seq.ground_truth[0])
    flags = [tel.context_trained for tel in t.telemetry_]
    assert flags == [k % 2 == 0 for k in range(1, 10)]
    assert t.telemetry_[1].penalties is not None and t.telemetry_[1].penalties.sum() == pytest.approx(1)
    t = TACFTracker(fc=3)
    t.track(seq.iter_frames(), seq.ground_truth[0])
    assert [tel.frame for tel in t.telemetry_ if tel.context_trained] == [3, 6, 9]


def test_ablation_identity_with_baseline():
    seq = synth_sequence({"n_frames": 12, "seed": 2, "target": {"velocity": [2.0, 1.0]}})
    a = TACFTracker(**BASELINE).track(seq.iter_frames(), seq.ground_truth[0])
    b = KCCTracker().track(seq.iter_frames(), seq.ground_truth[0])
    np.testing.assert_array_equal(a, b)


def test_baseline_init_state_matches_kcc():
    frame = textured_frame(3)
    a = TACFTracker(**BASELINE).fit(frame, (50, 30, 40, 30))
    b = KCCTracker().fit(frame, (50, 30, 40, 30))
    np.testing.assert_array_equal(a.model_.filters, b.model_.filters)
    np.testing.assert_array_equal(a.model_.template, b.model_.template)


def test_deterministic():
    seq = synth_sequence({"n_frames": 8, "seed": 3, "clutter": {"distractors": 1}})
    runs = [TACFTracker() for _ in range(2)]
    out = [r.track(seq.iter_frames(), seq.ground_truth[0]) for r in runs]
    np.testing.assert_array_equal(out[0], out[1])
    for t0, t1 in zip(runs[0].telemetry_, runs[1].telemetry_):
        assert t0.peak == t1.peak or (np.isnan(t0.peak) and np.isnan(t1.peak))
        assert t0.gamma_t == t1.gamma_t


def test_telemetry_fields():
    seq = synth_sequence({"n_frames": 4, "seed": 4})
    t = TACFTracker()
    t.track(seq.iter_frames(), seq.ground_truth[0])
    tel = t.telemetry_[-1]
    assert tel.frame == 4 and tel.dim_s.shape == (42,)
    assert np.all(tel.dim_s >= t.beta_t)
    assert tel.ms_total >= tel.ms_detect >= 0
    assert tel.gamma_t >= 0


def test_grayscale_sequence():
    seq = synth_sequence({"n_frames": 5, "seed": 5, "color": False})
    t = TACFTracker()
    out = t.track(seq.iter_frames(), seq.ground_truth[0])
    assert t.n_channels_ == 32 and out.shape == (5, 4)


def test_box_size_fixed():
    seq = synth_sequence({"n_frames": 6, "seed": 6})
    out = TACFTracker().track(seq.iter_frames(), seq.ground_truth[0])
    assert np.all(out[:, 2:] == seq.ground_truth[0, 2:])


def test_held_frame_on_zero_response(monkeypatch):
    frame = textured_frame(4)
    t = TACFTracker().fit(frame, (60, 40, 32, 24))
    monkeypatch.setattr(t, "_responses", lambda feats: np.zeros(feats.shape))
    before = t.model_
    box = t.update(frame)
    assert t.telemetry_[-1].held
    assert box == t.telemetry_[0].box and t.model_ is before


@pytest.mark.parametrize("bad", [dict(lambda1=0), dict(eta=2.0), dict(fc=0), dict(padding=0.5),
                                 dict(cell_size=3.5), dict(beta_t=-1), dict(context_patches=9)])
def test_invalid_config(bad):
    with pytest.raises((ConfigError, InvalidInputError)):
        TACFTracker(**bad).fit(textured_frame(), (60, 40, 32, 24))


def test_invalid_box_and_frame():
    with pytest.raises(InvalidInputError):
        TACFTracker().fit(textured_frame(), (60, 40, 0, 24))
    with pytest.raises(InvalidInputError):
        TACFTracker().fit(np.zeros((10, 10, 4), np.uint8), (2, 2, 4, 4))


def test_get_params_roundtrip():
    t = TACFTracker(lambda1=1e-4, use_da=False)
    p = t.get_params()
    assert p["lambda1"] == 1e-4 and p["use_da"] is False
    assert p["lambda2"] == 0.0625 and p["fc"] == 2 and p["beta_t"] == 0.1
    assert TACFTracker(**p).get_params() == p


def test_responses_use_interpolated_template():
    frame = textured_frame(5)
    t = TACFTracker(**BASELINE).fit(frame, (60, 40, 32, 24))
    z = np.random.default_rng(0).standard_normal(t.model_.template.shape)
    expected = ifft2(fft2(kernel_correlation(z, t.model_.template, t.kernel_sigma)) * t.model_.filters)
    np.testing.assert_allclose(t._responses(z), expected, atol=1e-10)
