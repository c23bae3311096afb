import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from tacf import features
from tacf.features import (CN_NAMES, N_CN, FeatureExtractor, build_cn_table, cn_index,
                           extract_cn, extract_hog, gaussian_label, gray_channel,
                           load_cn_table, stack_features, write_cn_table)
from tacf.imaging import hann_window
from tacf.validation import ConfigError, InvalidInputError

from oracles import hog_reference


def test_hog_matches_scalar_reference():
    rng = np.random.default_rng(0)
    img = rng.random((32, 32))
    out = extract_hog(img, 4)
    assert out.shape == (8, 8, 31)
    assert np.max(np.abs(out - hog_reference(img, 4))) <= 1e-5


def test_hog_color_matches_scalar_reference():
    rng = np.random.default_rng(1)
    img = rng.random((24, 16, 3))
    assert np.max(np.abs(extract_hog(img, 4) - hog_reference(img, 4))) <= 1e-5


def test_hog_constant_patch_is_zero():
    out = extract_hog(np.full((16, 16), 0.3), 4)
    assert np.all(out == 0)


def test_hog_vertical_edge_uses_horizontal_gradient_bins():
    img = np.zeros((16, 16))
    img[:, 8:] = 1.0
    out = extract_hog(img, 4)
    # gradient points along +x: signed bin 0 holds everything
    signed = out[..., :18].sum(axis=(0, 1))
    assert signed.argmax() == 0
    assert signed[0] > 10 * np.delete(signed, 0).sum()
    # flipping left-right reverses the gradient: bin 0 <-> bin 9 swap
    flipped = extract_hog(img[:, ::-1], 4)[:, ::-1]
    np.testing.assert_allclose(flipped[..., 9], out[..., 0], atol=1e-12)
    np.testing.assert_allclose(flipped[..., 18:27], out[..., 18:27], atol=1e-12)


def test_hog_rejects_bad_sizes():
    with pytest.raises(InvalidInputError):
        extract_hog(np.zeros((3, 3)), 4)
    with pytest.raises(InvalidInputError):
        extract_hog(np.zeros((10, 12)), 4)


@settings(max_examples=20, deadline=None)
@given(shift=st.floats(-0.5, 0.5), seed=st.integers(0, 1000))
def test_hog_invariant_to_additive_shift(shift, seed):
    img = np.random.default_rng(seed).random((16, 16, 3))
    np.testing.assert_allclose(extract_hog(img + shift, 4), extract_hog(img, 4), atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10000))
def test_hog_nonnegative_finite(seed):
    img = np.random.default_rng(seed).random((20, 12))
    out = extract_hog(img, 4)
    assert np.all(out >= 0) and np.all(np.isfinite(out))


def test_cn_table_shape_and_rows():
    table = load_cn_table()
    assert table.shape == (32768, N_CN)
    np.testing.assert_allclose(table.sum(axis=1), 1.0, atol=1e-6)
    assert np.all(table >= 0)


def test_cn_black_patch():
    out = extract_cn(np.zeros((8, 8, 3)), 4)
    assert np.all(out.argmax(axis=2) == CN_NAMES.index("black"))
    assert np.all(out[..., CN_NAMES.index("black")] > 0.9)


def test_cn_red_is_direct_table_lookup():
    table = load_cn_table()
    px = np.zeros((4, 4, 3))
    px[..., 0] = 1.0
    out = extract_cn(px, 4)[0, 0]
    row = 255 // 8  # (255, 0, 0): r bin 31, g and b bins 0
    np.testing.assert_array_equal(out, table[row])
    assert out.argmax() == CN_NAMES.index("red")


@settings(max_examples=20, deadline=None)
@given(arrays(np.uint8, (8, 8, 3)))
def test_cn_per_pixel_sums(rgb):
    probs = extract_cn(rgb / 255.0, 1)
    assert np.all(probs >= 0)
    np.testing.assert_allclose(probs.sum(axis=2), 1.0, atol=1e-6)


def test_cn_index_layout():
    assert cn_index([0, 0, 0]) == 0
    assert cn_index([255, 0, 0]) == 31
    assert cn_index([0, 255, 0]) == 31 * 32
    assert cn_index([0, 0, 255]) == 31 * 1024


def test_cn_gray_input_gives_intensity_channel():
    g = np.random.default_rng(0).random((8, 8))
    out = extract_cn(g, 4)
    assert out.shape == (2, 2, 1)
    np.testing.assert_allclose(out, gray_channel(g, 4))
    assert abs(out.mean()) < 1e-12


def test_missing_table_is_config_error(tmp_path, monkeypatch):
    with pytest.raises(ConfigError):
        load_cn_table(tmp_path / "nope.bin")
    monkeypatch.setenv(features.CN_TABLE_ENV, str(tmp_path / "nope.bin"))
    with pytest.raises(ConfigError):
        extract_cn(np.zeros((4, 4, 3)), 4)


def test_table_file_roundtrip(tmp_path):
    table = build_cn_table()
    path = tmp_path / "t.bin"
    write_cn_table(path, table)
    assert path.stat().st_size == 32768 * N_CN * 4
    np.testing.assert_allclose(load_cn_table(path), table, atol=1e-7)
    bad = tmp_path / "bad.bin"
    np.zeros(10, "<f4").tofile(bad)
    with pytest.raises(ConfigError):
        load_cn_table(bad)


def test_bundled_table_matches_generator():
    np.testing.assert_allclose(load_cn_table(), build_cn_table(), atol=1e-6)


def test_stack_features_examples():
    rng = np.random.default_rng(0)
    a, b, g = rng.random((6, 8, 31)), rng.random((6, 8, 10)), rng.random((6, 8, 1))
    win = hann_window(6, 8)
    single = stack_features([a])
    np.testing.assert_array_equal(single, a * win[..., None])
    out = stack_features([a, b, g])
    assert out.shape == (6, 8, 42)
    for c in range(42):
        src = np.concatenate([a, b, g], axis=2)[..., c]
        np.testing.assert_array_equal(out[..., c], src * win)


def test_stack_features_mismatch():
    with pytest.raises(InvalidInputError):
        stack_features([np.zeros((4, 4, 2)), np.zeros((4, 5, 1))])


def test_gaussian_label_examples():
    assert gaussian_label(1, 1, 0.3).tolist() == [[1.0]]
    y = gaussian_label(16, 16, 0.1)
    assert y[0, 0] == 1.0
    assert y[8, 8] == y.min()
    assert y[1, 0] == pytest.approx(np.exp(-1 / (2 * 1.6 ** 2)), abs=1e-12)
    assert y[1, 0] == pytest.approx(0.8226, abs=1e-4)


@given(n=st.integers(1, 30), sf=st.floats(0.01, 1.0))
def test_gaussian_label_transpose_symmetry(n, sf):
    y = gaussian_label(n, n, sf)
    np.testing.assert_array_equal(y, y.T)


def test_extractor_channel_counts():
    rng = np.random.default_rng(0)
    fx = FeatureExtractor(4)
    assert fx.fit().transform(rng.random((16, 24, 3))).shape == (4, 6, 42)
    assert fx.transform(rng.random((16, 24))).shape == (4, 6, 32)
    assert fx.get_params() == {"cell_size": 4, "cn_table": None}
