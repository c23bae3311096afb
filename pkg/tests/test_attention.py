import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tacf.attention import (AttentionState, apply_dim_attention, origin_hann,
                            dim_weights, dynamic_map, fuse_and_locate, gate, locate_peak,
                            motion_factor, static_spatial_map, wrap_offsets)
from tacf.validation import InvalidInputError, NoPeakError


def test_dim_weight_examples():
    stack = np.zeros((4, 4, 3))
    stack[..., 1] = 0.7
    rng = np.random.default_rng(0)
    stack[..., 2] = rng.random((4, 4))
    z = dim_weights(stack)
    assert z[0] == 0
    assert z[1] == pytest.approx(1.4)
    ch = stack[..., 2]
    assert z[2] == pytest.approx(sum(ch.ravel()) / 16 + max(ch.ravel()), rel=1e-12)


def test_gate_examples():
    np.testing.assert_allclose(gate([0.1, 0.5], 0.1), [0.1, 0.3])
    np.testing.assert_array_equal(gate([2.0, 2.0, 2.0], 0.1), [0.1, 0.1, 0.1])
    z = np.array([0.2, 0.4, 0.6])
    assert gate(z, 0.1)[1] == 0.1  # z_d equal to the mean
    with pytest.raises(InvalidInputError):
        gate(z, -0.1)


@settings(max_examples=200)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=50), st.floats(0, 1))
def test_gate_monotone(z, beta):
    z = np.array(z)
    s = gate(z, beta)
    order = np.argsort(z, kind="stable")
    assert np.all(np.diff(s[order]) >= 0)
    assert np.all(s >= beta)


def test_apply_dim_attention_examples():
    rng = np.random.default_rng(1)
    stack = rng.standard_normal((5, 6, 4))
    np.testing.assert_array_equal(apply_dim_attention(stack, np.ones(4)), stack)
    assert not np.any(apply_dim_attention(stack, gate(np.ones(4), 0.0)))
    s = np.array([2.0, 0.5, 1.5, 3.0])
    out = apply_dim_attention(stack, s)
    for d in range(4):
        np.testing.assert_array_equal(out[..., d], stack[..., d] * s[d])
    with pytest.raises(InvalidInputError):
        apply_dim_attention(stack, np.ones(3))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10000), s=st.floats(0.01, 10))
def test_uniform_gate_keeps_argmax(seed, s):
    stack = np.random.default_rng(seed).standard_normal((7, 9, 5))
    base = stack.sum(axis=2).argmax()
    assert apply_dim_attention(stack, np.full(5, s)).sum(axis=2).argmax() == base


def test_static_map_examples():
    win = origin_hann(8, 8)
    np.testing.assert_array_equal(static_spatial_map(np.full((8, 8, 2), 3.0), win), 1.0)
    stack = np.zeros((8, 8, 1))
    stack[0, 0, 0] = 1.0
    S = static_spatial_map(stack, win)
    assert S[0, 0] == pytest.approx(np.exp(1 - 1 / 64))
    assert np.all(np.delete(S.ravel(), 0) == 1.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10000))
def test_static_map_bounds(seed):
    stack = np.random.default_rng(seed).standard_normal((9, 7, 3))
    S = static_spatial_map(stack, origin_hann(9, 7))
    assert np.all(S >= 1.0) and np.all(S <= np.e)


@given(h=st.integers(1, 40), w=st.integers(1, 40))
def test_origin_hann_peaks_at_zero_displacement(h, w):
    win = origin_hann(h, w)
    assert win[0, 0] == 1.0 and win.argmax() == 0
    # symmetric under negating the displacement
    neg = np.roll(win[::-1, ::-1], (1, 1), axis=(0, 1))
    np.testing.assert_allclose(win, neg, atol=1e-15)


def test_motion_factor_examples():
    assert motion_factor((0, 0), (10, 20), 0.3) == 0
    assert motion_factor((10, 20), (10, 20), 0.3) == pytest.approx(0.3)
    assert motion_factor((3, 4), (3, 4), 0.3) == pytest.approx(0.3)
    with pytest.raises(InvalidInputError):
        motion_factor((1, 1), (0, 4))


def test_dynamic_map_examples():
    rng = np.random.default_rng(2)
    S = 1 + rng.random((6, 8))
    np.testing.assert_array_equal(dynamic_map(S, 0.0, (3, 1)), S)
    np.testing.assert_allclose(dynamic_map(S, 0.4, (0, 0)), 1.4 * S)
    out = dynamic_map(S, 0.5, (2, 1))
    ref = np.empty_like(S)
    for r in range(6):
        for c in range(8):
            ref[r, c] = S[r, c] + 0.5 * S[(r - 1) % 6, (c - 2) % 8]
    np.testing.assert_allclose(out, ref)
    assert np.all(out >= 1)
    with pytest.raises(InvalidInputError):
        dynamic_map(S, -0.1, (0, 0))


def test_wrap_offsets():
    rows, cols = wrap_offsets((5, 8))
    assert rows.tolist() == [0, 1, 2, -2, -1]
    assert cols.tolist() == [0, 1, 2, 3, 4, -3, -2, -1]


def test_fuse_delta_displacement():
    stack = np.zeros((16, 16, 1))
    stack[3, 2, 0] = 1.0  # row 3 (dy), column 2 (dx)
    dx, dy, peak, fused = fuse_and_locate(stack, np.ones((16, 16)), cell_size=4)
    assert (dx, dy, peak) == (8.0, 12.0, 1.0)
    stack = np.zeros((16, 16, 1))
    stack[15, 13, 0] = 1.0
    dx, dy, _, _ = fuse_and_locate(stack, None, cell_size=1)
    assert (dx, dy) == (-3.0, -1.0)


def test_tie_break_prefers_nearest():
    m = np.zeros((8, 8))
    m[0, 1] = m[0, 5] = 1.0  # circular distances 1 and 3
    assert locate_peak(m, subcell=False)[:2] == (1.0, 0.0)
    m = np.zeros((8, 8))
    m[0, 2] = m[2, 0] = 1.0  # equal distance: row-major order wins
    assert locate_peak(m, subcell=False)[:2] == (2.0, 0.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10000))
def test_argmax_matches_exhaustive_scan(seed):
    rng = np.random.default_rng(seed)
    stack = rng.standard_normal((6, 10, 3))
    S = 1 + rng.random((6, 10))
    _, _, peak, fused = fuse_and_locate(stack, S, subcell=False)
    best, where = -np.inf, None
    for r in range(6):
        for c in range(10):
            v = S[r, c] * sum(stack[r, c, d] for d in range(3))
            if v > best:
                best, where = v, (r, c)
    assert peak == pytest.approx(best, rel=1e-12)
    assert fused[where] == peak


def test_subcell_refinement_recovers_quadratic_peak():
    r, c = np.mgrid[0:12, 0:12]
    r = np.where(r > 6, r - 12, r)
    c = np.where(c > 6, c - 12, c)
    m = 5 - (c - 1.3) ** 2 - 2 * (r + 0.2) ** 2
    dx, dy, _ = locate_peak(m)
    assert dx == pytest.approx(1.3) and dy == pytest.approx(-0.2)


def test_constant_attention_reduces_to_channel_sum():
    stack = np.random.default_rng(3).standard_normal((8, 8, 4))
    a = fuse_and_locate(apply_dim_attention(stack, np.full(4, 0.3)), np.full((8, 8), 2.0))
    b = fuse_and_locate(stack, None)
    assert a[:2] == b[:2]


def test_all_zero_map_has_no_peak():
    with pytest.raises(NoPeakError):
        fuse_and_locate(np.zeros((4, 4, 2)))


def test_attention_state_validation():
    with pytest.raises(InvalidInputError):
        AttentionState(gamma=-1)
