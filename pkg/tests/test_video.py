import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from colorcacti.errors import DimensionError
from colorcacti.video import (
    ColorVideo, demosaic, demosaic_video, merge_bayer, psnr, rgb_to_bayer, split_bayer,
)


def test_constant_gray_mosaics_to_constant():
    cv = ColorVideo.gray(np.full((4, 6, 2), 0.3))
    assert np.all(rgb_to_bayer(cv) == 0.3)


def test_rggb_cell_rule():
    cv = ColorVideo(np.ones((2, 2, 1)), np.full((2, 2, 1), 0.5), np.zeros((2, 2, 1)))
    np.testing.assert_array_equal(rgb_to_bayer(cv)[:, :, 0], [[1.0, 0.5], [0.5, 0.0]])


@pytest.mark.parametrize("pattern,expected", [
    ("BGGR", [[0.0, 0.5], [0.5, 1.0]]),
    ("GRBG", [[0.5, 1.0], [0.0, 0.5]]),
    ("GBRG", [[0.5, 0.0], [1.0, 0.5]]),
])
def test_other_bayer_phases(pattern, expected):
    cv = ColorVideo(np.ones((2, 2, 1)), np.full((2, 2, 1), 0.5), np.zeros((2, 2, 1)))
    np.testing.assert_array_equal(rgb_to_bayer(cv, pattern)[:, :, 0], expected)


def test_odd_dims_rejected():
    cv = ColorVideo.gray(np.zeros((3, 4, 1)))
    with pytest.raises(DimensionError):
        rgb_to_bayer(cv)
    with pytest.raises(DimensionError):
        split_bayer(np.zeros((3, 4)))
    with pytest.raises(DimensionError):
        demosaic(np.zeros((4, 5)))


def test_mismatched_channels_rejected():
    with pytest.raises(DimensionError):
        ColorVideo(np.zeros((2, 2, 1)), np.zeros((2, 2, 2)), np.zeros((2, 2, 1)))


def test_split_strides():
    m = np.arange(16.0).reshape(4, 4)
    r, g1, g2, b = split_bayer(m)
    np.testing.assert_array_equal(r, m[0::2, 0::2])
    np.testing.assert_array_equal(g1, m[0::2, 1::2])
    np.testing.assert_array_equal(g2, m[1::2, 0::2])
    np.testing.assert_array_equal(b, m[1::2, 1::2])


def test_split_constant():
    for c in split_bayer(np.full((6, 4), 0.7)):
        assert c.shape == (3, 2) and np.all(c == 0.7)


@settings(max_examples=50, deadline=None)
@given(hnp.arrays(np.float64, st.tuples(st.integers(1, 5).map(lambda v: 2 * v),
                                        st.integers(1, 5).map(lambda v: 2 * v),
                                        st.integers(1, 3)),
                  elements=st.floats(-1e6, 1e6)),
       st.sampled_from(["RGGB", "BGGR", "GRBG", "GBRG"]))
def test_split_merge_round_trip(m, pattern):
    assert np.array_equal(merge_bayer(split_bayer(m, pattern), pattern), m)
    parts = split_bayer(m, pattern)
    again = split_bayer(merge_bayer(parts, pattern), pattern)
    assert all(np.array_equal(a, b) for a, b in zip(parts, again))


def test_demosaic_constant_field():
    out = demosaic(np.full((8, 8), 0.25))
    np.testing.assert_allclose(out, 0.25, atol=1e-15)


@pytest.mark.parametrize("pattern", ["RGGB", "BGGR", "GRBG", "GBRG"])
def test_demosaic_reproduces_ramp_interior(pattern):
    x = np.arange(10.0)[:, None]
    y = np.arange(12.0)[None, :]
    field = np.broadcast_to(0.1 + 0.05 * y + 0.0 * x, (10, 12))
    m = rgb_to_bayer(ColorVideo.gray(field[..., None]), pattern)[:, :, 0]
    out = demosaic(m, pattern)
    for c in range(3):
        np.testing.assert_allclose(out[1:-1, 1:-1, c], field[1:-1, 1:-1], atol=1e-12)


def test_gray_affine_video_round_trip_interior():
    x = np.arange(8.0)[:, None, None]
    y = np.arange(8.0)[None, :, None]
    t = np.arange(3.0)[None, None, :]
    field = 0.2 + 0.03 * x - 0.02 * y + 0.05 * t
    out = demosaic_video(rgb_to_bayer(ColorVideo.gray(field))).stack()
    np.testing.assert_allclose(out[1:-1, 1:-1], np.repeat(field[1:-1, 1:-1, :, None], 3, axis=3), atol=1e-12)


def test_demosaic_minimal_image():
    out = demosaic(np.array([[1.0, 0.5], [0.5, 0.0]]))
    assert out.shape == (2, 2, 3) and np.all(np.isfinite(out))
    np.testing.assert_allclose(out[..., 0], 1.0)
    np.testing.assert_allclose(out[..., 2], 0.0)


def test_psnr_identical_is_inf():
    a = np.random.default_rng(0).random((4, 4, 3))
    rep = psnr(a, a)
    assert np.all(np.isinf(rep.per_frame)) and np.isinf(rep.mean)
    assert rep.rows()[-1] == ("mean", "inf")


def test_psnr_known_mse():
    a = np.zeros((4, 4, 2))
    b = np.ones((4, 4, 2))
    # MSE = 1 at peak 255 -> 20 log10(255)
    np.testing.assert_allclose(psnr(a, b, peak=255).per_frame, 48.1308, atol=1e-3)
    np.testing.assert_allclose(psnr(a, b, peak=1.0).per_frame, 0.0, atol=1e-12)


def test_psnr_dimension_mismatch():
    with pytest.raises(DimensionError):
        psnr(np.zeros((2, 2, 1)), np.zeros((2, 3, 1)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_psnr_symmetric_and_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.random((2, 6, 5, 3))
    assert np.allclose(psnr(a, b).per_frame, psnr(b, a).per_frame)
    pi = rng.permutation(6)
    pj = rng.permutation(5)
    assert np.allclose(psnr(a[pi][:, pj], b[pi][:, pj]).per_frame, psnr(a, b).per_frame)
    assert np.all(psnr(a, b).per_frame >= 0)


def test_psnr_color_pooling():
    a = np.zeros((2, 2, 1, 3))
    b = a.copy()
    b[..., 0] = 1.0
    # one channel wrong everywhere: MSE = 1/3
    np.testing.assert_allclose(psnr(a, b).per_frame, 10 * np.log10(3.0))
