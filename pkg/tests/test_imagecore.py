import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dichotuna.imagecore import (
    denormalize,
    gamma_correct,
    hsv_to_rgb,
    minmax_normalize,
    normalize_u8,
    read_png,
    rgb_to_hsv,
    rgb_to_ycbcr,
    write_png,
    ycbcr_to_rgb,
)

unit = st.floats(0.0, 1.0, allow_nan=False)


def pixel(values):
    return np.array(values, dtype=np.float64).reshape(1, 1, 3)


def test_normalize_known_values():
    img = np.array([[[0, 255, 128]]], dtype=np.uint8)
    out = normalize_u8(img)
    assert out.dtype == np.float64
    assert out[0, 0, 0] == 0.0
    assert out[0, 0, 1] == 1.0
    assert out[0, 0, 2] == 128 / 255
    assert abs(out[0, 0, 2] - 0.50196) < 1e-5


def test_normalize_rejects_bad_input():
    with pytest.raises(TypeError):
        normalize_u8(np.zeros((2, 2, 3), dtype=np.float32))
    with pytest.raises(ValueError):
        normalize_u8(np.zeros((2, 2), dtype=np.uint8))


def test_denormalize_rounding_and_clamping():
    out = denormalize(pixel([1.0, 0.0, 0.5]))
    assert out.tolist() == [[[255, 0, 128]]]
    out = denormalize(pixel([-3.0, 7.0, 0.5 / 255]))
    # 0.5/255 * 255 = 0.5 rounds half up
    assert out.tolist() == [[[0, 255, 1]]]


def test_denormalize_nan_is_an_error():
    with pytest.raises(ValueError, match="NaN"):
        denormalize(pixel([0.1, np.nan, 0.2]))


def test_u8_round_trip_exhaustive():
    values = np.arange(256, dtype=np.uint8)
    img = np.stack([values, values[::-1], np.roll(values, 7)], axis=-1).reshape(16, 16, 3)
    assert np.array_equal(denormalize(normalize_u8(img)), img)


def test_hsv_known_values():
    h, s, v = rgb_to_hsv(pixel([1, 0, 0]))
    assert (h.item(), s.item(), v.item()) == (0.0, 1.0, 1.0)
    h, s, v = rgb_to_hsv(pixel([0.5, 0.5, 0.5]))
    assert (h.item(), s.item(), v.item()) == (0.0, 0.0, 0.5)
    h, s, v = rgb_to_hsv(pixel([0, 0, 1]))
    assert h.item() == pytest.approx(2 / 3)
    h, s, v = rgb_to_hsv(pixel([0, 0, 0]))
    assert (h.item(), s.item(), v.item()) == (0.0, 0.0, 0.0)


def test_hsv_hue_range_and_value(rng):
    img = rng.random((40, 25, 3))
    h, s, v = rgb_to_hsv(img)
    assert h.min() >= 0.0 and h.max() < 1.0
    assert np.array_equal(v, img.max(axis=2))
    assert np.allclose(s, (v - img.min(axis=2)) / v)


def test_hsv_round_trip_random(rng):
    img = rng.random((1000, 1, 3))
    back = hsv_to_rgb(*rgb_to_hsv(img))
    assert np.max(np.abs(back - img)) < 1e-12


@given(arrays(np.float64, (3,), elements=unit))
def test_hsv_round_trip_property(values):
    img = values.reshape(1, 1, 3)
    assert np.max(np.abs(hsv_to_rgb(*rgb_to_hsv(img)) - img)) < 1e-12


def test_ycbcr_known_values():
    y, cb, cr = rgb_to_ycbcr(pixel([0, 0, 0]))
    assert (y.item(), cb.item(), cr.item()) == (0.0, 0.5, 0.5)
    y, cb, cr = rgb_to_ycbcr(pixel([1, 1, 1]))
    assert y.item() == pytest.approx(1.0, abs=1e-15)
    assert cb.item() == pytest.approx(0.5, abs=1e-15)
    assert cr.item() == pytest.approx(0.5, abs=1e-15)


def test_ycbcr_round_trip(rng):
    img = rng.random((1000, 1, 3))
    assert np.max(np.abs(ycbcr_to_rgb(*rgb_to_ycbcr(img)) - img)) < 1e-9


def test_minmax_examples():
    out, flat = minmax_normalize([0.0, 0.5, 1.0])
    assert out.tolist() == [0.0, 0.5, 1.0] and not flat
    out, flat = minmax_normalize([2.0, 4.0])
    assert out.tolist() == [0.0, 1.0] and not flat
    out, flat = minmax_normalize([0.3, 0.3])
    assert out.tolist() == [0.0, 0.0] and flat


@given(arrays(np.float64, st.integers(2, 50), elements=st.floats(-1e6, 1e6)))
def test_minmax_spans_unit_interval_exactly(x):
    out, flat = minmax_normalize(x)
    if x.max() > x.min():
        assert not flat
        assert out.min() == 0.0 and out.max() == 1.0
    else:
        assert flat and not out.any()


def test_gamma_examples():
    x = np.array([0.25, 0.5, 0.0, 1.0])
    assert np.array_equal(gamma_correct(x, 1.0), x)
    assert gamma_correct(0.25, 0.5) == 0.5
    assert gamma_correct(0.5, 2.0) == 0.25
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            gamma_correct(x, bad)


@given(st.floats(1e-3, 1.0), st.floats(0.1, 10.0))
def test_gamma_inverse_property(x, g):
    assert abs(gamma_correct(gamma_correct(x, g), 1.0 / g) - x) < 1e-9


def test_png_round_trip(tmp_path, photo_u8):
    path = tmp_path / "img.png"
    write_png(path, photo_u8)
    assert np.array_equal(read_png(path), photo_u8)


def test_png_alpha_and_gray_are_converted(tmp_path):
    from PIL import Image

    rgba = np.zeros((4, 5, 4), dtype=np.uint8)
    rgba[..., 0] = 200
    rgba[..., 3] = 17
    Image.fromarray(rgba).save(tmp_path / "a.png")
    out = read_png(tmp_path / "a.png")
    assert out.shape == (4, 5, 3) and out[0, 0].tolist() == [200, 0, 0]

    Image.fromarray(np.full((3, 3), 90, dtype=np.uint8)).save(tmp_path / "g.png")
    assert read_png(tmp_path / "g.png").tolist() == np.full((3, 3, 3), 90).tolist()


def test_functions_do_not_mutate_inputs(rng):
    img = rng.random((8, 8, 3))
    keep = img.copy()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rgb_to_hsv(img)
        rgb_to_ycbcr(img)
        minmax_normalize(img)
        gamma_correct(img, 0.7)
        denormalize(img)
    assert np.array_equal(img, keep)
