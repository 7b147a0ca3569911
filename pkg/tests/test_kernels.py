"""The compiled kernels and their numpy fallbacks must agree."""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dichotuna import kernels

P = kernels.python_backend
C = kernels.compiled_backend

needs_compiled = pytest.mark.skipif(C is None, reason="compiled extension not built")


def naive_box_mean(x, r):
    h, w = x.shape
    padded = np.pad(x, r, mode="symmetric")
    out = np.empty_like(x)
    for i in range(h):
        for j in range(w):
            out[i, j] = padded[i:i + 2 * r + 1, j:j + 2 * r + 1].mean()
    return out


@pytest.mark.parametrize("backend", [P, C], ids=["python", "compiled"])
@pytest.mark.parametrize("r", [0, 1, 3, 8])
def test_box_mean_matches_naive_window_sums(backend, r, rng):
    if backend is None:
        pytest.skip("compiled extension not built")
    x = rng.random((32, 32))
    assert np.max(np.abs(backend.box_mean(x, r) - naive_box_mean(x, r))) < 1e-10


@pytest.mark.parametrize("backend", [P, C], ids=["python", "compiled"])
def test_box_mean_window_wider_than_image(backend, rng):
    if backend is None:
        pytest.skip("compiled extension not built")
    x = rng.random((3, 5))
    assert np.max(np.abs(backend.box_mean(x, 8) - naive_box_mean(x, 8))) < 1e-12


def test_reflect_padding_matches_numpy_symmetric():
    if C is None:
        pytest.skip("compiled extension not built")
    table = C._reflect_table(4, 9, 9)
    expected = np.pad(np.arange(4), 9, mode="symmetric")
    assert table.tolist() == expected.tolist()


@needs_compiled
def test_sep_convolve_backends_agree(rng):
    x = rng.random((23, 31))
    k = np.array([0.1, 0.2, 0.4, 0.2, 0.1])
    assert np.max(np.abs(C.sep_convolve(x, k) - P.sep_convolve(x, k))) < 1e-13


@needs_compiled
def test_correlate_valid_backends_agree(rng):
    x = rng.random((20, 17))
    k = np.array([0.25, 0.5, 0.25])
    assert np.max(np.abs(C.correlate_valid(x, k) - P.correlate_valid(x, k))) < 1e-13
    with pytest.raises(ValueError):
        C.correlate_valid(x[:2], k)


@needs_compiled
def test_self_guided_filter_backends_agree(rng):
    x = rng.random((40, 33))
    assert np.max(np.abs(C.self_guided_filter(x, 8, 0.01) - P.self_guided_filter(x, 8, 0.01))) < 1e-12


@needs_compiled
def test_self_guided_filter_strided_views(rng):
    img = rng.random((19, 21, 3))
    out = np.zeros_like(img)
    for c in range(3):
        C.self_guided_filter(img[..., c], 4, 0.05, out[..., c])
    ref = np.stack([P.self_guided_filter(img[..., c], 4, 0.05) for c in range(3)], axis=-1)
    assert np.max(np.abs(out - ref)) < 1e-12


@needs_compiled
def test_hsv_backends_agree(rng):
    rgb = rng.random((5000, 3))
    rgb[:100] = rgb[:100, :1]  # grays
    rgb[100:200, 1] = rgb[100:200, 0]  # ties between channels
    hc, sc, vc = C.rgb_to_hsv(rgb)
    hp, sp, vp = P.rgb_to_hsv(rgb)
    for a, b in ((hc, hp), (sc, sp), (vc, vp)):
        assert np.max(np.abs(a - b)) < 1e-15
    assert np.max(np.abs(C.hsv_to_rgb(hc, sc, vc) - P.hsv_to_rgb(hp, sp, vp))) < 1e-15


@needs_compiled
def test_ssim_mean_backends_agree(rng):
    x, y = rng.random((30, 26)), rng.random((30, 26))
    k = np.array([0.2, 0.6, 0.2])
    mu = P.correlate_valid(y, k)
    var = P.correlate_valid(y * y, k) - mu * mu
    a = C.ssim_mean(x, y, mu, var, k, 1e-4, 9e-4)
    b = P.ssim_mean(x, y, mu, var, k, 1e-4, 9e-4)
    assert abs(a - b) < 1e-13


@needs_compiled
def test_tuna_kernels_backends_agree(rng):
    img = rng.random((3000, 3))
    out_c = C.tuna_restore(img, 0.4, 1.2, 0.7)
    out_p = P.tuna_restore(img, 0.4, 1.2, 0.7)
    assert np.max(np.abs(out_c[0] - out_p[0])) < 1e-14
    assert out_c[1:] == out_p[1:]

    rgb, rgb1 = rng.random((3000, 3)), rng.random((3000, 3))
    q_c, flat_c = C.tuna_blend(img, rgb, rgb1, 0.3, 0.9, 1.1, 0.6)
    q_p, flat_p = P.tuna_blend(img, rgb, rgb1, 0.3, 0.9, 1.1, 0.6)
    assert np.array_equal(q_c, q_p) and flat_c == flat_p


@needs_compiled
@pytest.mark.parametrize("backend", ["compiled", "python"])
def test_tuna_kernels_flag_flat_stages(backend):
    k = C if backend == "compiled" else P
    gray = np.full((10, 3), 0.4)
    rgb, flat_d, flat_r = k.tuna_restore(gray, 0.5, 1.0, 1.0)
    assert flat_d and flat_r and not rgb.any()
    q, flat = k.tuna_blend(gray, gray, gray, 1.0, 1.0, 1.0, 2.0)
    assert flat and not q.any()


@needs_compiled
def test_u8_helpers_backends_agree(rng):
    a = rng.integers(0, 256, (500, 3), dtype=np.uint8)
    b = rng.integers(0, 256, (500, 3), dtype=np.uint8)
    assert C.sum_sq_diff_u8(a.ravel(), b.ravel()) == P.sum_sq_diff_u8(a, b)
    assert np.array_equal(C.luminance_u8(a), P.luminance_u8(a))


@needs_compiled
@given(
    arrays(np.float64, st.integers(0, 60), elements=st.sampled_from([0.0, 0.25, 0.5, 1.0])),
    st.randoms(use_true_random=False),
)
def test_order_disagreements_backends_agree(a, rnd):
    b = a.copy()
    rnd.shuffle(b)
    assert C.order_disagreements(a, b) == P.order_disagreements(a, b)


@needs_compiled
def test_order_disagreements_large_random(rng):
    a, b = rng.random(3000), rng.random(3000)
    b[::7] = a[::7]
    assert C.order_disagreements(a, b) == P.order_disagreements(a, b)


@pytest.mark.parametrize("backend", [P, C], ids=["python", "compiled"])
def test_order_disagreements_rejects_nan(backend):
    if backend is None:
        pytest.skip("compiled extension not built")
    with pytest.raises(ValueError):
        backend.order_disagreements(np.array([0.0, np.nan]), np.array([0.0, 1.0]))


def test_backend_switch_is_reported():
    assert kernels.BACKEND in ("cython", "python")
    if C is None:
        assert kernels.BACKEND == "python"
