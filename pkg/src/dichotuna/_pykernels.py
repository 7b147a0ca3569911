"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``."""
import numpy as np

_LOE_CHUNK = 512


def _pad(x, before, after=None):
    if after is None:
        after = before
    # numpy repeats the symmetric reflection when the pad exceeds the axis length
    return np.pad(x, ((before, after), (before, after)), mode="symmetric")


def box_mean(x, r):
    """Mean over (2r+1)^2 windows using an integral image."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    h, w = x.shape
    k = 2 * r + 1
    sat = np.zeros((h + 2 * r + 1, w + 2 * r + 1))
    np.cumsum(np.cumsum(_pad(x, r), axis=0), axis=1, out=sat[1:, 1:])
    sums = sat[k:, k:] - sat[:-k, k:] - sat[k:, :-k] + sat[:-k, :-k]
    return sums / (k * k)


def sep_convolve(x, kernel):
    x = np.ascontiguousarray(x, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    h, w = x.shape
    rad = kernel.size // 2
    padded = _pad(x, rad)
    tmp = np.zeros((h + 2 * rad, w))
    for k, wk in enumerate(kernel):
        tmp += wk * padded[:, k:k + w]
    out = np.zeros((h, w))
    for k, wk in enumerate(kernel):
        out += wk * tmp[k:k + h, :]
    return out


def correlate_valid(x, kernel):
    x = np.ascontiguousarray(x, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    h, w = x.shape
    n = kernel.size
    oh, ow = h - n + 1, w - n + 1
    if oh < 1 or ow < 1:
        raise ValueError("input smaller than kernel")
    tmp = np.zeros((h, ow))
    for k, wk in enumerate(kernel):
        tmp += wk * x[:, k:k + ow]
    out = np.zeros((oh, ow))
    for k, wk in enumerate(kernel):
        out += wk * tmp[k:k + oh, :]
    return out


def order_disagreements(a, b):
    a = np.ascontiguousarray(a, dtype=np.float64).ravel()
    b = np.ascontiguousarray(b, dtype=np.float64).ravel()
    if a.size != b.size:
        raise ValueError("length mismatch")
    if np.isnan(a).any() or np.isnan(b).any():
        raise ValueError("NaN in lightness values")
    count = 0
    for start in range(0, a.size, _LOE_CHUNK):
        sa = a[start:start + _LOE_CHUNK, None] >= a[None, :]
        sb = b[start:start + _LOE_CHUNK, None] >= b[None, :]
        count += int(np.count_nonzero(sa != sb))
    return count


def rgb_to_hsv(rgb):
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[:, 0], rgb[:, 1], rgb[:, 2]
    v = np.maximum(np.maximum(r, g), b)
    delta = v - np.minimum(np.minimum(r, g), b)
    chroma = delta > 0
    safe = np.where(chroma, delta, 1.0)
    s = np.where(v > 0, delta / np.where(v > 0, v, 1.0), 0.0)
    h6 = np.where(
        r == v,
        np.mod((g - b) / safe, 6.0),
        np.where(g == v, (b - r) / safe + 2.0, (r - g) / safe + 4.0),
    )
    h = np.where(chroma, h6 / 6.0, 0.0)
    h[h >= 1.0] -= 1.0
    return h, s, v


def hsv_to_rgb(h, s, v):
    h6 = h * 6.0
    sector = np.floor(h6)
    f = h6 - sector
    sector = sector.astype(np.int64) % 6
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    choices = np.stack([
        np.stack([v, t, p], axis=-1),
        np.stack([q, v, p], axis=-1),
        np.stack([p, v, t], axis=-1),
        np.stack([p, q, v], axis=-1),
        np.stack([t, p, v], axis=-1),
        np.stack([v, p, q], axis=-1),
    ])
    return np.take_along_axis(choices, sector[None, :, None], axis=0)[0]


def self_guided_filter(p, r, eps, out=None):
    p = np.ascontiguousarray(p, dtype=np.float64)
    mean_p = box_mean(p, r)
    var = box_mean(p * p, r) - mean_p * mean_p
    a = var / (var + eps)
    b = mean_p - a * mean_p
    res = box_mean(a, r) * p + box_mean(b, r)
    if out is None:
        return res
    out[...] = res
    return out


def ssim_mean(x, y, mu_y, var_y, kernel, c1, c2):
    mx = correlate_valid(x, kernel)
    vx = correlate_valid(x * x, kernel) - mx * mx
    sxy = correlate_valid(x * y, kernel) - mx * mu_y
    num = (2.0 * mx * mu_y + c1) * (2.0 * sxy + c2)
    den = (mx * mx + mu_y * mu_y + c1) * (vx + var_y + c2)
    return float(np.mean(num / den))


def _minmax(x):
    lo, hi = x.min(), x.max()
    if not hi > lo:
        return np.zeros_like(x), True
    return (x - lo) / (hi - lo), False


def tuna_restore(rgb, gamma, a, b):
    h, s, v = rgb_to_hsv(rgb)
    d, flat_d = _minmax(np.abs(np.power(v, gamma) - v))
    restored, flat_r = _minmax(a * v + b * (d * (1.0 - v)))
    return hsv_to_rgb(h, s, restored), flat_d, flat_r


def tuna_blend(img, rgb, rgb1, c, d, e, gamma1):
    x = c * ((1.0 - rgb) * rgb1) + e * img + d * rgb
    x, flat = _minmax(x)
    x = np.power(x, gamma1)
    if np.isnan(x).any():
        raise ValueError("NaN sample in blended image")
    np.clip(x, 0.0, 1.0, out=x)
    x *= 255.0
    x += 0.5
    return np.floor(x, out=x).astype(np.uint8), flat


def sum_sq_diff_u8(a, b):
    a = np.asarray(a, dtype=np.uint8).ravel()
    b = np.asarray(b, dtype=np.uint8).ravel()
    if a.size != b.size:
        raise ValueError("length mismatch")
    d = a.astype(np.int64) - b
    return int(np.dot(d, d))


def luminance_u8(rgb):
    x = np.asarray(rgb, dtype=np.uint8) / 255.0
    return (x[:, 0] + x[:, 1] + x[:, 2]) / 3.0
