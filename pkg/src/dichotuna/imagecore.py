"""Image buffers, 8-bit <-> float conversion, color spaces and gamma correction.

Images are plain numpy arrays:

* 8-bit images are ``uint8`` arrays of shape ``(height, width, 3)``.
* float images are ``float64`` arrays of shape ``(height, width, 3)`` or
  ``(height, width)`` for a single plane, nominally in ``[0, 1]``.
"""
from pathlib import Path

import numpy as np
from PIL import Image

from . import kernels

# BT.601 full-range luma weights
KR, KG, KB = 0.299, 0.587, 0.114
_CB_SCALE = 2.0 * (1.0 - KB)  # 1.772
_CR_SCALE = 2.0 * (1.0 - KR)  # 1.402


class DegenerateInputWarning(RuntimeWarning):
    """A min-max stage saw a flat plane and produced zeros."""


def check_u8(img):
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise TypeError(f"expected uint8 image, got {img.dtype}")
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (height, width, 3) image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    return img


def _check_rgb(img):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (height, width, 3) image, got shape {img.shape}")
    return img


def normalize_u8(img):
    """Scale an 8-bit RGB image to float64 in [0, 1] by dividing by 255."""
    out = check_u8(img).astype(np.float64)
    out /= 255.0
    return out


def denormalize(img):
    """Clamp to [0, 1], scale by 255 and round half up to ``uint8``.

    NaN samples raise ``ValueError``: they only appear when an upstream stage
    is broken, and silently mapping them to 0 would hide that.
    """
    img = _check_rgb(img)
    if np.isnan(img).any():
        raise ValueError("NaN sample in image passed to denormalize")
    scaled = np.clip(img, 0.0, 1.0)
    scaled *= 255.0
    scaled += 0.5
    return np.floor(scaled, out=scaled).astype(np.uint8)


def rgb_to_hsv(img):
    """Split an RGB float image into hue, saturation and value planes.

    Hue is expressed as a fraction of a full turn in ``[0, 1)``.
    """
    img = _check_rgb(img)
    h, s, v = kernels.rgb_to_hsv(np.ascontiguousarray(img.reshape(-1, 3)))
    shape = img.shape[:2]
    return h.reshape(shape), s.reshape(shape), v.reshape(shape)


def hsv_to_rgb(h, s, v):
    """Inverse of :func:`rgb_to_hsv`."""
    h = np.asarray(h, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if not (h.shape == s.shape == v.shape):
        raise ValueError("h, s and v planes must share a shape")
    flat = [np.ascontiguousarray(c.ravel()) for c in (h, s, v)]
    return kernels.hsv_to_rgb(*flat).reshape(h.shape + (3,))


def rgb_to_ycbcr(img):
    """BT.601 full-range YCbCr with chroma centred on 0.5."""
    img = _check_rgb(img)
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    y = KR * r + KG * g + KB * b
    cb = 0.5 + (b - y) / _CB_SCALE
    cr = 0.5 + (r - y) / _CR_SCALE
    return y, cb, cr


def ycbcr_to_rgb(y, cb, cr):
    y = np.asarray(y, dtype=np.float64)
    b = y + _CB_SCALE * (np.asarray(cb, dtype=np.float64) - 0.5)
    r = y + _CR_SCALE * (np.asarray(cr, dtype=np.float64) - 0.5)
    g = (y - KR * r - KB * b) / KG
    return np.stack([r, g, b], axis=-1)


def minmax_normalize(x):
    """Rescale ``x`` linearly so its minimum maps to 0 and maximum to 1.

    Returns ``(normalized, degenerate)``. A constant input has no scale to
    recover; it yields zeros and ``degenerate=True`` instead of raising.
    """
    x = np.asarray(x, dtype=np.float64)
    lo = x.min()
    hi = x.max()
    if not hi > lo:
        return np.zeros_like(x), True
    return (x - lo) / (hi - lo), False


def gamma_correct(img, gamma):
    """Power-law remap ``x ** gamma``."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return np.power(np.asarray(img, dtype=np.float64), gamma)


def read_png(path):
    """Read a PNG as an 8-bit RGB array; alpha is dropped, gray is expanded."""
    path = Path(path)
    with Image.open(path) as im:
        im.load()
        return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def write_png(path, img):
    Image.fromarray(check_u8(img)).save(Path(path), format="PNG")
