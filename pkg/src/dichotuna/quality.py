"""Image quality metrics and the GA fitness.

Full-reference PSNR and SSIM operate on float images in ``[0, 1]`` (peak 1.0);
8-bit inputs are read as ``value / 255``. LOE is the lightness-order error
between an input and its enhancement.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels

PSNR_CAP = 100.0
PSNR_WEIGHT = 1.0 / 100.0
SSIM_WEIGHT = 1.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_RANGE = 1.0

LOE_MAX_SIDE = 100
LOE_SCALE = 1000.0


def _as_float(x):
    x = np.asarray(x)
    if x.dtype == np.uint8:
        return x / 255.0
    return x.astype(np.float64, copy=False)


def _pair(a, b):
    a = _as_float(a)
    b = _as_float(b)
    if a.shape != b.shape:
        raise ValueError(f"images differ in shape: {a.shape} vs {b.shape}")
    return a, b


def _psnr_from_mse(mse):
    if mse == 0.0:
        return PSNR_CAP
    return min(10.0 * math.log10(1.0 / mse), PSNR_CAP)


def _both_u8(a, b):
    return getattr(a, "dtype", None) == np.uint8 and getattr(b, "dtype", None) == np.uint8


def psnr(a, b):
    """Peak signal-to-noise ratio in dB with peak 1.0, capped at ``PSNR_CAP``.

    Two ``uint8`` images are compared in exact integer arithmetic.
    """
    if _both_u8(a, b):
        if a.shape != b.shape:
            raise ValueError(f"images differ in shape: {a.shape} vs {b.shape}")
        sse = kernels.sum_sq_diff_u8(np.ascontiguousarray(a).ravel(), np.ascontiguousarray(b).ravel())
        return _psnr_from_mse(sse / (a.size * 255.0 * 255.0))
    a, b = _pair(a, b)
    return _psnr_from_mse(float(np.mean((a - b) ** 2)))


def ssim_window1d():
    x = np.arange(SSIM_WINDOW, dtype=np.float64) - SSIM_WINDOW // 2
    w = np.exp(-0.5 * (x / SSIM_SIGMA) ** 2)
    return w / w.sum()


def luminance(img):
    """Mean of the RGB channels; 2-D planes pass through."""
    if getattr(img, "dtype", None) == np.uint8 and img.ndim == 3 and img.shape[2] == 3:
        return kernels.luminance_u8(np.ascontiguousarray(img).reshape(-1, 3)).reshape(img.shape[:2])
    img = _as_float(img)
    if img.ndim == 3:
        return (img[..., 0] + img[..., 1] + img[..., 2]) / 3.0
    if img.ndim == 2:
        return np.ascontiguousarray(img)
    raise ValueError(f"expected image or plane, got shape {img.shape}")


_C1 = (SSIM_K1 * SSIM_RANGE) ** 2
_C2 = (SSIM_K2 * SSIM_RANGE) ** 2


class _SSIMStats:
    """Local mean and variance of a luminance plane under the SSIM window."""

    def __init__(self, plane):
        if min(plane.shape) < SSIM_WINDOW:
            raise ValueError(f"image {plane.shape} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window")
        self.plane = plane
        self.window = ssim_window1d()
        self.mu = kernels.correlate_valid(plane, self.window)
        self.sigma2 = kernels.correlate_valid(plane * plane, self.window) - self.mu * self.mu

    def compare(self, plane):
        """Mean SSIM of another luminance plane against this one."""
        if plane.shape != self.plane.shape:
            raise ValueError(f"planes differ in shape: {plane.shape} vs {self.plane.shape}")
        return float(kernels.ssim_mean(plane, self.plane, self.mu, self.sigma2, self.window, _C1, _C2))


def ssim(a, b):
    """Mean structural similarity over all valid 11x11 Gaussian windows of the luminance."""
    if np.shape(a) != np.shape(b):
        raise ValueError(f"images differ in shape: {np.shape(a)} vs {np.shape(b)}")
    return _SSIMStats(luminance(b)).compare(luminance(a))


def _lightness_grid(img):
    img = _as_float(img)
    light = img.max(axis=2) if img.ndim == 3 else img
    h, w = light.shape
    # nearest sampling keeps every output a real pixel, so order is untouched
    rows = np.round(np.linspace(0, h - 1, min(h, LOE_MAX_SIDE))).astype(np.intp)
    cols = np.round(np.linspace(0, w - 1, min(w, LOE_MAX_SIDE))).astype(np.intp)
    return np.ascontiguousarray(light[np.ix_(rows, cols)]).ravel()


def loe(original, enhanced):
    """Lightness order error, scaled so 1000 means every pair disagrees.

    Lightness is the per-pixel channel maximum. For every ordered pixel pair
    the relations ``L(x) >= L(y)`` in the two images are compared; the result is
    the disagreeing fraction times 1000.
    """
    original, enhanced = _pair(original, enhanced)
    lo = _lightness_grid(original)
    le = _lightness_grid(enhanced)
    n = lo.size
    return LOE_SCALE * kernels.order_disagreements(lo, le) / (n * n)


def fitness(psnr_db, ssim_value):
    """Weighted sum ``psnr / 100 + ssim`` maximized by the GA."""
    return PSNR_WEIGHT * psnr_db + SSIM_WEIGHT * ssim_value


@dataclass(frozen=True)
class MetricReport:
    psnr: float
    ssim: float
    loe: float | None = None

    @property
    def fitness(self):
        return fitness(self.psnr, self.ssim)

    def as_dict(self):
        return {"psnr": self.psnr, "ssim": self.ssim, "loe": self.loe, "fitness": self.fitness}


def evaluate(reference, enhanced, original=None):
    """All metrics for one output; LOE needs the unenhanced ``original``."""
    return MetricReport(
        psnr=psnr(enhanced, reference),
        ssim=ssim(enhanced, reference),
        loe=None if original is None else loe(original, enhanced),
    )


class ReferenceScorer:
    """Scores candidates against a fixed reference, caching its SSIM moments.

    Hand it the reference in the same dtype (``uint8`` or float) as the
    candidates; matching ``uint8`` pairs take the exact integer PSNR path.
    """

    def __init__(self, reference):
        self.reference = np.asarray(reference)
        if self.reference.dtype != np.uint8:
            self.reference = self.reference.astype(np.float64)
        self._stats = _SSIMStats(luminance(self.reference))

    def psnr(self, img):
        return psnr(np.asarray(img), self.reference)

    def ssim(self, img):
        img = np.asarray(img)
        if img.shape != self.reference.shape:
            raise ValueError(f"images differ in shape: {img.shape} vs {self.reference.shape}")
        return self._stats.compare(luminance(img))

    def fitness(self, img):
        return fitness(self.psnr(img), self.ssim(img))
