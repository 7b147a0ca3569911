"""Gaussian blur and the guided filter used by the noise-suppression stages.

All borders use half-sample symmetric reflection.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass(frozen=True)
class GuidedFilterConfig:
    radius: int = 8
    epsilon: float = 0.01

    def __post_init__(self):
        if int(self.radius) != self.radius or self.radius < 1:
            raise ValueError(f"guided filter radius must be an integer >= 1, got {self.radius}")
        if not self.epsilon > 0:
            raise ValueError(f"guided filter epsilon must be positive, got {self.epsilon}")


def gaussian_kernel1d(sigma):
    """Sampled Gaussian truncated at +/- ceil(3 sigma), normalized to sum 1."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = max(1, math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def _per_plane(fn, img, *args):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return fn(np.ascontiguousarray(img), *args)
    if img.ndim == 3:
        return np.stack(
            [fn(np.ascontiguousarray(img[..., c]), *args) for c in range(img.shape[2])],
            axis=-1,
        )
    raise ValueError(f"expected a 2-D plane or (h, w, c) image, got shape {img.shape}")


def gaussian_blur(img, sigma):
    """Separable Gaussian blur of a plane, or of each channel of an image."""
    return _per_plane(kernels.sep_convolve, img, gaussian_kernel1d(sigma))


def box_mean(img, radius):
    """Mean over ``(2 radius + 1)``-square windows."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    return _per_plane(kernels.box_mean, img, int(radius))


def guided_filter(p, guide, cfg=GuidedFilterConfig()):
    """Single-channel guided filter of ``p`` steered by ``guide``.

    Per window the output is modelled as ``a * guide + b`` with
    ``a = cov(guide, p) / (var(guide) + eps)`` and ``b = mean(p) - a * mean(guide)``;
    the window coefficients are then averaged at every pixel.
    """
    p = np.ascontiguousarray(p, dtype=np.float64)
    guide = np.ascontiguousarray(guide, dtype=np.float64)
    if p.ndim != 2 or p.shape != guide.shape:
        raise ValueError(f"p and guide must be 2-D planes of equal shape, got {p.shape} and {guide.shape}")
    r = cfg.radius
    mean = kernels.box_mean

    mean_i = mean(guide, r)
    mean_p = mean_i if p is guide else mean(p, r)
    corr_ii = mean(guide * guide, r)
    corr_ip = corr_ii if p is guide else mean(guide * p, r)

    var_i = corr_ii - mean_i * mean_i
    cov_ip = corr_ip - mean_i * mean_p
    a = cov_ip / (var_i + cfg.epsilon)
    b = mean_p - a * mean_i
    return mean(a, r) * guide + mean(b, r)


def self_guided_filter(img, cfg=GuidedFilterConfig()):
    """Guided filter of each channel using that channel as its own guide."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return kernels.self_guided_filter(np.ascontiguousarray(img), cfg.radius, float(cfg.epsilon))
    if img.ndim != 3:
        raise ValueError(f"expected a 2-D plane or (h, w, c) image, got shape {img.shape}")
    out = np.empty(img.shape)
    for c in range(img.shape[2]):
        kernels.self_guided_filter(img[..., c], cfg.radius, float(cfg.epsilon), out[..., c])
    return out
