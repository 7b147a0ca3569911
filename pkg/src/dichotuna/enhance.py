"""Dichotomy enhancement pipelines.

Three variants are provided:

* :func:`dichotomy_enhance` replaces the HSV value plane with the normalized
  dichotomy map ``|v ** gamma - v|``.
* :func:`dichotomy_filter_enhance` follows it with a Gaussian blur.
* :func:`tuna_enhance` (and its cheaper YCbCr twin) is the seven-parameter
  pipeline: dichotomy on V, complement-weighted color restoration, guided
  filter denoising, a three-term blend and a final gamma.

Whenever a min-max stage meets a flat plane it produces zeros and emits a
:class:`~dichotuna.imagecore.DegenerateInputWarning`; the pipeline keeps going.
"""
import warnings
from dataclasses import astuple, dataclass

import numpy as np

from . import kernels
from .filters import GuidedFilterConfig, gaussian_blur, guided_filter, self_guided_filter
from .imagecore import (
    DegenerateInputWarning,
    denormalize,
    hsv_to_rgb,
    minmax_normalize,
    normalize_u8,
    rgb_to_hsv,
    rgb_to_ycbcr,
    ycbcr_to_rgb,
)

TUNA_PARAM_NAMES = ("a", "b", "c", "d", "e", "gamma", "gamma1")


@dataclass(frozen=True)
class TunaParams:
    a: float
    b: float
    c: float
    d: float
    e: float
    gamma: float
    gamma1: float

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not self.gamma1 > 0:
            raise ValueError(f"gamma1 must be > 0, got {self.gamma1}")

    @classmethod
    def from_sequence(cls, values):
        values = [float(v) for v in values]
        if len(values) != len(TUNA_PARAM_NAMES):
            raise ValueError(f"expected {len(TUNA_PARAM_NAMES)} values, got {len(values)}")
        return cls(*values)

    def as_tuple(self):
        return astuple(self)


@dataclass(frozen=True)
class ParamBounds:
    """Per-parameter ``[low, high]`` box for a named gene vector."""

    names: tuple
    low: tuple
    high: tuple

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "low", tuple(float(v) for v in self.low))
        object.__setattr__(self, "high", tuple(float(v) for v in self.high))
        if not (len(self.names) == len(self.low) == len(self.high)) or not self.names:
            raise ValueError("names, low and high must be non-empty and equally long")
        for name, lo, hi in zip(self.names, self.low, self.high):
            if not lo < hi:
                raise ValueError(f"bound for {name!r} needs low < high, got [{lo}, {hi}]")

    @classmethod
    def from_dict(cls, mapping):
        names = tuple(mapping)
        return cls(names, [mapping[n][0] for n in names], [mapping[n][1] for n in names])

    def as_dict(self):
        return {n: (lo, hi) for n, lo, hi in zip(self.names, self.low, self.high)}

    def replace(self, **overrides):
        d = self.as_dict()
        for name, pair in overrides.items():
            if name not in d:
                raise KeyError(name)
            d[name] = pair
        return ParamBounds.from_dict(d)

    def contains(self, genes):
        genes = np.asarray(genes, dtype=np.float64)
        return bool(np.all(genes >= self.low) and np.all(genes <= self.high))

    def __len__(self):
        return len(self.names)


DEFAULT_TUNA_BOUNDS = ParamBounds.from_dict(
    {
        "a": (0.0, 2.0),
        "b": (0.0, 2.0),
        "c": (0.0, 2.0),
        "d": (0.0, 2.0),
        "e": (0.0, 2.0),
        "gamma": (0.01, 1.0),
        "gamma1": (0.3, 3.0),
    }
)
DEFAULT_DICHOTOMY_BOUNDS = ParamBounds.from_dict({"gamma": (0.01, 1.0)})


def _minmax(x, stage):
    out, degenerate = minmax_normalize(x)
    if degenerate:
        warnings.warn(f"flat input at {stage} stage; min-max produced zeros",
                      DegenerateInputWarning, stacklevel=3)
    return out


def dichotomy(v, gamma):
    """Raw dichotomy map ``|v ** gamma - v|`` (scale factor left to normalization)."""
    if not gamma >= 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    v = np.asarray(v, dtype=np.float64)
    return np.abs(np.power(v, gamma) - v)


def dichotomy_enhance(img, gamma):
    """Replace the value plane of a float RGB image by its normalized dichotomy map."""
    h, s, v = rgb_to_hsv(img)
    return hsv_to_rgb(h, s, _minmax(dichotomy(v, gamma), "dichotomy"))


def dichotomy_filter_enhance(img, gamma, sigma=1.0):
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return gaussian_blur(dichotomy_enhance(img, gamma), sigma)


def _flag(degenerate, stage):
    if degenerate:
        warnings.warn(f"flat input at {stage} stage; min-max produced zeros",
                      DegenerateInputWarning, stacklevel=4)


def _tuna_restore(img, p):
    """Stages up to the restored RGB image: dichotomy on V and color restoration.

    The restored value is ``a * v + b * dichotomy(v) * (1 - v)``, re-normalized.
    """
    rows = np.ascontiguousarray(img.reshape(-1, 3))
    rgb, flat_d, flat_r = kernels.tuna_restore(rows, float(p.gamma), float(p.a), float(p.b))
    _flag(flat_d, "dichotomy")
    _flag(flat_r, "restore")
    return rgb.reshape(img.shape)


def _tuna_blend(img, rgb, rgb1, p):
    """``c (1 - rgb) rgb1 + e img + d rgb``, jointly min-max scaled, gamma, quantized."""
    # joint over all channels; per-channel stretching would shift hue
    rows = [np.ascontiguousarray(x.reshape(-1, 3)) for x in (img, rgb, rgb1)]
    out, flat = kernels.tuna_blend(*rows, float(p.c), float(p.d), float(p.e), float(p.gamma1))
    _flag(flat, "blend")
    return out.reshape(img.shape)


def _as_params(p):
    return p if isinstance(p, TunaParams) else TunaParams.from_sequence(p)


def _tuna(img, p, gf):
    rgb = _tuna_restore(img, p)
    rgb1 = self_guided_filter(rgb, gf)
    return _tuna_blend(img, rgb, rgb1, p)


def _tuna_ycbcr(img, p, gf):
    rgb = _tuna_restore(img, p)
    y, cb, cr = rgb_to_ycbcr(rgb)
    y = np.ascontiguousarray(y)
    rgb1 = ycbcr_to_rgb(guided_filter(y, y, gf), cb, cr)
    return _tuna_blend(img, rgb, rgb1, p)


def tuna_enhance(img_u8, p, gf=GuidedFilterConfig()):
    """Seven-parameter enhancement of an 8-bit RGB image; returns ``uint8``.

    ``p`` is a :class:`TunaParams` or any sequence ``(a, b, c, d, e, gamma, gamma1)``.
    """
    return _tuna(normalize_u8(img_u8), _as_params(p), gf)


def tuna_enhance_ycbcr(img_u8, p, gf=GuidedFilterConfig()):
    """As :func:`tuna_enhance`, but the denoiser only filters the luma plane."""
    return _tuna_ycbcr(normalize_u8(img_u8), _as_params(p), gf)


@dataclass(frozen=True)
class PipelineSettings:
    """Fixed (non-evolved) knobs of the pipelines."""

    guided: GuidedFilterConfig = GuidedFilterConfig()
    sigma: float = 1.0


@dataclass(frozen=True)
class Method:
    name: str
    default_bounds: ParamBounds

    @property
    def gene_names(self):
        return self.default_bounds.names

    def bind(self, img_u8, settings=PipelineSettings()):
        """Fix the input image; returns ``genes -> uint8 image``.

        The float conversion of the input is done once, which matters when the
        same image is enhanced thousands of times during a search.
        """
        img = normalize_u8(img_u8)
        n_genes = len(self.gene_names)
        name = self.name

        def run(genes):
            genes = [float(g) for g in genes]
            if len(genes) != n_genes:
                raise ValueError(f"{name} takes {n_genes} parameters, got {len(genes)}")
            if name == "dichotomy":
                return denormalize(dichotomy_enhance(img, genes[0]))
            if name == "dichotomy-filter":
                return denormalize(dichotomy_filter_enhance(img, genes[0], settings.sigma))
            if name == "tuna":
                return _tuna(img, TunaParams(*genes), settings.guided)
            return _tuna_ycbcr(img, TunaParams(*genes), settings.guided)

        return run

    def apply(self, img_u8, genes, settings=PipelineSettings()):
        """Run this pipeline on an 8-bit image with a gene vector."""
        return self.bind(img_u8, settings)(genes)


METHODS = {
    m.name: m
    for m in (
        Method("dichotomy", DEFAULT_DICHOTOMY_BOUNDS),
        Method("dichotomy-filter", DEFAULT_DICHOTOMY_BOUNDS),
        Method("tuna", DEFAULT_TUNA_BOUNDS),
        Method("tuna-ycbcr", DEFAULT_TUNA_BOUNDS),
    )
}


def get_method(name):
    try:
        return METHODS[name]
    except KeyError:
        raise ValueError(f"unknown method {name!r}; choose from {', '.join(METHODS)}") from None


__all__ = [
    "DEFAULT_DICHOTOMY_BOUNDS",
    "DEFAULT_TUNA_BOUNDS",
    "METHODS",
    "Method",
    "ParamBounds",
    "PipelineSettings",
    "TUNA_PARAM_NAMES",
    "TunaParams",
    "dichotomy",
    "dichotomy_enhance",
    "dichotomy_filter_enhance",
    "get_method",
    "tuna_enhance",
    "tuna_enhance_ycbcr",
]
