"""Hot loops, dispatched to the compiled extension when it is importable.

Set ``DICHOTUNA_PURE_PYTHON=1`` to force the numpy fallback. Both backends are
importable side by side as :data:`python_backend` and :data:`compiled_backend`
(``None`` when the extension was not built).
"""
import os

from . import _pykernels as python_backend

try:
    from . import _ckernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and not os.environ.get("DICHOTUNA_PURE_PYTHON"):
    _active = compiled_backend
    BACKEND = "cython"
else:
    _active = python_backend
    BACKEND = "python"

box_mean = _active.box_mean
sep_convolve = _active.sep_convolve
correlate_valid = _active.correlate_valid
order_disagreements = _active.order_disagreements
rgb_to_hsv = _active.rgb_to_hsv
hsv_to_rgb = _active.hsv_to_rgb
self_guided_filter = _active.self_guided_filter
ssim_mean = _active.ssim_mean
tuna_restore = _active.tuna_restore
tuna_blend = _active.tuna_blend
sum_sq_diff_u8 = _active.sum_sq_diff_u8
luminance_u8 = _active.luminance_u8

__all__ = [
    "BACKEND",
    "box_mean",
    "compiled_backend",
    "correlate_valid",
    "hsv_to_rgb",
    "luminance_u8",
    "order_disagreements",
    "python_backend",
    "rgb_to_hsv",
    "self_guided_filter",
    "sep_convolve",
    "ssim_mean",
    "sum_sq_diff_u8",
    "tuna_blend",
    "tuna_restore",
]
