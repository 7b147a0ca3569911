"""Low-light image enhancement with dichotomy-function pipelines tuned per image
by a real-coded genetic algorithm."""
from .enhance import (
    DEFAULT_DICHOTOMY_BOUNDS,
    DEFAULT_TUNA_BOUNDS,
    ParamBounds,
    PipelineSettings,
    TunaParams,
    dichotomy,
    dichotomy_enhance,
    dichotomy_filter_enhance,
    get_method,
    tuna_enhance,
    tuna_enhance_ycbcr,
)
from .evolve import GAConfig, EvolveResult, evolve, optimize_image
from .filters import GuidedFilterConfig, gaussian_blur, guided_filter
from .imagecore import DegenerateInputWarning, denormalize, normalize_u8, read_png, write_png
from .kernels import BACKEND
from .quality import MetricReport, fitness, loe, psnr, ssim

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DEFAULT_DICHOTOMY_BOUNDS",
    "DEFAULT_TUNA_BOUNDS",
    "DegenerateInputWarning",
    "EvolveResult",
    "GAConfig",
    "GuidedFilterConfig",
    "MetricReport",
    "ParamBounds",
    "PipelineSettings",
    "TunaParams",
    "denormalize",
    "dichotomy",
    "dichotomy_enhance",
    "dichotomy_filter_enhance",
    "evolve",
    "fitness",
    "gaussian_blur",
    "get_method",
    "guided_filter",
    "loe",
    "normalize_u8",
    "optimize_image",
    "psnr",
    "read_png",
    "ssim",
    "tuna_enhance",
    "tuna_enhance_ycbcr",
    "write_png",
]
