import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "dichotuna",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("dichotuna")


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def photo_u8():
    """Smooth 48x64 color scene spanning the full 0..255 range."""
    y, x = np.mgrid[0:48, 0:64] / np.array([47.0, 63.0])[:, None, None]
    r = 0.5 + 0.5 * np.sin(6.0 * x + 1.0) * np.cos(3.0 * y)
    g = x * y
    b = 1.0 - 0.7 * x + 0.2 * np.sin(9.0 * y)
    img = np.stack([r, g, b], axis=-1)
    img = (img - img.min()) / (img.max() - img.min())
    return np.floor(img * 255.0 + 0.5).astype(np.uint8)


def write_pair_dataset(root, images, dark_gamma=2.5):
    """Write a ``low/`` + ``high/`` dataset from a mapping name -> uint8 image."""
    from dichotuna.harness import synth_darken
    from dichotuna.imagecore import write_png

    (root / "low").mkdir(parents=True, exist_ok=True)
    (root / "high").mkdir(parents=True, exist_ok=True)
    for name, img in images.items():
        write_png(root / "high" / f"{name}.png", img)
        write_png(root / "low" / f"{name}.png", synth_darken(img, dark_gamma))
    return root
