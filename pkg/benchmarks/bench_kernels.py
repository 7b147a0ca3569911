"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--size HxW]

Each row reports the best-of-N wall time per call for both backends and the
speedup. Outputs are compared too, so a drifting backend shows up here as
well as in the test suite.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from dichotuna import kernels
from dichotuna.quality import ssim_window1d

PY = kernels.python_backend
CY = kernels.compiled_backend


def best_time(fn, repeat):
    fn()  # warm caches and scratch buffers
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def _max_diff(x, y):
    if isinstance(x, tuple):
        return max(_max_diff(a, b) for a, b in zip(x, y))
    if isinstance(x, (bool, int, float)):
        return abs(float(x) - float(y))
    return float(np.max(np.abs(np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64))))


def cases(h, w, rng):
    rgb = rng.random((h, w, 3))
    flat = np.ascontiguousarray(rgb.reshape(-1, 3))
    plane = np.ascontiguousarray(rgb[..., 0])
    other = np.clip(plane + 0.05 * rng.standard_normal(plane.shape), 0, 1)
    win = ssim_window1d()
    u8 = (rgb * 255).astype(np.uint8)
    u8_other = np.clip(u8.astype(int) + rng.integers(-9, 10, u8.shape), 0, 255).astype(np.uint8)
    light_a = rng.random(10_000)
    light_b = np.clip(light_a + 0.1 * rng.standard_normal(10_000), 0, 1)

    mu = PY.correlate_valid(other, win)
    var = PY.correlate_valid(other * other, win) - mu * mu

    h_, s_, v_ = PY.rgb_to_hsv(flat)
    restored, _, _ = PY.tuna_restore(flat, 0.6, 1.1, 0.9)
    smooth = np.stack([PY.self_guided_filter(np.ascontiguousarray(restored.reshape(h, w, 3)[..., c]), 8, 0.01)
                       for c in range(3)], axis=-1).reshape(-1, 3)
    return {
        "box_mean r=8": lambda b: b.box_mean(plane, 8),
        "sep_convolve 7-tap": lambda b: b.sep_convolve(plane, np.full(7, 1 / 7)),
        "self_guided_filter": lambda b: b.self_guided_filter(plane, 8, 0.01),
        "rgb_to_hsv": lambda b: b.rgb_to_hsv(flat),
        "hsv_to_rgb": lambda b: b.hsv_to_rgb(h_, s_, v_),
        "tuna_restore": lambda b: b.tuna_restore(flat, 0.6, 1.1, 0.9),
        "tuna_blend": lambda b: b.tuna_blend(flat, restored, smooth, 0.8, 1.0, 0.7, 0.9),
        "ssim_mean": lambda b: b.ssim_mean(plane, other, mu, var, win, 1e-4, 9e-4),
        "order_disagreements 10k": lambda b: b.order_disagreements(light_a, light_b),
        "sum_sq_diff_u8": lambda b: b.sum_sq_diff_u8(u8.ravel(), u8_other.ravel()),
        "luminance_u8": lambda b: b.luminance_u8(u8.reshape(-1, 3)),
    }


# one GA fitness evaluation (enhance + PSNR + SSIM), timed in a fresh
# interpreter because the backend is picked once at import
_EVAL_SNIPPET = """
import time, warnings
import numpy as np
from dichotuna.evolve import image_objective
from dichotuna.harness import synth_darken
rng = np.random.default_rng(0)
ref = (rng.random(({h}, {w}, 3)) * 255).astype(np.uint8)
f = image_objective(synth_darken(ref, 3.0), ref)
genes = (0.6, 1.1, 0.9, 0.8, 1.0, 0.7, 0.9)
warnings.simplefilter("ignore")
f(genes)
times = []
for _ in range({repeat}):
    t0 = time.perf_counter()
    f(genes)
    times.append(time.perf_counter() - t0)
print(min(times))
"""


def time_evaluation(h, w, repeat, pure):
    env = dict(os.environ)
    env.pop("DICHOTUNA_PURE_PYTHON", None)
    if pure:
        env["DICHOTUNA_PURE_PYTHON"] = "1"
    code = _EVAL_SNIPPET.format(h=h, w=w, repeat=repeat)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.split()[-1])


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--size", default="400x600", help="image size as HxW")
    args = parser.parse_args(argv)
    h, w = (int(v) for v in args.size.lower().split("x"))
    if CY is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")

    rng = np.random.default_rng(0)
    print(f"{h}x{w} image, best of {args.repeat}")
    print(f"{'kernel':<26}{'python ms':>11}{'cython ms':>11}{'speedup':>9}{'max diff':>11}")
    for name, call in cases(h, w, rng).items():
        t_py = best_time(lambda: call(PY), args.repeat)
        t_cy = best_time(lambda: call(CY), args.repeat)
        diff = _max_diff(call(PY), call(CY))
        print(f"{name:<26}{t_py * 1e3:>11.2f}{t_cy * 1e3:>11.2f}{t_py / t_cy:>8.1f}x{diff:>11.1e}")
    t_py = time_evaluation(h, w, args.repeat, pure=True)
    t_cy = time_evaluation(h, w, args.repeat, pure=False)
    print(f"{'fitness evaluation':<26}{t_py * 1e3:>11.2f}{t_cy * 1e3:>11.2f}{t_py / t_cy:>8.1f}x{'':>11}")


if __name__ == "__main__":
    main()
