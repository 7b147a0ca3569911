"""Paired-dataset benchmarking: ingestion, per-image tuning jobs and reports."""
import csv
import hashlib
import logging
import os
import statistics
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .enhance import TUNA_PARAM_NAMES, ParamBounds, PipelineSettings, get_method
from .evolve import GAConfig, optimize_image
from .filters import GuidedFilterConfig
from .imagecore import (
    DegenerateInputWarning,
    denormalize,
    gamma_correct,
    normalize_u8,
    read_png,
    write_png,
)
from .quality import loe, psnr, ssim

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

WORKERS_ENV = "DICHOTUNA_WORKERS"
CSV_COLUMNS = ("image", "method", "psnr", "ssim", "loe", "seconds") + TUNA_PARAM_NAMES
METRIC_COLUMNS = ("psnr", "ssim", "loe", "seconds")


class DatasetError(ValueError):
    pass


# ---------------------------------------------------------------- datasets

@dataclass(frozen=True)
class ImagePair:
    image_id: str
    low_path: Path
    reference_path: Path
    size: tuple  # (width, height)


@dataclass(frozen=True)
class PairedDataset:
    name: str
    pairs: tuple

    def __len__(self):
        return len(self.pairs)


def _png_size(path):
    try:
        with Image.open(path) as im:
            return im.size
    except (OSError, UnidentifiedImageError) as exc:
        raise DatasetError(f"cannot read image {path}: {exc}") from exc


def load_paired_dataset(root):
    """Pair ``root/low/*.png`` with identically named ``root/high/*.png``."""
    root = Path(root)
    low_dir, high_dir = root / "low", root / "high"
    for d in (low_dir, high_dir):
        if not d.is_dir():
            raise DatasetError(f"missing directory {d}")
    lows = {p.name: p for p in low_dir.iterdir() if p.suffix.lower() == ".png"}
    highs = {p.name: p for p in high_dir.iterdir() if p.suffix.lower() == ".png"}
    orphans = sorted(set(lows) ^ set(highs))
    if orphans:
        where = ["high/" if n in lows else "low/" for n in orphans]
        details = ", ".join(f"{n} (no counterpart in {w})" for n, w in zip(orphans, where))
        raise DatasetError(f"unpaired files in {root}: {details}")
    if not lows:
        log.warning("dataset %s is empty", root)

    pairs = []
    for name in sorted(lows):
        low_size = _png_size(lows[name])
        high_size = _png_size(highs[name])
        if low_size != high_size:
            raise DatasetError(f"{name}: low is {low_size}, high is {high_size}")
        pairs.append(ImagePair(Path(name).stem, lows[name], highs[name], low_size))
    return PairedDataset(root.name, tuple(pairs))


def synth_darken(reference, gamma_dark, seed=None, noise_sigma=0.0):
    """Simulate an underexposed shot: gamma ``gamma_dark`` plus optional Gaussian noise."""
    if not gamma_dark >= 1.0:
        raise ValueError(f"gamma_dark must be >= 1, got {gamma_dark}")
    dark = gamma_correct(normalize_u8(reference), gamma_dark)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        dark = dark + rng.normal(0.0, noise_sigma, dark.shape)
    return denormalize(dark)


# ---------------------------------------------------------------- config

@dataclass(frozen=True)
class RunConfig:
    dataset: Path
    method: str = "tuna"
    ga: GAConfig = GAConfig()
    bounds: ParamBounds | None = None
    settings: PipelineSettings = PipelineSettings()
    output_dir: Path | None = None
    workers: int | None = None
    fixed_params: tuple | None = None  # skip the GA and apply these
    record_time: bool = True

    def __post_init__(self):
        get_method(self.method)
        if self.fixed_params is not None:
            n = len(get_method(self.method).gene_names)
            if len(self.fixed_params) != n:
                raise ValueError(f"{self.method} takes {n} fixed parameters")


def default_workers():
    value = os.environ.get(WORKERS_ENV)
    return int(value) if value else 1


def load_config(path):
    """Read a flat TOML document into ``(GAConfig, bounds overrides, PipelineSettings, extras)``.

    Recognised keys: every :class:`GAConfig` field, ``<param>_low`` /
    ``<param>_high`` bound overrides, ``gf_radius``, ``gf_epsilon``, ``sigma``,
    ``method`` and ``workers``.
    """
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    return config_from_mapping(doc)


def config_from_mapping(doc):
    doc = dict(doc)
    ga_names = {f.name for f in fields(GAConfig)}
    ga = GAConfig(**{k: doc.pop(k) for k in list(doc) if k in ga_names})

    bounds = {}
    for key in list(doc):
        for suffix, slot in (("_low", 0), ("_high", 1)):
            if key.endswith(suffix):
                bounds.setdefault(key[: -len(suffix)], [None, None])[slot] = float(doc.pop(key))

    gf = GuidedFilterConfig(
        radius=int(doc.pop("gf_radius", GuidedFilterConfig.radius)),
        epsilon=float(doc.pop("gf_epsilon", GuidedFilterConfig.epsilon)),
    )
    settings = PipelineSettings(guided=gf, sigma=float(doc.pop("sigma", PipelineSettings.sigma)))
    extras = {k: doc.pop(k) for k in ("method", "workers") if k in doc}
    if doc:
        raise ValueError(f"unknown config keys: {', '.join(sorted(doc))}")
    return ga, bounds, settings, extras


def resolve_bounds(method, overrides):
    """Method default bounds with ``{name: [low|None, high|None]}`` overrides applied."""
    base = get_method(method).default_bounds
    if not overrides:
        return base
    current = base.as_dict()
    for name, (lo, hi) in overrides.items():
        if name not in current:
            raise ValueError(f"{method} has no parameter {name!r}")
        old_lo, old_hi = current[name]
        current[name] = (old_lo if lo is None else lo, old_hi if hi is None else hi)
    return ParamBounds.from_dict(current)


# ---------------------------------------------------------------- benchmark

@dataclass(frozen=True)
class BenchRow:
    image: str
    method: str
    psnr: float
    ssim: float
    loe: float
    seconds: float | None
    params: dict  # gene name -> value


@dataclass
class BenchReport:
    method: str
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)  # (image, message)

    def aggregate(self):
        """``{metric: (mean, sample std)}``; std is 0 for a single row."""
        return aggregate_rows(self.rows)


def aggregate_rows(rows):
    out = {}
    if not rows:
        return out
    for name in METRIC_COLUMNS:
        values = [getattr(r, name) for r in rows]
        if any(v is None for v in values):
            continue
        mean = statistics.fmean(values)
        std = statistics.stdev(values) if len(values) > 1 else 0.0
        out[name] = (mean, std)
    return out


def image_seed(base_seed, image_id):
    """Stable per-image seed independent of directory enumeration order."""
    digest = hashlib.blake2b(image_id.encode("utf-8"), digest_size=8).digest()
    return (base_seed + int.from_bytes(digest, "little")) % (2**63)


def _run_pair(pair, cfg, bounds):
    start = time.perf_counter()
    low = read_png(pair.low_path)
    reference = read_png(pair.reference_path)
    method = get_method(cfg.method)
    if cfg.fixed_params is not None:
        genes = np.asarray(cfg.fixed_params, dtype=np.float64)
    else:
        ga = replace(cfg.ga, rng_seed=image_seed(cfg.ga.rng_seed, pair.image_id))
        genes = optimize_image(low, reference, cfg.method, ga, bounds, cfg.settings).best_genes
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateInputWarning)
        enhanced = method.apply(low, genes, cfg.settings)
    row = BenchRow(
        image=pair.image_id,
        method=cfg.method,
        psnr=psnr(enhanced, reference),
        ssim=ssim(enhanced, reference),
        loe=loe(low, enhanced),
        seconds=time.perf_counter() - start if cfg.record_time else None,
        params=dict(zip(method.gene_names, (float(g) for g in genes))),
    )
    return row, enhanced


def _job(pair, cfg, bounds):
    try:
        row, enhanced = _run_pair(pair, cfg, bounds)
    except Exception as exc:  # one bad image must not sink the batch
        return pair.image_id, None, f"{type(exc).__name__}: {exc}"
    if cfg.output_dir is not None:
        write_png(Path(cfg.output_dir) / f"{pair.image_id}.png", enhanced)
    return pair.image_id, row, None


def run_benchmark(cfg, dataset=None):
    """Tune (or apply fixed parameters to) every pair and score the results."""
    dataset = dataset if dataset is not None else load_paired_dataset(cfg.dataset)
    bounds = cfg.bounds or get_method(cfg.method).default_bounds
    workers = cfg.workers or default_workers()
    if cfg.output_dir is not None:
        Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)

    if workers > 1 and len(dataset) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_job, pair, cfg, bounds) for pair in dataset.pairs]
            results = [f.result() for f in futures]
    else:
        results = [_job(pair, cfg, bounds) for pair in dataset.pairs]

    report = BenchReport(cfg.method)
    for image_id, row, error in sorted(results, key=lambda r: r[0]):
        if error is None:
            report.rows.append(row)
            log.info("%s: psnr %.4f ssim %.4f", image_id, row.psnr, row.ssim)
        else:
            report.failures.append((image_id, error))
            log.error("%s failed: %s", image_id, error)
    return report


# ---------------------------------------------------------------- reports

def _fmt(value):
    return "" if value is None else repr(float(value))


def emit_csv(report, path):
    """Per-image rows plus a trailing ``AGGREGATE`` row of ``mean±std`` cells."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in report.rows:
            writer.writerow(
                [r.image, r.method, _fmt(r.psnr), _fmt(r.ssim), _fmt(r.loe), _fmt(r.seconds)]
                + [_fmt(r.params.get(name)) for name in TUNA_PARAM_NAMES]
            )
        if report.rows:
            agg = report.aggregate()
            cells = [f"{agg[name][0]!r}±{agg[name][1]!r}" if name in agg else ""
                     for name in METRIC_COLUMNS]
            writer.writerow(["AGGREGATE", report.method] + cells + [""] * len(TUNA_PARAM_NAMES))
    return path


def read_csv(path):
    """Parse a report CSV back into ``(rows, aggregate)``."""
    rows, aggregate = [], {}
    with Path(path).open(encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            if rec["image"] == "AGGREGATE":
                for name in METRIC_COLUMNS:
                    if rec[name]:
                        mean, std = rec[name].split("±")
                        aggregate[name] = (float(mean), float(std))
                continue
            num = lambda key: float(rec[key]) if rec[key] else None  # noqa: E731
            rows.append(BenchRow(
                image=rec["image"],
                method=rec["method"],
                psnr=num("psnr"),
                ssim=num("ssim"),
                loe=num("loe"),
                seconds=num("seconds"),
                params={n: num(n) for n in TUNA_PARAM_NAMES if rec[n]},
            ))
    return rows, aggregate


_TITLES = {
    "dichotomy": "Dichotomy",
    "dichotomy-filter": "Dichotomy + filter",
    "tuna": "Dichotomy Tuna",
    "tuna-ycbcr": "Dichotomy Tuna (YCbCr)",
}


def emit_markdown(report, path):
    """Summary table in the ``mean ± std`` layout, followed by per-image rows."""
    agg = report.aggregate()

    def cell(name, digits=4):
        if name not in agg:
            return "n/a"
        m, s = agg[name]
        return f"{m:.{digits}f} ± {s:.{digits}f}"

    lines = [
        f"| Methods | {_TITLES.get(report.method, report.method)} |",
        "|---|---|",
        f"| PSNR ↑ | {cell('psnr')} |",
        f"| SSIM ↑ | {cell('ssim')} |",
        f"| LOE ↓ | {cell('loe', 2)} |",
        "",
        f"{len(report.rows)} images, {len(report.failures)} failures.",
        "",
    ]
    if report.rows:
        names = get_method(report.method).gene_names
        lines.append("| image | PSNR | SSIM | LOE | " + " | ".join(names) + " |")
        lines.append("|---" * (4 + len(names)) + "|")
        for r in report.rows:
            params = " | ".join(f"{r.params[n]:.4f}" for n in names)
            lines.append(f"| {r.image} | {r.psnr:.4f} | {r.ssim:.4f} | {r.loe:.2f} | {params} |")
        lines.append("")
    if report.failures:
        lines.append("Failures:")
        lines.append("")
        lines.extend(f"- {image}: {msg}" for image, msg in report.failures)
        lines.append("")
    path = Path(path)
    path.write_text("\n".join(lines), encoding="utf-8")
    return path


__all__ = [
    "BenchReport",
    "BenchRow",
    "DatasetError",
    "ImagePair",
    "PairedDataset",
    "RunConfig",
    "config_from_mapping",
    "emit_csv",
    "emit_markdown",
    "image_seed",
    "load_config",
    "load_paired_dataset",
    "read_csv",
    "resolve_bounds",
    "run_benchmark",
    "synth_darken",
]
