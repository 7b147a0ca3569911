"""Command-line entry point: ``dichotuna <subcommand> ...``."""
import argparse
import json
import logging
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from . import kernels
from .enhance import METHODS, PipelineSettings, get_method
from .evolve import optimize_image
from .filters import GuidedFilterConfig
from .harness import (
    RunConfig,
    config_from_mapping,
    emit_csv,
    emit_markdown,
    load_config,
    resolve_bounds,
    run_benchmark,
    synth_darken,
)
from .imagecore import DegenerateInputWarning, read_png, write_png
from .quality import evaluate


def _floats(text):
    return tuple(float(v) for v in text.split(","))


def _load_settings(args):
    """Merge the optional config file with command-line overrides."""
    if args.config:
        ga, bounds, settings, extras = load_config(args.config)
    else:
        ga, bounds, settings, extras = config_from_mapping({})
    overrides = {
        "population_size": getattr(args, "population", None),
        "generations": getattr(args, "generations", None),
        "runs": getattr(args, "runs", None),
        "rng_seed": getattr(args, "seed", None),
    }
    ga = replace(ga, **{k: v for k, v in overrides.items() if v is not None})
    gf = GuidedFilterConfig(
        radius=args.gf_radius if args.gf_radius is not None else settings.guided.radius,
        epsilon=args.gf_epsilon if args.gf_epsilon is not None else settings.guided.epsilon,
    )
    settings = PipelineSettings(gf, args.sigma if args.sigma is not None else settings.sigma)
    method = args.method or extras.get("method", "tuna")
    return method, ga, resolve_bounds(method, bounds), settings, extras


def _add_pipeline_options(p, config=True):
    p.add_argument("--method", choices=sorted(METHODS), default=None,
                   help="enhancement pipeline (default: tuna)")
    if config:
        p.add_argument("--config", type=Path, help="flat TOML file with GA, bounds and filter keys")
    p.add_argument("--gf-radius", type=int, default=None, help="guided filter radius (default 8)")
    p.add_argument("--gf-epsilon", type=float, default=None, help="guided filter epsilon (default 0.01)")
    p.add_argument("--sigma", type=float, default=None, help="Gaussian sigma for dichotomy-filter (default 1)")


def _add_ga_options(p):
    p.add_argument("--population", type=int, help="population size (default 10 per parameter)")
    p.add_argument("--generations", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)


def cmd_enhance(args):
    args.config = None
    method, _, _, settings, _ = _load_settings(args)
    genes = _floats(args.params)
    with warnings.catch_warnings():
        warnings.simplefilter("always", DegenerateInputWarning)
        out = get_method(method).apply(read_png(args.input), genes, settings)
    write_png(args.output, out)
    return 0


def cmd_optimize(args):
    method, ga, bounds, settings, _ = _load_settings(args)
    low, ref = read_png(args.low), read_png(args.ref)
    result = optimize_image(low, ref, method, ga, bounds, settings)
    pipeline = get_method(method)
    enhanced = pipeline.apply(low, result.best_genes, settings)
    metrics = evaluate(ref, enhanced, low)
    doc = {
        "method": method,
        "params": dict(zip(pipeline.gene_names, map(float, result.best_genes))),
        "fitness": result.best_fitness,
        "metrics": metrics.as_dict(),
        "fitness_trace": result.fitness_trace,
        "run_best": result.run_best,
        "seed": result.seed,
        "evaluations": result.evaluations,
        "invalid_evaluations": result.invalid_evaluations,
    }
    text = json.dumps(doc, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    if args.output:
        write_png(args.output, enhanced)
    return 0


def cmd_benchmark(args):
    method, ga, bounds, settings, extras = _load_settings(args)
    cfg = RunConfig(
        dataset=args.dataset,
        method=method,
        ga=ga,
        bounds=bounds,
        settings=settings,
        output_dir=args.save_images,
        workers=args.workers or extras.get("workers"),
        fixed_params=_floats(args.fixed_params) if args.fixed_params else None,
        record_time=not args.no_timing,
    )
    report = run_benchmark(cfg)
    emit_csv(report, args.report)
    if args.markdown:
        emit_markdown(report, args.markdown)
    agg = report.aggregate()
    for name in ("psnr", "ssim", "loe"):
        if name in agg:
            print(f"{name.upper():5s} {agg[name][0]:.4f} ± {agg[name][1]:.4f}")
    for image, msg in report.failures:
        print(f"FAILED {image}: {msg}", file=sys.stderr)
    return 0 if not report.failures else 1


def cmd_metrics(args):
    a, b = read_png(args.a), read_png(args.b)
    report = evaluate(b, a, original=b)
    print(json.dumps(report.as_dict(), indent=2))
    return 0


def cmd_synth_darken(args):
    out = synth_darken(read_png(args.input), args.gamma, seed=args.seed, noise_sigma=args.noise)
    output = args.output or Path(args.input).with_name(Path(args.input).stem + "_dark.png")
    write_png(output, out)
    print(output)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="dichotuna", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s (kernels: {kernels.BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", help="apply a pipeline with given parameters")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--params", required=True,
                   help="comma separated: a,b,c,d,e,gamma,gamma1 (tuna) or gamma (dichotomy)")
    _add_pipeline_options(p, config=False)
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("optimize", help="tune parameters for one low/reference pair")
    p.add_argument("--low", required=True, type=Path)
    p.add_argument("--ref", required=True, type=Path)
    p.add_argument("--out", type=Path, help="write the result JSON here (default stdout)")
    p.add_argument("--output", type=Path, help="also save the enhanced PNG")
    _add_pipeline_options(p)
    _add_ga_options(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("benchmark", help="tune and score every pair of a low/ high/ dataset")
    p.add_argument("--dataset", required=True, type=Path)
    p.add_argument("--report", required=True, type=Path, help="CSV report path")
    p.add_argument("--markdown", type=Path, help="also write a Markdown summary")
    p.add_argument("--save-images", type=Path, help="directory for enhanced outputs")
    p.add_argument("--workers", type=int, help="parallel image jobs (default $DICHOTUNA_WORKERS or 1)")
    p.add_argument("--fixed-params", help="skip the GA and apply these comma separated values")
    p.add_argument("--no-timing", action="store_true",
                   help="leave the seconds column empty so reruns are byte-identical")
    _add_pipeline_options(p)
    _add_ga_options(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("metrics", help="PSNR, SSIM, LOE and fitness of --a against reference --b")
    p.add_argument("--a", required=True, type=Path, help="image under test")
    p.add_argument("--b", required=True, type=Path, help="reference image (also the LOE original)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("synth-darken", help="make a synthetic low-light version of a photo")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--gamma", type=float, default=3.0)
    p.add_argument("--output", type=Path)
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma on [0, 1] scale")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth_darken)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * args.verbose
    logging.basicConfig(level=max(level, logging.DEBUG), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"dichotuna {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
