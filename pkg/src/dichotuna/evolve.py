"""Real-coded genetic algorithm: SBX crossover, polynomial mutation, tournament
selection and an elitist generational loop, plus the per-image tuning driver.
"""
import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .enhance import PipelineSettings, get_method
from .imagecore import DegenerateInputWarning, check_u8
from .quality import ReferenceScorer

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GAConfig:
    """GA knobs. ``None`` sizes are derived from the gene count."""

    population_size: int | None = None  # 10 per gene
    generations: int = 50
    runs: int = 50
    eta_x: float = 2.0
    eta_m: float = 25.0
    crossover_rate: float = 0.9
    mutation_rate: float | None = None  # 1 / gene count
    tournament_size: int = 2
    elite_count: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size is not None and self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 0 or self.runs < 1:
            raise ValueError("generations must be >= 0 and runs >= 1")
        if self.eta_x < 0 or self.eta_m < 0:
            raise ValueError("distribution indices must be non-negative")
        for name in ("crossover_rate", "mutation_rate"):
            rate = getattr(self, name)
            if rate is not None and not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {rate}")
        if self.tournament_size < 1 or self.elite_count < 0:
            raise ValueError("tournament_size must be >= 1 and elite_count >= 0")

    def resolved(self, n_genes):
        """Copy with the derived defaults filled in for ``n_genes`` genes."""
        return replace(
            self,
            population_size=self.population_size or 10 * n_genes,
            mutation_rate=1.0 / n_genes if self.mutation_rate is None else self.mutation_rate,
        )


@dataclass
class EvolveResult:
    best_genes: np.ndarray
    best_fitness: float
    fitness_trace: list = field(default_factory=list)
    evaluations: int = 0
    invalid_evaluations: int = 0
    run_best: list = field(default_factory=list)
    seed: int = 0


def _spread_factor(u, eta_x):
    if u < 0.5:
        return (2.0 * u) ** (1.0 / (eta_x + 1.0))
    return (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta_x + 1.0))


def _ulp_steps(x, k):
    direction = math.copysign(math.inf, k)
    for _ in range(abs(k)):
        x = math.nextafter(x, direction)
    return x


def _exact_pair(c1, c2, total):
    """Children within a few ulps of ``(c1, c2)`` whose float sum is ``total``."""
    # anchor either child and solve for the other; anchoring the one with the
    # coarser spacing leaves the finer one free to absorb the rounding
    for anchor, swap in ((c1, False), (c2, True)):
        for k in (0, 1, -1, 2, -2, 3, -3, 4, -4):
            a = _ulp_steps(anchor, k)
            b = total - a
            for j in (0, 1, -1, 2, -2):
                bj = _ulp_steps(b, j)
                if a + bj == total:
                    return (bj, a) if swap else (a, bj)
    return None


def sbx_crossover(p1, p2, u, eta_x=2.0):
    """Simulated binary crossover of two scalar genes for a uniform draw ``u``.

    The children keep the parents' sum: when rounding breaks
    ``c1 + c2 == p1 + p2`` the pair is nudged by a few ulps until it holds.
    That is impossible only when the children straddle zero on a grid coarser
    than the parents' sum; the formula values are then returned unchanged.
    """
    if not 0.0 <= u < 1.0:
        raise ValueError(f"u must lie in [0, 1), got {u}; redraw u == 1")
    p1 = float(p1)
    p2 = float(p2)
    beta = _spread_factor(u, eta_x)
    c1 = 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2)
    c2 = 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2)
    total = p1 + p2
    if c1 + c2 == total:
        return c1, c2
    return _exact_pair(c1, c2, total) or (c1, c2)


def poly_mutation(p, low, up, u, eta_m=25.0):
    """Polynomial mutation of one gene, clamped to ``[low, up]``."""
    if not low < up:
        raise ValueError(f"need low < up, got [{low}, {up}]")
    if u < 0.5:
        delta = (2.0 * u) ** (1.0 / (eta_m + 1.0)) - 1.0
    else:
        delta = 1.0 - (2.0 * (1.0 - u)) ** (1.0 / (eta_m + 1.0))
    return min(max(p + delta * (up - low), low), up)


def tournament_select(fitnesses, k, rng):
    """Index of the fittest among ``k`` distinct uniformly drawn individuals.

    Ties go to the lowest index.
    """
    fitnesses = np.asarray(fitnesses, dtype=np.float64)
    n = fitnesses.size
    if n == 0:
        raise ValueError("empty population")
    k = min(int(k), n)
    contenders = np.sort(rng.choice(n, size=k, replace=False))
    return int(contenders[np.argmax(fitnesses[contenders])])


def _rank(fitnesses):
    """Indices sorted best first, stable so ties keep index order."""
    return np.argsort(-fitnesses, kind="stable")


def evolve(evaluate, bounds, cfg=GAConfig()):
    """Maximize ``evaluate(genes)`` inside ``bounds`` with one seeded GA run.

    ``evaluate`` returns a float; NaN counts as an unusable individual
    (fitness ``-inf``).
    """
    low = np.asarray(bounds.low, dtype=np.float64)
    high = np.asarray(bounds.high, dtype=np.float64)
    n_genes = low.size
    cfg = cfg.resolved(n_genes)
    pop_size = cfg.population_size
    elite = min(cfg.elite_count, pop_size)
    rng = np.random.default_rng(cfg.rng_seed)
    evaluations = 0
    invalid = 0

    def score(genes):
        nonlocal evaluations, invalid
        evaluations += 1
        value = float(evaluate(genes))
        if math.isnan(value):
            invalid += 1
            return -math.inf
        return value

    pop = low + rng.random((pop_size, n_genes)) * (high - low)
    fit = np.array([score(ind) for ind in pop])
    order = _rank(fit)
    best_genes, best_fitness = pop[order[0]].copy(), float(fit[order[0]])
    trace = [best_fitness]

    for _ in range(cfg.generations):
        children = []
        while len(children) < pop_size - elite:
            c1 = pop[tournament_select(fit, cfg.tournament_size, rng)].copy()
            c2 = pop[tournament_select(fit, cfg.tournament_size, rng)].copy()
            for g in range(n_genes):
                if rng.random() < cfg.crossover_rate:
                    c1[g], c2[g] = sbx_crossover(c1[g], c2[g], rng.random(), cfg.eta_x)
            for child in (c1, c2):
                np.clip(child, low, high, out=child)
                for g in range(n_genes):
                    if rng.random() < cfg.mutation_rate:
                        child[g] = poly_mutation(child[g], low[g], high[g], rng.random(), cfg.eta_m)
                children.append(child)
        children = children[: pop_size - elite]
        child_fit = np.array([score(ind) for ind in children])

        keep = order[:elite]
        pop = np.vstack([pop[keep]] + ([np.array(children)] if children else []))
        fit = np.concatenate([fit[keep], child_fit])
        order = _rank(fit)
        if fit[order[0]] > best_fitness:
            best_genes, best_fitness = pop[order[0]].copy(), float(fit[order[0]])
        trace.append(best_fitness)

    return EvolveResult(
        best_genes=best_genes,
        best_fitness=best_fitness,
        fitness_trace=trace,
        evaluations=evaluations,
        invalid_evaluations=invalid,
        run_best=[best_fitness],
        seed=cfg.rng_seed,
    )


def image_objective(low, reference, method="tuna", settings=PipelineSettings()):
    """Fitness function over gene vectors for one low/reference image pair."""
    low = check_u8(low)
    reference = check_u8(reference)
    if low.shape != reference.shape:
        raise ValueError(f"low {low.shape} and reference {reference.shape} differ in size")
    enhance = get_method(method).bind(low, settings)
    scorer = ReferenceScorer(reference)

    def objective(genes):
        return scorer.fitness(enhance(genes))

    return objective


def optimize_image(low, reference, method="tuna", cfg=GAConfig(), bounds=None,
                   settings=PipelineSettings()):
    """Best of ``cfg.runs`` GA runs (seeds ``rng_seed + i``) tuning one image.

    The returned trace and seed belong to the winning run; evaluation counts
    are summed over all runs.
    """
    pipeline = get_method(method)
    bounds = bounds or pipeline.default_bounds
    if len(bounds) != len(pipeline.gene_names):
        raise ValueError(f"{method} needs {len(pipeline.gene_names)} bounds, got {len(bounds)}")
    objective = image_objective(low, reference, method, settings)

    best = None
    run_best = []
    evaluations = invalid = 0
    with warnings.catch_warnings():
        # flat planes are scored like any other candidate
        warnings.simplefilter("ignore", DegenerateInputWarning)
        for i in range(cfg.runs):
            result = evolve(objective, bounds, replace(cfg, rng_seed=cfg.rng_seed + i))
            run_best.append(result.best_fitness)
            evaluations += result.evaluations
            invalid += result.invalid_evaluations
            log.debug("run %d/%d best fitness %.6f", i + 1, cfg.runs, result.best_fitness)
            if best is None or result.best_fitness > best.best_fitness:
                best = result
    best.run_best = run_best
    best.evaluations = evaluations
    best.invalid_evaluations = invalid
    return best
