"""Genetic refinement of table genotypes against a target skeleton.

Each epoch keeps the best individual unchanged (elitism), mutates a
rank-selected share of the rest, and fills the remaining slots with mutated
crossover offspring. The run stops when the best objective stops improving
by more than a relative epsilon for a window of consecutive epochs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    DEFAULT_MAX_CARDINALITY,
    PageSpec,
    TableGenotype,
    canonicalize,
)
from .objectives import ObjectiveSpec, candidate_phenotype, fitness_value, objective_value
from .raster import RasterImage
from .skeleton_source import SkeletonTarget

# Denominator guard for relative improvement when the objective reaches 0.
CONVERGENCE_FLOOR = 1e-9

STRUCTURAL_OPS = ("add", "merge", "remove")


@dataclass(frozen=True)
class GaParams:
    population_size: int = 50
    survival_rate: float = 0.7
    per_entry_mutation_prob: float = 0.1
    structural_mutation_prob_per_dim: float = 0.1
    convergence_epsilon: float = 0.01
    convergence_window: int = 3
    max_epochs: int = 200
    geometry_mutation_step: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if not 0.0 < self.survival_rate < 1.0:
            raise ValueError("survival_rate must lie strictly between 0 and 1")
        for p in (self.per_entry_mutation_prob, self.structural_mutation_prob_per_dim):
            if not 0.0 <= p <= 1.0:
                raise ValueError("mutation probabilities must lie in [0, 1]")
        if self.convergence_window < 1:
            raise ValueError("convergence_window must be at least 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")
        if self.geometry_mutation_step < 1:
            raise ValueError("geometry_mutation_step must be at least 1")


@dataclass(frozen=True)
class FitResult:
    best_genotype: TableGenotype
    best_fitness: float
    best_objective: float
    epochs_run: int
    per_epoch_best: tuple
    converged: bool


def _signed_step(rng, step: int) -> int:
    # Uniform over +-{1..step}; zero is excluded so a mutated entry always moves.
    magnitude = int(rng.integers(1, step + 1))
    return magnitude if rng.random() < 0.5 else -magnitude


def _structural(dims: list, rng, cap: int) -> list:
    """Apply one equiprobable structural operation, skipping infeasible ones.
    Every operation preserves the summed extent, so page fit is unaffected."""
    op = STRUCTURAL_OPS[int(rng.integers(0, len(STRUCTURAL_OPS)))]
    if op == "add":
        splittable = [i for i, d in enumerate(dims) if d >= 2]
        if len(dims) >= cap or not splittable:
            return dims
        i = splittable[int(rng.integers(0, len(splittable)))]
        half = dims[i] // 2
        return dims[:i] + [half, dims[i] - half] + dims[i + 1 :]
    if op == "merge":
        if len(dims) < 2:
            return dims
        i = int(rng.integers(0, len(dims) - 1))
        return dims[:i] + [dims[i] + dims[i + 1]] + dims[i + 2 :]
    if len(dims) < 2:  # remove cannot go below one row/column
        return dims
    i = int(rng.integers(0, len(dims)))
    out = list(dims)
    extent = out.pop(i)
    out[i - 1 if i > 0 else 0] += extent
    return out


def mutate(
    g: TableGenotype,
    params: GaParams,
    rng,
    page: PageSpec | None = None,
    max_cardinality: int = DEFAULT_MAX_CARDINALITY,
) -> TableGenotype:
    """Per-entry geometric perturbation plus per-dimension structural change.

    Geometric deltas that would push the table off the page are reverted
    entry by entry; sizes are clamped to stay positive so the effective
    cardinality only changes through the structural operations.
    """
    page = page or PageSpec()
    g = canonicalize(g)
    step = params.geometry_mutation_step
    p = params.per_entry_mutation_prob
    heights = list(g.row_heights)
    widths = list(g.col_widths)
    limit_x = page.width - 1
    limit_y = page.height - 1

    x0 = g.origin_x
    if rng.random() < p:
        moved = max(0, x0 + _signed_step(rng, step))
        if moved + sum(widths) <= limit_x:
            x0 = moved
    y0 = g.origin_y
    if rng.random() < p:
        moved = max(0, y0 + _signed_step(rng, step))
        if moved + sum(heights) <= limit_y:
            y0 = moved
    for i in range(len(heights)):
        if rng.random() < p:
            old = heights[i]
            heights[i] = max(1, old + _signed_step(rng, step))
            if y0 + sum(heights) > limit_y:
                heights[i] = old
    for j in range(len(widths)):
        if rng.random() < p:
            old = widths[j]
            widths[j] = max(1, old + _signed_step(rng, step))
            if x0 + sum(widths) > limit_x:
                widths[j] = old

    if rng.random() < params.structural_mutation_prob_per_dim:
        heights = _structural(heights, rng, max_cardinality)
    if rng.random() < params.structural_mutation_prob_per_dim:
        widths = _structural(widths, rng, max_cardinality)

    return TableGenotype(
        max_rows=len(heights),
        max_cols=len(widths),
        origin_x=x0,
        origin_y=y0,
        row_heights=tuple(heights),
        col_widths=tuple(widths),
    )


def crossover(parent_a: TableGenotype, parent_b: TableGenotype) -> TableGenotype:
    """Child takes the x origin and columns from the first parent, the y origin
    and rows from the second. Page fit holds because each axis is inherited
    whole from a fitting parent."""
    a = canonicalize(parent_a)
    b = canonicalize(parent_b)
    return TableGenotype(
        max_rows=b.max_rows,
        max_cols=a.max_cols,
        origin_x=a.origin_x,
        origin_y=b.origin_y,
        row_heights=b.row_heights,
        col_widths=a.col_widths,
    )


def evolve(
    target: SkeletonTarget,
    spec: ObjectiveSpec,
    init,
    params: GaParams,
    *,
    page: PageSpec | None = None,
    scan: RasterImage | None = None,
    max_cardinality: int = DEFAULT_MAX_CARDINALITY,
    epoch_callback=None,
) -> FitResult:
    """Run the evolutionary loop until convergence or the epoch cap.

    init may hold any number of genotypes; the population is padded with
    mutated copies (or truncated) to exactly params.population_size.
    epoch_callback, when given, receives (epoch, best_genotype, best_fitness)
    after each evaluation.
    """
    if not init:
        raise ValueError("initial population must not be empty")
    page = page or PageSpec()
    rng = np.random.default_rng(params.seed)
    pop = [canonicalize(g) for g in init][: params.population_size]
    k = 0
    while len(pop) < params.population_size:
        pop.append(mutate(pop[k % len(init)], params, rng, page, max_cardinality))
        k += 1

    memo: dict = {}

    def evaluate(g: TableGenotype) -> float:
        if g not in memo:
            memo[g] = objective_value(spec, target, candidate_phenotype(g, page), scan)
        return memo[g]

    trace: list = []
    prev_best = None
    stall = 0
    converged = False
    epochs = 0
    best_genotype = pop[0]

    for epoch in range(1, params.max_epochs + 1):
        epochs = epoch
        fits = np.array([fitness_value(spec, evaluate(g)) for g in pop])
        order = np.argsort(fits, kind="stable")
        best_idx = int(order[-1])
        best_fit = float(fits[best_idx])
        best_genotype = pop[best_idx]
        if trace:
            # Elitism guarantee: deterministic objectives cannot regress.
            assert best_fit >= trace[-1], "best fitness regressed across epochs"
        trace.append(best_fit)
        if epoch_callback is not None:
            epoch_callback(epoch, best_genotype, best_fit)

        if prev_best is not None:
            rel = abs(best_fit - prev_best) / max(abs(prev_best), CONVERGENCE_FLOOR)
            stall = stall + 1 if rel < params.convergence_epsilon else 0
            if stall >= params.convergence_window:
                converged = True
                break
        prev_best = best_fit

        if epoch == params.max_epochs:
            break

        ranked = [pop[i] for i in order]  # worst to best
        weights = np.arange(1, len(ranked) + 1, dtype=np.float64)
        probs = weights / weights.sum()
        n_rest = params.population_size - 1
        n_survivors = int(round(params.survival_rate * n_rest))
        nxt = [ranked[-1]]  # elite, unmutated
        for i in rng.choice(len(ranked), size=n_survivors, p=probs):
            nxt.append(mutate(ranked[i], params, rng, page, max_cardinality))
        while len(nxt) < params.population_size:
            ia, ib = rng.choice(len(ranked), size=2, p=probs)
            child = crossover(ranked[int(ia)], ranked[int(ib)])
            nxt.append(mutate(child, params, rng, page, max_cardinality))
        pop = nxt

    best_objective = memo[best_genotype]
    return FitResult(
        best_genotype=best_genotype,
        best_fitness=float(trace[-1]),
        best_objective=float(best_objective),
        epochs_run=epochs,
        per_epoch_best=tuple(trace),
        converged=converged,
    )
