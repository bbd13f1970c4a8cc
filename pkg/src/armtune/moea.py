"""Elitist non-dominated-sorting evolutionary optimizer (minimization).

Problem-agnostic core: rank by Pareto front peeling, spread fronts with
crowding distances, select parents by crowded-comparison binary
tournament, vary with either the real-valued operator family
(intermediate recombination plus breeder-style mutation) or the
SBX/polynomial family, and keep the N best of parents plus offspring
each generation.

Determinism contract: a single seeded generator drives initialization,
selection and variation in a fixed order; objective evaluation must be
RNG-free.  Same seed, same config, same evaluator: identical archives.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

#: objectives assigned when an evaluator raises instead of returning
FAILURE_OBJECTIVES = 1.0e9


@dataclass
class Individual:
    """One candidate solution: genes plus scoring metadata."""

    genes: np.ndarray
    objectives: np.ndarray | None = None
    rank: int | None = None
    crowding: float | None = None


@dataclass(frozen=True)
class OperatorConfig:
    """Variation-operator settings.

    ``family`` selects between the real-valued operators
    (intermediate recombination with per-gene blend drawn from
    [-spread, 1+spread]; mutation steps of size
    range_fraction * (upper-lower) * 2^(-u*precision)) and the
    SBX/polynomial pair with distribution indices ``sbx_eta`` and
    ``poly_eta``.
    """

    crossover_probability: float = 0.9
    mutation_probability: float = 1.0 / 12.0
    family: str = "real"            # "real" | "sbx"
    spread: float = 0.25            # real recombination d
    range_fraction: float = 0.1     # real mutation r
    precision: float = 16.0         # real mutation k
    sbx_eta: float = 20.0
    poly_eta: float = 20.0

    def __post_init__(self):
        if not 0.0 <= self.crossover_probability <= 1.0:
            raise ValueError("crossover probability must be in [0, 1]")
        if not 0.0 <= self.mutation_probability <= 1.0:
            raise ValueError("mutation probability must be in [0, 1]")
        if self.family not in ("real", "sbx"):
            raise ValueError(f"unknown operator family {self.family!r}")
        for name in ("spread", "range_fraction", "precision", "sbx_eta",
                     "poly_eta"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def dominates(a, b) -> bool:
    """True iff objective vector a Pareto-dominates b (minimization)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"objective shapes differ: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def nondominated_sort(objectives) -> list[list[int]]:
    """Peel non-dominated fronts off a population of objective vectors.

    Returns index fronts in rank order.  Straightforward O(m N^2)
    domination table; populations here are small and the simple form is
    easy to check against an oracle.
    """
    F = np.asarray(objectives, dtype=float)
    n = F.shape[0]
    if n == 0:
        raise ValueError("population must be nonempty")
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    dom = le & lt                      # dom[i, j]: i dominates j
    remaining = np.ones(n, dtype=bool)
    fronts = []
    while remaining.any():
        idx = np.flatnonzero(remaining)
        dominated = dom[np.ix_(idx, idx)].any(axis=0)
        members = idx[~dominated]
        fronts.append(members.tolist())
        remaining[members] = False
    return fronts


def crowding_distance(front, objectives) -> np.ndarray:
    """Crowding distances for the members of one front.

    Per objective, the front is sorted; boundary members get +inf and each
    interior member accumulates the normalized gap between its two
    neighbours.  An objective that is constant across the front
    contributes nothing.
    """
    F = np.asarray(objectives, dtype=float)
    front = list(front)
    k = len(front)
    if k == 0:
        raise ValueError("front must be nonempty")
    dist = np.zeros(k)
    if k <= 2:
        return np.full(k, np.inf)
    vals = F[front]
    for m in range(vals.shape[1]):
        order = np.argsort(vals[:, m], kind="stable")
        fm = vals[order, m]
        span = fm[-1] - fm[0]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if span > 0:
            dist[order[1:-1]] += (fm[2:] - fm[:-2]) / span
    return dist


def crowded_compare(a: Individual, b: Individual, rng: np.random.Generator
                    ) -> Individual:
    """Tournament winner: lower rank, then larger crowding, then coin flip."""
    if a.rank != b.rank:
        return a if a.rank < b.rank else b
    if a.crowding != b.crowding:
        return a if a.crowding > b.crowding else b
    return a if rng.random() < 0.5 else b


def _clip(genes, lower, upper):
    return np.minimum(np.maximum(genes, lower), upper)


def recombine_real(p1, p2, lower, upper, config: OperatorConfig,
                   rng: np.random.Generator):
    """Intermediate recombination: per-gene blend around the parent pair.

    With probability crossover_probability each child gene i is
    p1_i + alpha_i (p2_i - p1_i) with alpha_i uniform on
    [-spread, 1+spread] (independent draws per child); otherwise the
    children copy the parents.  Results are clamped to the bounds.
    """
    n = len(p1)
    if rng.random() >= config.crossover_probability:
        return p1.copy(), p2.copy()
    d = config.spread
    a1 = rng.uniform(-d, 1.0 + d, n)
    a2 = rng.uniform(-d, 1.0 + d, n)
    diff = p2 - p1
    return (_clip(p1 + a1 * diff, lower, upper),
            _clip(p1 + a2 * diff, lower, upper))


def mutate_real(genes, lower, upper, config: OperatorConfig,
                rng: np.random.Generator):
    """Breeder-style mutation: rare, mostly small, bounded steps.

    Each gene mutates with probability mutation_probability by
    +/- range_fraction * (upper-lower) * 2^(-u * precision), u uniform on
    [0, 1], with equiprobable sign; the full random arrays are drawn
    regardless of the mask so the stream consumption is fixed.
    """
    n = len(genes)
    mask = rng.random(n) < config.mutation_probability
    u = rng.random(n)
    sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    step = config.range_fraction * (upper - lower) \
        * np.power(2.0, -u * config.precision)
    out = np.where(mask, genes + sign * step, genes)
    return _clip(out, lower, upper)


def recombine_sbx(p1, p2, lower, upper, config: OperatorConfig,
                  rng: np.random.Generator):
    """Simulated binary crossover producing two symmetric children."""
    n = len(p1)
    if rng.random() >= config.crossover_probability:
        return p1.copy(), p2.copy()
    u = rng.uniform(size=n)
    exponent = 1.0 / (config.sbx_eta + 1.0)
    beta = np.where(u <= 0.5,
                    (2.0 * u) ** exponent,
                    (1.0 / (2.0 * (1.0 - u))) ** exponent)
    c1 = 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2)
    c2 = 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2)
    return _clip(c1, lower, upper), _clip(c2, lower, upper)


def mutate_polynomial(genes, lower, upper, config: OperatorConfig,
                      rng: np.random.Generator):
    """Bounded polynomial mutation with distribution index poly_eta."""
    n = len(genes)
    mask = rng.random(n) < config.mutation_probability
    u = rng.random(n)
    span = upper - lower
    eta = config.poly_eta
    dl = (genes - lower) / span
    dr = (upper - genes) / span
    low = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - dl) ** (eta + 1.0)
    high = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - dr) ** (eta + 1.0)
    delta = np.where(u < 0.5,
                     low ** (1.0 / (eta + 1.0)) - 1.0,
                     1.0 - high ** (1.0 / (eta + 1.0)))
    out = np.where(mask, genes + delta * span, genes)
    return _clip(out, lower, upper)


def _vary(p1, p2, lower, upper, config, rng):
    if config.family == "real":
        c1, c2 = recombine_real(p1, p2, lower, upper, config, rng)
        return (mutate_real(c1, lower, upper, config, rng),
                mutate_real(c2, lower, upper, config, rng))
    c1, c2 = recombine_sbx(p1, p2, lower, upper, config, rng)
    return (mutate_polynomial(c1, lower, upper, config, rng),
            mutate_polynomial(c2, lower, upper, config, rng))


@dataclass
class EvolveResult:
    """Outcome of an optimization run.

    ``snapshots[g]`` is the population after generation g's survivor
    selection (``snapshots[0]`` is the evaluated, sorted initial
    population).  ``population`` aliases the final snapshot; ``front`` is
    its rank-1 subset.  ``elapsed`` is wall-clock seconds.
    """

    snapshots: list[list[Individual]]
    elapsed: float
    evaluations: int = 0

    @property
    def population(self) -> list[Individual]:
        return self.snapshots[-1]

    @property
    def front(self) -> list[Individual]:
        return [ind for ind in self.population if ind.rank == 1]


def _rank_population(pop: list[Individual]) -> None:
    objectives = np.array([ind.objectives for ind in pop])
    for front_no, front in enumerate(nondominated_sort(objectives), start=1):
        dists = crowding_distance(front, objectives)
        for i, d in zip(front, dists):
            pop[i].rank = front_no
            pop[i].crowding = float(d)


def _evaluate(pop: list[Individual], evaluate, n_objectives: int,
              map_fn=map) -> int:
    """Score unevaluated individuals; evaluator failures take sentinels."""
    todo = [ind for ind in pop if ind.objectives is None]

    def _safe(genes):
        try:
            obj = np.asarray(evaluate(genes), dtype=float)
        except Exception:
            return np.full(n_objectives, FAILURE_OBJECTIVES)
        if obj.shape != (n_objectives,) or not np.all(np.isfinite(obj)):
            return np.full(n_objectives, FAILURE_OBJECTIVES)
        return obj

    for ind, obj in zip(todo, map_fn(_safe, [ind.genes for ind in todo])):
        ind.objectives = obj
    return len(todo)


def evolve(evaluate, n_genes: int, n_objectives: int, lower, upper,
           population_size: int, generations: int,
           config: OperatorConfig | None = None, seed: int = 0,
           map_fn=map) -> EvolveResult:
    """Run the elitist loop and return the per-generation history.

    ``evaluate(genes) -> objectives`` must be deterministic and RNG-free;
    ``map_fn`` may evaluate a generation's offspring in parallel as long
    as results come back in input order.  ``population_size`` must be
    even (pairs of tournament winners produce two children each) and at
    least 2; every gene stays inside [lower, upper].
    """
    if population_size < 2 or population_size % 2:
        raise ValueError("population size must be even and >= 2")
    if generations < 1:
        raise ValueError("generations must be >= 1")
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (n_genes,)).copy()
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (n_genes,)).copy()
    if not np.all(lower < upper):
        raise ValueError("each lower bound must be below its upper bound")
    config = config or OperatorConfig()
    rng = np.random.default_rng(seed)
    t_start = time.perf_counter()

    pop = [Individual(genes=rng.uniform(lower, upper, n_genes))
           for _ in range(population_size)]
    n_evals = _evaluate(pop, evaluate, n_objectives, map_fn)
    _rank_population(pop)
    snapshots = [pop]

    for _ in range(generations):
        # binary tournaments with replacement, winners paired in draw order
        parents = []
        for _ in range(population_size):
            i, j = rng.integers(0, population_size, size=2)
            parents.append(crowded_compare(pop[i], pop[j], rng))
        offspring = []
        for a, b in zip(parents[0::2], parents[1::2]):
            for genes in _vary(a.genes, b.genes, lower, upper, config, rng):
                offspring.append(Individual(genes=genes))
        n_evals += _evaluate(offspring, evaluate, n_objectives, map_fn)

        merged = [Individual(ind.genes, ind.objectives) for ind in pop]
        merged += offspring
        _rank_population(merged)
        # survivors: best N by (rank asc, crowding desc); stable order
        order = sorted(range(len(merged)),
                       key=lambda i: (merged[i].rank, -merged[i].crowding))
        pop = [merged[i] for i in order[:population_size]]
        _rank_population(pop)
        snapshots.append(pop)

    return EvolveResult(snapshots=snapshots,
                        elapsed=time.perf_counter() - t_start,
                        evaluations=n_evals)


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def write_archive_csv(result: EvolveResult, path) -> None:
    """Per-generation survivors: generation, index, genes, objectives,
    rank, crowding (infinity as the literal string ``inf``)."""
    snaps = result.snapshots[1:]  # survivors only, one block per generation
    _write_rows(path, [(g + 1, i, ind)
                       for g, snap in enumerate(snaps)
                       for i, ind in enumerate(snap)])


def write_front_csv(result: EvolveResult, path) -> None:
    """Rank-1 members of the final population, same columns as the archive."""
    gen = len(result.snapshots) - 1
    _write_rows(path, [(gen, i, ind) for i, ind in enumerate(result.population)
                       if ind.rank == 1])


def _write_rows(path, rows) -> None:
    if not rows:
        raise ValueError("nothing to write")
    n_genes = len(rows[0][2].genes)
    n_obj = len(rows[0][2].objectives)
    cols = (["generation", "individual"]
            + [f"gene_{k+1}" for k in range(n_genes)]
            + [f"objective_{k+1}" for k in range(n_obj)]
            + ["rank", "crowding"])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for gen, idx, ind in rows:
            fields = ([str(gen), str(idx)]
                      + [_fmt(v) for v in ind.genes]
                      + [_fmt(v) for v in ind.objectives]
                      + [str(ind.rank), _fmt(ind.crowding)])
            fh.write(",".join(fields) + "\n")
