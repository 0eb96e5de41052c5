"""Matrix-form genetic operators and the run entry point.

A population is an ``s x k`` integer matrix of gene ids.  Operators that
touch individual rows accept ``rows`` so a worker can produce just its own
block; the random numbers for a row only depend on its global index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .rng import CROSSOVER_MASK, EDA, INIT, MUTATION_INDEX, MUTATION_MASK, SELECT, RngPolicy

MAXIMIZE = "maximize"
MINIMIZE = "minimize"


def _pool_size(pool) -> int:
    size = pool if isinstance(pool, (int, np.integer)) else len(pool)
    if size < 1:
        raise ValueError("gene pool is empty")
    return int(size)


def _rows(rows, s):
    return range(s) if rows is None else rows


@dataclass(frozen=True)
class GAParams:
    pc: float
    pm: float
    s: int
    k: int
    iterations: int
    direction: str = MAXIMIZE
    eda_interval: int | None = None
    eda_elite: int | None = None
    eda_smoothing: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.s < 2:
            raise ValueError("population size must be at least 2")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not (0.0 <= self.pc <= 1.0 and 0.0 <= self.pm <= 1.0):
            raise ValueError("rates must lie in [0, 1]")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if self.direction not in (MAXIMIZE, MINIMIZE):
            raise ValueError(f"direction must be {MAXIMIZE!r} or {MINIMIZE!r}")
        if self.eda_interval is not None and self.eda_interval < 1:
            raise ValueError("eda_interval must be a positive integer")
        if self.eda_elite is not None and not 1 <= self.eda_elite <= self.s:
            raise ValueError("eda_elite must lie in [1, s]")

    @property
    def elite_count(self) -> int:
        return self.eda_elite if self.eda_elite is not None else max(1, self.s // 2)

    def uses_eda(self, generation: int) -> bool:
        return self.eda_interval is not None and generation % self.eda_interval == 0


@dataclass
class GenerationRecord:
    generation: int
    best: float
    mean: float
    wall: float
    compute: float = 0.0
    exchange: float = 0.0
    lifecycle: float = 0.0
    messages: int = 0


@dataclass
class RunResult:
    best: np.ndarray
    best_fitness: float
    history: list
    population: np.ndarray
    fitness: np.ndarray
    mode: str = "S"
    pn: int = 1
    qn: int = 1
    fitness_calls: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def wall_time(self) -> float:
        return float(sum(rec.wall for rec in self.history))


def init_population(pool, s: int, k: int, rng: RngPolicy, rows=None) -> np.ndarray:
    size = _pool_size(pool)
    return rng.integers(0, INIT, _rows(rows, s), k, size)


def rank_weights(fit, direction: str) -> np.ndarray:
    """Weight ``s - r`` for the individual of rank ``r`` (best is rank 0); ties share the mean rank."""
    fit = np.asarray(fit, dtype=float)
    if not np.isfinite(fit).all():
        raise ValueError("fitness values must be finite")
    ranks = rankdata(-fit if direction == MAXIMIZE else fit, method="average") - 1.0
    return len(fit) - ranks


def roulette_wheel(weights, rng: RngPolicy, generation: int, rows) -> np.ndarray:
    """Spin the wheel once per row; returns chosen indices."""
    weights = np.asarray(weights, dtype=float)
    cumulative = np.cumsum(weights)
    total = cumulative[-1]
    u = rng.uniform(generation, SELECT, rows, 1)[:, 0]
    if total <= 0:
        return np.minimum((u * len(weights)).astype(np.int64), len(weights) - 1)
    idx = np.searchsorted(cumulative, u * total, side="right")
    return np.minimum(idx, len(weights) - 1)


def roulette_select(pop, fit, direction: str, rng: RngPolicy, generation: int = 1) -> np.ndarray:
    """Partner matrix: ``s`` rows drawn with replacement by rank-weighted roulette."""
    pop = np.asarray(pop)
    idx = roulette_wheel(rank_weights(fit, direction), rng, generation, range(len(pop)))
    return pop[idx]


def crossover_mask(shape, pc: float, rng: RngPolicy, generation: int, rows=None) -> np.ndarray:
    s, k = shape
    return rng.uniform(generation, CROSSOVER_MASK, _rows(rows, s), k) < pc


def crossover(pop, pc_matrixed, pc: float, rng: RngPolicy, generation: int = 1, rows=None) -> np.ndarray:
    """Take each position from the partner matrix where the crossover mask is set."""
    pop = np.asarray(pop)
    mask = crossover_mask(pop.shape, pc, rng, generation, rows)
    return np.where(mask, pc_matrixed, pop)


def mutation_mask(shape, pm: float, rng: RngPolicy, generation: int, rows=None) -> np.ndarray:
    s, k = shape
    return rng.uniform(generation, MUTATION_MASK, _rows(rows, s), k) < pm


def mutate(c_pop, pm: float, pool, rng: RngPolicy, generation: int = 1, rows=None) -> np.ndarray:
    c_pop = np.asarray(c_pop)
    s, k = c_pop.shape
    rows = _rows(rows, s)
    mask = mutation_mask(c_pop.shape, pm, rng, generation, rows)
    fresh = rng.integers(generation, MUTATION_INDEX, rows, k, _pool_size(pool))
    return np.where(mask, fresh, c_pop)


def elitism(pop, m_pop, fit_pop, fit_m, direction: str):
    """Best ``s`` of the ``2s`` stacked rows, parents ahead of offspring on ties."""
    fit = np.concatenate([np.asarray(fit_pop, dtype=float), np.asarray(fit_m, dtype=float)])
    if np.isnan(fit).any():
        raise ValueError("NaN fitness reached elitism")
    stacked = np.concatenate([pop, m_pop])
    key = -fit if direction == MAXIMIZE else fit
    order = np.argsort(key, kind="stable")[: len(pop)]
    return stacked[order], fit[order]


def sort_population(pop, fit, direction: str):
    key = -np.asarray(fit) if direction == MAXIMIZE else np.asarray(fit)
    order = np.argsort(key, kind="stable")
    return pop[order], np.asarray(fit, dtype=float)[order]


def locus_distribution(elite, pool, smoothing: float = 0.0) -> np.ndarray:
    """``k x |pool|`` per-locus gene probabilities estimated from the elite rows."""
    elite = np.asarray(elite)
    size = _pool_size(pool)
    k = elite.shape[1]
    counts = np.full((k, size), float(smoothing))
    for j in range(k):
        counts[j] += np.bincount(elite[:, j], minlength=size)
    return counts / counts.sum(axis=1, keepdims=True)


def eda_sample(elite, elite_count: int, pool, rng: RngPolicy, generation: int = 1,
               s: int | None = None, smoothing: float = 0.0, rows=None) -> np.ndarray:
    """Sample a population column-wise from the top ``elite_count`` rows of ``elite``."""
    elite = np.asarray(elite)
    if not 1 <= elite_count <= len(elite):
        raise ValueError("elite_count must lie in [1, len(elite)]")
    s = len(elite) if s is None else s
    rows = _rows(rows, s)
    probs = locus_distribution(elite[:elite_count], pool, smoothing)
    cdf = np.cumsum(probs, axis=1)
    cdf[:, -1] = 1.0
    u = rng.uniform(generation, EDA, rows, elite.shape[1])
    out = np.empty(u.shape, dtype=np.int64)
    for j in range(elite.shape[1]):
        out[:, j] = np.searchsorted(cdf[j], u[:, j], side="right")
    return out


def reproduce(pop, fit, params: GAParams, pool, rng: RngPolicy, generation: int) -> np.ndarray:
    """Population-wide half of a generation: select and cross over, or EDA sampling."""
    if params.uses_eda(generation):
        return eda_sample(pop, params.elite_count, pool, rng, generation,
                          smoothing=params.eda_smoothing)
    partners = roulette_select(pop, fit, params.direction, rng, generation)
    return crossover(pop, partners, params.pc, rng, generation)


def run_ga(params: GAParams, pool, fitness_fn, topology=None) -> RunResult:
    """Evolve a population under ``topology`` (defaults to the single-lane mode S)."""
    from .parallel import ModeTopology, run

    if isinstance(params, dict):
        params = GAParams(**params)
    return run(params, pool, fitness_fn, topology or ModeTopology("S"))
