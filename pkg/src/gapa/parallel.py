"""Execution modes: serial reference, S, SM, M and MNM.

All modes run the same algorithm.  They differ only in which lane performs
which operator and how population slices travel between lanes:

* ``serial`` -- scalar loops, one individual at a time (timing baseline).
* ``S``      -- whole-population matrix operators on one lane.
* ``SM``     -- operators on the coordinator; fitness sharded over ``pn``
  workers created and destroyed every generation.
* ``M``      -- ``pn`` persistent workers own row blocks and run init,
  mutation and fitness; the coordinator gathers, runs elitism, selection and
  crossover, and scatters the blocks back.
* ``MNM``    -- ``M`` where each worker shards its fitness over ``qn``
  ephemeral inner workers.

Random draws are keyed by global row index, so every mode yields the same
populations for a given seed.
"""

from __future__ import annotations

import bisect
import logging
import multiprocessing
import os
import queue
import threading
import warnings
from dataclasses import dataclass, field
from time import perf_counter

import numpy as np

from . import ga
from .ga import GAParams, GenerationRecord, RunResult
from .rng import CROSSOVER_MASK, EDA, INIT, MUTATION_INDEX, MUTATION_MASK, SELECT, RngPolicy

logger = logging.getLogger(__name__)

SERIAL, S, SM, M, MNM = "serial", "S", "SM", "M", "MNM"
MODES = (SERIAL, S, SM, M, MNM)
BACKENDS = ("process", "thread")
MAX_WORKERS_ENV = "GAPA_MAX_WORKERS"

POPULATION_SLICE = "population-slice"
FITNESS_SLICE = "fitness-slice"
ELITE_BROADCAST = "elite-broadcast"
SHUTDOWN = "shutdown"


@dataclass(frozen=True)
class ModeTopology:
    mode: str = S
    pn: int = 1
    qn: int = 1
    backend: str = "process"
    max_workers: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.pn < 1 or self.qn < 1:
            raise ValueError("worker counts must be positive")
        if self.mode in (SERIAL, S):
            object.__setattr__(self, "pn", 1)
            object.__setattr__(self, "qn", 1)
        elif self.mode in (SM, M):
            object.__setattr__(self, "qn", 1)


@dataclass
class WorkerMessage:
    kind: str
    offset: int = 0
    payload: np.ndarray | None = None
    generation: int = 0
    fitness: np.ndarray | None = None
    busy: float = 0.0
    inner: dict = field(default_factory=dict)


@dataclass
class Timing:
    lifecycle: float = 0.0
    exchange: float = 0.0
    messages: int = 0

    def __iadd__(self, other):
        self.lifecycle += other.lifecycle
        self.exchange += other.exchange
        self.messages += other.messages
        return self


def worker_cap(topology: ModeTopology | None = None) -> int | None:
    """Upper bound on lanes: ``GAPA_MAX_WORKERS`` wins over the config field."""
    raw = os.environ.get(MAX_WORKERS_ENV)
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            cap = 0
        if cap < 1:
            raise ValueError(f"{MAX_WORKERS_ENV} must be a positive integer, got {raw!r}")
        return cap
    return topology.max_workers if topology is not None else None


def effective_workers(count: int, s: int, cap: int | None = None) -> int:
    if cap is not None and count > cap:
        logger.info("worker count %d capped to %d", count, cap)
        count = cap
    if count > s:
        warnings.warn(f"{count} workers for {s} rows; clamping to {s}", RuntimeWarning, stacklevel=3)
        count = s
    return count


def row_blocks(s: int, pn: int) -> list[tuple[int, int]]:
    """Contiguous blocks of ``ceil(s / pn)`` rows; trailing blocks may be short or empty."""
    size = -(-s // pn)
    return [(min(i * size, s), min((i + 1) * size, s)) for i in range(pn)]


# -- lanes -------------------------------------------------------------------


class _QueueEnd:
    def __init__(self, inbox, outbox):
        self._inbox = inbox
        self._outbox = outbox

    def send(self, obj):
        self._outbox.put(obj)

    def recv(self):
        return self._inbox.get()

    def close(self):
        pass


def _fork_context():
    return multiprocessing.get_context("fork")


def _channel(backend: str):
    if backend == "process":
        return _fork_context().Pipe(duplex=True)
    a, b = queue.SimpleQueue(), queue.SimpleQueue()
    return _QueueEnd(a, b), _QueueEnd(b, a)


def _spawn(backend: str, target, args):
    if backend == "process":
        # non-daemonic so MNM workers may start their own inner workers
        lane = _fork_context().Process(target=target, args=args, daemon=False)
    else:
        lane = threading.Thread(target=target, args=args, daemon=True)
    lane.start()
    return lane


def _fitness_worker(fitness, conn):
    msg = conn.recv()
    start = perf_counter()
    fit = np.asarray(fitness(msg.payload), dtype=float)
    conn.send(WorkerMessage(FITNESS_SLICE, msg.offset, None, msg.generation, fit,
                            perf_counter() - start))
    conn.close()


def sharded_fitness(fitness, pop, generation: int, workers: int, backend: str):
    """Evaluate ``pop`` over ephemeral workers, merging slices by row offset."""
    blocks = [b for b in row_blocks(len(pop), workers) if b[1] > b[0]]
    timing = Timing()
    t = perf_counter()
    lanes = []
    for lo, hi in blocks:
        mine, theirs = _channel(backend)
        lanes.append((lo, hi, mine, _spawn(backend, _fitness_worker, (fitness, theirs))))
    timing.lifecycle += perf_counter() - t

    t = perf_counter()
    for lo, hi, conn, _ in lanes:
        conn.send(WorkerMessage(POPULATION_SLICE, lo, pop[lo:hi], generation))
    replies = [conn.recv() for _, _, conn, _ in lanes]
    round_trip = perf_counter() - t
    busy = max(r.busy for r in replies)
    timing.exchange += max(0.0, round_trip - busy)
    timing.messages += 2 * len(lanes)

    t = perf_counter()
    for _, _, conn, lane in lanes:
        lane.join()
        conn.close()
    timing.lifecycle += perf_counter() - t
    return _merge(replies, len(pop)), timing, busy


def _merge(replies, s: int) -> np.ndarray:
    out = np.empty(s)
    covered = 0
    for r in sorted(replies, key=lambda r: r.offset):
        if r.offset != covered:
            raise RuntimeError("fitness slices do not tile the population")
        out[r.offset:r.offset + len(r.fitness)] = r.fitness
        covered += len(r.fitness)
    if covered != s:
        raise RuntimeError("fitness slices do not cover the population")
    return out


# -- engines: who produces initial and offspring populations -----------------


class _LocalEngine:
    """S (``shards == 1``) and SM (fitness sharded over ephemeral workers)."""

    def __init__(self, params, pool, fitness, rng, shards=1, backend="process"):
        self.params, self.pool, self.fitness, self.rng = params, pool, fitness, rng
        self.shards = shards
        self.backend = backend
        self.blocks = row_blocks(params.s, shards)

    def _evaluate(self, pop, generation):
        if self.shards == 1:
            return np.asarray(self.fitness(pop), dtype=float), Timing()
        fit, timing, _ = sharded_fitness(self.fitness, pop, generation, self.shards, self.backend)
        return fit, timing

    def initial(self):
        p = self.params
        pop = ga.init_population(self.pool, p.s, p.k, self.rng)
        fit, timing = self._evaluate(pop, 0)
        return pop, fit, timing

    def offspring(self, c_pop, generation):
        m_pop = ga.mutate(c_pop, self.params.pm, self.pool, self.rng, generation)
        fit, timing = self._evaluate(m_pop, generation)
        return m_pop, fit, timing

    def close(self):
        return Timing()


def _island_worker(fitness, pool_size, params, seed, lo, hi, qn, backend, conn):
    rng = RngPolicy(seed)
    rows = range(lo, hi)

    def evaluate(block, generation):
        start = perf_counter()
        if qn == 1:
            fit = np.asarray(fitness(block), dtype=float)
            inner = {}
        else:
            fit, timing, _ = sharded_fitness(fitness, block, generation, qn, backend)
            inner = {"lifecycle": timing.lifecycle, "exchange": timing.exchange,
                     "messages": timing.messages}
        return fit, perf_counter() - start, inner

    start = perf_counter()
    block = ga.init_population(pool_size, params.s, params.k, rng, rows)
    fit, _, inner = evaluate(block, 0)
    conn.send(WorkerMessage(FITNESS_SLICE, lo, block, 0, fit, perf_counter() - start, inner))
    while True:
        msg = conn.recv()
        if msg.kind == SHUTDOWN:
            break
        start = perf_counter()
        block = ga.mutate(msg.payload, params.pm, pool_size, rng, msg.generation, rows)
        fit, _, inner = evaluate(block, msg.generation)
        conn.send(WorkerMessage(FITNESS_SLICE, lo, block, msg.generation, fit,
                                perf_counter() - start, inner))
    conn.close()


class _IslandEngine:
    """M and MNM: persistent workers owning contiguous row blocks."""

    def __init__(self, params, pool, fitness, rng, pn, qn=1, backend="process"):
        self.params = params
        self.blocks = [b for b in row_blocks(params.s, pn) if b[1] > b[0]]
        self.lanes = []
        t = perf_counter()
        for lo, hi in self.blocks:
            mine, theirs = _channel(backend)
            args = (fitness, ga._pool_size(pool), params, rng.seed, lo, hi, qn, backend, theirs)
            self.lanes.append((lo, hi, mine, _spawn(backend, _island_worker, args)))
        self.spawn_time = perf_counter() - t

    def _gather(self, generation, sent_at):
        replies = [conn.recv() for _, _, conn, _ in self.lanes]
        round_trip = perf_counter() - sent_at
        for r in replies:
            if r.generation != generation:
                raise RuntimeError("worker answered for the wrong generation")
        replies.sort(key=lambda r: r.offset)
        busy = max(r.busy for r in replies)
        timing = Timing(messages=len(replies))
        timing.exchange = max(0.0, round_trip - busy)
        timing.exchange += max((r.inner.get("exchange", 0.0) for r in replies), default=0.0)
        timing.lifecycle += max((r.inner.get("lifecycle", 0.0) for r in replies), default=0.0)
        timing.messages += sum(r.inner.get("messages", 0) for r in replies)
        pop = np.concatenate([r.payload for r in replies])
        return pop, _merge(replies, self.params.s), timing

    def initial(self):
        pop, fit, timing = self._gather(0, perf_counter())
        timing.lifecycle += self.spawn_time
        return pop, fit, timing

    def offspring(self, c_pop, generation):
        t = perf_counter()
        for lo, hi, conn, _ in self.lanes:
            conn.send(WorkerMessage(POPULATION_SLICE, lo, c_pop[lo:hi], generation))
        pop, fit, timing = self._gather(generation, t)
        timing.messages += len(self.lanes)
        return pop, fit, timing

    def close(self):
        t = perf_counter()
        for _, _, conn, lane in self.lanes:
            conn.send(WorkerMessage(SHUTDOWN))
        for _, _, conn, lane in self.lanes:
            lane.join()
            conn.close()
        return Timing(lifecycle=perf_counter() - t, messages=len(self.lanes))


def _drive(params: GAParams, pool, fitness, engine, topology: ModeTopology) -> RunResult:
    rng = RngPolicy(params.seed)
    history = []
    start = perf_counter()
    try:
        pop, fit, carry = engine.initial()
        pop, fit = ga.sort_population(pop, fit, params.direction)
        # workers spawned in the engine constructor, before this clock started
        init_wall = perf_counter() - start + getattr(engine, "spawn_time", 0.0)
        for g in range(1, params.iterations + 1):
            t = perf_counter()
            c_pop = ga.reproduce(pop, fit, params, pool, rng, g)
            m_pop, fit_m, timing = engine.offspring(c_pop, g)
            pop, fit = ga.elitism(pop, m_pop, fit, fit_m, params.direction)
            wall = perf_counter() - t
            if g == 1:
                wall += init_wall
                timing += carry
            history.append(_record(g, fit, wall, timing))
    finally:
        teardown = engine.close()
    return _result(pop, fit, history, params, topology, fitness,
                   {"teardown": teardown.lifecycle, "blocks": getattr(engine, "blocks", [])})


def _record(g, fit, wall, timing: Timing) -> GenerationRecord:
    lifecycle = min(timing.lifecycle, wall)
    exchange = min(timing.exchange, wall - lifecycle)
    return GenerationRecord(g, float(fit[0]), float(np.mean(fit)), wall,
                            wall - lifecycle - exchange, exchange, lifecycle, timing.messages)


def _result(pop, fit, history, params, topology, fitness, extra) -> RunResult:
    return RunResult(
        best=pop[0].copy(),
        best_fitness=float(fit[0]),
        history=history,
        population=pop,
        fitness=fit,
        mode=topology.mode,
        pn=topology.pn,
        qn=topology.qn,
        fitness_calls=getattr(fitness, "calls", 0),
        extra=extra,
    )


# -- scalar reference ----------------------------------------------------------


def _serial_generation(pop, fit, params, pool_size, rng, g, fitness):
    s, k = params.s, params.k
    if params.uses_eda(g):
        probs = ga.locus_distribution(pop[: params.elite_count], pool_size, params.eda_smoothing)
        cdf = np.cumsum(probs, axis=1)
        cdf[:, -1] = 1.0
        cdfs = [c.tolist() for c in cdf]
        c_pop = []
        for i in range(s):
            u = rng.stream(g, EDA, i).random(k)
            c_pop.append([bisect.bisect_right(cdfs[j], u[j]) for j in range(k)])
    else:
        cumulative = np.cumsum(ga.rank_weights(fit, params.direction)).tolist()
        total = cumulative[-1]
        c_pop = []
        for i in range(s):
            spin = rng.stream(g, SELECT, i).random(1)[0] * total
            partner = bisect.bisect_right(cumulative, spin)
            partner = min(partner, s - 1)
            mask = rng.stream(g, CROSSOVER_MASK, i).random(k)
            c_pop.append([pop[partner][j] if mask[j] < params.pc else pop[i][j] for j in range(k)])
    m_pop = []
    for i in range(s):
        mask = rng.stream(g, MUTATION_MASK, i).random(k)
        fresh = rng.stream(g, MUTATION_INDEX, i).integers(0, pool_size, size=k)
        m_pop.append([int(fresh[j]) if mask[j] < params.pm else int(c_pop[i][j]) for j in range(k)])
    fit_m = [fitness.evaluate_one(np.array(row, dtype=np.int64)) for row in m_pop]
    stacked = pop + m_pop
    values = fit + fit_m
    if any(v != v for v in values):
        raise ValueError("NaN fitness reached elitism")
    sign = -1.0 if params.direction == ga.MAXIMIZE else 1.0
    order = sorted(range(2 * s), key=lambda idx: sign * values[idx])[:s]
    return [stacked[idx] for idx in order], [values[idx] for idx in order]


def run_serial(params: GAParams, pool, fitness) -> RunResult:
    """Loop-based reference: one individual and one gene at a time."""
    topology = ModeTopology(SERIAL)
    rng = RngPolicy(params.seed)
    pool_size = ga._pool_size(pool)
    start = perf_counter()
    pop = [rng.stream(0, INIT, i).integers(0, pool_size, size=params.k).tolist()
           for i in range(params.s)]
    fit = [fitness.evaluate_one(np.array(row, dtype=np.int64)) for row in pop]
    sign = -1.0 if params.direction == ga.MAXIMIZE else 1.0
    order = sorted(range(params.s), key=lambda idx: sign * fit[idx])
    pop, fit = [pop[i] for i in order], [fit[i] for i in order]
    init_wall = perf_counter() - start
    history = []
    for g in range(1, params.iterations + 1):
        t = perf_counter()
        pop, fit = _serial_generation(pop, fit, params, pool_size, rng, g, fitness)
        wall = perf_counter() - t + (init_wall if g == 1 else 0.0)
        history.append(GenerationRecord(g, float(fit[0]), float(np.mean(fit)), wall, wall))
    return _result(np.array(pop, dtype=np.int64), np.array(fit, dtype=float), history,
                   params, topology, fitness, {"teardown": 0.0, "blocks": [(0, params.s)]})


# -- public entry points ---------------------------------------------------------


def run_mode_s(params: GAParams, pool, fitness) -> RunResult:
    topology = ModeTopology(S)
    engine = _LocalEngine(params, pool, fitness, RngPolicy(params.seed))
    return _drive(params, pool, fitness, engine, topology)


def run_mode_sm(params: GAParams, pool, fitness, pn: int, backend: str = "process",
                max_workers: int | None = None) -> RunResult:
    topology = ModeTopology(SM, pn, 1, backend, max_workers)
    pn = effective_workers(pn, params.s, worker_cap(topology))
    topology = ModeTopology(SM, pn, 1, backend, max_workers)
    engine = _LocalEngine(params, pool, fitness, RngPolicy(params.seed), pn, backend)
    return _drive(params, pool, fitness, engine, topology)


def run_mode_m(params: GAParams, pool, fitness, pn: int, backend: str = "process",
               max_workers: int | None = None) -> RunResult:
    return run_mode_mnm(params, pool, fitness, pn, 1, backend, max_workers, _mode=M)


def run_mode_mnm(params: GAParams, pool, fitness, pn: int, qn: int, backend: str = "process",
                 max_workers: int | None = None, _mode: str = MNM) -> RunResult:
    topology = ModeTopology(_mode, pn, qn, backend, max_workers)
    cap = worker_cap(topology)
    pn = effective_workers(pn, params.s, cap)
    qn = effective_workers(qn, -(-params.s // pn), cap)
    topology = ModeTopology(_mode, pn, qn, backend, max_workers)
    engine = _IslandEngine(params, pool, fitness, RngPolicy(params.seed), pn, qn, backend)
    return _drive(params, pool, fitness, engine, topology)


def run(params: GAParams, pool, fitness, topology: ModeTopology) -> RunResult:
    mode = topology.mode
    if mode == SERIAL:
        return run_serial(params, pool, fitness)
    if mode == S:
        return run_mode_s(params, pool, fitness)
    if mode == SM:
        return run_mode_sm(params, pool, fitness, topology.pn, topology.backend, topology.max_workers)
    if mode == M:
        return run_mode_m(params, pool, fitness, topology.pn, topology.backend, topology.max_workers)
    return run_mode_mnm(params, pool, fitness, topology.pn, topology.qn, topology.backend,
                        topology.max_workers)


def overhead_report(result: RunResult) -> list[dict]:
    """Per-generation split of wall time into compute, exchange and lifecycle."""
    if not result.history:
        raise ValueError("run has no recorded generations")
    return [
        {"generation": rec.generation, "compute": rec.compute, "exchange": rec.exchange,
         "lifecycle": rec.lifecycle, "wall": rec.wall, "messages": rec.messages}
        for rec in result.history
    ]
