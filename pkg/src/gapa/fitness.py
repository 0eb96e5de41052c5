"""Batch fitness functions for the supported perturbation tasks.

Each fitness object maps an ``s x k`` population to a length-``s`` float
vector.  The value of a row depends only on that row, which is what lets
the parallel modes shard populations freely.  ``evaluate_one`` is the
scalar path used by the serial reference mode.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc

from .community import detect_communities, modularity
from .ga import MINIMIZE
from .graph import (
    EDGE_ADDITION,
    EDGE_FLIP,
    EDGE_REMOVAL,
    NODE_REMOVAL,
    Graph,
    GenePool,
    Perturbation,
    apply_perturbation,
    connected_components,
    largest_component_size,
    pairwise_connectivity,
)
from .linkpred import LinkPredictionSplit, auc_score, ra_scores

CND_SIXDST = "cnd-sixdst"
CND_PC = "cnd-pc"
CDA_MODULARITY = "cda-modularity"
LPA_SIMILARITY = "lpa-similarity"
TASKS = (CND_SIXDST, CND_PC, CDA_MODULARITY, LPA_SIMILARITY)

COMPATIBLE_KINDS = {
    CND_SIXDST: (NODE_REMOVAL,),
    CND_PC: (NODE_REMOVAL,),
    CDA_MODULARITY: (EDGE_REMOVAL, EDGE_ADDITION, EDGE_FLIP),
    LPA_SIMILARITY: (EDGE_REMOVAL,),
}

SIX_DEGREES_SQUARINGS = 3  # (A + I)^8 covers every path of length <= 6
EDGELESS_Q = -0.5


def accessibility_matrix(A, fast: bool = False, return_steps: bool = False):
    """Reachability closure of ``A`` by repeated boolean squaring of ``A + I``.

    Stops at the first product equal to its input.  ``fast`` instead runs a
    fixed three squarings, exact only when every component has diameter at
    most 8.
    """
    A = np.asarray(A)
    n = A.shape[0]
    B = ((A != 0) | np.eye(n, dtype=bool)).astype(np.float32)
    steps = 0
    while True:
        C = ((B @ B) > 0).astype(np.float32)
        steps += 1
        if fast:
            done = steps >= SIX_DEGREES_SQUARINGS
        else:
            done = np.array_equal(C, B)
        B = C
        if done:
            break
    M = B.astype(bool)
    return (M, steps) if return_steps else M


def _block_diagonal(n: int, edge_blocks) -> sp.csr_matrix:
    """``A + I`` for a batch of edge sets as one block-diagonal sparse matrix."""
    b = len(edge_blocks)
    rows = [np.arange(b * n)]
    cols = [np.arange(b * n)]
    for i, edges in enumerate(edge_blocks):
        if len(edges):
            off = i * n
            rows += [edges[:, 0] + off, edges[:, 1] + off]
            cols += [edges[:, 1] + off, edges[:, 0] + off]
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    data = np.ones(len(r), dtype=np.int32)
    return sp.csr_matrix((data, (r, c)), shape=(b * n, b * n))


def batch_reach_counts(n: int, edge_blocks, fast: bool = False) -> np.ndarray:
    """Row sums of the accessibility matrix for each edge set, shape ``(b, n)``.

    The whole batch is squared as one stacked ``b x n x n`` array; a stack
    that has reached its fixpoint is unchanged by further squaring.
    """
    b = len(edge_blocks)
    B = np.zeros((b, n, n), dtype=np.float32)
    idx = np.arange(n)
    B[:, idx, idx] = 1
    for i, edges in enumerate(edge_blocks):
        if len(edges):
            B[i, edges[:, 0], edges[:, 1]] = 1
            B[i, edges[:, 1], edges[:, 0]] = 1
    steps = 0
    while True:
        C = (np.matmul(B, B) > 0).astype(np.float32)
        steps += 1
        done = steps >= SIX_DEGREES_SQUARINGS if fast else np.array_equal(C, B)
        B = C
        if done:
            break
    return B.sum(axis=2).astype(np.int64)


def component_reach_counts(n: int, edge_blocks) -> np.ndarray:
    """Same values as ``batch_reach_counts`` read off component labels.

    Row ``u`` of the closure holds exactly the component of ``u``, so its sum
    is that component's size.  Used for graphs too large to square densely.
    """
    _, labels = _cc(_block_diagonal(n, edge_blocks), directed=False)
    sizes = np.bincount(labels)
    return sizes[labels].reshape(len(edge_blocks), n)


def _removal_edge_blocks(graph: Graph, pool: GenePool, pop) -> list:
    edges = graph.edges
    pop = np.asarray(pop)
    removed = np.zeros((len(pop), graph.n), dtype=bool)
    removed[np.repeat(np.arange(len(pop)), pop.shape[1]), pool.genes[pop.ravel()]] = True
    keep = ~(removed[:, edges[:, 0]] | removed[:, edges[:, 1]])
    return [edges[row] for row in keep]


class BatchFitness:
    """Common plumbing: a row-wise cache and the batch/scalar entry points."""

    task = ""
    direction = MINIMIZE

    def __init__(self, graph: Graph, pool: GenePool, cache_size: int = 20000):
        compatible = COMPATIBLE_KINDS.get(self.task, ())
        if compatible and pool.kind not in compatible:
            raise ValueError(f"{self.task} needs a {' or '.join(compatible)} pool, got {pool.kind}")
        self.graph = graph
        self.pool = pool
        self.adjacency = graph.adjacency()
        self.adjacency.setflags(write=False)
        self.cache_size = cache_size
        self._cache: OrderedDict = OrderedDict()
        self.calls = 0

    def key(self, genes) -> bytes:
        # genes act as a set: order and repeats do not change the perturbed graph
        return np.unique(np.asarray(genes, dtype=np.int64)).tobytes()

    def perturbed(self, genes) -> np.ndarray:
        return apply_perturbation(self.adjacency, Perturbation(self.pool, genes))

    def score(self, genes) -> float:
        raise NotImplementedError

    def score_batch(self, pop) -> np.ndarray:
        return np.array([self.score(row) for row in pop], dtype=float)

    def _lookup(self, genes):
        if not self.cache_size:
            return None, None
        key = self.key(genes)
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
        return key, hit

    def _store(self, key, value):
        if key is None:
            return
        self._cache[key] = value
        if len(self._cache) > self.cache_size:
            self._cache.popitem(last=False)

    def evaluate_one(self, genes) -> float:
        key, hit = self._lookup(genes)
        if hit is not None:
            return hit
        value = float(self.score(genes))
        self._store(key, value)
        return value

    def __call__(self, pop) -> np.ndarray:
        self.calls += 1
        pop = np.asarray(pop)
        out = np.empty(len(pop))
        todo, keys = [], []
        for i, row in enumerate(pop):
            key, hit = self._lookup(row)
            if hit is None:
                todo.append(i)
                keys.append(key)
            else:
                out[i] = hit
        if todo:
            values = self.score_batch(pop[todo])
            out[todo] = values
            for key, value in zip(keys, values):
                self._store(key, float(value))
        return out

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_cache"] = OrderedDict()
        return state


class SixDSTFitness(BatchFitness):
    """Largest connected component size (MCN) read off the accessibility matrix."""

    task = CND_SIXDST

    def __init__(self, graph, pool, fast: bool = False, dense_limit: int = 256, **kw):
        super().__init__(graph, pool, **kw)
        self.fast = fast
        self.dense_limit = dense_limit

    def score(self, genes) -> float:
        M = accessibility_matrix(self.perturbed(genes), fast=self.fast)
        return float(M.sum(axis=1).max())

    def score_batch(self, pop) -> np.ndarray:
        blocks = _removal_edge_blocks(self.graph, self.pool, pop)
        if self.graph.n <= self.dense_limit:
            counts = batch_reach_counts(self.graph.n, blocks, fast=self.fast)
        elif self.fast:
            # the six-degrees cut-off only has meaning for the squaring route
            counts = np.stack([accessibility_matrix(apply_perturbation(self.adjacency, Perturbation(self.pool, row)),
                                                    fast=True).sum(axis=1) for row in pop])
        else:
            counts = component_reach_counts(self.graph.n, blocks)
        return counts.max(axis=1).astype(float)


class PCFitness(BatchFitness):
    """Pairwise connectivity of the graph left after node removal."""

    task = CND_PC

    def score(self, genes) -> float:
        return float(pairwise_connectivity(connected_components(self.perturbed(genes))))

    def score_batch(self, pop) -> np.ndarray:
        per_node = component_reach_counts(self.graph.n, _removal_edge_blocks(self.graph, self.pool, pop)) - 1
        return (per_node.sum(axis=1) // 2).astype(float)


class CDAFitness(BatchFitness):
    """Modularity the target detector achieves on the perturbed graph."""

    task = CDA_MODULARITY

    def __init__(self, graph, pool, detector=detect_communities, **kw):
        super().__init__(graph, pool, **kw)
        self.detector = detector

    def score(self, genes) -> float:
        A = self.perturbed(genes)
        if not A.any():
            return EDGELESS_Q
        return modularity(A, self.detector(A))


class LPAFitness(BatchFitness):
    """AUC of the resource-allocation predictor on the perturbed training graph."""

    task = LPA_SIMILARITY

    def __init__(self, split: LinkPredictionSplit, pool: GenePool, **kw):
        super().__init__(split.train, pool, **kw)
        self.split = split
        self._pairs = np.concatenate([split.test_edges, split.probe_nonedges])

    def score(self, genes) -> float:
        s = ra_scores(self.perturbed(genes), self._pairs)
        t = len(self.split.test_edges)
        return auc_score(s[:t], s[t:])


def sixdst_fitness(A, batch, pool, fast: bool = False) -> np.ndarray:
    return SixDSTFitness(Graph.from_adjacency(A), pool, fast=fast, cache_size=0)(batch)


def pc_fitness(A, batch, pool) -> np.ndarray:
    return PCFitness(Graph.from_adjacency(A), pool, cache_size=0)(batch)


def cda_fitness(A, batch, pool, detector=detect_communities) -> np.ndarray:
    return CDAFitness(Graph.from_adjacency(A), pool, detector=detector, cache_size=0)(batch)


def lpa_fitness(split, batch, pool) -> np.ndarray:
    return LPAFitness(split, pool, cache_size=0)(batch)


def mcn(A) -> int:
    return largest_component_size(connected_components(A))


@dataclass(frozen=True)
class FitnessSpec:
    task: str
    direction: str = MINIMIZE
    detector: str = "greedy-modularity"
    split_ratio: float = 0.1
    split_seed: int = 0
    fast: bool = False
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}; expected one of {TASKS}")

    def check_pool_kind(self, kind: str):
        if kind not in COMPATIBLE_KINDS[self.task]:
            raise ValueError(
                f"task {self.task} is incompatible with a {kind} pool "
                f"(allowed: {', '.join(COMPATIBLE_KINDS[self.task])})"
            )


DETECTORS = {"greedy-modularity": detect_communities}


def make_fitness(spec: FitnessSpec, graph: Graph, pool: GenePool, split=None) -> BatchFitness:
    spec.check_pool_kind(pool.kind)
    if spec.task == CND_SIXDST:
        return SixDSTFitness(graph, pool, fast=spec.fast)
    if spec.task == CND_PC:
        return PCFitness(graph, pool)
    if spec.task == CDA_MODULARITY:
        return CDAFitness(graph, pool, detector=DETECTORS[spec.detector])
    if split is None:
        raise ValueError("lpa-similarity needs a link-prediction split")
    return LPAFitness(split, pool)


class RowFitness:
    """Wrap a per-individual function ``fn(genes) -> float`` as a batch evaluator."""

    def __init__(self, fn, direction: str = MINIMIZE):
        self.fn = fn
        self.direction = direction
        self.calls = 0

    def evaluate_one(self, genes) -> float:
        return float(self.fn(np.asarray(genes)))

    def __call__(self, pop) -> np.ndarray:
        self.calls += 1
        return np.array([self.fn(row) for row in np.asarray(pop)], dtype=float)
