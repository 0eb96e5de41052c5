"""Link-prediction split, resource-allocation scores and AUC/precision."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph


@dataclass(frozen=True, eq=False)
class LinkPredictionSplit:
    graph: Graph
    train: Graph
    test_edges: np.ndarray
    probe_nonedges: np.ndarray
    seed: int


def build_lp_split(g: Graph, test_fraction: float = 0.1, seed: int = 0) -> LinkPredictionSplit:
    """Hide a uniform sample of edges and draw an equally sized set of non-edges."""
    if not 0.0 < test_fraction <= 0.5:
        raise ValueError("test_fraction must lie in (0, 0.5]")
    if g.m < 10:
        raise ValueError(f"graph too small for a link-prediction split (m={g.m})")
    rng = np.random.default_rng(seed)
    n_test = max(1, int(math.floor(test_fraction * g.m + 0.5)))
    hidden = np.sort(rng.choice(g.m, size=n_test, replace=False))
    test_edges = g.edges[hidden]
    keep = np.ones(g.m, dtype=bool)
    keep[hidden] = False
    train = Graph(g.n, g.edges[keep], g.labels)

    A = g.adjacency()
    u, v = np.triu_indices(g.n, k=1)
    free = np.flatnonzero(A[u, v] == 0)
    if len(free) < n_test:
        raise ValueError("not enough non-edges to build the probe set")
    picked = np.sort(rng.choice(free, size=n_test, replace=False))
    probes = np.column_stack([u[picked], v[picked]]).astype(np.int64)
    return LinkPredictionSplit(g, train, test_edges, probes, seed)


def _inverse_degree(A) -> np.ndarray:
    deg = A.sum(axis=1).astype(float)
    inv = np.zeros_like(deg)
    np.divide(1.0, deg, out=inv, where=deg > 0)
    return inv


def ra_scores(A, pairs=None) -> np.ndarray:
    """Resource-allocation index.

    With ``pairs`` (``(P, 2)`` array) returns one score per pair; otherwise
    the full symmetric score matrix with a zero diagonal.
    """
    A = np.asarray(A, dtype=float)
    inv = _inverse_degree(A)
    if pairs is not None:
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        return (A[pairs[:, 0]] * A[pairs[:, 1]] * inv).sum(axis=1)
    S = (A * inv) @ A.T
    np.fill_diagonal(S, 0.0)
    return S


def auc_score(positive, negative) -> float:
    """Fraction of (positive, negative) pairs ranked correctly, ties counting half."""
    positive = np.asarray(positive, dtype=float)[:, None]
    negative = np.asarray(negative, dtype=float)[None, :]
    if positive.size == 0 or negative.size == 0:
        raise ValueError("need at least one test edge and one probe")
    wins = np.count_nonzero(positive > negative)
    ties = np.count_nonzero(positive == negative)
    return (wins + 0.5 * ties) / (positive.size * negative.size)


def precision_at_l(split: LinkPredictionSplit, S) -> float:
    """Share of hidden edges among the ``L = |test|`` best-scored unobserved pairs."""
    n = split.graph.n
    u, v = np.triu_indices(n, k=1)
    observed = split.train.adjacency()[u, v].astype(bool)
    cu, cv = u[~observed], v[~observed]
    order = np.argsort(-S[cu, cv], kind="stable")[: len(split.test_edges)]
    hidden = np.zeros((n, n), dtype=bool)
    hidden[split.test_edges[:, 0], split.test_edges[:, 1]] = True
    return float(hidden[cu[order], cv[order]].mean())


def lp_auc_precision(split: LinkPredictionSplit, scores) -> tuple[float, float]:
    """AUC over every (test, probe) pair and precision over the top-L unobserved pairs.

    ``scores`` is a full ``n x n`` score matrix.
    """
    if len(split.test_edges) == 0:
        raise ValueError("split has no test edges")
    S = np.asarray(scores, dtype=float)
    t = S[split.test_edges[:, 0], split.test_edges[:, 1]]
    p = S[split.probe_nonedges[:, 0], split.probe_nonedges[:, 1]]
    return auc_score(t, p), precision_at_l(split, S)
