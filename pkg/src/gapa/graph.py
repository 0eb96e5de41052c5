"""Graph container, edge-list ingestion, gene pools and perturbations.

Adjacency matrices are dense ``uint8`` arrays with values in {0, 1}.  Node
removal zeroes a row/column instead of shrinking the matrix so that every
perturbed copy keeps the original shape.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

EDGE_REMOVAL = "edge-removal"
EDGE_ADDITION = "edge-addition"
EDGE_FLIP = "edge-flip"
NODE_REMOVAL = "node-removal"
POOL_KINDS = (EDGE_REMOVAL, EDGE_ADDITION, EDGE_FLIP, NODE_REMOVAL)
EDGE_KINDS = (EDGE_REMOVAL, EDGE_ADDITION, EDGE_FLIP)

COMMENT_PREFIXES = ("#", "%")


class ParseError(ValueError):
    """Malformed line in an edge-list or community file."""

    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class EmptyPoolError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected, unweighted simple graph on dense ids ``0..n-1``.

    ``edges`` is an ``(m, 2)`` int array with ``u < v`` in every row, sorted
    lexicographically.  ``labels[i]`` is the original label of node ``i``.
    """

    n: int
    edges: np.ndarray
    labels: tuple = ()
    stats: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if (edges[:, 0] == edges[:, 1]).any():
                raise ValueError("self-loops are not allowed")
            if edges.min() < 0 or edges.max() >= self.n:
                raise ValueError("edge endpoint out of range")
        edges = np.sort(edges, axis=1)
        edges = np.unique(edges, axis=0) if len(edges) else edges
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(self.n)))
        elif len(self.labels) != self.n:
            raise ValueError("labels must have one entry per node")

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def label_map(self) -> dict:
        return {label: i for i, label in enumerate(self.labels)}

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n), dtype=np.uint8)
        if self.m:
            A[self.edges[:, 0], self.edges[:, 1]] = 1
            A[self.edges[:, 1], self.edges[:, 0]] = 1
        return A

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.edges, other.edges)
            and self.labels == other.labels
        )

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], labels=()) -> "Graph":
        pairs = [(u, v) for u, v in edges if u != v]
        return cls(n, np.array(pairs, dtype=np.int64).reshape(-1, 2), tuple(labels))

    @classmethod
    def from_adjacency(cls, A: np.ndarray) -> "Graph":
        A = np.asarray(A)
        u, v = np.nonzero(np.triu(A, k=1))
        return cls(A.shape[0], np.column_stack([u, v]))

    @classmethod
    def from_networkx(cls, G) -> "Graph":
        nodes = list(G.nodes())
        index = {node: i for i, node in enumerate(nodes)}
        edges = [(index[u], index[v]) for u, v in G.edges() if u != v]
        return cls(len(nodes), np.array(edges, dtype=np.int64).reshape(-1, 2), tuple(nodes))

    def to_networkx(self):
        import networkx as nx

        G = nx.Graph()
        G.add_nodes_from(range(self.n))
        G.add_edges_from(map(tuple, self.edges.tolist()))
        return G


def _data_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(COMMENT_PREFIXES):
            continue
        yield lineno, line.split()


def load_edge_list(text: str) -> Graph:
    """Parse a whitespace-separated edge list.

    Labels are remapped to dense ids in order of first appearance.  Duplicate
    edges (in either orientation) and self-loops are dropped; the counts end
    up in ``graph.stats``.
    """
    index: dict[str, int] = {}
    seen: set[tuple[int, int]] = set()
    edges = []
    duplicates = self_loops = 0
    for lineno, tokens in _data_lines(text):
        if len(tokens) != 2:
            raise ParseError(f"expected 2 labels, got {len(tokens)}", lineno)
        u, v = (index.setdefault(t, len(index)) for t in tokens)
        if u == v:
            self_loops += 1
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            duplicates += 1
            continue
        seen.add(key)
        edges.append(key)
    if duplicates or self_loops:
        logger.info("dropped %d duplicate edges and %d self-loops", duplicates, self_loops)
    return Graph(
        len(index),
        np.array(edges, dtype=np.int64).reshape(-1, 2),
        tuple(index),
        {"duplicates": duplicates, "self_loops": self_loops},
    )


def read_edge_list(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh.read())


def load_communities(text: str, graph: Graph) -> np.ndarray:
    """Parse ``label community`` lines into a dense assignment vector for ``graph``."""
    index = graph.label_map
    # labels in files are strings; graphs built elsewhere may carry ints
    by_str = {str(k): v for k, v in index.items()}
    raw = np.full(graph.n, -1, dtype=np.int64)
    names: dict[str, int] = {}
    for lineno, tokens in _data_lines(text):
        if len(tokens) != 2:
            raise ParseError(f"expected 'label community', got {len(tokens)} tokens", lineno)
        label, community = tokens
        if label not in by_str:
            raise ParseError(f"unknown node label {label!r}", lineno)
        raw[by_str[label]] = names.setdefault(community, len(names))
    if (raw < 0).any():
        missing = [graph.labels[i] for i in np.flatnonzero(raw < 0)[:5]]
        raise ValueError(f"nodes without a community: {missing}")
    return raw


@dataclass(frozen=True, eq=False)
class GenePool:
    """Indexed universe of perturbation elements.

    For edge kinds ``genes`` is an ``(N, 2)`` array of node pairs; for node
    removal it is a length-``n`` vector of node ids.  ``present`` marks, for
    the flip kind, which pairs are edges of the source graph (those get
    removed, the rest get added).
    """

    kind: str
    genes: np.ndarray
    n: int
    present: np.ndarray | None = None

    def __len__(self):
        return len(self.genes)

    @property
    def reverse(self) -> dict:
        if self.kind == NODE_REMOVAL:
            return {int(g): i for i, g in enumerate(self.genes)}
        return {(int(u), int(v)): i for i, (u, v) in enumerate(self.genes)}

    def element(self, gene_id: int):
        g = self.genes[gene_id]
        return int(g) if self.kind == NODE_REMOVAL else (int(g[0]), int(g[1]))


def _all_pairs(n: int) -> np.ndarray:
    u, v = np.triu_indices(n, k=1)
    return np.column_stack([u, v]).astype(np.int64)


def build_gene_pool(g: Graph, kind: str) -> GenePool:
    """Enumerate candidate perturbations in a deterministic order."""
    if g.n == 0:
        raise ValueError("graph is empty")
    if kind == NODE_REMOVAL:
        genes = np.arange(g.n, dtype=np.int64)
        return GenePool(kind, genes, g.n)
    if kind == EDGE_REMOVAL:
        genes = g.edges.copy()
    elif kind in (EDGE_ADDITION, EDGE_FLIP):
        pairs = _all_pairs(g.n)
        present = g.adjacency()[pairs[:, 0], pairs[:, 1]].astype(bool)
        if kind == EDGE_FLIP:
            return GenePool(kind, pairs, g.n, present)
        genes = pairs[~present]
    else:
        raise ValueError(f"unknown pool kind {kind!r}")
    if len(genes) == 0:
        raise EmptyPoolError(f"{kind} pool is empty for {g!r}")
    return GenePool(kind, genes, g.n)


def budget(g: Graph, kind: str, rate: float) -> int:
    """Genes per individual: ``ceil(rate * m)`` for edge kinds, ``ceil(rate * n)`` for nodes."""
    basis = g.n if kind == NODE_REMOVAL else g.m
    return max(1, math.ceil(rate * basis - 1e-9))


@dataclass(frozen=True)
class Perturbation:
    pool: GenePool
    genes: np.ndarray

    def __post_init__(self):
        genes = np.asarray(self.genes, dtype=np.int64).ravel()
        if genes.size and (genes.min() < 0 or genes.max() >= len(self.pool)):
            raise ValueError("gene id outside the pool")
        object.__setattr__(self, "genes", genes)


def apply_perturbation(A: np.ndarray, p: Perturbation) -> np.ndarray:
    """Return a perturbed copy of ``A``; repeated genes act once."""
    out = np.array(A, copy=True)
    pool = p.pool
    if p.genes.size == 0:
        return out
    if pool.kind == NODE_REMOVAL:
        nodes = pool.genes[p.genes]
        out[nodes, :] = 0
        out[:, nodes] = 0
        return out
    pairs = pool.genes[p.genes]
    if pool.kind == EDGE_REMOVAL:
        value = np.zeros(len(pairs), dtype=out.dtype)
    elif pool.kind == EDGE_ADDITION:
        value = np.ones(len(pairs), dtype=out.dtype)
    else:
        value = (~pool.present[p.genes]).astype(out.dtype)
    out[pairs[:, 0], pairs[:, 1]] = value
    out[pairs[:, 1], pairs[:, 0]] = value
    return out


def perturbed_edges(g: Graph, pool: GenePool, genes) -> np.ndarray:
    """Edge array of ``g`` after applying ``genes``; cheaper than a dense copy for big graphs."""
    genes = np.unique(np.asarray(genes, dtype=np.int64))
    edges = g.edges
    if genes.size == 0:
        return edges
    if pool.kind == NODE_REMOVAL:
        removed = np.zeros(g.n, dtype=bool)
        removed[pool.genes[genes]] = True
        return edges[~(removed[edges[:, 0]] | removed[edges[:, 1]])]
    A = apply_perturbation(g.adjacency(), Perturbation(pool, genes))
    return Graph.from_adjacency(A).edges


def connected_components(A: np.ndarray, removed=None, include_removed: bool = True) -> list[list[int]]:
    """Exact components by breadth-first search, ordered by smallest member.

    ``removed`` nodes are reported as singletons unless ``include_removed``
    is false, in which case they are left out of the partition.
    """
    A = np.asarray(A)
    n = A.shape[0]
    skip = set() if removed is None else {int(x) for x in np.ravel(removed)}
    neighbours = [np.flatnonzero(A[u]).tolist() for u in range(n)]
    label = [-1] * n
    components = []
    for start in range(n):
        if label[start] >= 0:
            continue
        if start in skip and not include_removed:
            label[start] = -2
            continue
        comp = [start]
        label[start] = len(components)
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in neighbours[u]:
                if label[v] == -1:
                    label[v] = label[start]
                    comp.append(v)
                    queue.append(v)
        components.append(sorted(comp))
    return components


def pairwise_connectivity(partition: Iterable[Sequence[int]]) -> int:
    return sum(len(c) * (len(c) - 1) // 2 for c in partition)


def largest_component_size(partition: Iterable[Sequence[int]]) -> int:
    return max(len(c) for c in partition)


def erdos_renyi(n: int, p: float, seed: int = 0) -> Graph:
    import networkx as nx

    return Graph.from_networkx(nx.gnp_random_graph(n, p, seed=seed))


def barabasi_albert(n: int, m: int, seed: int = 0) -> Graph:
    import networkx as nx

    return Graph.from_networkx(nx.barabasi_albert_graph(n, m, seed=seed))
