import networkx as nx
import numpy as np
import pytest
from networkx.algorithms.community import greedy_modularity_communities
from networkx.algorithms.community import modularity as nx_modularity
from sklearn.metrics import normalized_mutual_info_score

from gapa.community import (
    CommunityPartition,
    UndefinedModularityError,
    detect_communities,
    modularity,
    nmi,
)
from gapa.datasets import ground_truth, load_dataset
from gapa.graph import Graph

from conftest import random_graph, two_triangles


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def test_two_triangles_detection_matches_exhaustive_search():
    A = two_triangles().adjacency()
    best = max(set_partitions(list(range(6))),
               key=lambda p: modularity(A, CommunityPartition.from_communities(p)))
    found = detect_communities(A)
    assert found == CommunityPartition.from_communities(best)
    assert sorted(map(len, found.communities())) == [3, 3]


def test_empty_graph_all_singletons():
    part = detect_communities(np.zeros((5, 5), dtype=np.uint8))
    assert part.n_communities == 5


def test_karate_close_to_second_implementation():
    g = load_dataset("karate")
    G = g.to_networkx()
    reference = nx_modularity(G, greedy_modularity_communities(G, weight=None))
    q = modularity(g.adjacency(), detect_communities(g.adjacency()))
    assert abs(q - reference) <= 0.02


def test_modularity_examples():
    g = two_triangles()
    A = g.adjacency()
    assert modularity(A, [0, 0, 0, 1, 1, 1]) == pytest.approx(0.5)
    assert modularity(A, np.zeros(6, dtype=int)) == pytest.approx(0.0)
    deg = A.sum(axis=1)
    assert modularity(A, np.arange(6)) == pytest.approx(-np.sum((deg / (2 * g.m)) ** 2))


def test_modularity_matches_networkx(rng):
    for _ in range(20):
        g = random_graph(rng, 25, 0.15)
        if g.m == 0:
            continue
        labels = rng.integers(0, 4, g.n)
        groups = [set(np.flatnonzero(labels == c).tolist()) for c in np.unique(labels)]
        assert modularity(g.adjacency(), labels) == pytest.approx(nx_modularity(g.to_networkx(), groups))


def test_all_in_one_is_zero(rng):
    for _ in range(10):
        g = random_graph(rng, 15, 0.3)
        if g.m:
            assert modularity(g.adjacency(), np.zeros(g.n, dtype=int)) == pytest.approx(0.0)


def test_modularity_undefined_without_edges():
    with pytest.raises(UndefinedModularityError):
        modularity(np.zeros((3, 3)), [0, 1, 2])


def test_nmi_identity_and_relabel():
    assert nmi([0, 0, 1, 1, 2], [0, 0, 1, 1, 2]) == pytest.approx(1.0)
    assert nmi([0, 0, 1, 1, 2], [5, 5, 3, 3, 9]) == pytest.approx(1.0)


def test_nmi_independent_halves():
    # {ab|cd} vs {ac|bd}: every cell of the contingency table is 1, so MI = 0
    assert nmi([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0)


def test_nmi_degenerate():
    assert nmi([0, 0, 0], [1, 1, 1]) == 1.0
    assert nmi([0, 0, 0], [0, 1, 2]) == pytest.approx(0.0)


def test_nmi_matches_sklearn_and_is_symmetric(rng):
    for _ in range(50):
        a = rng.integers(0, 4, 30)
        b = rng.integers(0, 5, 30)
        expected = normalized_mutual_info_score(a, b, average_method="arithmetic")
        assert nmi(a, b) == pytest.approx(expected)
        assert nmi(a, b) == pytest.approx(nmi(b, a))


def test_partition_canonical():
    p = CommunityPartition(np.array([7, 7, 2, 9]))
    assert p.assignment.tolist() == [0, 0, 1, 2]
    assert p.communities() == [[0, 1], [2], [3]]
    with pytest.raises(ValueError):
        CommunityPartition.from_communities([[0, 1]], n=3)


def test_karate_ground_truth():
    g = load_dataset("karate")
    truth = ground_truth("karate", g)
    assert truth is not None and len(truth) == 34 and len(set(truth.tolist())) == 2
    G = nx.karate_club_graph()
    clubs = [G.nodes[v]["club"] for v in range(34)]
    order = [int(label) for label in g.labels]
    assert nmi(truth, [clubs[v] == "Mr. Hi" for v in order]) == pytest.approx(1.0)


def test_detection_deterministic(rng):
    g = random_graph(rng, 40, 0.1)
    assert detect_communities(g.adjacency()) == detect_communities(g.adjacency())
    assert isinstance(detect_communities(Graph.from_edges(2, [(0, 1)]).adjacency()), CommunityPartition)
