from collections import deque

import numpy as np
import pytest

from gapa.graph import Graph


def bfs_reachability(A):
    """Reachability by one breadth-first search per node."""
    A = np.asarray(A)
    n = len(A)
    adj = [np.flatnonzero(A[u]).tolist() for u in range(n)]
    R = np.zeros((n, n), dtype=bool)
    for s in range(n):
        seen = {s}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        R[s, list(seen)] = True
    return R


def warshall(A):
    """Path existence by Warshall's elimination; independent of matrix powers."""
    R = np.asarray(A).astype(bool) | np.eye(len(A), dtype=bool)
    for k in range(len(A)):
        R |= R[:, k:k + 1] & R[k:k + 1, :]
    return R


def oracle_components(A):
    R = warshall(A)
    groups = {tuple(np.flatnonzero(row)) for row in R}
    return sorted(groups)


def random_graph(rng, n, density):
    A = np.triu(rng.random((n, n)) < density, k=1)
    return Graph.from_adjacency(A | A.T)


def path_graph(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n):
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(leaves):
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def two_triangles():
    return Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, detail=""):
    """Log one acceptance verdict; the lines are printed in the terminal summary."""
    status = "SKIP" if ok is None else ("PASS" if bool(ok) else "FAIL")
    ACCEPTANCE_LINES.append((number, f"[{status}] criterion {number:2d}: {title}" + (f" -- {detail}" if detail else "")))
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
