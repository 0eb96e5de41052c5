"""Community detection target, modularity and NMI."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class UndefinedModularityError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CommunityPartition:
    """Node -> community assignment with dense ids numbered by smallest member."""

    assignment: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "assignment", canonical_labels(self.assignment))

    @property
    def n_communities(self) -> int:
        return int(self.assignment.max()) + 1 if self.assignment.size else 0

    def communities(self) -> list[list[int]]:
        groups = [[] for _ in range(self.n_communities)]
        for node, c in enumerate(self.assignment.tolist()):
            groups[c].append(node)
        return groups

    def __eq__(self, other):
        if not isinstance(other, CommunityPartition):
            return NotImplemented
        return np.array_equal(self.assignment, other.assignment)

    @classmethod
    def from_communities(cls, groups, n: int | None = None) -> "CommunityPartition":
        n = sum(len(g) for g in groups) if n is None else n
        labels = np.full(n, -1, dtype=np.int64)
        for c, group in enumerate(groups):
            labels[list(group)] = c
        if (labels < 0).any():
            raise ValueError("every node must belong to a community")
        return cls(labels)


def canonical_labels(labels) -> np.ndarray:
    labels = np.asarray(labels).ravel()
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    out = rank[inverse.ravel()]
    out.setflags(write=False)
    return out


def _as_labels(part) -> np.ndarray:
    return part.assignment if isinstance(part, CommunityPartition) else np.asarray(part)


def detect_communities(A) -> CommunityPartition:
    """Greedy modularity agglomeration (Clauset-Newman-Moore style).

    Gains are kept as exact integers ``2m * e_ij - d_i * d_j`` (proportional
    to the modularity change), so ties are real ties and resolve to the
    smallest ``(i, j)`` community pair.  Merging ``j`` into ``i`` keeps ``i``.
    """
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[0]
    if n == 0:
        raise ValueError("graph is empty")
    deg = A.sum(axis=1)
    two_m = int(deg.sum())
    labels = np.arange(n)
    if two_m == 0:
        return CommunityPartition(labels)

    E = A.copy()
    np.fill_diagonal(E, 0)
    D = deg.copy()
    gain = two_m * E - np.outer(D, D)
    disabled = np.iinfo(np.int64).min
    # only pairs joined by an edge can have positive gain; keep the upper triangle
    gain[np.tril_indices(n)] = disabled
    gain[E == 0] = disabled
    members = {i: [i] for i in range(n)}
    while True:
        flat = int(np.argmax(gain))
        i, j = divmod(flat, n)
        if gain[i, j] <= 0:
            break
        E[i] += E[j]
        E[:, i] += E[:, j]
        E[i, i] = 0
        E[j] = 0
        E[:, j] = 0
        D[i] += D[j]
        D[j] = 0
        members[i].extend(members.pop(j))
        row = two_m * E[i] - D[i] * D
        row[E[i] == 0] = disabled
        gain[j, :] = disabled
        gain[:, j] = disabled
        alive = np.fromiter(members.keys(), dtype=np.int64)
        lower = alive[alive < i]
        upper = alive[alive > i]
        gain[lower, i] = row[lower]
        gain[i, upper] = row[upper]
    for c, nodes in members.items():
        labels[nodes] = c
    return CommunityPartition(labels)


def modularity(A, part) -> float:
    """Newman modularity ``sum_c (L_c / m - (D_c / 2m)^2)``."""
    A = np.asarray(A)
    labels = _as_labels(part)
    u, v = np.nonzero(np.triu(A, k=1))
    m = len(u)
    if m == 0:
        raise UndefinedModularityError("modularity is undefined for a graph without edges")
    deg = np.bincount(np.concatenate([u, v]), minlength=len(labels))
    size = int(labels.max()) + 1
    same = labels[u] == labels[v]
    intra = np.bincount(labels[u][same], minlength=size)
    total = np.bincount(labels, weights=deg, minlength=size)
    return float(np.sum(intra / m - (total / (2.0 * m)) ** 2))


def _entropy(counts) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-np.sum(p * np.log(p)))


def nmi(p1, p2) -> float:
    """Normalized mutual information with arithmetic-mean normalization."""
    a = _as_labels(p1)
    b = _as_labels(p2)
    if a.shape != b.shape:
        raise ValueError("partitions cover different node sets")
    _, a = np.unique(a, return_inverse=True)
    _, b = np.unique(b, return_inverse=True)
    table = np.zeros((a.max() + 1, b.max() + 1))
    np.add.at(table, (a, b), 1.0)
    h_a = _entropy(table.sum(axis=1))
    h_b = _entropy(table.sum(axis=0))
    if h_a + h_b == 0.0:
        # both sides a single community over the same nodes
        return 1.0
    n = table.sum()
    joint = table / n
    outer = np.outer(table.sum(axis=1), table.sum(axis=0)) / n**2
    nz = joint > 0
    mi = float(np.sum(joint[nz] * np.log(joint[nz] / outer[nz])))
    return float(min(1.0, max(0.0, 2.0 * mi / (h_a + h_b))))
