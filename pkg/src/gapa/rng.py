"""Counter-keyed random streams.

Every random draw in a run comes from a stream keyed by
``(seed, generation, role, row)``.  Which worker happens to own a row never
enters the key, so all execution modes see the same numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

INIT = 0
SELECT = 1
CROSSOVER_MASK = 2
MUTATION_MASK = 3
MUTATION_INDEX = 4
EDA = 5

ROLES = {
    "init": INIT,
    "select": SELECT,
    "crossover-mask": CROSSOVER_MASK,
    "mutation-mask": MUTATION_MASK,
    "mutation-index": MUTATION_INDEX,
    "eda": EDA,
}


@dataclass(frozen=True)
class RngPolicy:
    seed: int

    def stream(self, generation: int, role: int, row: int) -> np.random.Generator:
        if isinstance(role, str):
            role = ROLES[role]
        key = np.random.SeedSequence([self.seed & (2**64 - 1), generation, role, row])
        return np.random.Generator(np.random.Philox(key))

    def uniform(self, generation: int, role: int, rows, k: int) -> np.ndarray:
        """``len(rows) x k`` uniforms on [0, 1), one stream per row."""
        out = np.empty((len(rows), k))
        for i, row in enumerate(rows):
            out[i] = self.stream(generation, role, row).random(k)
        return out

    def integers(self, generation: int, role: int, rows, k: int, high: int) -> np.ndarray:
        out = np.empty((len(rows), k), dtype=np.int64)
        for i, row in enumerate(rows):
            out[i] = self.stream(generation, role, row).integers(0, high, size=k)
        return out
