"""Dataset registry: bundled edge lists, synthetic generators and user files.

Extra edge lists (for example ``dolphins.txt``) can be dropped into the
directory named by ``GAPA_DATA_DIR``; ``load_dataset("dolphins")`` then
finds them.
"""

from __future__ import annotations

import os
from pathlib import Path

from .graph import Graph, barabasi_albert, erdos_renyi, load_communities, read_edge_list

DATA_DIR = Path(__file__).parent / "data"
DATA_DIR_ENV = "GAPA_DATA_DIR"

SYNTHETIC = {
    "ba500": lambda: barabasi_albert(500, 1, seed=0),
    "ba2000": lambda: barabasi_albert(2000, 1, seed=0),
    "er500": lambda: erdos_renyi(500, 0.006, seed=0),
    "ba100": lambda: barabasi_albert(100, 1, seed=0),
}


class DatasetError(OSError):
    pass


def _search_dirs():
    extra = os.environ.get(DATA_DIR_ENV)
    return ([Path(extra)] if extra else []) + [DATA_DIR]


def _find(name: str, suffix: str) -> Path | None:
    for base in _search_dirs():
        path = base / f"{name}{suffix}"
        if path.is_file():
            return path
    return None


def available() -> list[str]:
    names = set(SYNTHETIC)
    for base in _search_dirs():
        if base.is_dir():
            names.update(p.stem for p in base.glob("*.txt"))
    return sorted(names)


def load_dataset(name_or_path) -> Graph:
    """Load a registered dataset by name, or any edge-list file by path."""
    key = str(name_or_path)
    if key.lower() in SYNTHETIC:
        return SYNTHETIC[key.lower()]()
    path = Path(key)
    if not path.is_file():
        path = _find(key.lower(), ".txt")
    if path is None:
        raise DatasetError(
            f"dataset {key!r} not found; known names: {', '.join(available())} "
            f"(or set {DATA_DIR_ENV} to a directory holding {key}.txt)"
        )
    try:
        return read_edge_list(path)
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc


def ground_truth(name_or_path, graph: Graph):
    """Community assignment for ``graph`` if a ``.communities`` file sits next to the data."""
    path = Path(str(name_or_path))
    candidate = path.with_suffix(".communities") if path.is_file() else _find(path.name.lower(), ".communities")
    if candidate is None or not candidate.is_file():
        return None
    return load_communities(candidate.read_text(encoding="utf-8"), graph)
