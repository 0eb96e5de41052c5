"""Experiment runner and command-line interface.

Configs are JSON documents holding one experiment object or a list of
them.  Only ``algorithm`` and ``dataset`` are required; everything else
falls back to the algorithm's built-in defaults::

    {"algorithm": "qattack", "dataset": "karate", "iterations": 300}

Usage::

    gapa run config.json [-o rows.csv]
    gapa sweep config.json --axis pop_size --values 20,40,60 [--plot fig.png]
    gapa report rows.csv --format table
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import logging
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from .community import detect_communities, modularity, nmi
from .datasets import DatasetError, load_dataset
from .fitness import (
    CDA_MODULARITY,
    CND_PC,
    CND_SIXDST,
    EDGELESS_Q,
    LPA_SIMILARITY,
    FitnessSpec,
    make_fitness,
)
from .ga import MINIMIZE, GAParams
from .graph import (
    EDGE_FLIP,
    EDGE_REMOVAL,
    NODE_REMOVAL,
    POOL_KINDS,
    ParseError,
    Perturbation,
    apply_perturbation,
    budget,
    build_gene_pool,
    connected_components,
    largest_component_size,
    pairwise_connectivity,
)
from .linkpred import build_lp_split, lp_auc_precision, ra_scores
from .parallel import MODES, ModeTopology, run

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_DATASET = 0, 2, 3

# per-algorithm defaults; rates, population sizes and iteration counts follow
# the published parameter table
ALGORITHMS = {
    "qattack": dict(task=CDA_MODULARITY, pool_kind=EDGE_FLIP, pc=0.8, pm=0.1,
                    iterations=1500, pop_size=100, rate=0.1),
    "cda-eda": dict(task=CDA_MODULARITY, pool_kind=EDGE_FLIP, pc=0.6, pm=0.2,
                    iterations=1500, pop_size=100, rate=0.1, eda_interval=50),
    "sixdst": dict(task=CND_SIXDST, pool_kind=NODE_REMOVAL, pc=0.5, pm=0.3,
                   iterations=5000, pop_size=80, rate=0.1),
    "cutoff-pc": dict(task=CND_PC, pool_kind=NODE_REMOVAL, pc=0.6, pm=0.2,
                      iterations=5000, pop_size=80, rate=0.1),
    "lpa-ga": dict(task=LPA_SIMILARITY, pool_kind=EDGE_REMOVAL, pc=0.7, pm=0.1,
                   iterations=500, pop_size=50, rate=0.1),
    "lpa-eda": dict(task=LPA_SIMILARITY, pool_kind=EDGE_REMOVAL, pc=0.0, pm=0.1,
                    iterations=500, pop_size=50, rate=0.1, eda_interval=1),
}

SWEEP_AXES = ("pop_size", "pn")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str
    dataset: str
    task: str
    pool_kind: str
    params: GAParams
    fitness: FitnessSpec
    topology: ModeTopology = ModeTopology()
    rate: float = 0.1
    repetitions: int = 1
    output: str | None = None

    @property
    def seed(self) -> int:
        return self.params.seed

    def replace(self, **changes) -> "ExperimentConfig":
        """Copy with ``pop_size``, ``pn``, ``seed`` or any top-level field changed."""
        params, topology = self.params, self.topology
        if "pop_size" in changes:
            params = dataclasses.replace(params, s=int(changes.pop("pop_size")))
        if "seed" in changes:
            params = dataclasses.replace(params, seed=int(changes.pop("seed")))
        if "iterations" in changes:
            params = dataclasses.replace(params, iterations=int(changes.pop("iterations")))
        if "pn" in changes:
            topology = dataclasses.replace(topology, pn=int(changes.pop("pn")))
        return dataclasses.replace(self, params=params, topology=topology, **changes)


_CONFIG_KEYS = {
    "algorithm", "dataset", "task", "pool_kind", "pc", "pm", "iterations", "pop_size", "rate",
    "eda_interval", "eda_elite", "eda_smoothing", "seed", "mode", "pn", "qn", "backend",
    "max_workers", "repetitions", "output", "split_ratio", "split_seed", "fast", "detector",
}


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Validate a config object and merge it over the algorithm defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("experiment config must be an object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in ("algorithm", "dataset"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")
    name = str(raw["algorithm"]).lower()
    if name not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")
    merged = {**ALGORITHMS[name], **raw}
    if merged["task"] != ALGORITHMS[name]["task"] and "pool_kind" not in raw:
        raise ConfigError("overriding the task requires an explicit pool_kind")
    if merged["pool_kind"] not in POOL_KINDS:
        raise ConfigError(f"unknown pool kind {merged['pool_kind']!r}")
    try:
        spec = FitnessSpec(
            task=merged["task"],
            direction=MINIMIZE,
            split_ratio=float(merged.get("split_ratio", 0.1)),
            split_seed=int(merged.get("split_seed", 0)),
            fast=bool(merged.get("fast", False)),
            detector=merged.get("detector", "greedy-modularity"),
        )
        spec.check_pool_kind(merged["pool_kind"])
        rate = float(merged["rate"])
        if not 0.0 < rate <= 1.0:
            raise ValueError("rate must lie in (0, 1]")
        params = GAParams(
            pc=float(merged["pc"]),
            pm=float(merged["pm"]),
            s=int(merged["pop_size"]),
            k=1,  # replaced once the dataset is loaded
            iterations=int(merged["iterations"]),
            direction=MINIMIZE,
            eda_interval=merged.get("eda_interval"),
            eda_elite=merged.get("eda_elite"),
            eda_smoothing=float(merged.get("eda_smoothing", 1.0)),
            seed=int(merged.get("seed", 0)),
        )
        topology = ModeTopology(
            mode=merged.get("mode", "S"),
            pn=int(merged.get("pn", 1)),
            qn=int(merged.get("qn", 1)),
            backend=merged.get("backend", "process"),
            max_workers=merged.get("max_workers"),
        )
        repetitions = int(merged.get("repetitions", 1))
        if repetitions < 1:
            raise ValueError("repetitions must be at least 1")
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(name, str(merged["dataset"]), merged["task"], merged["pool_kind"],
                            params, spec, topology, rate, repetitions, merged.get("output"))


def load_configs(text: str) -> list[ExperimentConfig]:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    items = raw if isinstance(raw, list) else [raw]
    if not items:
        raise ConfigError("config holds no experiments")
    return [config_from_dict(item) for item in items]


@dataclass
class ResultRow:
    task: str
    algorithm: str
    dataset: str
    mode: str
    pn: int
    qn: int
    pop_size: int
    iterations: int
    seed: int
    wall_time_s: float
    q_unattacked: float | None = None
    q_attacked: float | None = None
    nmi: float | None = None
    mcn_unattacked: int | None = None
    mcn_attacked: int | None = None
    pc_unattacked: int | None = None
    pc_attacked: int | None = None
    auc_unattacked: float | None = None
    auc_attacked: float | None = None
    precision_unattacked: float | None = None
    precision_attacked: float | None = None


FIELDS = [f.name for f in fields(ResultRow)]
TIMING_FIELDS = ("wall_time_s",)
_INT_FIELDS = {"pn", "qn", "pop_size", "iterations", "seed", "mcn_unattacked", "mcn_attacked",
               "pc_unattacked", "pc_attacked"}
_FLOAT_FIELDS = {"wall_time_s", "q_unattacked", "q_attacked", "nmi", "auc_unattacked",
                 "auc_attacked", "precision_unattacked", "precision_attacked"}


def _cda_metrics(A, A_att) -> dict:
    before = detect_communities(A)
    q0 = modularity(A, before)
    if not A_att.any():
        return {"q_unattacked": q0, "q_attacked": EDGELESS_Q, "nmi": 0.0}
    after = detect_communities(A_att)
    return {"q_unattacked": q0, "q_attacked": modularity(A_att, after), "nmi": nmi(before, after)}


def _cnd_metrics(A, A_att) -> dict:
    before = connected_components(A)
    after = connected_components(A_att)
    return {
        "mcn_unattacked": largest_component_size(before),
        "mcn_attacked": largest_component_size(after),
        "pc_unattacked": pairwise_connectivity(before),
        "pc_attacked": pairwise_connectivity(after),
    }


def _lpa_metrics(split, A_att) -> dict:
    auc0, prec0 = lp_auc_precision(split, ra_scores(split.train.adjacency()))
    auc1, prec1 = lp_auc_precision(split, ra_scores(A_att))
    return {"auc_unattacked": auc0, "auc_attacked": auc1,
            "precision_unattacked": prec0, "precision_attacked": prec1}


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """Run ``cfg.repetitions`` seeded runs (seed, seed + 1, ...) and score each."""
    graph = load_dataset(cfg.dataset)
    split = None
    basis = graph
    if cfg.task == LPA_SIMILARITY:
        split = build_lp_split(graph, cfg.fitness.split_ratio, cfg.fitness.split_seed)
        basis = split.train
    pool = build_gene_pool(basis, cfg.pool_kind)
    k = budget(basis, cfg.pool_kind, cfg.rate)
    A = basis.adjacency()
    rows = []
    for rep in range(cfg.repetitions):
        params = dataclasses.replace(cfg.params, k=k, seed=cfg.params.seed + rep)
        fitness = make_fitness(cfg.fitness, basis, pool, split)
        result = run(params, pool, fitness, cfg.topology)
        A_att = apply_perturbation(A, Perturbation(pool, result.best))
        if cfg.task == CDA_MODULARITY:
            metrics = _cda_metrics(A, A_att)
        elif cfg.task in (CND_SIXDST, CND_PC):
            metrics = _cnd_metrics(A, A_att)
        else:
            metrics = _lpa_metrics(split, A_att)
        rows.append(ResultRow(
            task=cfg.task, algorithm=cfg.algorithm, dataset=cfg.dataset, mode=result.mode,
            pn=result.pn, qn=result.qn, pop_size=params.s, iterations=params.iterations,
            seed=params.seed, wall_time_s=result.wall_time, **metrics,
        ))
        logger.info("%s/%s seed=%d best=%.4f time=%.2fs", cfg.algorithm, cfg.dataset,
                    params.seed, result.best_fitness, result.wall_time)
    return rows


def sweep(cfg: ExperimentConfig, axis: str, values, plot: str | None = None) -> list[ResultRow]:
    """One batch of runs per value of ``axis``; rows come back in value order."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}")
    values = [int(v) for v in values]
    if not values:
        raise ConfigError("sweep needs at least one value")
    if values != sorted(values):
        raise ConfigError("sweep values must be ascending")
    rows = []
    for value in values:
        try:
            rows.extend(run_experiment(cfg.replace(**{axis: value})))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc
    if plot:
        plot_sweep(rows, axis, plot)
    return rows


def sweep_table(rows, axis: str) -> list[tuple[int, float]]:
    """``(value, median wall time)`` pairs for a scaling plot."""
    groups: dict[int, list[float]] = {}
    for row in rows:
        groups.setdefault(getattr(row, axis), []).append(row.wall_time_s)
    return [(value, float(np.median(times))) for value, times in groups.items()]


def plot_sweep(rows, axis: str, path: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    data = sweep_table(rows, axis)
    fig, ax = plt.subplots(figsize=(4, 3))
    ax.plot([v for v, _ in data], [t for _, t in data], marker="o")
    ax.set_xlabel(axis)
    ax.set_ylabel("wall time (s)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report(rows, format: str = "csv") -> str:
    """Render rows as CSV (header in field order) or as an aligned text table."""
    table = [[_cell(getattr(row, name)) for name in FIELDS] for row in rows]
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(FIELDS)
        writer.writerows(table)
        return buf.getvalue()
    if format in ("table", "aligned-table"):
        widths = [max([len(h)] + [len(r[i]) for r in table]) for i, h in enumerate(FIELDS)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(FIELDS, widths)).rstrip()]
        lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in table]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {format!r}")


def _parse_cell(name: str, text: str):
    if text == "":
        return None
    if name in _INT_FIELDS:
        return int(text)
    if name in _FLOAT_FIELDS:
        return float(text)
    return text


def parse_rows(text: str) -> list[ResultRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != FIELDS:
        raise ValueError("CSV header does not match the result-row layout")
    return [ResultRow(**{n: _parse_cell(n, c) for n, c in zip(FIELDS, line)}) for line in reader if line]


def fingerprint(csv_text: str) -> str:
    """SHA-256 of a report with the timing columns blanked out."""
    rows = list(csv.reader(io.StringIO(csv_text)))
    drop = {i for i, name in enumerate(rows[0]) if name in TIMING_FIELDS} if rows else set()
    kept = "\n".join(",".join(c for i, c in enumerate(r) if i not in drop) for r in rows)
    return hashlib.sha256(kept.encode()).hexdigest()


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(text: str, output: str | None):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gapa", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the experiments in a config file")
    p_run.add_argument("config")
    p_run.add_argument("-o", "--output", help="CSV destination (default: config output or stdout)")

    p_sweep = sub.add_parser("sweep", help="sweep population size or worker count")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p_sweep.add_argument("--values", required=True, help="comma-separated ascending integers")
    p_sweep.add_argument("-o", "--output")
    p_sweep.add_argument("--plot", help="optional image path for a wall-time plot")

    p_report = sub.add_parser("report", help="re-render a rows CSV")
    p_report.add_argument("rows")
    p_report.add_argument("--format", choices=("csv", "table"), default="table")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            try:
                rows = parse_rows(_read(args.rows))
            except ValueError as exc:
                raise ConfigError(f"cannot parse {args.rows}: {exc}") from exc
            sys.stdout.write(report(rows, args.format))
            return EXIT_OK
        configs = load_configs(_read(args.config))
        rows = []
        if args.command == "run":
            for cfg in configs:
                rows.extend(run_experiment(cfg))
        else:
            try:
                values = [int(v) for v in args.values.split(",") if v.strip()]
            except ValueError as exc:
                raise ConfigError(f"bad --values: {exc}") from exc
            for cfg in configs:
                rows.extend(sweep(cfg, args.axis, values, args.plot))
        _emit(report(rows, "csv"), args.output or configs[0].output)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DatasetError, ParseError) as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
