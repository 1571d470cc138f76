"""
Experiment harness comparing batch, anytime and incremental clustering.

For every size ``n`` and trial a dataset and a uniformly random initial tree
are drawn, then for each linkage kind three methods are run:

``hac``
    Batch agglomerative clustering.  No iteration count.
``anytime``
    Anytime clustering from the random initial tree.
``incremental``
    A homogeneous tree on the first ``n - 1`` points (batch clustering
    followed by anytime clustering), then insertion of point ``n`` and
    anytime re-homogenization.  The count covers the last phase only.

Each trial draws from its own RNG stream derived from ``(seed, n, trial)``,
so serial and parallel runs give the same report.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .anytime import anytime_cluster
from .batch import hac
from .data_io import gen_uniform_square, read_idx_images, read_idx_labels, sample_balanced
from .errors import ConfigError, DegenerateVariance
from .geometry import Dataset
from .hierarchy import random_tree
from .incremental import incremental_cluster
from .linkage import LinkageKind, as_linkage
from .validation import cophenetic_correlation

METHODS = ("hac", "anytime", "incremental")
METRICS = ("iterations", "cophenetic")
REPORT_COLUMNS = ("n", "kind", "method", "metric", "mean", "variance")


@dataclass(frozen=True)
class ExperimentConfig:
    sizes: tuple[int, ...] = (10, 20, 30, 40, 50)
    trials: int = 100
    kinds: tuple[str, ...] = ("single", "complete", "average", "minimax", "ward")
    source: str = "synthetic"
    rng_seed: int = 0
    dissimilarity: str = "euclidean"
    mnist_images: str | None = None
    mnist_labels: str | None = None
    max_iterations: int | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "kinds", tuple(str(as_linkage(k)) for k in self.kinds))
        if not self.sizes:
            raise ConfigError("sizes must not be empty")
        if any(n < 2 for n in self.sizes):
            raise ConfigError("every size must be at least 2")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if not self.kinds:
            raise ConfigError("kinds must not be empty")
        if self.source not in ("synthetic", "mnist"):
            raise ConfigError(f"unknown source {self.source!r}")
        if self.source == "mnist":
            if any(n % 10 for n in self.sizes):
                raise ConfigError("mnist sizes must be multiples of 10")
            if not (self.mnist_images and self.mnist_labels):
                raise ConfigError("mnist source needs image and label file paths")
        if self.workers < 1:
            raise ConfigError("workers must be positive")


@dataclass
class MethodResult:
    iterations: int | None
    cophenetic: float | None


@dataclass
class TrialResult:
    n: int
    trial: int
    results: dict[tuple[str, str], MethodResult] = field(default_factory=dict)


@dataclass
class ReportRow:
    n: int
    kind: str
    method: str
    metric: str
    mean: float
    variance: float


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list[ReportRow]
    trials: list[TrialResult]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in self.rows:
            w.writerow([r.n, r.kind, r.method, r.metric, repr(r.mean), repr(r.variance)])
        return buf.getvalue()

    def row(self, n: int, kind: str, method: str, metric: str) -> ReportRow:
        for r in self.rows:
            if (r.n, r.kind, r.method, r.metric) == (n, kind, method, metric):
                return r
        raise KeyError((n, kind, method, metric))


def trial_rng(seed: int, n: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(n, trial)))


@lru_cache(maxsize=4)
def _mnist_arrays(images: str, labels: str):
    return read_idx_images(images), read_idx_labels(labels)


def _dataset(config: ExperimentConfig, n: int, rng: np.random.Generator) -> Dataset:
    if config.source == "synthetic":
        return gen_uniform_square(n, rng, config.dissimilarity)
    images, digits = _mnist_arrays(config.mnist_images, config.mnist_labels)
    return sample_balanced(images, digits, n // 10, rng, config.dissimilarity)


def _rho(dataset: Dataset, kind: LinkageKind, tree) -> float | None:
    try:
        return cophenetic_correlation(dataset, kind, tree)
    except DegenerateVariance:
        return None


def run_trial(config: ExperimentConfig, n: int, trial: int) -> TrialResult:
    rng = trial_rng(config.rng_seed, n, trial)
    dataset = _dataset(config, n, rng)
    initial = random_tree(dataset.labels, rng)
    last = dataset.labels[-1]
    head = dataset.without_point(last)
    out = TrialResult(n, trial)
    for name in config.kinds:
        kind = as_linkage(name)
        tree = hac(dataset, kind)
        out.results[(name, "hac")] = MethodResult(None, _rho(dataset, kind, tree))

        run = anytime_cluster(dataset, kind, initial, config.max_iterations, profiles=False)
        out.results[(name, "anytime")] = MethodResult(run.iterations, _rho(dataset, kind, run.final_tree))

        if len(head) >= 2:
            base = anytime_cluster(head, kind, hac(head, kind), config.max_iterations, profiles=False).final_tree
            run = incremental_cluster(head, kind, base, last, dataset.point(last), config.max_iterations, profiles=False)
            out.results[(name, "incremental")] = MethodResult(run.iterations, _rho(dataset, kind, run.final_tree))
    return out


def _run_task(args) -> TrialResult:
    return run_trial(*args)


def _summary(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    var = float(arr.var(ddof=1)) if arr.size > 1 else 0.0
    return mean, var


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    tasks = [(config, n, t) for n in config.sizes for t in range(config.trials)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            trials = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * config.workers))))
    else:
        trials = [_run_task(t) for t in tasks]

    rows = []
    for n in config.sizes:
        group = [t for t in trials if t.n == n]
        for kind in config.kinds:
            for method in METHODS:
                results = [t.results[(kind, method)] for t in group if (kind, method) in t.results]
                for metric in METRICS:
                    values = [getattr(r, metric) for r in results]
                    values = [v for v in values if v is not None]
                    if values:
                        rows.append(ReportRow(n, kind, method, metric, *_summary(values)))
    return ExperimentReport(config, rows, trials)


def write_report(path: str | Path, report: ExperimentReport) -> None:
    Path(path).write_text(report.to_csv(), encoding="utf-8")
