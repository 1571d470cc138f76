"""Datasets, pointwise dissimilarities and per-cluster sufficient statistics."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import DimensionMismatch, DuplicateLabel, EmptyDataset, UnknownLabel, ZeroNormVector

DISSIMILARITIES = ("euclidean", "squared_euclidean", "cosine")
_ALIASES = {"sqeuclidean": "squared_euclidean", "sq_euclidean": "squared_euclidean"}


def dissimilarity_name(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in DISSIMILARITIES:
        raise ValueError(f"unknown dissimilarity {name!r}; expected one of {DISSIMILARITIES}")
    return name


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Labelled points in R^m with a dissimilarity kind.

    Parameters
    ----------
    labels : sequence of int
        Distinct non-negative labels; stored sorted.
    points : array_like, shape (n, m)
        Row ``k`` is the point of ``labels[k]`` (in the order given).
    dissimilarity : {"euclidean", "squared_euclidean", "cosine"}
    """

    labels: tuple[int, ...]
    points: np.ndarray
    dissimilarity: str = "euclidean"
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        labels = [int(i) for i in self.labels]
        pts = np.array(self.points, dtype=float)
        if not labels:
            raise EmptyDataset("dataset has no points")
        if pts.ndim == 1:
            pts = pts.reshape(len(labels), -1)
        if pts.ndim != 2 or pts.shape[0] != len(labels):
            raise DimensionMismatch(f"expected {len(labels)} rows of coordinates, got shape {pts.shape}")
        if pts.shape[1] < 1:
            raise DimensionMismatch("points must have dimension >= 1")
        if len(set(labels)) != len(labels):
            raise DuplicateLabel("dataset labels must be distinct")
        if any(i < 0 for i in labels):
            raise ValueError("labels must be non-negative integers")
        order = np.argsort(labels, kind="stable")
        pts = pts[order]
        labels = [labels[k] for k in order]
        kind = dissimilarity_name(self.dissimilarity)
        if kind == "cosine" and np.any(np.linalg.norm(pts, axis=1) == 0):
            raise ZeroNormVector("cosine dissimilarity needs non-zero vectors")
        pts.setflags(write=False)
        object.__setattr__(self, "labels", tuple(labels))
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "dissimilarity", kind)
        object.__setattr__(self, "_index", {lab: k for k, lab in enumerate(labels)})

    @classmethod
    def from_mapping(cls, points: Mapping[int, Iterable[float]], dissimilarity: str = "euclidean") -> "Dataset":
        labels = list(points)
        return cls(tuple(labels), np.array([np.asarray(points[i], dtype=float) for i in labels]), dissimilarity)

    @classmethod
    def from_array(cls, points, dissimilarity: str = "euclidean", start: int = 1) -> "Dataset":
        """Label rows ``start, start+1, ...``."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        return cls(tuple(range(start, start + len(pts))), pts, dissimilarity)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: object) -> bool:
        return label in self._index

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def index(self, label: int) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownLabel(f"label {label} not in dataset") from None

    def indices(self, cluster: Iterable[int]) -> np.ndarray:
        """Row indices of ``cluster`` in ascending label order."""
        return np.fromiter((self.index(i) for i in sorted(cluster)), dtype=np.intp)

    def point(self, label: int) -> np.ndarray:
        return self.points[self.index(label)]

    @cached_property
    def dissimilarity_matrix(self) -> np.ndarray:
        m = pairwise(self.points, self.dissimilarity)
        m.setflags(write=False)
        return m

    @cached_property
    def euclidean_matrix(self) -> np.ndarray:
        m = pairwise(self.points, "euclidean")
        m.setflags(write=False)
        return m

    def with_point(self, label: int, point: Iterable[float]) -> "Dataset":
        label = int(label)
        if label in self._index:
            raise DuplicateLabel(f"label {label} already in dataset")
        p = np.asarray(point, dtype=float).reshape(-1)
        if p.shape[0] != self.dim:
            raise DimensionMismatch(f"point has dimension {p.shape[0]}, dataset has {self.dim}")
        return Dataset(self.labels + (label,), np.vstack([self.points, p]), self.dissimilarity)

    def without_point(self, label: int) -> "Dataset":
        k = self.index(label)
        keep = [j for j in range(len(self)) if j != k]
        return Dataset(tuple(self.labels[j] for j in keep), self.points[keep], self.dissimilarity)

    def subset(self, labels: Iterable[int]) -> "Dataset":
        idx = self.indices(labels)
        return Dataset(tuple(self.labels[j] for j in idx), self.points[idx], self.dissimilarity)

    def relabel(self, mapping: Mapping[int, int]) -> "Dataset":
        return Dataset(tuple(int(mapping[i]) for i in self.labels), self.points, self.dissimilarity)

    def with_dissimilarity(self, dissimilarity: str) -> "Dataset":
        return Dataset(self.labels, self.points, dissimilarity)


def pairwise(points: np.ndarray, kind: str) -> np.ndarray:
    """Full pairwise dissimilarity matrix with an exactly zero diagonal."""
    kind = dissimilarity_name(kind)
    x = np.asarray(points, dtype=float)
    if kind == "cosine":
        u = x / np.linalg.norm(x, axis=1, keepdims=True)
        d = 1.0 - u @ u.T
        np.clip(d, 0.0, 2.0, out=d)
    else:
        d = np.empty((len(x), len(x)))
        for k in range(len(x)):
            diff = x - x[k]
            d[k] = np.einsum("ij,ij->i", diff, diff)
        if kind == "euclidean":
            d = np.sqrt(d)
    np.fill_diagonal(d, 0.0)
    # symmetric by construction for the difference-based kinds; enforce for cosine
    return (d + d.T) / 2.0 if kind == "cosine" else d


def dissimilarity(dataset: Dataset, i: int, j: int) -> float:
    return float(dataset.dissimilarity_matrix[dataset.index(i), dataset.index(j)])


def normalize_dataset(dataset: Dataset) -> Dataset:
    """Scale every point to unit Euclidean norm (never applied implicitly)."""
    norms = np.linalg.norm(dataset.points, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ZeroNormVector("cannot normalize a zero vector")
    return Dataset(dataset.labels, dataset.points / norms, dataset.dissimilarity)


def is_unit_norm(dataset: Dataset, tol: float = 1e-9) -> bool:
    return bool(np.all(np.abs(np.linalg.norm(dataset.points, axis=1) - 1.0) <= tol))


@dataclass(frozen=True, eq=False)
class SufficientStats:
    """Cardinality, centroid and population variance of a cluster."""

    cardinality: int
    centroid: np.ndarray
    variance: float

    def __post_init__(self):
        c = np.asarray(self.centroid, dtype=float).reshape(-1)
        object.__setattr__(self, "centroid", c)
        object.__setattr__(self, "variance", float(self.variance))
        if self.cardinality < 1:
            raise ValueError("cardinality must be positive")
        if self.variance < 0:
            raise ValueError("variance must be non-negative")

    @classmethod
    def singleton(cls, point) -> "SufficientStats":
        return cls(1, np.asarray(point, dtype=float), 0.0)

    def isclose(self, other: "SufficientStats", tol: float = 1e-9) -> bool:
        return (
            self.cardinality == other.cardinality
            and self.centroid.shape == other.centroid.shape
            and bool(np.all(np.abs(self.centroid - other.centroid) <= tol))
            and abs(self.variance - other.variance) <= tol
        )


def stats(dataset: Dataset, cluster: Iterable[int]) -> SufficientStats:
    idx = dataset.indices(cluster)
    if idx.size == 0:
        raise ValueError("cluster must be non-empty")
    x = dataset.points[idx]
    c = x.mean(axis=0)
    dev = x - c
    return SufficientStats(len(idx), c, float(np.einsum("ij,ij->", dev, dev) / len(idx)))


def merge_stats(a: SufficientStats, b: SufficientStats) -> SufficientStats:
    """Statistics of the union of two disjoint clusters from theirs alone."""
    if a.centroid.shape != b.centroid.shape:
        raise DimensionMismatch("statistics have different dimensions")
    na, nb = a.cardinality, b.cardinality
    n = na + nb
    wa, wb = na / n, nb / n
    diff = a.centroid - b.centroid
    centroid = wa * a.centroid + wb * b.centroid
    variance = wa * a.variance + wb * b.variance + (na * nb / (n * n)) * float(np.dot(diff, diff))
    return SufficientStats(n, centroid, variance)


def sse(dataset: Dataset, cluster: Iterable[int]) -> float:
    """Sum of squared distances to the cluster centroid."""
    idx = dataset.indices(cluster)
    if idx.size == 0:
        raise ValueError("cluster must be non-empty")
    x = dataset.points[idx]
    dev = x - x.mean(axis=0)
    return float(np.einsum("ij,ij->", dev, dev))
