"""Synthetic data, MNIST IDX ingestion, and text formats for datasets, trees and traces."""

from __future__ import annotations

import csv
import gzip
import io
import json
import re
import struct
from pathlib import Path
from typing import Iterable

import numpy as np

from .anytime import AnytimeTrace
from .errors import BadMagic, DimensionMismatch, InsufficientSamples, NotBinary, ParseError, TruncatedFile
from .geometry import Dataset
from .hierarchy import BinaryHierarchy, Nested, _nested_str, cluster_key

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


# ---------------------------------------------------------------------- #
# Synthetic data                                                          #
# ---------------------------------------------------------------------- #


def _distinct_distances(points: np.ndarray) -> bool:
    diff = points[:, None, :] - points[None, :, :]
    d = np.einsum("ijk,ijk->ij", diff, diff)[np.triu_indices(len(points), k=1)]
    return np.unique(d).size == d.size


def gen_uniform_square(n: int, rng_seed: int | np.random.Generator | None = None, dissimilarity: str = "euclidean") -> Dataset:
    """``n`` points uniform on the unit square, labels ``1..n``.

    Samples with a tied pairwise distance are redrawn, so the result is
    generic.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    while True:
        pts = rng.random((n, 2))
        if _distinct_distances(pts):
            return Dataset.from_array(pts, dissimilarity)


# ---------------------------------------------------------------------- #
# MNIST                                                                   #
# ---------------------------------------------------------------------- #


def _read_bytes(path: str | Path) -> bytes:
    path = Path(path)
    with path.open("rb") as fh:
        head = fh.read(2)
    opener = gzip.open if head == b"\x1f\x8b" else open
    with opener(path, "rb") as fh:
        return fh.read()


def read_idx_images(path: str | Path) -> np.ndarray:
    """Image array of shape ``(count, rows * cols)``, dtype uint8."""
    raw = _read_bytes(path)
    if len(raw) < 16:
        raise TruncatedFile(f"{path}: header needs 16 bytes, found {len(raw)}")
    magic, count, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic != IMAGE_MAGIC:
        raise BadMagic(f"{path}: expected image magic {IMAGE_MAGIC:#010x}, found {magic:#010x}")
    size = count * rows * cols
    if len(raw) - 16 < size:
        raise TruncatedFile(f"{path}: expected {size} pixel bytes, found {len(raw) - 16}")
    return np.frombuffer(raw, dtype=np.uint8, count=size, offset=16).reshape(count, rows * cols)


def read_idx_labels(path: str | Path) -> np.ndarray:
    raw = _read_bytes(path)
    if len(raw) < 8:
        raise TruncatedFile(f"{path}: header needs 8 bytes, found {len(raw)}")
    magic, count = struct.unpack(">II", raw[:8])
    if magic != LABEL_MAGIC:
        raise BadMagic(f"{path}: expected label magic {LABEL_MAGIC:#010x}, found {magic:#010x}")
    if len(raw) - 8 < count:
        raise TruncatedFile(f"{path}: expected {count} labels, found {len(raw) - 8}")
    return np.frombuffer(raw, dtype=np.uint8, count=count, offset=8)


def write_idx_images(path: str | Path, images: np.ndarray, rows: int = 28, cols: int = 28) -> None:
    images = np.asarray(images, dtype=np.uint8).reshape(-1, rows * cols)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGE_MAGIC, len(images), rows, cols))
        fh.write(images.tobytes())


def write_idx_labels(path: str | Path, labels: Iterable[int]) -> None:
    labels = np.asarray(list(labels), dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", LABEL_MAGIC, len(labels)))
        fh.write(labels.tobytes())


def load_mnist(
    images_path: str | Path,
    labels_path: str | Path,
    per_digit: int,
    rng_seed: int | np.random.Generator | None = None,
    dissimilarity: str = "euclidean",
) -> Dataset:
    """
    Balanced sample of ``per_digit`` images for each digit 0-9.

    Pixels are scaled to ``[0, 1]``.  Points are labelled ``1..10 * per_digit``
    grouped by digit; the chosen images within a digit come from a seeded
    shuffle without replacement.
    """
    if per_digit < 1:
        raise ValueError("per_digit must be positive")
    images = read_idx_images(images_path)
    digits = read_idx_labels(labels_path)
    if len(images) != len(digits):
        raise DimensionMismatch(f"{len(images)} images but {len(digits)} labels")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    return sample_balanced(images, digits, per_digit, rng, dissimilarity)


def sample_balanced(
    images: np.ndarray, digits: np.ndarray, per_digit: int, rng: np.random.Generator, dissimilarity: str = "euclidean"
) -> Dataset:
    """Draw ``per_digit`` images of each digit without replacement and scale pixels by 1/255."""
    chosen = []
    for d in range(10):
        pool = np.flatnonzero(digits == d)
        if pool.size < per_digit:
            raise InsufficientSamples(f"digit {d} has {pool.size} images, need {per_digit}")
        chosen.append(rng.permutation(pool)[:per_digit])
    idx = np.concatenate(chosen)
    return Dataset.from_array(images[idx].astype(float) / 255.0, dissimilarity)


# ---------------------------------------------------------------------- #
# Dataset CSV                                                             #
# ---------------------------------------------------------------------- #


def dataset_to_csv(dataset: Dataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label"] + [f"c{k + 1}" for k in range(dataset.dim)])
    for lab, p in zip(dataset.labels, dataset.points):
        w.writerow([lab] + [repr(float(v)) for v in p])
    return buf.getvalue()


def dataset_from_csv(text: str, dissimilarity: str = "euclidean") -> Dataset:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ParseError("empty dataset file")
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "label" or header[1:] != [f"c{k + 1}" for k in range(len(header) - 1)]:
        raise ParseError(f"bad dataset header {rows[0]!r}; expected label,c1,...,cm")
    mapping = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"line {lineno}: expected {len(header)} fields, found {len(row)}")
        try:
            label = int(row[0])
            coords = [float(v) for v in row[1:]]
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        if label in mapping:
            raise ParseError(f"line {lineno}: duplicate label {label}")
        mapping[label] = coords
    return Dataset.from_mapping(mapping, dissimilarity)


def write_dataset(path: str | Path, dataset: Dataset) -> None:
    Path(path).write_text(dataset_to_csv(dataset), encoding="utf-8")


def read_dataset(path: str | Path, dissimilarity: str = "euclidean") -> Dataset:
    return dataset_from_csv(Path(path).read_text(encoding="utf-8"), dissimilarity)


def matrix_to_csv(labels: Iterable[int], matrix: np.ndarray) -> str:
    """Square matrix with a header row and a leading label column, sorted label order."""
    labels = list(labels)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label"] + labels)
    for lab, row in zip(labels, matrix):
        w.writerow([lab] + [repr(float(v)) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------- #
# Trees                                                                   #
# ---------------------------------------------------------------------- #


def to_newick(tree: BinaryHierarchy) -> str:
    """Newick text with integer leaf labels, no branch lengths, canonical child order."""
    return _nested_str(tree.to_nested()) + ";"


_TOKEN = re.compile(r"\s*(?:(\()|(\))|(,)|(;)|([+-]?\d+))")


def from_newick(text: str) -> BinaryHierarchy:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r} at offset {pos}")
        tokens.append(next(g for g in m.groups() if g is not None))
        pos = m.end()
    if not tokens or tokens[-1] != ";":
        raise ParseError("Newick text must end with ';'")
    tokens.pop()

    k = 0

    def parse() -> Nested:
        nonlocal k
        if k >= len(tokens):
            raise ParseError("unexpected end of input")
        tok = tokens[k]
        k += 1
        if tok == "(":
            items = [parse()]
            while k < len(tokens) and tokens[k] == ",":
                k += 1
                items.append(parse())
            if k >= len(tokens) or tokens[k] != ")":
                raise ParseError("missing ')'")
            k += 1
            if len(items) != 2:
                raise NotBinary(f"node with {len(items)} children")
            return tuple(items)
        if tok in "),;":
            raise ParseError(f"unexpected {tok!r}")
        return int(tok)

    nested = parse()
    if k != len(tokens):
        raise ParseError(f"trailing tokens after the root: {tokens[k:]}")
    return BinaryHierarchy.from_nested(nested)


def tree_to_json(tree: BinaryHierarchy) -> str:
    clusters = sorted((cluster_key(c) for c in tree.clusters), key=lambda c: (len(c), c))
    return json.dumps({"index_set": list(tree.index_set), "clusters": [list(c) for c in clusters]})


def tree_from_json(text: str) -> BinaryHierarchy:
    try:
        obj = json.loads(text)
        index_set = [int(i) for i in obj["index_set"]]
        clusters = [[int(i) for i in c] for c in obj["clusters"]]
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"bad tree JSON: {exc}") from None
    return BinaryHierarchy.from_cluster_set(index_set, clusters)


def write_tree(path: str | Path, tree: BinaryHierarchy) -> None:
    path = Path(path)
    text = tree_to_json(tree) if path.suffix.lower() == ".json" else to_newick(tree)
    path.write_text(text + "\n", encoding="utf-8")


def read_tree(path: str | Path) -> BinaryHierarchy:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return tree_from_json(text) if path.suffix.lower() == ".json" else from_newick(text)


# ---------------------------------------------------------------------- #
# Traces                                                                  #
# ---------------------------------------------------------------------- #

TRACE_COLUMNS = ("iteration", "objective_h", "violating_cluster", "swapped_cluster")


def _join(cluster) -> str:
    return "" if cluster is None else ";".join(str(i) for i in cluster_key(cluster))


def trace_to_csv(trace: AnytimeTrace) -> str:
    """One row per iteration; row 0 is the starting tree with empty cluster fields."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    w.writerow([0, repr(trace.initial_objective_h), "", ""])
    for k, step in enumerate(trace.steps, start=1):
        w.writerow([k, repr(step.objective_h), _join(step.violating_cluster), _join(step.swapped_grandchild)])
    return buf.getvalue()


def write_trace(path: str | Path, trace: AnytimeTrace) -> None:
    Path(path).write_text(trace_to_csv(trace), encoding="utf-8")
