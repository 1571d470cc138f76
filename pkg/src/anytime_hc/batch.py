"""Batch agglomerative clustering and the tree monotonicity check."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyDataset
from .geometry import Dataset
from .hierarchy import BinaryHierarchy, Cluster, _ordered, check_same_labels
from .linkage import LinkageLike, as_linkage, lance_williams_update, linkage_eval, strictly_greater


@dataclass(frozen=True)
class Merge:
    a: Cluster
    b: Cluster
    height: float


def hac_merges(dataset: Dataset, kind: LinkageLike) -> list[Merge]:
    """
    Run agglomerative clustering and return the merge sequence.

    At each step the pair of current clusters with the smallest linkage value
    is merged.  Ties are broken by the pair of cluster minimum labels,
    ``(smaller, larger)``, compared lexicographically.  Linkages to a new
    cluster come from the Lance-Williams recurrence, except for minimax which
    is re-evaluated directly.
    """
    lk = as_linkage(kind)
    n = len(dataset)
    if n < 2:
        raise EmptyDataset("agglomerative clustering needs at least two points")
    labels = dataset.labels
    if lk.kind == "ward":
        x = dataset.points
        dist = np.empty((n, n))
        for k in range(n):
            diff = x - x[k]
            dist[k] = 0.5 * np.einsum("ij,ij->i", diff, diff)
    else:
        dist = np.array(dataset.dissimilarity_matrix, dtype=float)
    np.fill_diagonal(dist, np.inf)

    clusters: list[Cluster | None] = [frozenset((lab,)) for lab in labels]
    sizes = np.ones(n)
    mins = np.array(labels, dtype=float)  # minimum label per slot; labels are sorted
    active = np.ones(n, dtype=bool)
    merges: list[Merge] = []
    for _ in range(n - 1):
        sub = np.where(active[:, None] & active[None, :], dist, np.inf)
        best = sub.min()
        ii, jj = np.nonzero(sub == best)
        keep = ii < jj
        ii, jj = ii[keep], jj[keep]
        # slots are ordered by their cluster's minimum label, so (i, j) with i<j
        # already has (smaller min, larger min)
        order = np.lexsort((mins[jj], mins[ii]))
        i, j = int(ii[order[0]]), int(jj[order[0]])
        a, b = clusters[i], clusters[j]
        merges.append(Merge(*_ordered(a, b), float(best)))

        others = np.nonzero(active)[0]
        others = others[(others != i) & (others != j)]
        merged = a | b
        if others.size:
            if lk.kind == "minimax":
                new = np.array([linkage_eval(dataset, lk.kind, merged, clusters[k]) for k in others])
            else:
                new = lance_williams_update(lk.kind, (sizes[i], sizes[j], sizes[others]), dist[i, others], dist[j, others], dist[i, j])
            dist[i, others] = new
            dist[others, i] = new
        clusters[i] = merged
        clusters[j] = None
        sizes[i] += sizes[j]
        active[j] = False
        dist[j, :] = np.inf
        dist[:, j] = np.inf
    return merges


def hac(dataset: Dataset, kind: LinkageLike) -> BinaryHierarchy:
    merges = hac_merges(dataset, kind)
    children = {m.a | m.b: (m.a, m.b) for m in merges}
    return BinaryHierarchy(children, frozenset(dataset.labels))


@dataclass(frozen=True)
class MonotoneCheck:
    monotone: bool
    violation: Cluster | None = None

    def __bool__(self) -> bool:
        return self.monotone


def is_monotone(dataset: Dataset, kind: LinkageLike, tree: BinaryHierarchy, evaluator=None) -> MonotoneCheck:
    """Whether every grandchild is at least as close to its sibling as its parent is to the parent's sibling.

    Returns the first violating grandchild in canonical pre-order otherwise.
    """
    check_same_labels(tree, dataset.labels)
    lk = evaluator if evaluator is not None else (lambda a, b: linkage_eval(dataset, kind, a, b))
    for g in tree.grandchildren():
        p = tree.parent(g)
        if strictly_greater(lk(g, p - g), lk(p, tree.sibling(p))):
            return MonotoneCheck(False, g)
    return MonotoneCheck(True)
