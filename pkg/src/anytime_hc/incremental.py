"""Point insertion by homogeneity-guided descent, followed by anytime re-homogenization."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .anytime import AnytimeTrace, LinkageEvaluator, anytime_cluster
from .errors import DuplicateLabel, IndexSetTooSmall
from .geometry import Dataset
from .hierarchy import BinaryHierarchy, Cluster
from .linkage import LinkageLike, as_linkage, lance_williams_update


def linkages_to_point(tree: BinaryHierarchy, label: int, lk: LinkageEvaluator) -> dict[Cluster, float]:
    """Linkage of every cluster of ``tree`` to the singleton ``{label}`` in one post-order pass.

    Interior values come from the Lance-Williams recurrence using the sibling
    linkages of the tree, so the pass costs O(n) given those.
    """
    kind = lk.kind.kind
    point = frozenset((label,))
    out: dict[Cluster, float] = {}
    for c in reversed(tree.preorder()):
        kids = tree.interior.get(c)
        if kids is None:
            out[c] = lk(c, point)
        else:
            a, b = kids
            out[c] = float(lance_williams_update(kind, (len(a), len(b), 1), out[a], out[b], lk(a, b)))
    return out


def _descend(dataset: Dataset, tree: BinaryHierarchy, label: int, lk: LinkageEvaluator) -> BinaryHierarchy:
    point = frozenset((label,))
    if lk.kind.strategy == "recurrence":
        to_point = linkages_to_point(tree, label, lk)

        def near(c):
            return to_point[c]
    else:

        def near(c):
            return lk(c, point)

    k = tree.root
    while True:
        kids = tree.interior.get(k)
        if kids is None:
            # descent reached a leaf: the new point becomes its sibling
            break
        left, right = kids
        dl, dr = near(left), near(right)
        if lk(left, right) <= min(dl, dr):
            break
        k = right if dr < dl else left
    return tree.add_leaf_as_sibling(k, label)


def insert_point(
    dataset: Dataset,
    kind: LinkageLike,
    tree: BinaryHierarchy,
    new_label: int,
    new_point: Iterable[float],
    evaluator: LinkageEvaluator | None = None,
) -> BinaryHierarchy:
    """
    Attach a new leaf where the homogeneity test stops the root-to-leaf descent.

    Starting at the root ``K``, with children ``K_L`` and ``K_R``: if
    ``l(K_L, K_R) <= min(l(K_L, i), l(K_R, i))`` the new leaf ``i`` becomes the
    sibling of ``K``; otherwise descend into the child nearer to ``i`` (the
    smaller-minimum child on ties).  Reaching a leaf attaches ``i`` next to it.

    ``dataset`` is the data of ``tree`` without the new point.  Pass an
    ``evaluator`` built on the updated dataset to reuse or count evaluations.
    """
    updated = _updated(dataset, tree, new_label, new_point)
    lk = evaluator if evaluator is not None else LinkageEvaluator(updated, kind)
    return _descend(updated, tree, int(new_label), lk)


def _updated(dataset: Dataset, tree: BinaryHierarchy, new_label: int, new_point) -> Dataset:
    if int(new_label) in tree.root:
        raise DuplicateLabel(f"label {new_label} is already in the tree")
    return dataset.with_point(int(new_label), new_point)


def incremental_cluster(
    dataset: Dataset,
    kind: LinkageLike,
    tree: BinaryHierarchy,
    new_label: int,
    new_point: Iterable[float],
    max_iterations: int | None = None,
    *,
    profiles: bool = True,
) -> AnytimeTrace:
    """Insert a point, then run the anytime loop on the updated data.

    The returned trace covers the anytime phase only; its ``final_tree`` is
    over the enlarged label set.
    """
    updated = _updated(dataset, tree, new_label, new_point)
    lk = LinkageEvaluator(updated, kind)
    start = _descend(updated, tree, int(new_label), lk)
    return anytime_cluster(updated, kind, start, max_iterations, evaluator=lk, profiles=profiles)


def delete_point(
    dataset: Dataset,
    kind: LinkageLike,
    tree: BinaryHierarchy,
    label: int,
    max_iterations: int | None = None,
    *,
    profiles: bool = True,
) -> AnytimeTrace:
    """Remove a leaf (splicing out its parent) and re-homogenize.

    Not part of the insertion procedure proper; provided as its natural inverse.
    """
    reduced = dataset.without_point(label)
    start = tree.remove_leaf(label)
    return anytime_cluster(reduced, kind, start, max_iterations, profiles=profiles)


@dataclass
class IncrementalBuild:
    tree: BinaryHierarchy
    iterations: list[int]


def build_incrementally(
    dataset: Dataset,
    kind: LinkageLike,
    order: Sequence[int] | None = None,
    max_iterations: int | None = None,
) -> IncrementalBuild:
    """
    Grow a homogeneous tree by inserting points one at a time.

    Starts from the two-leaf tree on the first two labels of ``order``
    (default: ascending labels) and applies :func:`incremental_cluster` for
    each further point.  ``iterations[k]`` is the anytime iteration count
    after inserting the ``k + 3``-th point.
    """
    lk_kind = as_linkage(kind)
    order = list(dataset.labels if order is None else order)
    if len(order) < 2:
        raise IndexSetTooSmall("need at least two points")
    tree = BinaryHierarchy.from_nested((order[0], order[1]))
    current = dataset.subset(order[:2])
    counts: list[int] = []
    for label in order[2:]:
        trace = incremental_cluster(current, lk_kind, tree, label, dataset.point(label), max_iterations, profiles=False)
        current = current.with_point(label, dataset.point(label))
        tree = trace.final_tree
        counts.append(trace.iterations)
    return IncrementalBuild(tree, counts)
