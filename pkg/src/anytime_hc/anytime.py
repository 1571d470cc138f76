"""
Anytime hierarchical clustering by local homogenization.

A tree is locally homogeneous at a grandchild ``I`` (parent ``P``) when

    l(I, sib(I)) <= min(l(I, sib(P)), l(sib(I), sib(P)))

Each step finds a grandchild where this fails strictly, picks the child of
``P`` farther from ``sib(P)`` and swaps it with ``sib(P)`` by an NNI move.
The loop stops at a homogeneous tree.  Every intermediate tree is a valid
hierarchy, so the loop can be interrupted at any point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

from .errors import IterationBudgetExceeded, NotAGrandchild
from .geometry import Dataset, SufficientStats, merge_stats, stats
from .hierarchy import BinaryHierarchy, Cluster, check_same_labels, cluster_key
from .linkage import LinkageLike, as_linkage, fast_average, fast_ward, linkage_eval, strictly_greater


class LinkageEvaluator:
    """
    Memoized linkage values for one dataset and linkage kind.

    Values are keyed by the unordered pair of clusters, so a pair evaluated
    once keeps the same value for the whole run regardless of which tree it
    appears in.  With the ``sufficient_stats`` strategy, cluster statistics
    are cached as well and a cluster created by an NNI move gets its
    statistics by merging its two children.

    ``calls`` counts every request; ``computed`` counts cache misses.
    """

    def __init__(self, dataset: Dataset, kind: LinkageLike):
        self.dataset = dataset
        self.kind = as_linkage(kind)
        self.kind.check_dataset(dataset)
        self._values: dict[frozenset, float] = {}
        self._stats: dict[Cluster, SufficientStats] = {}
        self.calls = 0
        self.computed = 0

    def __call__(self, a: Cluster, b: Cluster) -> float:
        self.calls += 1
        if not a or not b:
            return 0.0
        key = frozenset((a, b))
        value = self._values.get(key)
        if value is None:
            self.computed += 1
            value = self._compute(a, b)
            self._values[key] = value
        return value

    def _compute(self, a: Cluster, b: Cluster) -> float:
        if self.kind.strategy != "sufficient_stats":
            return linkage_eval(self.dataset, self.kind, a, b)
        sa, sb = self.stats(a), self.stats(b)
        if self.kind.kind == "ward":
            return fast_ward(sa, sb)
        return fast_average(sa, sb, self.dataset.dissimilarity)

    def stats(self, cluster: Cluster, split: tuple[Cluster, Cluster] | None = None) -> SufficientStats:
        s = self._stats.get(cluster)
        if s is None:
            if split is not None and split[0] in self._stats and split[1] in self._stats:
                s = merge_stats(self._stats[split[0]], self._stats[split[1]])
            else:
                s = stats(self.dataset, cluster)
            self._stats[cluster] = s
        return s

    def note_split(self, cluster: Cluster, left: Cluster, right: Cluster) -> None:
        """Record statistics for a new cluster from its children when they are cached."""
        if self.kind.strategy == "sufficient_stats":
            self.stats(cluster, (left, right))

    def prime(self, tree: BinaryHierarchy) -> None:
        """Fill the statistics cache bottom-up (post-order) for every cluster of ``tree``."""
        if self.kind.strategy != "sufficient_stats":
            return
        for c in reversed(tree.preorder()):
            if c in self._stats:
                continue
            kids = tree.interior.get(c)
            if kids is None:
                (label,) = c
                self._stats[c] = SufficientStats.singleton(self.dataset.point(label))
            else:
                self.stats(c, kids)


def _evaluator(dataset: Dataset, kind: LinkageLike, evaluator: LinkageEvaluator | None) -> LinkageEvaluator:
    if evaluator is not None:
        return evaluator
    return LinkageEvaluator(dataset, kind)


# ---------------------------------------------------------------------- #
# Homogeneity                                                             #
# ---------------------------------------------------------------------- #


def _local_values(tree: BinaryHierarchy, g: Cluster, lk) -> tuple[float, float, float, Cluster, Cluster, Cluster]:
    p = tree.parent(g)
    s = p - g
    u = tree.sibling(p)
    return lk(g, s), lk(g, u), lk(s, u), p, s, u


def is_locally_homogeneous(dataset: Dataset, kind: LinkageLike, tree: BinaryHierarchy, grandchild, evaluator=None) -> bool:
    g = frozenset(grandchild)
    if not tree.is_grandchild(g):
        raise NotAGrandchild(f"{cluster_key(g)} is not a grandchild")
    lk = _evaluator(dataset, kind, evaluator)
    inner, to_g, to_s, *_ = _local_values(tree, g, lk)
    return not strictly_greater(inner, min(to_g, to_s))


def violations(dataset: Dataset, kind: LinkageLike, tree: BinaryHierarchy, evaluator=None) -> Iterator[Cluster]:
    """All grandchildren where local homogeneity fails strictly, in canonical pre-order.

    Differences within rounding noise (see :func:`strictly_greater`) count as ties.
    """
    lk = _evaluator(dataset, kind, evaluator)
    for g in tree.grandchildren():
        inner, to_g, to_s, *_ = _local_values(tree, g, lk)
        if strictly_greater(inner, min(to_g, to_s)):
            yield g


def find_violation(dataset: Dataset, kind: LinkageLike, tree: BinaryHierarchy, evaluator=None) -> Cluster | None:
    return next(violations(dataset, kind, tree, evaluator), None)


def is_homogeneous(dataset: Dataset, kind: LinkageLike, tree: BinaryHierarchy, evaluator=None) -> bool:
    return find_violation(dataset, kind, tree, evaluator) is None


# ---------------------------------------------------------------------- #
# Objective and convergence certificates                                  #
# ---------------------------------------------------------------------- #


def objective_h(dataset: Dataset, kind: LinkageLike, tree: BinaryHierarchy, evaluator=None) -> float:
    """Half the sum over all clusters of the linkage to their sibling.

    Each sibling pair is counted once; the root's term is zero.
    """
    lk = _evaluator(dataset, kind, evaluator)
    return math.fsum(lk(a, b) for _, a, b in tree.sibling_pairs())


def level_profile(dataset: Dataset, kind: LinkageLike, tree: BinaryHierarchy, evaluator=None) -> tuple[float, ...]:
    """Sum of sibling linkages level by level, ``n - 1`` entries.

    Entry ``t`` (1-based) collects the sibling pairs whose members have depth
    ``t + 1``, i.e. the splits of interior nodes at depth ``t``.  The root
    level always contributes zero and is left out.
    """
    lk = _evaluator(dataset, kind, evaluator)
    levels: list[list[float]] = [[] for _ in range(tree.n_leaves - 1)]
    for c, a, b in tree.sibling_pairs():
        levels[tree.depth(c) - 1].append(lk(a, b))
    return tuple(math.fsum(v) for v in levels)


def sorted_profile(dataset: Dataset, kind: LinkageLike, tree: BinaryHierarchy, evaluator=None) -> tuple[float, ...]:
    """All ``2n - 1`` cluster-to-sibling linkage values (root as 0) in ascending order."""
    lk = _evaluator(dataset, kind, evaluator)
    values = [0.0]
    for _, a, b in tree.sibling_pairs():
        v = lk(a, b)
        values.append(v)
        values.append(v)
    return tuple(sorted(values))


# ---------------------------------------------------------------------- #
# Restructuring                                                           #
# ---------------------------------------------------------------------- #


@dataclass(frozen=True)
class StepResult:
    tree: BinaryHierarchy
    moved: bool
    swapped: Cluster | None = None
    violating: Cluster | None = None


def anytime_step(dataset: Dataset, kind: LinkageLike, tree: BinaryHierarchy, evaluator=None) -> StepResult:
    lk = _evaluator(dataset, kind, evaluator)
    g = find_violation(dataset, kind, tree, lk)
    if g is None:
        return StepResult(tree, False)
    p = tree.parent(g)
    u = tree.sibling(p)
    first, second = tree.children(p)
    # argmax over the children of P; ties go to the smaller-minimum child
    target = second if lk(second, u) > lk(first, u) else first
    moved = tree.nni_move(target)
    kept = p - target
    lk.note_split(kept | u, *sorted((kept, u), key=min))
    return StepResult(moved, True, target, g)


@dataclass(frozen=True)
class TraceStep:
    violating_cluster: Cluster
    swapped_grandchild: Cluster
    objective_h: float
    level_profile: tuple[float, ...] = ()
    sorted_profile: tuple[float, ...] = ()


@dataclass
class AnytimeTrace:
    """
    Record of one anytime run.

    ``steps[k]`` holds the diagnostics of the tree *after* move ``k``;
    ``initial_*`` hold those of the starting tree.  ``converged`` is false
    only for partial traces attached to :class:`IterationBudgetExceeded`.
    """

    final_tree: BinaryHierarchy
    steps: list[TraceStep] = field(default_factory=list)
    initial_objective_h: float = 0.0
    initial_level_profile: tuple[float, ...] = ()
    initial_sorted_profile: tuple[float, ...] = ()
    converged: bool = True

    @property
    def iterations(self) -> int:
        return len(self.steps)

    def objective_values(self) -> list[float]:
        return [self.initial_objective_h] + [s.objective_h for s in self.steps]


def default_budget(n: int) -> int:
    return max(10 * n * n, 1)


def anytime_cluster(
    dataset: Dataset,
    kind: LinkageLike,
    initial: BinaryHierarchy,
    max_iterations: int | None = None,
    *,
    evaluator: LinkageEvaluator | None = None,
    profiles: bool = True,
) -> AnytimeTrace:
    """
    Restructure ``initial`` by NNI moves until it is homogeneous.

    Parameters
    ----------
    max_iterations : int, optional
        Defaults to ``10 n^2``.  Reaching it raises
        :class:`IterationBudgetExceeded` carrying the partial trace.
    profiles : bool
        Record the level and sorted profiles per step (H is always recorded).
    """
    check_same_labels(initial, dataset.labels)
    lk = _evaluator(dataset, kind, evaluator)
    lk.prime(initial)
    budget = default_budget(len(dataset)) if max_iterations is None else int(max_iterations)
    if budget < 1:
        raise ValueError("max_iterations must be positive")

    def record(tree):
        if not profiles:
            return objective_h(dataset, kind, tree, lk), (), ()
        return (
            objective_h(dataset, kind, tree, lk),
            level_profile(dataset, kind, tree, lk),
            sorted_profile(dataset, kind, tree, lk),
        )

    h0, l0, s0 = record(initial)
    trace = AnytimeTrace(initial, [], h0, l0, s0)
    tree = initial
    while True:
        step = anytime_step(dataset, kind, tree, lk)
        if not step.moved:
            break
        if trace.iterations >= budget:
            trace.converged = False
            raise IterationBudgetExceeded(
                f"no homogeneous tree after {budget} iterations", trace
            )
        tree = step.tree
        h, lvl, srt = record(tree)
        trace.steps.append(TraceStep(step.violating, step.swapped, h, lvl, srt))
        trace.final_tree = tree
    return trace
