"""
Rooted binary cluster hierarchies over a finite set of integer labels.

A tree is identified with its cluster set: every vertex is represented by the
``frozenset`` of leaf labels below it, and two trees are equal iff their
cluster sets are equal.  Trees are immutable; :meth:`BinaryHierarchy.nni_move`
returns a new tree.

Children are always stored in canonical order (the child holding the smaller
minimum label first), which makes every traversal and serialization
reproducible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

from .errors import (
    IndexSetMismatch,
    IndexSetTooLarge,
    IndexSetTooSmall,
    MissingRootOrLeaf,
    NotAGrandchild,
    NotBinary,
    NotLaminar,
    UnknownCluster,
)

Cluster = frozenset
Nested = Union[int, tuple]

MAX_ENUMERATION_SIZE = 10


def as_cluster(members: Iterable[int]) -> Cluster:
    if type(members) is frozenset:
        return members
    return frozenset(int(i) for i in members)


def _ordered(a: Cluster, b: Cluster) -> tuple[Cluster, Cluster]:
    return (a, b) if min(a) < min(b) else (b, a)


def cluster_key(cluster: Cluster) -> tuple[int, ...]:
    """Sort key giving the canonical (sorted-label) view of a cluster."""
    return tuple(sorted(cluster))


@dataclass(frozen=True)
class Relations:
    """Hierarchical relations of one cluster; empty clusters mean "none"."""

    parent: Cluster
    children: tuple[Cluster, Cluster] | tuple[()]
    sibling: Cluster
    grandparent: Cluster
    is_grandchild: bool
    depth: int


@dataclass(frozen=True)
class NniTriplet:
    a: Cluster
    b: Cluster
    c: Cluster


@dataclass(frozen=True)
class NotAdjacent:
    """Result of :func:`nni_triplet` for trees that are not one move apart.

    ``equal`` is true when the two trees coincide (NNI distance zero).
    Instances are falsy so callers can write ``if nni_triplet(s, t): ...``.
    """

    equal: bool = False

    def __bool__(self) -> bool:
        return False


class BinaryHierarchy:
    """
    Immutable rooted non-degenerate tree over an index set of integer labels.

    Use :meth:`from_cluster_set`, :meth:`from_nested` or the sampling and
    enumeration helpers in this module to build one.
    """

    __slots__ = ("_root", "_children", "_parent", "_labels", "_depth", "_preorder", "_clusters", "_hash")

    def __init__(self, children: Mapping[Cluster, tuple[Cluster, Cluster]], root: Cluster):
        # Trusted constructor: callers guarantee a valid binary split map.
        self._root = root
        self._children = dict(children)
        parent: dict[Cluster, Cluster] = {}
        for p, (left, right) in self._children.items():
            parent[left] = p
            parent[right] = p
        self._parent = parent
        self._labels = tuple(sorted(root))
        self._depth: dict[Cluster, int] | None = None
        self._preorder: tuple[Cluster, ...] | None = None
        self._clusters: frozenset | None = None
        self._hash: int | None = None

    # ------------------------------------------------------------------ #
    # Construction                                                        #
    # ------------------------------------------------------------------ #

    @classmethod
    def from_cluster_set(cls, index_set: Iterable[int], clusters: Iterable[Iterable[int]]) -> "BinaryHierarchy":
        """Rebuild the unique tree whose cluster set is ``clusters``.

        Raises :class:`NotLaminar` if two clusters partially overlap,
        :class:`NotBinary` if some non-singleton cluster is not split in two
        by its maximal proper sub-clusters, and :class:`MissingRootOrLeaf`
        if the full index set or a singleton is absent.
        """
        labels = as_cluster(index_set)
        if not labels:
            raise MissingRootOrLeaf("empty index set")
        family = {as_cluster(c) for c in clusters}
        if frozenset() in family:
            raise NotLaminar("the empty set is not a cluster")
        stray = [c for c in family if not c <= labels]
        if stray:
            raise NotLaminar(f"cluster {cluster_key(stray[0])} is not a subset of the index set")
        if labels not in family:
            raise MissingRootOrLeaf("cluster set lacks the full index set")
        missing = [i for i in labels if frozenset((i,)) not in family]
        if missing:
            raise MissingRootOrLeaf(f"cluster set lacks singleton {{{missing[0]}}}")

        ordered = sorted(family, key=lambda c: (len(c), cluster_key(c)))
        for x, y in itertools.combinations(ordered, 2):
            if x & y and not x <= y:
                raise NotLaminar(f"clusters {cluster_key(x)} and {cluster_key(y)} partially overlap")
        # In a laminar family the supersets of a cluster form a chain, so the
        # first one in size order is its parent.
        parts: dict[Cluster, list[Cluster]] = {c: [] for c in ordered}
        for idx, c in enumerate(ordered[:-1]):
            parent = next(d for d in ordered[idx + 1 :] if c < d)
            parts[parent].append(c)
        children: dict[Cluster, tuple[Cluster, Cluster]] = {}
        for c in ordered:
            if len(c) == 1:
                continue
            kids = parts[c]
            if len(kids) != 2 or kids[0] | kids[1] != c:
                raise NotBinary(f"cluster {cluster_key(c)} is not split into exactly two sub-clusters")
            children[c] = _ordered(kids[0], kids[1])
        return cls(children, labels)

    @classmethod
    def from_nested(cls, nested: Nested) -> "BinaryHierarchy":
        """Build a tree from nested pairs, e.g. ``((1, 2), 3)``."""
        children: dict[Cluster, tuple[Cluster, Cluster]] = {}
        seen: set[int] = set()
        # Iterative post-order so deep caterpillars do not hit the recursion limit.
        stack: list[tuple[Nested, bool]] = [(nested, False)]
        done: list[Cluster] = []
        while stack:
            node, expanded = stack.pop()
            if isinstance(node, (tuple, list)):
                if len(node) != 2:
                    raise NotBinary(f"node with {len(node)} children")
                if expanded:
                    right = done.pop()
                    left = done.pop()
                    if left & right:
                        raise NotLaminar("a label appears twice")
                    merged = left | right
                    children[merged] = _ordered(left, right)
                    done.append(merged)
                else:
                    stack.append((node, True))
                    stack.append((node[1], False))
                    stack.append((node[0], False))
            else:
                label = int(node)
                if label in seen:
                    raise NotLaminar(f"label {label} appears twice")
                seen.add(label)
                done.append(frozenset((label,)))
        (root,) = done
        return cls(children, root)

    # ------------------------------------------------------------------ #
    # Basic structure                                                     #
    # ------------------------------------------------------------------ #

    @property
    def index_set(self) -> tuple[int, ...]:
        return self._labels

    @property
    def root(self) -> Cluster:
        return self._root

    @property
    def n_leaves(self) -> int:
        return len(self._labels)

    @property
    def clusters(self) -> frozenset:
        if self._clusters is None:
            self._clusters = frozenset(self._children) | frozenset(frozenset((i,)) for i in self._labels)
        return self._clusters

    @property
    def interior(self) -> Mapping[Cluster, tuple[Cluster, Cluster]]:
        """Read-only view of the interior nodes and their canonical child pairs."""
        return _ReadOnly(self._children)

    def __contains__(self, cluster: object) -> bool:
        return cluster in self._children or cluster in self._parent

    def _check(self, cluster: Cluster) -> Cluster:
        cluster = as_cluster(cluster)
        if cluster not in self:
            raise UnknownCluster(f"{cluster_key(cluster)} is not a cluster of this tree")
        return cluster

    def children(self, cluster: Iterable[int]) -> tuple[Cluster, Cluster] | tuple[()]:
        cluster = self._check(cluster)
        return self._children.get(cluster, ())

    def parent(self, cluster: Iterable[int]) -> Cluster:
        cluster = self._check(cluster)
        return self._parent.get(cluster, frozenset())

    def sibling(self, cluster: Iterable[int]) -> Cluster:
        cluster = self._check(cluster)
        p = self._parent.get(cluster)
        if p is None:
            return frozenset()
        return p - cluster

    def grandparent(self, cluster: Iterable[int]) -> Cluster:
        cluster = self._check(cluster)
        p = self._parent.get(cluster)
        if p is None:
            return frozenset()
        return self._parent.get(p, frozenset())

    def is_grandchild(self, cluster: Iterable[int]) -> bool:
        return bool(self.grandparent(cluster))

    def depth(self, cluster: Iterable[int]) -> int:
        """Number of clusters containing ``cluster`` (itself included); the root has depth 1."""
        cluster = self._check(cluster)
        return self._depths()[cluster]

    def _depths(self) -> dict[Cluster, int]:
        if self._depth is None:
            depth = {self._root: 1}
            for c in self.preorder():
                kids = self._children.get(c)
                if kids:
                    d = depth[c] + 1
                    depth[kids[0]] = d
                    depth[kids[1]] = d
            self._depth = depth
        return self._depth

    def relations(self, cluster: Iterable[int]) -> Relations:
        cluster = self._check(cluster)
        grand = self.grandparent(cluster)
        return Relations(
            parent=self.parent(cluster),
            children=self.children(cluster),
            sibling=self.sibling(cluster),
            grandparent=grand,
            is_grandchild=bool(grand),
            depth=self.depth(cluster),
        )

    def preorder(self) -> tuple[Cluster, ...]:
        """All clusters in depth-first pre-order, smaller-minimum child first."""
        if self._preorder is None:
            out: list[Cluster] = []
            stack = [self._root]
            while stack:
                c = stack.pop()
                out.append(c)
                kids = self._children.get(c)
                if kids:
                    stack.append(kids[1])
                    stack.append(kids[0])
            self._preorder = tuple(out)
        return self._preorder

    def grandchildren(self) -> Iterator[Cluster]:
        """Grandchild clusters in canonical pre-order."""
        top = self._children.get(self._root, ())
        for c in self.preorder():
            if c == self._root or c in top:
                continue
            yield c

    def sibling_pairs(self) -> Iterator[tuple[Cluster, Cluster, Cluster]]:
        """Yield ``(parent, left, right)`` for every interior node, in pre-order."""
        for c in self.preorder():
            kids = self._children.get(c)
            if kids:
                yield c, kids[0], kids[1]

    def lowest_common_ancestor(self, i: int, j: int) -> Cluster:
        node = frozenset((int(i),))
        self._check(node)
        while int(j) not in node:
            node = self._parent[node]
        return node

    # ------------------------------------------------------------------ #
    # Moves                                                               #
    # ------------------------------------------------------------------ #

    def nni_move(self, grandchild: Iterable[int]) -> "BinaryHierarchy":
        """Swap ``grandchild`` with its parent's sibling and return the new tree."""
        g = self._check(grandchild)
        p = self._parent.get(g)
        gp = self._parent.get(p) if p is not None else None
        if gp is None:
            raise NotAGrandchild(f"{cluster_key(g)} has no grandparent")
        s = p - g
        u = gp - p
        merged = s | u
        children = dict(self._children)
        del children[p]
        children[merged] = _ordered(s, u)
        children[gp] = _ordered(g, merged)
        return BinaryHierarchy(children, self._root)

    def remove_leaf(self, label: int) -> "BinaryHierarchy":
        """Delete a leaf and splice out its parent."""
        leaf = self._check(frozenset((int(label),)))
        if self.n_leaves < 3:
            raise IndexSetTooSmall("cannot remove a leaf from a tree with fewer than 3 leaves")
        p = self._parent[leaf]
        s = p - leaf
        children: dict[Cluster, tuple[Cluster, Cluster]] = {}
        # Every strict ancestor of the leaf loses the label; the parent vanishes.
        for c, (a, b) in self._children.items():
            if c == p:
                continue
            a = s if a == p else a
            b = s if b == p else b
            if label in c:
                c = c - leaf
                a = a - leaf
                b = b - leaf
            children[c] = _ordered(a, b)
        root = self._root - leaf if p != self._root else s
        return BinaryHierarchy(children, root)

    def add_leaf_as_sibling(self, cluster: Iterable[int], label: int) -> "BinaryHierarchy":
        """Attach a new leaf as the sibling of ``cluster``."""
        k = self._check(cluster)
        label = int(label)
        if label in self._root:
            raise IndexSetMismatch(f"label {label} already in the tree")
        leaf = frozenset((label,))
        joined = k | leaf
        children: dict[Cluster, tuple[Cluster, Cluster]] = {}
        for c, (a, b) in self._children.items():
            if k < c:
                a = joined if a == k else (a | leaf if k < a else a)
                b = joined if b == k else (b | leaf if k < b else b)
                c = c | leaf
            children[c] = _ordered(a, b)
        children[joined] = _ordered(k, leaf)
        return BinaryHierarchy(children, self._root | leaf)

    # ------------------------------------------------------------------ #
    # Conversions                                                         #
    # ------------------------------------------------------------------ #

    def to_nested(self) -> Nested:
        built: dict[Cluster, Nested] = {}
        for c in reversed(self.preorder()):
            kids = self._children.get(c)
            built[c] = (built[kids[0]], built[kids[1]]) if kids else next(iter(c))
        return built[self._root]

    def relabel(self, mapping: Mapping[int, int]) -> "BinaryHierarchy":
        def m(c: Cluster) -> Cluster:
            return frozenset(int(mapping[i]) for i in c)

        children = {m(c): _ordered(m(a), m(b)) for c, (a, b) in self._children.items()}
        return BinaryHierarchy(children, m(self._root))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryHierarchy):
            return NotImplemented
        return self._root == other._root and self._children.keys() == other._children.keys()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._children))
        return self._hash

    def __repr__(self) -> str:
        return f"BinaryHierarchy({_nested_str(self.to_nested())})"


class _ReadOnly(Mapping):
    __slots__ = ("_d",)

    def __init__(self, d):
        self._d = d

    def __getitem__(self, k):
        return self._d[k]

    def __iter__(self):
        return iter(self._d)

    def __len__(self):
        return len(self._d)


def _nested_str(n: Nested) -> str:
    if isinstance(n, tuple):
        return f"({_nested_str(n[0])},{_nested_str(n[1])})"
    return str(n)


# ---------------------------------------------------------------------- #
# Module-level operations                                                 #
# ---------------------------------------------------------------------- #

from_cluster_set = BinaryHierarchy.from_cluster_set


def cluster_set(tree: BinaryHierarchy) -> frozenset:
    return tree.clusters


def nni_triplet(tree_a: BinaryHierarchy, tree_b: BinaryHierarchy) -> NniTriplet | NotAdjacent:
    """Return the ordered triple ``(A, B, C)`` with ``A|B`` only in ``tree_a`` and ``B|C`` only in ``tree_b``."""
    if tree_a.root != tree_b.root:
        raise IndexSetMismatch("trees are over different index sets")
    removed = tree_a.clusters - tree_b.clusters
    added = tree_b.clusters - tree_a.clusters
    if not removed and not added:
        return NotAdjacent(equal=True)
    if len(removed) != 1 or len(added) != 1:
        return NotAdjacent()
    (x,) = removed
    (y,) = added
    b = x & y
    a = x - y
    c = y - x
    common = tree_a.clusters & tree_b.clusters
    if not (a and b and c) or not {a, b, c} <= common:
        return NotAdjacent()
    return NniTriplet(a, b, c)


def count_trees(n: int) -> int:
    """Number of rooted binary trees on ``n`` labelled leaves, ``(2n-3)!!``."""
    if n < 2:
        raise IndexSetTooSmall("need at least two leaves")
    return math.prod(range(2 * n - 3, 0, -2))


def _labels_of(index_set: Iterable[int] | int) -> list[int]:
    if isinstance(index_set, (int, np.integer)):
        return list(range(1, int(index_set) + 1))
    labels = sorted({int(i) for i in index_set})
    return labels


def random_tree(index_set: Iterable[int] | int, rng_seed: int | np.random.Generator | None = None) -> BinaryHierarchy:
    """Sample a tree uniformly from all ``(2n-3)!!`` binary trees on ``index_set``.

    Leaves are inserted one at a time; leaf ``k+1`` is attached above one of
    the ``2k-1`` vertices of the current tree chosen uniformly at random (the
    vertex above the root being the virtual root edge).  An integer
    ``index_set`` means the labels ``1..n``.
    """
    labels = _labels_of(index_set)
    if len(labels) < 2:
        raise IndexSetTooSmall("need at least two leaves")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)

    # Vertices are integer ids; leaves use id = position in ``labels``.
    n = len(labels)
    parent = [-1] * (2 * n - 1)
    kids: dict[int, list[int]] = {}
    vertices = [0]
    root = 0
    next_id = n
    for k in range(1, n):
        v = vertices[int(rng.integers(len(vertices)))]
        w = next_id
        next_id += 1
        p = parent[v]
        kids[w] = [v, k]
        parent[v] = w
        parent[k] = w
        parent[w] = p
        if p == -1:
            root = w
        else:
            pk = kids[p]
            pk[pk.index(v)] = w
        vertices.append(k)
        vertices.append(w)

    cluster: dict[int, Cluster] = {i: frozenset((labels[i],)) for i in range(n)}
    children: dict[Cluster, tuple[Cluster, Cluster]] = {}
    # Internal ids increase with creation time but a child may be newer than
    # its parent, so resolve clusters with an explicit post-order.
    stack = [(root, False)]
    while stack:
        v, expanded = stack.pop()
        if v < n:
            continue
        a, b = kids[v]
        if expanded:
            cluster[v] = cluster[a] | cluster[b]
            children[cluster[v]] = _ordered(cluster[a], cluster[b])
        else:
            stack.extend([(v, True), (a, False), (b, False)])
    return BinaryHierarchy(children, cluster[root])


def _insertions(tree: Nested, label: int) -> Iterator[Nested]:
    yield (tree, label)
    if isinstance(tree, tuple):
        for left in _insertions(tree[0], label):
            yield (left, tree[1])
        for right in _insertions(tree[1], label):
            yield (tree[0], right)


def enumerate_trees(index_set: Iterable[int] | int) -> list[BinaryHierarchy]:
    """Every binary tree on ``index_set`` exactly once (at most 10 labels)."""
    labels = _labels_of(index_set)
    if len(labels) > MAX_ENUMERATION_SIZE:
        raise IndexSetTooLarge(f"enumeration limited to {MAX_ENUMERATION_SIZE} labels")
    if len(labels) < 2:
        raise IndexSetTooSmall("need at least two leaves")
    shapes: list[Nested] = [labels[0]]
    for label in labels[1:]:
        shapes = [t for s in shapes for t in _insertions(s, label)]
    return [BinaryHierarchy.from_nested(s) for s in shapes]


def check_same_labels(tree: BinaryHierarchy, labels: Sequence[int] | Iterable[int]) -> None:
    if frozenset(tree.index_set) != frozenset(labels):
        raise IndexSetMismatch("tree and dataset have different label sets")
