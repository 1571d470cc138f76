"""
Linkage functions between clusters of a :class:`~anytime_hc.geometry.Dataset`.

Five kinds are supported (single, complete, average, minimax, Ward) with three
evaluation strategies:

``direct``
    The defining formula over the raw points.
``recurrence``
    Only the pointwise values plus repeated Lance-Williams updates; not
    available for minimax, which has no such recurrence.
``sufficient_stats``
    Constant-time evaluation from (cardinality, centroid, variance); only for
    Ward, and for average linkage with squared Euclidean dissimilarity or
    cosine dissimilarity on unit vectors.

The linkage of any cluster with the empty set is zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .errors import OverlappingClusters, StrategyUnavailable, UnsupportedDissimilarity, UnsupportedKind
from .geometry import Dataset, SufficientStats, is_unit_norm, stats

KINDS = ("single", "complete", "average", "minimax", "ward")
STRATEGIES = ("direct", "recurrence", "sufficient_stats")

# Comparisons in the property checkers tolerate this relative slack.
PROPERTY_TOL = 1e-12


@dataclass(frozen=True)
class LinkageKind:
    kind: str
    strategy: str = "direct"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedKind(f"unknown linkage {self.kind!r}; expected one of {KINDS}")
        if self.strategy not in STRATEGIES:
            raise StrategyUnavailable(f"unknown strategy {self.strategy!r}")
        if self.strategy == "recurrence" and self.kind == "minimax":
            raise StrategyUnavailable("minimax linkage has no Lance-Williams recurrence")
        if self.strategy == "sufficient_stats" and self.kind not in ("ward", "average"):
            raise StrategyUnavailable(f"{self.kind} linkage cannot be evaluated from sufficient statistics")

    def __str__(self) -> str:
        return self.kind if self.strategy == "direct" else f"{self.kind}:{self.strategy}"

    @property
    def has_recurrence(self) -> bool:
        return self.kind != "minimax"

    def check_dataset(self, dataset: Dataset) -> None:
        """Raise if this strategy cannot be used with ``dataset``'s dissimilarity."""
        if self.strategy != "sufficient_stats" or self.kind == "ward":
            return
        if dataset.dissimilarity == "squared_euclidean":
            return
        if dataset.dissimilarity == "cosine" and is_unit_norm(dataset):
            return
        raise StrategyUnavailable(
            "fast average linkage needs squared Euclidean dissimilarity or unit-norm cosine data"
        )


LinkageLike = Union[str, LinkageKind]


def as_linkage(kind: LinkageLike) -> LinkageKind:
    if isinstance(kind, LinkageKind):
        return kind
    name, _, strategy = str(kind).partition(":")
    return LinkageKind(name, strategy or "direct")


# ---------------------------------------------------------------------- #
# Lance-Williams                                                          #
# ---------------------------------------------------------------------- #


def lw_coefficients(kind: LinkageLike, sizes: tuple[int, int, int]):
    """``(alpha_A, alpha_B, beta, gamma)`` for merging A and B, measured against C."""
    kind = as_linkage(kind).kind
    na, nb, nc = sizes
    if kind == "single":
        return 0.5, 0.5, 0.0, -0.5
    if kind == "complete":
        return 0.5, 0.5, 0.0, 0.5
    if kind == "average":
        return na / (na + nb), nb / (na + nb), 0.0, 0.0
    if kind == "ward":
        t = na + nb + nc
        return (na + nc) / t, (nb + nc) / t, -nc / t, 0.0
    raise UnsupportedKind(f"{kind} linkage has no Lance-Williams recurrence")


def lance_williams_update(kind: LinkageLike, sizes, l_ac, l_bc, l_ab):
    """Linkage between ``A | B`` and ``C`` from the three pairwise linkages.

    Works elementwise on arrays, in which case ``sizes[2]`` (and ``l_ac``,
    ``l_bc``) may be arrays over several C clusters.
    """
    kind = as_linkage(kind).kind
    na, nb, nc = sizes
    if kind == "ward":
        t = na + nb + nc
        return ((na + nc) * l_ac + (nb + nc) * l_bc - nc * l_ab) / t
    a_a, a_b, beta, gamma = lw_coefficients(kind, (na, nb, 1))
    out = a_a * l_ac + a_b * l_bc + beta * l_ab
    if gamma:
        out = out + gamma * np.abs(np.subtract(l_ac, l_bc))
    return out


# ---------------------------------------------------------------------- #
# Sufficient-statistics fast paths                                        #
# ---------------------------------------------------------------------- #


def fast_ward(a: SufficientStats, b: SufficientStats) -> float:
    diff = a.centroid - b.centroid
    na, nb = a.cardinality, b.cardinality
    return na * nb / (na + nb) * float(np.dot(diff, diff))


def fast_average(a: SufficientStats, b: SufficientStats, dissimilarity_kind: str) -> float:
    """Average linkage from statistics alone.

    Squared Euclidean: ``var(A) + var(B) + |c(A) - c(B)|^2``.  Cosine on unit
    vectors: ``1 - c(A) . c(B)``.  The caller is responsible for the unit
    norm requirement.
    """
    if dissimilarity_kind in ("squared_euclidean", "sqeuclidean"):
        diff = a.centroid - b.centroid
        return a.variance + b.variance + float(np.dot(diff, diff))
    if dissimilarity_kind == "cosine":
        return 1.0 - float(np.dot(a.centroid, b.centroid))
    raise UnsupportedDissimilarity(f"no fast average linkage for {dissimilarity_kind!r}")


# ---------------------------------------------------------------------- #
# Evaluation                                                              #
# ---------------------------------------------------------------------- #


def _disjoint(a: Iterable[int], b: Iterable[int]) -> tuple[frozenset, frozenset]:
    a = frozenset(a)
    b = frozenset(b)
    if a & b:
        raise OverlappingClusters("linkage is only defined for disjoint clusters")
    return a, b


def _direct(dataset: Dataset, kind: str, a: frozenset, b: frozenset) -> float:
    ia = dataset.indices(a)
    ib = dataset.indices(b)
    if kind == "ward":
        x = dataset.points
        diff = x[ia].mean(axis=0) - x[ib].mean(axis=0)
        return len(ia) * len(ib) / (len(ia) + len(ib)) * float(np.dot(diff, diff))
    d = dataset.dissimilarity_matrix
    if kind == "minimax":
        u = np.concatenate([ia, ib])
        return float(d[np.ix_(u, u)].max(axis=1).min())
    block = d[np.ix_(ia, ib)]
    if kind == "single":
        return float(block.min())
    if kind == "complete":
        return float(block.max())
    return float(block.sum() / block.size)


def _base_matrix(dataset: Dataset, kind: str, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Singleton-to-singleton linkage values, the seed of the recurrence."""
    if kind == "ward":
        x = dataset.points
        diff = x[rows][:, None, :] - x[cols][None, :, :]
        return 0.5 * np.einsum("ijk,ijk->ij", diff, diff)
    return np.asarray(dataset.dissimilarity_matrix[np.ix_(rows, cols)], dtype=float)


def _prefix_to_points(kind: str, base: np.ndarray, pos: dict[int, int], members: list[int]) -> np.ndarray:
    """Row ``s`` holds the linkage between the first ``s+1`` members and every column target.

    ``base[r, j]`` is the singleton linkage between ``members[r]`` and column
    ``j``; ``pos`` maps a member to its column (members must be columns too).
    """
    rows = np.empty_like(base)
    rows[0] = base[0]
    for s in range(1, len(members)):
        l_ab = rows[s - 1, pos[members[s]]]
        rows[s] = lance_williams_update(kind, (s, 1, 1), rows[s - 1], base[s], l_ab)
    return rows


def _recurrence(dataset: Dataset, kind: str, a: frozenset, b: frozenset) -> float:
    """Build the linkage one point at a time using only Lance-Williams updates."""
    am = sorted(a)
    bm = sorted(b)
    ia = dataset.indices(am)
    ib = dataset.indices(bm)
    cols = np.concatenate([ia, ib])
    pos_ab = {m: k for k, m in enumerate(am + bm)}
    # l(A_s, y) for prefixes A_s of A and single points y of A or B
    ma = _prefix_to_points(kind, _base_matrix(dataset, kind, ia, cols), pos_ab, am)
    # l(B_s, b) for prefixes of B and points of B
    mb = _prefix_to_points(kind, _base_matrix(dataset, kind, ib, ib), {m: k for k, m in enumerate(bm)}, bm)
    to_a = ma[-1, len(am):]  # l(A, {b}) for each b in B
    value = to_a[0]
    for s in range(1, len(bm)):
        value = lance_williams_update(kind, (s, 1, len(am)), value, to_a[s], mb[s - 1, s])
    return float(value)


def linkage_eval(dataset: Dataset, kind: LinkageLike, a: Iterable[int], b: Iterable[int]) -> float:
    """Linkage value between disjoint clusters ``a`` and ``b`` (0 if either is empty)."""
    lk = as_linkage(kind)
    a, b = _disjoint(a, b)
    if not a or not b:
        return 0.0
    if min(b) < min(a):
        # fixed argument order keeps the value bitwise symmetric
        a, b = b, a
    if lk.strategy == "direct":
        return _direct(dataset, lk.kind, a, b)
    if lk.strategy == "recurrence":
        return _recurrence(dataset, lk.kind, a, b)
    lk.check_dataset(dataset)
    sa, sb = stats(dataset, a), stats(dataset, b)
    if lk.kind == "ward":
        return fast_ward(sa, sb)
    return fast_average(sa, sb, dataset.dissimilarity)


# ---------------------------------------------------------------------- #
# Reducibility                                                            #
# ---------------------------------------------------------------------- #


@dataclass(frozen=True)
class ReducibilityReport:
    reducible_ok: bool
    strongly_reducible_ok: bool
    nni_reducible_ok: bool


def strictly_greater(x: float, y: float) -> bool:
    """``x > y`` by more than rounding noise.

    Linkage values that tie exactly can come out a few ulps apart (1-D
    average linkage is piecewise constant, for one), so a strict
    comparison needs a relative margin of ``PROPERTY_TOL``.
    """
    return x - y > PROPERTY_TOL * max(abs(x), abs(y))


def _geq(x: float, y: float) -> bool:
    return x >= y - PROPERTY_TOL * max(1.0, abs(x), abs(y))


def check_reducibility_on_triple(dataset: Dataset, kind: LinkageLike, a, b, c) -> ReducibilityReport:
    """Test the reducibility, strong reducibility and NNI-reducibility implications on one triple.

    Premises are evaluated exactly; conclusions allow a relative slack of
    ``PROPERTY_TOL`` so exact ties are not misread as failures.
    """
    a, b = _disjoint(a, b)
    a, c = _disjoint(a, c)
    b, c = _disjoint(b, c)
    if not (a and b and c):
        raise ValueError("clusters must be non-empty")

    def lk(x, y):
        return linkage_eval(dataset, kind, x, y)

    l_ab, l_ac, l_bc = lk(a, b), lk(a, c), lk(b, c)
    l_ab_c = lk(a | b, c)
    floor = min(l_ac, l_bc)

    strong = _geq(l_ab_c, floor)
    reducible = not (l_ab <= floor) or strong

    if l_bc <= min(l_ab, l_ac):
        l_ac_b = lk(a | c, b)
        l_bc_a = lk(b | c, a)
        left = min(l_ab + l_ab_c, l_ac + l_ac_b)
        nni = _geq(left, l_bc + l_bc_a)
    else:
        nni = True
    return ReducibilityReport(reducible, strong, nni)

