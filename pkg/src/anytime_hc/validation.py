"""Tree-induced ultrametric and the cophenetic correlation coefficient."""

from __future__ import annotations

import numpy as np

from .errors import DegenerateVariance
from .geometry import Dataset
from .hierarchy import BinaryHierarchy, check_same_labels
from .linkage import LinkageLike, as_linkage, linkage_eval


def cophenetic_matrix(
    dataset: Dataset, kind: LinkageLike, tree: BinaryHierarchy, *, induced: LinkageLike | None = None
) -> np.ndarray:
    """
    Induced dissimilarity of ``tree``, rows and columns in ascending label order.

    Entry ``(i, j)`` is the linkage between the two children of the smallest
    cluster containing both ``i`` and ``j``.  For Ward trees the average
    linkage is used instead, since Ward values are not in distance units.
    ``induced`` overrides the linkage used for the entries.
    """
    check_same_labels(tree, dataset.labels)
    lk = as_linkage(kind)
    if induced is None:
        induced = "average" if lk.kind == "ward" else lk
    u = np.zeros((len(dataset), len(dataset)))
    for _, a, b in tree.sibling_pairs():
        value = linkage_eval(dataset, induced, a, b)
        ia = dataset.indices(a)
        ib = dataset.indices(b)
        u[np.ix_(ia, ib)] = value
        u[np.ix_(ib, ia)] = value
    return u


def cophenetic_correlation(dataset: Dataset, kind: LinkageLike, tree: BinaryHierarchy) -> float:
    """Pearson correlation between Euclidean distances and the induced dissimilarity over pairs ``i < j``."""
    if len(dataset) < 3:
        raise DegenerateVariance("need at least three points for a correlation over pairs")
    u = cophenetic_matrix(dataset, kind, tree)
    iu = np.triu_indices(len(dataset), k=1)
    return _pearson(dataset.euclidean_matrix[iu], u[iu])


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateVariance("one of the dissimilarity matrices is constant off the diagonal")
    return float(np.clip(np.dot(dx, dy) / np.sqrt(sxx * syy), -1.0, 1.0))


def is_ultrametric(u: np.ndarray, tol: float = 1e-9) -> bool:
    """Check ``u[i, j] <= max(u[i, k], u[k, j])`` for all triples."""
    n = len(u)
    if n < 3:
        return True
    bound = np.maximum(u[:, :, None], u.T[None, :, :])  # bound[i, k, j] = max(u[i,k], u[k,j])
    return bool(np.all(u[:, None, :] <= bound + tol))

