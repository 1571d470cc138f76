from __future__ import annotations

import numpy as np
import pytest

from anytime_hc import (
    BinaryHierarchy,
    Dataset,
    anytime_cluster,
    cophenetic_correlation,
    cophenetic_matrix,
    hac,
    incremental_cluster,
    random_tree,
)
from anytime_hc.errors import DegenerateVariance, IndexSetMismatch
from anytime_hc.linkage import linkage_eval
from anytime_hc.validation import is_ultrametric

from .conftest import generic_dataset

T = BinaryHierarchy.from_nested


def test_d4_single_matrix(d4, hac_d4_tree):
    u = cophenetic_matrix(d4, "single", hac_d4_tree)
    want = np.array(
        [
            [0, 1, 2, 4],
            [1, 0, 2, 4],
            [2, 2, 0, 4],
            [4, 4, 4, 0],
        ],
        dtype=float,
    )
    assert np.array_equal(u, want)


def test_diagonal_is_zero():
    rng = np.random.default_rng(1)
    ds = generic_dataset(rng, 12)
    for kind in ("single", "ward", "minimax"):
        u = cophenetic_matrix(ds, kind, random_tree(ds.labels, rng))
        assert np.all(np.diag(u) == 0.0)
        assert np.array_equal(u, u.T)


def test_ward_uses_average(d4, hac_d4_tree):
    u = cophenetic_matrix(d4, "ward", hac_d4_tree)
    assert u[0, 1] == linkage_eval(d4, "average", [1], [2])
    assert u[0, 2] == linkage_eval(d4, "average", [1, 2], [3])
    assert u[0, 3] == linkage_eval(d4, "average", [1, 2, 3], [4])
    assert u[0, 3] == pytest.approx(17 / 3)


def test_d4_single_correlation(d4, hac_d4_tree):
    assert cophenetic_correlation(d4, "single", hac_d4_tree) == pytest.approx(0.8985, abs=5e-4)


def test_exact_ultrametric_gives_one():
    # two unit-length pairs, every cross distance sqrt(9.5): D is an ultrametric
    pts = np.array([[-0.5, 0.0, 0.0], [0.5, 0.0, 0.0], [0.0, -0.5, 3.0], [0.0, 0.5, 3.0]])
    ds = Dataset.from_array(pts)
    tree = T(((1, 2), (3, 4)))
    assert is_ultrametric(ds.euclidean_matrix)
    assert np.allclose(cophenetic_matrix(ds, "single", tree), ds.euclidean_matrix)
    assert cophenetic_correlation(ds, "single", tree) == pytest.approx(1.0, abs=1e-12)


def test_constant_distances_are_degenerate():
    ds = Dataset.from_array(np.eye(4))
    with pytest.raises(DegenerateVariance):
        cophenetic_correlation(ds, "single", T(((1, 2), (3, 4))))


def test_two_points():
    ds = Dataset.from_array([[0.0], [1.0]])
    with pytest.raises(DegenerateVariance):
        cophenetic_correlation(ds, "single", T((1, 2)))


def test_mismatch(d4):
    with pytest.raises(IndexSetMismatch):
        cophenetic_matrix(d4, "single", T(((1, 2), 3)))


def test_relabel_invariance():
    rng = np.random.default_rng(2)
    ds = generic_dataset(rng, 10)
    tree = random_tree(ds.labels, rng)
    mapping = {lab: 50 + 3 * lab for lab in ds.labels}
    for kind in ("single", "average", "ward"):
        a = cophenetic_correlation(ds, kind, tree)
        b = cophenetic_correlation(ds.relabel(mapping), kind, tree.relabel(mapping))
        assert a == pytest.approx(b, abs=1e-12)


def test_single_methods_agree():
    rng = np.random.default_rng(3)
    for _ in range(20):
        ds = generic_dataset(rng, 15)
        head = ds.without_point(15)
        rho = [
            cophenetic_correlation(ds, "single", hac(ds, "single")),
            cophenetic_correlation(ds, "single", anytime_cluster(ds, "single", random_tree(ds.labels, rng)).final_tree),
            cophenetic_correlation(
                ds,
                "single",
                incremental_cluster(head, "single", hac(head, "single"), 15, ds.point(15)).final_tree,
            ),
        ]
        assert max(rho) - min(rho) <= 1e-9


def test_is_ultrametric():
    u = np.array([[0, 1, 3], [1, 0, 3], [3, 3, 0]], dtype=float)
    assert is_ultrametric(u)
    v = np.array([[0, 1, 3], [1, 0, 2], [3, 2, 0]], dtype=float)
    assert not is_ultrametric(v)
