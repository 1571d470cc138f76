from __future__ import annotations

import csv
import gzip
import io
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anytime_hc import BinaryHierarchy, Dataset, anytime_cluster, enumerate_trees, random_tree
from anytime_hc import data_io
from anytime_hc.errors import BadMagic, InsufficientSamples, NotBinary, ParseError, TruncatedFile

T = BinaryHierarchy.from_nested


@pytest.fixture
def mnist_files(tmp_path):
    rng = np.random.default_rng(0)
    digits = np.repeat(np.arange(10), 12)
    rng.shuffle(digits)
    images = rng.integers(0, 256, size=(len(digits), 784), dtype=np.uint8)
    img, lab = tmp_path / "images.idx", tmp_path / "labels.idx"
    data_io.write_idx_images(img, images)
    data_io.write_idx_labels(lab, digits)
    return img, lab, images, digits


class TestSynthetic:
    def test_range_and_labels(self):
        ds = data_io.gen_uniform_square(10, 1)
        assert ds.labels == tuple(range(1, 11))
        assert ds.points.shape == (10, 2)
        assert np.all((ds.points >= 0) & (ds.points <= 1))

    def test_deterministic(self):
        a = data_io.gen_uniform_square(30, 99)
        b = data_io.gen_uniform_square(30, 99)
        assert np.array_equal(a.points, b.points)

    def test_distinct_distances(self):
        ds = data_io.gen_uniform_square(100, 5)
        d = ds.euclidean_matrix[np.triu_indices(100, k=1)]
        assert np.unique(d).size == d.size

    def test_too_small(self):
        with pytest.raises(ValueError):
            data_io.gen_uniform_square(1, 0)


class TestMnist:
    def test_one_per_digit(self, mnist_files):
        img, lab, images, digits = mnist_files
        ds = data_io.load_mnist(img, lab, 1, 3)
        assert len(ds) == 10 and ds.dim == 784
        assert ds.points.min() >= 0.0 and ds.points.max() <= 1.0
        # every chosen row is an image of the matching digit, scaled by 1/255
        for k, lab_ in enumerate(ds.labels):
            row = np.rint(ds.point(lab_) * 255).astype(np.uint8)
            hits = np.flatnonzero((images == row).all(axis=1))
            assert digits[hits[0]] == k

    def test_deterministic(self, mnist_files):
        img, lab, *_ = mnist_files
        a = data_io.load_mnist(img, lab, 10, 4)
        b = data_io.load_mnist(img, lab, 10, 4)
        assert np.array_equal(a.points, b.points)
        assert len(a) == 100

    def test_gzip(self, mnist_files, tmp_path):
        img, lab, *_ = mnist_files
        gz = tmp_path / "images.idx.gz"
        gz.write_bytes(gzip.compress(img.read_bytes()))
        a = data_io.load_mnist(gz, lab, 2, 5)
        b = data_io.load_mnist(img, lab, 2, 5)
        assert np.array_equal(a.points, b.points)

    def test_header_is_big_endian(self, mnist_files):
        img, lab, images, _ = mnist_files
        raw = img.read_bytes()
        assert struct.unpack(">IIII", raw[:16]) == (0x803, len(images), 28, 28)
        assert len(raw) == 16 + len(images) * 784
        assert np.array_equal(data_io.read_idx_images(img), images)

    def test_bad_magic(self, mnist_files, tmp_path):
        img, lab, *_ = mnist_files
        bad = tmp_path / "bad.idx"
        bad.write_bytes(struct.pack(">I", 0x804) + img.read_bytes()[4:])
        with pytest.raises(BadMagic):
            data_io.load_mnist(bad, lab, 1, 0)
        with pytest.raises(BadMagic):
            data_io.read_idx_labels(img)

    def test_truncated(self, mnist_files, tmp_path):
        img, lab, *_ = mnist_files
        short = tmp_path / "short.idx"
        short.write_bytes(img.read_bytes()[:-1])
        with pytest.raises(TruncatedFile):
            data_io.read_idx_images(short)
        short.write_bytes(img.read_bytes()[:10])
        with pytest.raises(TruncatedFile):
            data_io.read_idx_images(short)
        short.write_bytes(lab.read_bytes()[:-3])
        with pytest.raises(TruncatedFile):
            data_io.read_idx_labels(short)

    def test_insufficient(self, mnist_files):
        img, lab, *_ = mnist_files
        with pytest.raises(InsufficientSamples):
            data_io.load_mnist(img, lab, 13, 0)


class TestDatasetCsv:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        ds = Dataset((3, 8, 1), rng.normal(size=(3, 4)))
        path = tmp_path / "pts.csv"
        data_io.write_dataset(path, ds)
        back = data_io.read_dataset(path)
        assert back.labels == ds.labels
        assert np.array_equal(back.points, ds.points)
        assert path.read_text().splitlines()[0] == "label,c1,c2,c3,c4"

    def test_bad_header(self):
        with pytest.raises(ParseError):
            data_io.dataset_from_csv("id,x\n1,0.5\n")

    def test_bad_row(self):
        with pytest.raises(ParseError):
            data_io.dataset_from_csv("label,c1\n1,abc\n")
        with pytest.raises(ParseError):
            data_io.dataset_from_csv("label,c1\n1,0.5,2\n")
        with pytest.raises(ParseError):
            data_io.dataset_from_csv("label,c1\n1,0.5\n1,0.7\n")

    def test_matrix_csv(self):
        text = data_io.matrix_to_csv([1, 2], np.array([[0.0, 1.5], [1.5, 0.0]]))
        rows = list(csv.reader(io.StringIO(text)))
        assert rows == [["label", "1", "2"], ["1", "0.0", "1.5"], ["2", "1.5", "0.0"]]


class TestTrees:
    def test_newick_example(self):
        t = T(((1, 2), 3))
        assert data_io.to_newick(t) == "((1,2),3);"
        assert data_io.from_newick("((1,2),3);") == t

    def test_newick_canonical_order(self):
        assert data_io.to_newick(data_io.from_newick(" (3, (2 ,1)) ; ")) == "((1,2),3);"

    @pytest.mark.parametrize("text", ["((1,2,);", "((1,2),3)", "((1,2),3));", "(1,x);", "", "(1,2);(3,4);"])
    def test_newick_malformed(self, text):
        with pytest.raises(ParseError):
            data_io.from_newick(text)

    def test_newick_not_binary(self):
        with pytest.raises(NotBinary):
            data_io.from_newick("(1,2,3);")

    def test_json_thirteen_leaves(self):
        t = T(((((1, 2), 3), ((4, 5), (6, 7))), ((8, 9), ((10, 11), (12, 13)))))
        text = data_io.tree_to_json(t)
        assert data_io.tree_from_json(text) == t
        assert text.startswith('{"index_set": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13]')

    def test_json_malformed(self):
        with pytest.raises(ParseError):
            data_io.tree_from_json('{"clusters": []}')

    @settings(max_examples=100, deadline=None)
    @given(st.integers(2, 25), st.integers(0, 2**32 - 1))
    def test_round_trips(self, n, seed):
        t = random_tree(n, seed)
        assert data_io.from_newick(data_io.to_newick(t)).clusters == t.clusters
        assert data_io.tree_from_json(data_io.tree_to_json(t)).clusters == t.clusters

    def test_all_small_trees(self):
        for t in enumerate_trees(5):
            assert data_io.from_newick(data_io.to_newick(t)) == t

    def test_files(self, tmp_path):
        t = T((((1, 2), 3), 4))
        for name in ("t.nwk", "t.json"):
            data_io.write_tree(tmp_path / name, t)
            assert data_io.read_tree(tmp_path / name) == t


def test_trace_csv(d4):
    trace = anytime_cluster(d4, "single", T((((1, 3), 2), 4)))
    rows = list(csv.reader(io.StringIO(data_io.trace_to_csv(trace))))
    assert rows[0] == ["iteration", "objective_h", "violating_cluster", "swapped_cluster"]
    assert rows[1] == ["0", repr(trace.initial_objective_h), "", ""]
    assert rows[2] == ["1", "7.0", "1", "3"]
    assert len(rows) == 2 + trace.iterations
