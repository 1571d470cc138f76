from __future__ import annotations

import csv
import io

import numpy as np
import pytest

from anytime_hc import data_io
from anytime_hc.cli import main
from anytime_hc.errors import ConfigError
from anytime_hc.experiment import ExperimentConfig, run_experiment


@pytest.fixture
def points(tmp_path, d4):
    path = tmp_path / "pts.csv"
    data_io.write_dataset(path, d4)
    return path


class TestCommands:
    def test_gen_data(self, tmp_path):
        out = tmp_path / "g.csv"
        assert main(["gen-data", "--n", "12", "--seed", "3", "--output", str(out)]) == 0
        ds = data_io.read_dataset(out)
        assert len(ds) == 12
        assert np.array_equal(ds.points, data_io.gen_uniform_square(12, 3).points)

    def test_hac_ward(self, tmp_path, points):
        out = tmp_path / "tree.nwk"
        assert main(["hac", "--input", str(points), "--linkage", "ward", "--output", str(out)]) == 0
        assert out.read_text() == "(((1,2),3),4);\n"

    def test_hac_stdout(self, points, capsys):
        assert main(["hac", "--input", str(points)]) == 0
        assert capsys.readouterr().out == "(((1,2),3),4);\n"

    def test_anytime_with_trace(self, tmp_path, points):
        out, trace = tmp_path / "final.nwk", tmp_path / "trace.csv"
        argv = ["anytime", "--input", str(points), "--linkage", "single", "--init", "random", "--seed", "7"]
        assert main(argv + ["--output", str(out), "--trace", str(trace)]) == 0
        assert out.read_text() == "(((1,2),3),4);\n"
        rows = list(csv.reader(io.StringIO(trace.read_text())))
        assert rows[0] == ["iteration", "objective_h", "violating_cluster", "swapped_cluster"]
        assert float(rows[-1][1]) == 7.0

    def test_anytime_from_tree_file(self, tmp_path, points):
        start = tmp_path / "start.json"
        data_io.write_tree(start, data_io.from_newick("(((1,3),2),4);"))
        out = tmp_path / "final.json"
        assert main(["anytime", "--input", str(points), "--init", str(start), "--output", str(out)]) == 0
        assert data_io.to_newick(data_io.read_tree(out)) == "(((1,2),3),4);"

    def test_anytime_budget_exhausted(self, tmp_path, points, capsys):
        start = tmp_path / "start.nwk"
        start.write_text("(((1,4),3),2);")  # needs three moves
        trace = tmp_path / "trace.csv"
        argv = ["anytime", "--input", str(points), "--init", str(start), "--max-iter", "2", "--trace", str(trace)]
        assert main(argv) == 1
        assert "error" in capsys.readouterr().err
        # the partial trace is still written: header, start row, two moves
        assert len(trace.read_text().splitlines()) == 4

    def test_insert(self, tmp_path, d4):
        full = tmp_path / "full.csv"
        data_io.write_dataset(full, d4.with_point(5, [100.0]))
        tree = tmp_path / "tree.nwk"
        tree.write_text("(((1,2),3),4);")
        out = tmp_path / "out.nwk"
        argv = ["insert", "--input", str(full), "--tree", str(tree), "--label", "5", "--output", str(out)]
        assert main(argv) == 0
        assert out.read_text() == "((((1,2),3),4),5);\n"

    def test_validate(self, tmp_path, points, capsys):
        tree = tmp_path / "tree.nwk"
        tree.write_text("(((1,2),3),4);")
        matrix = tmp_path / "u.csv"
        argv = ["validate", "--input", str(points), "--tree", str(tree), "--linkage", "single", "--matrix", str(matrix)]
        assert main(argv) == 0
        assert capsys.readouterr().out.strip() == "0.898519"
        assert matrix.read_text().splitlines()[0] == "label,1,2,3,4"

    def test_validate_average(self, tmp_path, points, capsys):
        tree = tmp_path / "tree.nwk"
        tree.write_text("(((1,2),3),4);")
        assert main(["validate", "--input", str(points), "--tree", str(tree), "--linkage", "average"]) == 0
        assert -1.0 <= float(capsys.readouterr().out) <= 1.0

    def test_load_mnist(self, tmp_path):
        rng = np.random.default_rng(0)
        digits = np.repeat(np.arange(10), 3)
        img, lab = tmp_path / "i.idx", tmp_path / "l.idx"
        data_io.write_idx_images(img, rng.integers(0, 256, size=(30, 784), dtype=np.uint8))
        data_io.write_idx_labels(lab, digits)
        out = tmp_path / "m.csv"
        assert main(["load-mnist", "--images", str(img), "--labels", str(lab), "--per-digit", "2", "--output", str(out)]) == 0
        assert data_io.read_dataset(out).points.shape == (20, 784)

    def test_experiment(self, tmp_path):
        out = tmp_path / "report.csv"
        argv = ["experiment", "--sizes", "6", "--trials", "3", "--kinds", "single", "ward", "--output", str(out)]
        assert main(argv) == 0
        assert out.read_text().splitlines()[0] == "n,kind,method,metric,mean,variance"


class TestUsageErrors:
    @pytest.mark.parametrize(
        "argv",
        [
            [],
            ["bogus"],
            ["hac"],
            ["hac", "--input", "x.csv", "--linkage", "centroid"],
            ["hac", "--input", "x.csv", "--dissimilarity", "manhattan"],
            ["gen-data", "--n", "ten"],
        ],
    )
    def test_exit_two(self, argv):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 2

    def test_missing_file(self, tmp_path, capsys):
        assert main(["hac", "--input", str(tmp_path / "missing.csv")]) == 1
        assert "error" in capsys.readouterr().err

    def test_bad_tree_file(self, tmp_path, points):
        tree = tmp_path / "t.nwk"
        tree.write_text("((1,2,);")
        assert main(["validate", "--input", str(points), "--tree", str(tree)]) == 1


class TestExperiment:
    def test_schema(self):
        report = run_experiment(ExperimentConfig(sizes=(10,), trials=5, kinds=("single",)))
        rows = list(csv.DictReader(io.StringIO(report.to_csv())))
        assert list(rows[0]) == ["n", "kind", "method", "metric", "mean", "variance"]
        seen = {(r["method"], r["metric"]) for r in rows}
        assert seen == {
            ("hac", "cophenetic"),
            ("anytime", "iterations"),
            ("anytime", "cophenetic"),
            ("incremental", "iterations"),
            ("incremental", "cophenetic"),
        }
        for r in rows:
            if r["metric"] == "cophenetic":
                assert 0.0 <= float(r["mean"]) <= 1.0
            else:
                assert float(r["mean"]) >= 0.0
            assert float(r["variance"]) >= 0.0

    def test_single_methods_agree_per_trial(self):
        report = run_experiment(ExperimentConfig(sizes=(12,), trials=5, kinds=("single",)))
        for trial in report.trials:
            rho = [trial.results[("single", m)].cophenetic for m in ("hac", "anytime", "incremental")]
            assert max(rho) - min(rho) <= 1e-9

    def test_deterministic(self):
        config = ExperimentConfig(sizes=(8, 10), trials=4, kinds=("average", "minimax"), rng_seed=5)
        assert run_experiment(config).to_csv() == run_experiment(config).to_csv()

    def test_parallel_matches_serial(self):
        serial = ExperimentConfig(sizes=(8, 12), trials=4, kinds=("single", "complete"), rng_seed=2)
        parallel = ExperimentConfig(sizes=(8, 12), trials=4, kinds=("single", "complete"), rng_seed=2, workers=2)
        assert run_experiment(serial).to_csv() == run_experiment(parallel).to_csv()

    def test_seed_changes_report(self):
        a = run_experiment(ExperimentConfig(sizes=(10,), trials=3, kinds=("single",), rng_seed=0))
        b = run_experiment(ExperimentConfig(sizes=(10,), trials=3, kinds=("single",), rng_seed=1))
        assert a.to_csv() != b.to_csv()

    def test_single_trial_has_zero_variance(self):
        report = run_experiment(ExperimentConfig(sizes=(9,), trials=1, kinds=("single",)))
        assert report.row(9, "single", "hac", "cophenetic").variance == 0.0

    def test_mnist_source(self, tmp_path):
        rng = np.random.default_rng(0)
        img, lab = tmp_path / "i.idx", tmp_path / "l.idx"
        data_io.write_idx_images(img, rng.integers(0, 256, size=(40, 784), dtype=np.uint8))
        data_io.write_idx_labels(lab, np.repeat(np.arange(10), 4))
        config = ExperimentConfig(sizes=(10, 20), trials=2, kinds=("single",), source="mnist", mnist_images=str(img), mnist_labels=str(lab))
        report = run_experiment(config)
        assert {r.n for r in report.rows} == {10, 20}

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"sizes": ()},
            {"sizes": (1,)},
            {"trials": 0},
            {"kinds": ()},
            {"source": "web"},
            {"source": "mnist", "sizes": (15,), "mnist_images": "a", "mnist_labels": "b"},
            {"source": "mnist", "sizes": (10,)},
            {"workers": 0},
        ],
    )
    def test_config_errors(self, kwargs):
        with pytest.raises(ConfigError):
            ExperimentConfig(**kwargs)
