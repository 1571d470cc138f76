"""Command-line interface: ``anytime-hc <subcommand> ...``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import data_io
from .anytime import anytime_cluster
from .batch import hac
from .errors import ClusteringError, IterationBudgetExceeded
from .experiment import ExperimentConfig, run_experiment
from .hierarchy import random_tree
from .incremental import incremental_cluster
from .linkage import KINDS, STRATEGIES, as_linkage
from .validation import cophenetic_correlation, cophenetic_matrix

DISSIMILARITIES = ("euclidean", "sqeuclidean", "cosine")


def _linkage_arg(text: str) -> str:
    try:
        return str(as_linkage(text))
    except (ClusteringError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_linkage(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--linkage",
        type=_linkage_arg,
        default="single",
        help=f"one of {', '.join(KINDS)}, optionally ':strategy' with strategy in {', '.join(STRATEGIES)}",
    )
    p.add_argument("--dissimilarity", choices=DISSIMILARITIES, default="euclidean")


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _tree_text(tree, path: str | None) -> str:
    if path and Path(path).suffix.lower() == ".json":
        return data_io.tree_to_json(tree) + "\n"
    return data_io.to_newick(tree) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anytime-hc", description="Anytime hierarchical clustering toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="uniform points on the unit square")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")

    p = sub.add_parser("load-mnist", help="balanced MNIST sample as a dataset CSV")
    p.add_argument("--images", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--per-digit", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")

    p = sub.add_parser("hac", help="batch agglomerative clustering")
    p.add_argument("--input", required=True)
    _add_linkage(p)
    p.add_argument("--output", help="tree file (.nwk or .json); stdout if omitted")

    p = sub.add_parser("anytime", help="anytime clustering from an initial tree")
    p.add_argument("--input", required=True)
    _add_linkage(p)
    p.add_argument("--init", default="random", help="'random', 'hac', or a tree file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--output")
    p.add_argument("--trace", help="write the per-iteration trace CSV here")

    p = sub.add_parser("insert", help="insert one point into a tree and re-homogenize")
    p.add_argument("--input", required=True, help="dataset CSV including the new point")
    p.add_argument("--tree", required=True, help="tree over every label except the new one")
    p.add_argument("--label", type=int, required=True)
    _add_linkage(p)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--output")
    p.add_argument("--trace")

    p = sub.add_parser("validate", help="cophenetic correlation of a tree")
    p.add_argument("--input", required=True)
    p.add_argument("--tree", required=True)
    _add_linkage(p)
    p.add_argument("--matrix", help="write the induced dissimilarity matrix CSV here")

    p = sub.add_parser("experiment", help="iteration and cophenetic statistics over random trials")
    p.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 30, 40, 50])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--kinds", type=_linkage_arg, nargs="+", default=list(KINDS))
    p.add_argument("--dissimilarity", choices=DISSIMILARITIES, default="euclidean")
    p.add_argument("--source", choices=("synthetic", "mnist"), default="synthetic")
    p.add_argument("--mnist-images")
    p.add_argument("--mnist-labels")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output")
    return parser


def _cmd_gen_data(args) -> int:
    _emit(data_io.dataset_to_csv(data_io.gen_uniform_square(args.n, args.seed)), args.output)
    return 0


def _cmd_load_mnist(args) -> int:
    ds = data_io.load_mnist(args.images, args.labels, args.per_digit, args.seed)
    _emit(data_io.dataset_to_csv(ds), args.output)
    return 0


def _cmd_hac(args) -> int:
    ds = data_io.read_dataset(args.input, args.dissimilarity)
    tree = hac(ds, args.linkage)
    _emit(_tree_text(tree, args.output), args.output)
    return 0


def _finish(trace, args) -> int:
    _emit(_tree_text(trace.final_tree, args.output), args.output)
    if args.trace:
        data_io.write_trace(args.trace, trace)
    print(f"iterations: {trace.iterations}", file=sys.stderr)
    return 0


def _cmd_anytime(args) -> int:
    ds = data_io.read_dataset(args.input, args.dissimilarity)
    if args.init == "random":
        initial = random_tree(ds.labels, np.random.default_rng(args.seed))
    elif args.init == "hac":
        initial = hac(ds, args.linkage)
    else:
        initial = data_io.read_tree(args.init)
    return _finish(anytime_cluster(ds, args.linkage, initial, args.max_iter), args)


def _cmd_insert(args) -> int:
    ds = data_io.read_dataset(args.input, args.dissimilarity)
    tree = data_io.read_tree(args.tree)
    point = ds.point(args.label)
    trace = incremental_cluster(ds.without_point(args.label), args.linkage, tree, args.label, point, args.max_iter)
    return _finish(trace, args)


def _cmd_validate(args) -> int:
    ds = data_io.read_dataset(args.input, args.dissimilarity)
    tree = data_io.read_tree(args.tree)
    if args.matrix:
        u = cophenetic_matrix(ds, args.linkage, tree)
        Path(args.matrix).write_text(data_io.matrix_to_csv(ds.labels, u), encoding="utf-8")
    print(f"{cophenetic_correlation(ds, args.linkage, tree):.6f}")
    return 0


def _cmd_experiment(args) -> int:
    config = ExperimentConfig(
        sizes=tuple(args.sizes),
        trials=args.trials,
        kinds=tuple(args.kinds),
        source=args.source,
        rng_seed=args.seed,
        dissimilarity=args.dissimilarity,
        mnist_images=args.mnist_images,
        mnist_labels=args.mnist_labels,
        max_iterations=args.max_iter,
        workers=args.workers,
    )
    _emit(run_experiment(config).to_csv(), args.output)
    return 0


COMMANDS = {
    "gen-data": _cmd_gen_data,
    "load-mnist": _cmd_load_mnist,
    "hac": _cmd_hac,
    "anytime": _cmd_anytime,
    "insert": _cmd_insert,
    "validate": _cmd_validate,
    "experiment": _cmd_experiment,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except IterationBudgetExceeded as exc:
        if getattr(args, "trace", None) and exc.trace is not None:
            data_io.write_trace(args.trace, exc.trace)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ClusteringError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
