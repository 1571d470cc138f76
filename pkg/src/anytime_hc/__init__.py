"""Anytime hierarchical clustering by nearest-neighbor-interchange homogenization."""

from .anytime import (
    AnytimeTrace,
    LinkageEvaluator,
    TraceStep,
    anytime_cluster,
    anytime_step,
    find_violation,
    is_homogeneous,
    is_locally_homogeneous,
    level_profile,
    objective_h,
    sorted_profile,
)
from .batch import hac, hac_merges, is_monotone
from .errors import *  # noqa: F401,F403
from .geometry import Dataset, SufficientStats, merge_stats, normalize_dataset, sse, stats
from .hierarchy import BinaryHierarchy, count_trees, enumerate_trees, from_cluster_set, nni_triplet, random_tree
from .incremental import build_incrementally, delete_point, incremental_cluster, insert_point
from .linkage import LinkageKind, check_reducibility_on_triple, fast_average, fast_ward, lance_williams_update, linkage_eval
from .validation import cophenetic_correlation, cophenetic_matrix

__version__ = "0.1.0"
