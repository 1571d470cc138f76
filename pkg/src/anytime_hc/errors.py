"""Exception types raised across the package."""

from __future__ import annotations


class ClusteringError(Exception):
    """Base class for all errors raised by anytime_hc."""


# -- hierarchy ---------------------------------------------------------------


class InvalidClusterSet(ClusteringError, ValueError):
    pass


class NotLaminar(InvalidClusterSet):
    pass


class NotBinary(InvalidClusterSet):
    pass


class MissingRootOrLeaf(InvalidClusterSet):
    pass


class UnknownCluster(ClusteringError, KeyError):
    pass


class NotAGrandchild(ClusteringError, ValueError):
    pass


class IndexSetMismatch(ClusteringError, ValueError):
    pass


class IndexSetTooSmall(ClusteringError, ValueError):
    pass


class IndexSetTooLarge(ClusteringError, ValueError):
    pass


# -- geometry / linkage ------------------------------------------------------


class UnknownLabel(ClusteringError, KeyError):
    pass


class DuplicateLabel(ClusteringError, ValueError):
    pass


class ZeroNormVector(ClusteringError, ValueError):
    pass


class DimensionMismatch(ClusteringError, ValueError):
    pass


class EmptyDataset(ClusteringError, ValueError):
    pass


class OverlappingClusters(ClusteringError, ValueError):
    pass


class StrategyUnavailable(ClusteringError, ValueError):
    pass


class UnsupportedKind(ClusteringError, ValueError):
    pass


class UnsupportedDissimilarity(ClusteringError, ValueError):
    pass


# -- anytime -----------------------------------------------------------------


class IterationBudgetExceeded(ClusteringError, RuntimeError):
    """The anytime loop hit ``max_iterations`` before reaching homogeneity.

    The partial trace is attached as ``trace`` so that the current (valid)
    tree is still available to the caller.
    """

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


# -- validation --------------------------------------------------------------


class DegenerateVariance(ClusteringError, ValueError):
    pass


# -- data_io -----------------------------------------------------------------


class ParseError(ClusteringError, ValueError):
    pass


class BadMagic(ClusteringError, ValueError):
    pass


class TruncatedFile(ClusteringError, ValueError):
    pass


class InsufficientSamples(ClusteringError, ValueError):
    pass


class ConfigError(ClusteringError, ValueError):
    pass
