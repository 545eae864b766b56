"""Data containers, distance utilities and the penalized clustering objective."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .penalty import PenaltyParams, rho

#: Relative tolerance used to derive the merge threshold from the data scale.
MERGE_EPS = 1e-4


class DataError(ValueError):
    """Input data violates a structural requirement."""


class DegenerateDataError(DataError):
    """Data for which the adaptive penalty schedule cannot be initialised."""


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """An ``n x p`` matrix of finite reals, one object per row."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, order="C", copy=True)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise DataError(f"expected a 2-D array, got {values.ndim}-D")
        if values.shape[0] < 2:
            raise DataError(f"need at least 2 objects, got {values.shape[0]}")
        if values.shape[1] < 1:
            raise DataError("need at least 1 feature column")
        if not np.all(np.isfinite(values)):
            raise DataError("data contains non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(eq=False)
class ClusterState:
    """Cluster centers, object-to-cluster assignment and cluster sizes.

    ``assignment[i]`` is the 0-based index of the cluster holding object
    ``i``; ``sizes[k]`` counts the objects assigned to cluster ``k``.
    """

    centers: np.ndarray
    assignment: np.ndarray
    sizes: np.ndarray

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=np.float64))
        self.assignment = np.asarray(self.assignment, dtype=np.intp)
        self.sizes = np.asarray(self.sizes, dtype=np.intp)
        k = self.centers.shape[0]
        if k < 1:
            raise DataError("a cluster state needs at least one cluster")
        if self.sizes.shape != (k,):
            raise DataError("sizes must have one entry per center")
        if self.assignment.ndim != 1 or self.assignment.size == 0:
            raise DataError("assignment must be a non-empty 1-D array")
        if self.assignment.min() < 0 or self.assignment.max() >= k:
            raise DataError("assignment refers to a non-existent cluster")
        if not np.array_equal(np.bincount(self.assignment, minlength=k), self.sizes):
            raise DataError("sizes disagree with the assignment counts")
        if np.any(self.sizes < 1):
            raise DataError("every cluster must be non-empty")
        if not np.all(np.isfinite(self.centers)):
            raise DataError("centers must be finite")

    @classmethod
    def singletons(cls, data: DataMatrix) -> "ClusterState":
        """Every object in its own cluster, centered on itself."""
        n = data.n
        return cls(data.values.copy(), np.arange(n), np.ones(n, dtype=np.intp))

    @classmethod
    def from_assignment(cls, data: DataMatrix, assignment, centers=None) -> "ClusterState":
        """Build a state from labels; centers default to the cluster means.

        Labels may be arbitrary integers; they are renumbered ``0..K-1`` in
        increasing label order.
        """
        labels, inverse = np.unique(np.asarray(assignment), return_inverse=True)
        sizes = np.bincount(inverse, minlength=labels.size)
        if centers is None:
            centers = _group_sums(data.values, inverse, labels.size) / sizes[:, None]
        return cls(centers, inverse, sizes)

    @property
    def n_clusters(self) -> int:
        return self.centers.shape[0]

    @property
    def n(self) -> int:
        return self.assignment.size

    def cluster_means(self, data: DataMatrix) -> np.ndarray:
        return _group_sums(data.values, self.assignment, self.n_clusters) / self.sizes[:, None]

    def copy(self) -> "ClusterState":
        return ClusterState(self.centers.copy(), self.assignment.copy(), self.sizes.copy())


@dataclass(frozen=True)
class ScaleThreshold:
    """Distance below which two centers are considered fused."""

    xi: float

    def __post_init__(self):
        if not self.xi >= 0:
            raise ValueError(f"xi must be nonnegative, got {self.xi}")

    def __float__(self):
        return float(self.xi)


def _group_sums(values: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    sums = np.zeros((k, values.shape[1]))
    np.add.at(sums, labels, values)
    return sums


def _as_data(data) -> DataMatrix:
    return data if isinstance(data, DataMatrix) else DataMatrix(data)


def pairwise_distance(a, b) -> float:
    """Euclidean distance between two vectors of equal length."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("vectors must be finite")
    return float(np.linalg.norm(a - b))


def objective(data: DataMatrix, state: ClusterState, params: PenaltyParams) -> float:
    """Within-cluster squared error plus the size-weighted pairwise MCP term."""
    data = _as_data(data)
    if state.n != data.n or state.centers.shape[1] != data.p:
        raise ValueError("state and data dimensions disagree")
    resid = data.values - state.centers[state.assignment]
    loss = float(np.einsum("ij,ij->", resid, resid))
    k = state.n_clusters
    if k == 1:
        return loss
    iu, ju = np.triu_indices(k, 1)
    dist = np.linalg.norm(state.centers[iu] - state.centers[ju], axis=1)
    pen = rho(dist, params)
    return loss + params.lam * float(np.sum(state.sizes[iu] * state.sizes[ju] * pen))


def nearest_neighbor_distances(data: DataMatrix) -> np.ndarray:
    data = _as_data(data)
    dist = squareform(pdist(data.values))
    np.fill_diagonal(dist, np.inf)
    return dist.min(axis=1)


def nn_quantile(data: DataMatrix, beta: float) -> float:
    """The ``ceil(beta * n)``-th smallest nearest-neighbour distance."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    nn = np.sort(nearest_neighbor_distances(data))
    # rounding guards against products like 0.7 * 10 = 7.000000000000001
    rank = max(1, math.ceil(round(beta * nn.size, 9)))
    return float(nn[rank - 1])


def max_pairwise_distance(data: DataMatrix) -> float:
    data = _as_data(data)
    return float(pdist(data.values).max())


def merge_threshold(data: DataMatrix) -> ScaleThreshold:
    """``1e-4 / sqrt(p)`` times the sum of per-column sample std (ddof=1)."""
    data = _as_data(data)
    sigma = data.values.std(axis=0, ddof=1)
    return ScaleThreshold(MERGE_EPS / math.sqrt(data.p) * float(sigma.sum()))
