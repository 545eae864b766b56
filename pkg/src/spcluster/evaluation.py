"""Partition agreement scores: ARI and its cluster / noise decomposition.

``ari_c`` scores the estimated (non-noise) clusters, including any true
noise they absorbed. ``ari_n`` scores how well noise was separated from
clustered data. ``s_n`` is the fraction of objects not wrongly called noise,
which stays informative when no noise exists.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Label reserved for noise objects.
NOISE = -1


@dataclass(frozen=True, eq=False)
class LabeledPartition:
    labels: np.ndarray
    noise_label: int = NOISE

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise ValueError("labels must be 1-D")
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.labels.size

    @property
    def is_noise(self) -> np.ndarray:
        return self.labels == self.noise_label

    @property
    def cluster_ids(self) -> np.ndarray:
        return np.unique(self.labels[~self.is_noise])


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Counts of estimated (rows) vs. true (columns) groups.

    The last row and last column hold the estimated and true noise.
    """

    counts: np.ndarray

    @classmethod
    def from_partitions(cls, estimated: LabeledPartition,
                        truth: LabeledPartition) -> "ContingencyTable":
        if len(estimated) != len(truth):
            raise ValueError(f"partition lengths differ: {len(estimated)} vs {len(truth)}")
        rows = _codes(estimated)
        cols = _codes(truth)
        n_rows = estimated.cluster_ids.size + 1
        n_cols = truth.cluster_ids.size + 1
        counts = np.zeros((n_rows, n_cols), dtype=np.int64)
        np.add.at(counts, (rows, cols), 1)
        return cls(counts)

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _codes(part: LabeledPartition) -> np.ndarray:
    """Cluster ids -> 0..K-1 in sorted order, noise -> K."""
    ids = part.cluster_ids
    codes = np.full(len(part), ids.size, dtype=np.intp)
    clustered = ~part.is_noise
    codes[clustered] = np.searchsorted(ids, part.labels[clustered])
    return codes


def _pairs(x) -> int:
    x = np.asarray(x, dtype=np.int64)
    return int(np.sum(x * (x - 1) // 2))


def ari(table) -> float:
    """Hubert-Arabie adjusted Rand index of a contingency table.

    Evaluated in exact integer arithmetic after clearing the ``h(n)``
    denominator. A zero denominator only occurs when both partitions are
    all-singletons or both a single group; that case returns 1.
    """
    counts = np.asarray(getattr(table, "counts", table), dtype=np.int64)
    n = int(counts.sum())
    if n < 2:
        raise ValueError("ARI needs at least two objects")
    h_n = n * (n - 1) // 2
    index = _pairs(counts)
    a = _pairs(counts.sum(axis=1))
    b = _pairs(counts.sum(axis=0))
    num = 2 * (h_n * index - a * b)
    den = h_n * (a + b) - 2 * a * b
    if den == 0:
        return 1.0 if num == 0 else 0.0
    return num / den


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Classic ARI of two plain label vectors (noise is just another group)."""
    a = np.unique(np.asarray(labels_a), return_inverse=True)[1]
    b = np.unique(np.asarray(labels_b), return_inverse=True)[1]
    if a.size != b.size:
        raise ValueError("label vectors differ in length")
    counts = np.zeros((a.max() + 1, b.max() + 1), dtype=np.int64)
    np.add.at(counts, (a, b), 1)
    return ari(counts)


def ari_c(estimated: LabeledPartition, truth: LabeledPartition) -> float:
    """ARI over the objects placed in estimated clusters (all true columns kept).

    Returns NaN when every object was labelled noise or fewer than two remain.
    """
    counts = ContingencyTable.from_partitions(estimated, truth).counts[:-1]
    if counts.sum() < 2:
        return float("nan")
    return ari(counts)


def _collapsed(estimated: LabeledPartition, truth: LabeledPartition) -> np.ndarray:
    counts = ContingencyTable.from_partitions(estimated, truth).counts
    n_cc = int(counts[:-1, :-1].sum())
    n_nc = int(counts[-1, :-1].sum())
    n_nn = int(counts[-1, -1])
    return np.array([[n_cc, 0], [n_nc, n_nn]], dtype=np.int64)


def ari_n(estimated: LabeledPartition, truth: LabeledPartition) -> float:
    """ARI of the 2x2 clustered-vs-noise table, estimated-cluster noise excluded.

    Defined as 0 when no object is labelled noise.
    """
    table = _collapsed(estimated, truth)
    if table[1].sum() == 0 or table.sum() < 2:
        return 0.0
    return ari(table)


def s_n(estimated: LabeledPartition, truth: LabeledPartition) -> float:
    """One minus the fraction of truly clustered objects labelled noise."""
    if len(estimated) != len(truth):
        raise ValueError(f"partition lengths differ: {len(estimated)} vs {len(truth)}")
    false_noise = np.count_nonzero(estimated.is_noise & ~truth.is_noise)
    return 1.0 - false_noise / len(estimated)


def label_noise(state, cutoff: int = 3) -> tuple[LabeledPartition, int]:
    """Relabel clusters with at most ``cutoff`` members as noise.

    Returns the partition (surviving clusters keep their state index) and
    the number of surviving clusters.
    """
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    small = state.sizes <= cutoff
    labels = np.asarray(state.assignment).copy()
    labels[small[labels]] = NOISE
    return LabeledPartition(labels), int(np.count_nonzero(~small))
