"""Seeded synthetic clustering scenarios with optional overlap, noise and correlation.

Cluster centers are uniform on ``[-5, 5]^p``. A cluster's radius is the
largest member-to-center distance. Noise points are uniform on the same
box, rejection-sampled to lie strictly outside every cluster radius.
Randomness comes from :func:`numpy.random.default_rng` (PCG64) seeded with
``ScenarioSpec.seed``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DataMatrix
from .evaluation import NOISE, LabeledPartition

BOX = 5.0
OVERLAP_RANGE = (0.15, 0.20)


class SimulationError(RuntimeError):
    """Rejection sampling ran out of attempts."""


@dataclass(frozen=True)
class ScenarioSpec:
    n_clustered: int
    p: int
    k: int
    noise_count: int = 0
    overlap: bool = False
    correlated: bool = False
    cluster_sd: float = 0.5
    seed: int = 0
    overlap_pairs: int = 1
    max_attempts: int = 10000

    def __post_init__(self):
        if self.p < 1 or self.k < 1:
            raise ValueError("p and k must be positive")
        if self.n_clustered < self.k:
            raise ValueError("n_clustered must be at least k")
        if self.noise_count < 0:
            raise ValueError("noise_count must be nonnegative")
        if self.cluster_sd <= 0:
            raise ValueError("cluster_sd must be positive")
        if self.overlap and (self.k < 2 or not 1 <= self.overlap_pairs <= self.k // 2):
            raise ValueError("overlap needs k >= 2 and 1 <= overlap_pairs <= k // 2")


def preset(scenario: int, high_dim: bool = False, seed: int = 0) -> ScenarioSpec:
    """The four scenarios: 1 separated, 2 overlapping, 3 separated + noise, 4 overlapping + noise.

    ``high_dim=False`` gives n=400, p=20 with 200 noise points; ``True``
    gives n=100, p=200 with 50 noise points. Both use 10 clusters.
    """
    if scenario not in (1, 2, 3, 4):
        raise ValueError(f"scenario must be 1-4, got {scenario}")
    n, p, noise = (100, 200, 50) if high_dim else (400, 20, 200)
    return ScenarioSpec(n_clustered=n, p=p, k=10,
                        noise_count=noise if scenario in (3, 4) else 0,
                        overlap=scenario in (2, 4), seed=seed)


def cluster_sizes(n: int, k: int) -> np.ndarray:
    sizes = np.full(k, n // k)
    sizes[: n % k] += 1
    return sizes


def _offsets(rng, size: int, p: int, sd: float, corr: float) -> np.ndarray:
    z = rng.standard_normal((size, p))
    if corr == 0.0:
        return sd * z
    # equicorrelated Gaussian with random feature signs: |corr| off the diagonal
    common = rng.standard_normal((size, 1))
    signs = rng.choice([-1.0, 1.0], size=p)
    return sd * (np.sqrt(1.0 - corr) * z + np.sqrt(corr) * common * signs)


def _overlap_fraction(off_a, off_b, center_a, center_b) -> float:
    r_a = np.linalg.norm(off_a, axis=1).max()
    r_b = np.linalg.norm(off_b, axis=1).max()
    pts = np.vstack([center_a + off_a, center_b + off_b])
    inside = ((np.linalg.norm(pts - center_a, axis=1) <= r_a)
              & (np.linalg.norm(pts - center_b, axis=1) <= r_b))
    return float(inside.mean())


def _place_overlapping(off_a, off_b, center_a, center_b) -> np.ndarray:
    """Move ``center_b`` along the line through ``center_a`` until the overlap is in range."""
    lo_frac, hi_frac = OVERLAP_RANGE
    direction = center_b - center_a
    norm = np.linalg.norm(direction)
    direction = direction / norm if norm > 0 else np.eye(center_a.size)[0]
    r_sum = np.linalg.norm(off_a, axis=1).max() + np.linalg.norm(off_b, axis=1).max()
    for sign in (1.0, -1.0):
        # the fraction is 0 once the balls are disjoint and near 1 when the centers coincide
        lo, hi = 0.0, r_sum
        for _ in range(100):
            t = 0.5 * (lo + hi)
            cand = center_a + sign * t * direction
            frac = _overlap_fraction(off_a, off_b, center_a, cand)
            if lo_frac <= frac <= hi_frac:
                if np.all(np.abs(cand) <= BOX):
                    return cand
                break
            if frac > hi_frac:
                lo = t
            else:
                hi = t
    raise SimulationError("could not reach the target overlap fraction")


@dataclass(frozen=True, eq=False)
class Layout:
    """Population centers and member radii of the generated clusters."""

    centers: np.ndarray
    radii: np.ndarray


def generate(spec: ScenarioSpec) -> tuple[DataMatrix, LabeledPartition]:
    """Draw a dataset and its ground-truth labels (noise labelled ``NOISE``).

    Clustered objects come first, grouped by cluster, then the noise.
    """
    data, truth, _ = generate_layout(spec)
    return data, truth


def generate_layout(spec: ScenarioSpec) -> tuple[DataMatrix, LabeledPartition, Layout]:
    """:func:`generate`, also returning the cluster centers and radii.

    Raises
    ------
    SimulationError
        If noise rejection or overlap placement exceeds its attempt budget;
        use fewer noise points or a smaller ``cluster_sd``.
    """
    rng = np.random.default_rng(spec.seed)
    p, k = spec.p, spec.k
    sizes = cluster_sizes(spec.n_clustered, k)
    centers = rng.uniform(-BOX, BOX, size=(k, p))
    corrs = np.zeros(k)
    if spec.correlated:
        corrs[:] = 0.9
        corrs[-1] = 0.5
    offsets = [_offsets(rng, int(sizes[j]), p, spec.cluster_sd, corrs[j]) for j in range(k)]

    if spec.overlap:
        for pair in range(spec.overlap_pairs):
            a, b = 2 * pair, 2 * pair + 1
            for _ in range(spec.max_attempts):
                try:
                    centers[b] = _place_overlapping(offsets[a], offsets[b],
                                                    centers[a], centers[b])
                    break
                except SimulationError:
                    offsets[b] = _offsets(rng, int(sizes[b]), p, spec.cluster_sd, corrs[b])
            else:
                raise SimulationError("overlap placement exceeded its attempt budget; "
                                      "try a smaller cluster_sd")

    points = np.vstack([centers[j] + offsets[j] for j in range(k)])
    radii = np.array([np.linalg.norm(o, axis=1).max() for o in offsets])
    labels = np.repeat(np.arange(k), sizes)

    noise = np.empty((spec.noise_count, p))
    filled = attempts = 0
    while filled < spec.noise_count:
        if attempts >= spec.max_attempts:
            raise SimulationError("noise rejection sampling exceeded its attempt budget; "
                                  "try a smaller noise_count or cluster_sd")
        attempts += 1
        batch = rng.uniform(-BOX, BOX, size=(max(spec.noise_count - filled, 16), p))
        dist = np.linalg.norm(batch[:, None, :] - centers[None, :, :], axis=2)
        ok = batch[np.all(dist > radii, axis=1)]
        take = ok[: spec.noise_count - filled]
        noise[filled: filled + take.shape[0]] = take
        filled += take.shape[0]

    values = np.vstack([points, noise])
    truth = np.concatenate([labels, np.full(spec.noise_count, NOISE)])
    return DataMatrix(values), LabeledPartition(truth), Layout(centers, radii)
