"""Adaptive (delta, lambda) schedule and the solution path driver.

The path starts from ``n`` singleton clusters. For each concavity ``delta``
a log-spaced grid of ``lambda`` values runs from a lower bound that lets
roughly a fraction ``omega`` of nearest neighbours attract, up to a bound
that fuses any two points of the data. The per-cluster bias-variance ratio
(BVR) decides when the concavity must increase (``delta`` shrinks); the
lower bound of the next grid then keeps the maximum penalty
``lam**2 * delta / 2`` unchanged.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (ClusterState, DataMatrix, DegenerateDataError, _as_data,
                   _group_sums, max_pairwise_distance, merge_threshold,
                   nn_quantile)
from .optimizer import MMReport, run_mm
from .penalty import PenaltyParams

log = logging.getLogger(__name__)


class PathError(RuntimeError):
    """The path failed to reach a single cluster within its solution budget."""


@dataclass(frozen=True)
class PathConfig:
    """Tuning parameters of the solution path.

    ``omega`` is the only required input: the approximate fraction of
    nearest-neighbour pairs allowed to fuse in the first solution. Use 0.5
    when ``n > p`` and 0.1 for high-dimensional data (``n < p``).
    ``tau`` defaults to ``0.9 * omega`` and ``grid_size`` to ``min(20, p)``.
    """

    omega: float
    tau: Optional[float] = None
    phi: float = 0.5
    alpha: float = 0.9
    grid_size: Optional[int] = None
    allow_splits: bool = False
    noise_cutoff: int = 3
    max_solutions: int = 5000

    def __post_init__(self):
        if not 0.0 < self.omega < 1.0:
            raise ValueError(f"omega must lie in (0, 1), got {self.omega}")
        if self.tau is None:
            object.__setattr__(self, "tau", 0.9 * self.omega)
        if not 0.0 < self.tau < self.omega:
            raise ValueError(f"tau must lie in (0, omega), got {self.tau}")
        for name in ("phi", "alpha"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")
        if self.grid_size is not None and self.grid_size < 1:
            raise ValueError("grid_size must be a positive integer")
        if self.noise_cutoff < 0:
            raise ValueError("noise_cutoff must be nonnegative")

    def resolved_grid_size(self, p: int) -> int:
        return self.grid_size if self.grid_size is not None else min(20, p)


@dataclass
class Solution:
    params: PenaltyParams
    state: ClusterState
    report: MMReport
    k_total: int
    k_clust: int
    bvr_triggered: bool = False
    splits: int = 0


@dataclass
class SolutionPath:
    solutions: list = field(default_factory=list)
    config: Optional[PathConfig] = None
    xi: float = 0.0

    def __len__(self):
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    def distinct(self) -> list:
        """Solutions with a new (k_total, assignment) key, in generation order."""
        seen = set()
        out = []
        for sol in self.solutions:
            key = (sol.k_total, sol.state.assignment.tobytes())
            if key not in seen:
                seen.add(key)
                out.append(sol)
        return out


def init_params(data: DataMatrix, config: PathConfig) -> PenaltyParams:
    """First (delta, lambda): ``eta = Q_omega`` and a half step toward a ``Q_tau`` neighbour."""
    data = _as_data(data)
    q_omega = nn_quantile(data, config.omega)
    q_tau = nn_quantile(data, config.tau)
    return _init_from_quantiles(q_omega, q_tau, config.phi)


def _init_from_quantiles(q_omega: float, q_tau: float, phi: float) -> PenaltyParams:
    if q_tau <= 0.0 or q_omega <= q_tau:
        raise DegenerateDataError(
            f"nearest-neighbour quantiles Q_omega={q_omega:g}, Q_tau={q_tau:g} do not "
            "satisfy Q_omega > Q_tau > 0; try a larger omega or a smaller tau, or "
            "remove duplicate rows")
    lam = 2.0 * phi * q_omega * q_tau / ((1.0 - phi) * (q_omega - q_tau))
    return PenaltyParams(lam, q_omega / lam)


def lambda_upper(delta: float, max_distance: float) -> float:
    return (1.0 + 1.0 / delta) * max_distance


def lambda_grid(delta: float, lambda_lo: float, data: Optional[DataMatrix], G: int,
                max_distance: Optional[float] = None) -> list:
    """``G`` log-spaced values from ``lambda_lo`` to the all-merge bound.

    If the lower bound is not below the upper bound, or ``G == 1``, the grid
    is the upper bound alone.
    """
    if G < 1:
        raise ValueError("G must be a positive integer")
    if max_distance is None:
        max_distance = max_pairwise_distance(data)
    hi = lambda_upper(delta, max_distance)
    if lambda_lo >= hi or G == 1:
        return [hi]
    grid = np.geomspace(lambda_lo, hi, G)
    grid[0], grid[-1] = lambda_lo, hi
    return [float(v) for v in grid]


def decrease_delta(current: PenaltyParams, config: PathConfig) -> PenaltyParams:
    """Shrink delta by ``alpha`` and raise lambda so ``lam**2 * delta`` is unchanged."""
    return PenaltyParams(current.lam / math.sqrt(config.alpha), current.delta * config.alpha)


def bvr(k: int, state: ClusterState, data: DataMatrix) -> float:
    """Bias-variance ratio of cluster ``k``."""
    data = _as_data(data)
    members = np.flatnonzero(state.assignment == k)
    mu = state.centers[k]
    if members.size == 1:
        y = data.values[members[0]]
        others = np.delete(state.centers, k, axis=0)
        if others.shape[0] == 0:
            return 0.0
        r = np.linalg.norm(others - y, axis=1).min()
        num = float(np.sum((mu - y) ** 2))
        return _ratio(num, (r / 2.0) ** 2)
    pts = data.values[members]
    ybar = pts.mean(axis=0)
    num = float(np.sum((mu - ybar) ** 2))
    var = float(np.sum((pts - ybar) ** 2)) / (members.size - 1)
    return _ratio(num, var)


def _ratio(num: float, den: float) -> float:
    if den > 0.0:
        return num / den
    return np.inf if num > 0.0 else 0.0


def bvr_all(state: ClusterState, data: DataMatrix) -> np.ndarray:
    """Vectorised :func:`bvr` over every cluster."""
    y = data.values
    sizes = state.sizes
    k = sizes.size
    means = _group_sums(y, state.assignment, k) / sizes[:, None]
    num = np.sum((state.centers - means) ** 2, axis=1)
    resid = y - means[state.assignment]
    ss = np.bincount(state.assignment, weights=np.einsum("ij,ij->i", resid, resid),
                     minlength=k)
    den = np.zeros(k)
    multi = sizes > 1
    den[multi] = ss[multi] / (sizes[multi] - 1)
    single = np.flatnonzero(~multi)
    if single.size and k > 1:
        obj = np.empty(k, dtype=np.intp)
        obj[state.assignment] = np.arange(state.n)
        pts = y[obj[single]]
        d2 = (np.sum(pts ** 2, axis=1)[:, None] + np.sum(state.centers ** 2, axis=1)[None, :]
              - 2.0 * pts @ state.centers.T)
        d2[np.arange(single.size), single] = np.inf
        r = np.sqrt(np.maximum(d2.min(axis=1), 0.0))
        den[single] = (r / 2.0) ** 2
    out = np.zeros(k)
    pos = den > 0.0
    out[pos] = num[pos] / den[pos]
    out[~pos & (num > 0.0)] = np.inf
    return out


def _k_clust(state: ClusterState, cutoff: int) -> int:
    return int(np.count_nonzero(state.sizes > cutoff))


def run_path(data: DataMatrix, config: PathConfig) -> SolutionPath:
    """Trace solutions from ``n`` singletons down to a single cluster.

    Every (delta, lambda) pair is warm-started from the previous solution.
    When some cluster's BVR exceeds 1 the current grid is abandoned and a
    new one is built for ``alpha * delta``; an exhausted grid that leaves
    more than one cluster is treated the same way, starting from its last
    lambda.
    """
    from .splitting import apply_splits

    data = _as_data(data)
    xi = merge_threshold(data).xi
    G = config.resolved_grid_size(data.p)
    d_max = max_pairwise_distance(data)
    current = init_params(data, config)
    state = ClusterState.singletons(data)
    path = SolutionPath([], config, xi)
    h = 1
    while True:
        grid = lambda_grid(current.delta, current.lam, None, G, max_distance=d_max)
        log.debug("delta_%d=%.6g grid [%.6g, %.6g] (%d values)",
                  h, current.delta, grid[0], grid[-1], len(grid))
        last = None
        for lam in grid:
            last = PenaltyParams(lam, current.delta)
            state, report = run_mm(state, data, last, xi)
            splits = 0
            if config.allow_splits and state.n_clusters > 1:
                state, splits = apply_splits(state, data, last, xi)
            ratios = bvr_all(state, data) if state.n_clusters > 1 else np.zeros(1)
            fired = bool(np.any(ratios > 1.0))
            sol = Solution(last, state, report, state.n_clusters,
                           _k_clust(state, config.noise_cutoff), fired, splits)
            path.solutions.append(sol)
            log.debug("lambda=%.6g K=%d iters=%d bvr_max=%.3g", lam, sol.k_total,
                      report.iterations, float(ratios.max()))
            if state.n_clusters == 1:
                return path
            if len(path.solutions) >= config.max_solutions:
                raise PathError(f"no single cluster after {config.max_solutions} solutions")
            if fired:
                break
        current = decrease_delta(last, config)
        h += 1
