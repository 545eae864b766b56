"""Optional unfusing of single objects from their cluster by soft thresholding.

For object ``i`` fused at center ``mu_k`` the objective restricted to its own
mean parameter is::

    f(theta) = ||y_i - theta||^2 + lam * sum_l N_l * rho(||theta - mu_l||)

Near ``mu_k`` the own-cluster term ``lam * N_k * rho(||beta||)`` is bounded
by ``lam * N_k * ||beta||_1`` (``beta = theta - mu_k``) and the remaining
terms by the usual quadratic MM surrogate, so minimizing the surrogate is a
coordinate-wise soft threshold of ``theta_tilde - mu_k``. A nonzero result
unfuses the object, after which all coordinates are re-solved jointly with
plain MM updates on ``f`` from a few starting points; the object moves only
if the best of them beats staying at ``mu_k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ClusterState, DataMatrix, _as_data
from .penalty import PenaltyParams, rho

REFINE_MAX_ITER = 1000
REFINE_RTOL = 1e-13


@dataclass(frozen=True, eq=False)
class SplitOutcome:
    moved: bool
    new_theta: np.ndarray


def split_objective(theta, y_i, centers, sizes, params: PenaltyParams) -> float:
    theta = np.asarray(theta, dtype=np.float64)
    dist = np.linalg.norm(centers - theta, axis=1)
    return float(np.sum((y_i - theta) ** 2) + params.lam * np.sum(sizes * rho(dist, params)))


def _weights(theta, centers, sizes, eta, skip=None):
    diff = centers - theta
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if skip is not None:
        dist[skip] = np.inf
    return sizes * np.maximum(1.0 - dist / eta, 0.0) / (2.0 * dist), dist


def _refine(theta, y_i, centers, sizes, params: PenaltyParams) -> np.ndarray:
    """Joint MM iterations on ``f`` from an unfused starting point."""
    lam, eta = params.lam, params.eta
    scale = max(1.0, float(np.abs(y_i).max()), float(np.abs(centers).max()))
    for _ in range(REFINE_MAX_ITER):
        with np.errstate(divide="ignore", invalid="ignore"):
            w, dist = _weights(theta, centers, sizes, eta)
        hit = np.flatnonzero(dist <= REFINE_RTOL * scale)
        if hit.size:
            return centers[hit[0]].copy()
        wsum = w.sum()
        new = (y_i + lam * (w @ centers)) / (1.0 + lam * wsum)
        step = float(np.abs(new - theta).max())
        theta = new
        if step <= REFINE_RTOL * scale:
            break
    return theta


def _split_one(y_i, k, centers, sizes, params: PenaltyParams):
    mu_k = centers[k]
    lam = params.lam
    w, dist = _weights(mu_k, centers, sizes, params.eta, skip=k)
    if np.any(dist == 0.0):
        raise ValueError("another center coincides with the object's center")
    wsum = w.sum()
    theta_tilde = (y_i + lam * (w @ centers)) / (1.0 + lam * wsum)
    gamma = lam * sizes[k] / (2.0 * (1.0 + lam * wsum))
    beta_hat = theta_tilde - mu_k
    beta = np.sign(beta_hat) * np.maximum(np.abs(beta_hat) - gamma, 0.0)
    if not np.any(beta):
        return None
    # the surrogate only certifies the neighbourhood of mu_k; restart the
    # joint re-solve from y_i and from every other center as well
    starts = [mu_k + beta, y_i] + [centers[l] for l in range(len(centers)) if l != k]
    best, best_val = None, split_objective(mu_k, y_i, centers, sizes, params)
    for start in starts:
        theta = _refine(np.array(start, dtype=np.float64), y_i, centers, sizes, params)
        if np.array_equal(theta, mu_k):
            continue
        val = split_objective(theta, y_i, centers, sizes, params)
        if val < best_val:
            best, best_val = theta, val
    return best


def split_step(i: int, state: ClusterState, data: DataMatrix,
               params: PenaltyParams) -> SplitOutcome:
    """Decide whether object ``i`` leaves its cluster, and where it goes.

    The object is assumed fused at its cluster center; singleton clusters
    never move.
    """
    data = _as_data(data)
    if not 0 <= i < state.n:
        raise IndexError(f"object index {i} out of range")
    k = int(state.assignment[i])
    mu_k = state.centers[k]
    if state.sizes[k] == 1:
        return SplitOutcome(False, mu_k.copy())
    theta = _split_one(data.values[i], k, state.centers, state.sizes, params)
    if theta is None:
        return SplitOutcome(False, mu_k.copy())
    return SplitOutcome(True, theta)


def apply_splits(state: ClusterState, data: DataMatrix, params: PenaltyParams,
                 xi: float = 0.0) -> tuple[ClusterState, int]:
    """Cycle objects in index order; each unfused object becomes a singleton.

    An object whose new position lands within ``xi`` of its old center is
    left in place; one landing within ``xi`` of another center joins it.
    """
    centers = [c for c in state.centers]
    sizes = list(state.sizes)
    assignment = state.assignment.copy()
    y = data.values
    moved = 0
    for i in range(state.n):
        k = int(assignment[i])
        if sizes[k] == 1:
            continue
        c_arr = np.asarray(centers)
        s_arr = np.asarray(sizes, dtype=np.float64)
        theta = _split_one(y[i], k, c_arr, s_arr, params)
        if theta is None or np.linalg.norm(theta - c_arr[k]) < xi:
            continue
        sizes[k] -= 1
        near = np.flatnonzero(np.linalg.norm(c_arr - theta, axis=1) <= xi)
        if near.size:
            # landed on another center: the object joins that cluster
            target = int(near[0])
        else:
            centers.append(theta)
            sizes.append(0)
            target = len(sizes) - 1
        sizes[target] += 1
        assignment[i] = target
        moved += 1
    if not moved:
        return state, 0
    return ClusterState(np.asarray(centers), assignment, np.asarray(sizes)), moved
