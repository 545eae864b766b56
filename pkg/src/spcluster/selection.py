"""Choosing one solution from a path by the log-likelihood difference ratio."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .core import ClusterState, DataMatrix, _as_data


@dataclass
class SelectionResult:
    chosen_index: int
    k_star: int
    ratios: list
    candidates: list = field(default_factory=list, repr=False)

    @property
    def solution(self):
        return self.candidates[self.chosen_index] if self.candidates else None


def log_likelihood(data, state: ClusterState, use_means: bool = True) -> float:
    """Identity-covariance Gaussian mixture log-likelihood of a clustering.

    Mixture weights are the cluster proportions. With ``use_means`` the
    component means are the cluster sample means (the unpenalized estimates);
    otherwise the state's penalized centers are used.
    """
    y = data.values if isinstance(data, DataMatrix) else np.atleast_2d(np.asarray(data, float))
    n, p = y.shape
    centers = state.cluster_means(_as_data(y)) if use_means and n >= 2 else state.centers
    log_pi = np.log(state.sizes / n)
    sq = (np.sum(y ** 2, axis=1)[:, None] + np.sum(centers ** 2, axis=1)[None, :]
          - 2.0 * y @ centers.T)
    np.maximum(sq, 0.0, out=sq)
    log_comp = log_pi[None, :] - 0.5 * p * math.log(2.0 * math.pi) - 0.5 * sq
    return float(np.sum(logsumexp(log_comp, axis=1)))


def choose_k(ks, lls, a: float = 0.05) -> tuple[int, int, list]:
    """Pick from candidates sorted by strictly increasing K.

    Returns ``(index, K*, ratios)`` where ``ratios`` holds
    ``((K_s, K_{s+1}), dr)`` for adjacent pairs, ``dr`` being the
    log-likelihood gain per added cluster. ``K*`` is the larger end of the
    last pair whose ratio reaches ``a`` times the largest ratio: growing past
    it buys comparatively little likelihood.
    """
    ks = list(ks)
    lls = list(lls)
    if len(ks) < 2:
        raise ValueError("selection needs at least two distinct cluster counts")
    if any(k2 <= k1 for k1, k2 in zip(ks, ks[1:])):
        raise ValueError("cluster counts must be strictly increasing")
    ratios = [((ks[s], ks[s + 1]), (lls[s + 1] - lls[s]) / (ks[s + 1] - ks[s]))
              for s in range(len(ks) - 1)]
    top = max(dr for _, dr in ratios)
    chosen = 1 + max(s for s, (_, dr) in enumerate(ratios) if dr >= a * top)
    return chosen, ks[chosen], ratios


def representatives(solutions, lls) -> tuple[list, list]:
    """Highest-likelihood solution per ``k_total``, sorted by ``k_total``.

    Ties keep the earliest solution.
    """
    best = {}
    for sol, ll in zip(solutions, lls):
        cur = best.get(sol.k_total)
        if cur is None or ll > cur[1]:
            best[sol.k_total] = (sol, ll)
    keys = sorted(best)
    return [best[k][0] for k in keys], [best[k][1] for k in keys]


def select(path, data: DataMatrix, a: float = 0.05) -> SelectionResult:
    """Select the solution with the largest K whose likelihood gain stays substantial.

    Raises
    ------
    ValueError
        If the path has fewer than two distinct cluster counts.
    """
    data = _as_data(data)
    sols = path.distinct() if hasattr(path, "distinct") else list(path)
    lls = [log_likelihood(data, s.state) for s in sols]
    cands, cand_lls = representatives(sols, lls)
    idx, k_star, ratios = choose_k([s.k_total for s in cands], cand_lls, a)
    return SelectionResult(idx, k_star, ratios, cands)
