"""Minimax concave penalty (MCP), its derivative and the MM weights.

All functions accept scalars or arrays of distances; array input returns an
array of the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PenaltyParams:
    """Regularization strength ``lam`` and concavity ``delta`` of the MCP."""

    lam: float
    delta: float

    def __post_init__(self):
        if not (self.lam > 0 and self.delta > 0):
            raise ValueError(f"lam and delta must be positive, got {self.lam}, {self.delta}")
        if not math.isfinite(self.lam * self.delta):
            raise ValueError("lam * delta must be finite")

    @property
    def eta(self) -> float:
        """Attraction threshold: center pairs farther apart than this get zero weight."""
        return self.lam * self.delta


def _check_nonneg(t):
    arr = np.asarray(t, dtype=np.float64)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("penalty argument must be nonnegative")
    return arr


def _out(arr):
    return float(arr) if arr.ndim == 0 else arr


def rho(t, params: PenaltyParams):
    """MCP value: ``t - t**2 / (2*eta)`` below ``eta``, ``eta / 2`` above."""
    t = _check_nonneg(t)
    eta = params.eta
    return _out(np.where(t < eta, t - t * t / (2.0 * eta), eta / 2.0))


def rho_prime(t, params: PenaltyParams):
    """Hinge derivative ``(1 - t/eta)_+``; 0 at the kink itself."""
    t = _check_nonneg(t)
    return _out(np.maximum(1.0 - t / params.eta, 0.0))


def weight(mu_k, mu_l, n_l: int, params: PenaltyParams) -> float:
    """MM weight of center ``mu_l`` when updating ``mu_k``.

    Raises
    ------
    ValueError
        If the centers coincide; such clusters must be merged first.
    """
    d = float(np.linalg.norm(np.asarray(mu_k, float) - np.asarray(mu_l, float)))
    if d == 0.0:
        raise ValueError("zero distance between centers; merge them before weighting")
    return n_l * max(1.0 - d / params.eta, 0.0) / (2.0 * d)


def weights_from_distances(dist: np.ndarray, sizes: np.ndarray, eta: float) -> np.ndarray:
    """Vectorised weights; caller guarantees strictly positive distances."""
    return sizes * np.maximum(1.0 - dist / eta, 0.0) / (2.0 * dist)


def max_penalty(params: PenaltyParams) -> float:
    return params.lam * params.lam * params.delta / 2.0
