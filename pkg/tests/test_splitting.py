import numpy as np
import pytest

from spcluster import ClusterState, DataMatrix, PenaltyParams, split_step
from spcluster.penalty import rho
from spcluster.splitting import apply_splits, split_objective


def grid_min(y_i, centers, sizes, params, lo, hi, num=400_001):
    grid = np.linspace(lo, hi, num)
    pen = rho(np.abs(grid[:, None] - centers[:, 0][None, :]), params) @ sizes
    vals = (y_i - grid) ** 2 + params.lam * pen
    j = int(vals.argmin())
    return grid[j], vals[j]


def test_stays_when_threshold_dominates():
    d = DataMatrix([[0.0], [0.1], [-0.1], [8.0]])
    s = ClusterState(np.array([[0.0], [8.0]]), np.array([0, 0, 0, 1]), np.array([3, 1]))
    out = split_step(1, s, d, PenaltyParams(2.0, 1.0))
    assert not out.moved
    np.testing.assert_array_equal(out.new_theta, s.centers[0])


def test_singleton_never_moves():
    d = DataMatrix([[0.0], [5.0]])
    out = split_step(0, ClusterState(np.array([[1.0], [5.0]]), np.array([0, 1]),
                                     np.array([1, 1])), d, PenaltyParams(0.01, 1.0))
    assert not out.moved and out.new_theta[0] == 1.0


def test_tiny_lambda_unfuses_to_data():
    d = DataMatrix([[0.0], [2.0], [20.0]])
    s = ClusterState(np.array([[1.0], [20.0]]), np.array([0, 0, 1]), np.array([2, 1]))
    out = split_step(0, s, d, PenaltyParams(1e-8, 1.0))
    assert out.moved
    assert out.new_theta[0] == pytest.approx(0.0, abs=1e-6)


def test_soft_threshold_in_l1_regime():
    # nearly convex penalty, other cluster beyond eta: beta = beta_hat - gamma
    y = np.array([[3.0], [-1.0], [-2.0], [1e8]])
    centers = np.array([[0.0], [1e8]])
    sizes = np.array([3, 1])
    params = PenaltyParams(0.5, 1e7)
    s = ClusterState(centers, np.array([0, 0, 0, 1]), sizes)
    out = split_step(0, s, DataMatrix(y), params)
    assert params.eta < 1e8
    gamma = params.lam * sizes[0] / 2
    assert out.moved
    assert out.new_theta[0] == pytest.approx(3.0 - gamma, abs=1e-6)
    arg, _ = grid_min(3.0, centers, sizes.astype(float), params, -2.0, 5.0)
    assert out.new_theta[0] == pytest.approx(arg, abs=1e-4)


def test_apply_splits_adds_singleton():
    y = np.array([[0.0], [0.2], [-0.2], [3.0], [30.0]])
    s = ClusterState(np.array([[0.0], [30.0]]), np.array([0, 0, 0, 0, 1]), np.array([4, 1]))
    out, moved = apply_splits(s, DataMatrix(y), PenaltyParams(0.2, 0.5))
    assert moved == 1
    assert out.n_clusters == 3 and out.sizes.tolist() == [3, 1, 1]
    assert out.assignment[3] == 2


def test_moved_theta_improves_objective():
    rng = np.random.default_rng(8)
    for _ in range(30):
        centers = np.sort(rng.uniform(-3, 3, size=3))[:, None]
        sizes = rng.integers(2, 6, size=3)
        y = np.concatenate([c + rng.normal(0, 0.8, n) for c, n in zip(centers[:, 0], sizes)])
        s = ClusterState(centers, np.repeat(np.arange(3), sizes), sizes)
        params = PenaltyParams(rng.uniform(0.05, 1.0), rng.uniform(0.5, 3.0))
        i = int(rng.integers(y.size))
        out = split_step(i, s, DataMatrix(y), params)
        k = s.assignment[i]
        stay = split_objective(centers[k], y[i], centers, sizes, params)
        assert split_objective(out.new_theta, y[i], centers, sizes, params) <= stay + 1e-12
