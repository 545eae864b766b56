import math

import numpy as np
import pytest

from spcluster import (ClusterState, DataMatrix, DegenerateDataError, PathConfig,
                       PenaltyParams, bvr, decrease_delta, init_params, lambda_grid,
                       max_penalty, run_path)
from spcluster.scheduler import _init_from_quantiles, bvr_all


class TestConfig:
    def test_defaults(self):
        c = PathConfig(omega=0.5)
        assert c.tau == pytest.approx(0.45)
        assert (c.phi, c.alpha) == (0.5, 0.9)
        assert c.resolved_grid_size(200) == 20 and c.resolved_grid_size(3) == 3

    @pytest.mark.parametrize("kw", [dict(omega=1.0), dict(omega=0.5, tau=0.6),
                                    dict(omega=0.5, phi=1.0), dict(omega=0.5, alpha=0.0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            PathConfig(**kw)


class TestInitParams:
    def test_example(self):
        p = _init_from_quantiles(2.0, 1.0, 0.5)
        assert (p.lam, p.delta) == (4.0, 0.5)

    def test_eta_is_q_omega(self):
        rng = np.random.default_rng(1)
        d = DataMatrix(rng.normal(size=(40, 3)))
        p = init_params(d, PathConfig(omega=0.5))
        from spcluster import nn_quantile
        assert p.eta == pytest.approx(nn_quantile(d, 0.5), rel=1e-14)

    def test_degenerate(self):
        d = DataMatrix([[0.0], [0.0], [1.0], [1.0]])
        with pytest.raises(DegenerateDataError):
            init_params(d, PathConfig(omega=0.5))


class TestLambdaGrid:
    def test_log_spaced(self):
        np.testing.assert_allclose(lambda_grid(1.0, 1.0, None, 3, max_distance=50.0),
                                   [1.0, 10.0, 100.0])

    def test_endpoints_only(self):
        assert lambda_grid(1.0, 2.0, None, 2, max_distance=6.0) == [2.0, 12.0]

    def test_upper_bound_from_data(self):
        d = DataMatrix([0.0, 1.0, 6.0])
        assert lambda_grid(1.0, 0.5, d, 4)[-1] == 12.0

    def test_degenerate(self):
        assert lambda_grid(1.0, 20.0, None, 5, max_distance=6.0) == [12.0]

    def test_strictly_increasing(self):
        g = lambda_grid(0.3, 0.01, None, 20, max_distance=7.0)
        assert len(g) == 20 and all(b > a for a, b in zip(g, g[1:]))


class TestDecreaseDelta:
    def test_example(self):
        new = decrease_delta(PenaltyParams(2.0, 1.0), PathConfig(omega=0.5, alpha=0.9))
        assert new.delta == pytest.approx(0.9)
        assert new.lam == pytest.approx(2.10819, abs=1e-5)

    def test_max_penalty_preserved(self):
        old = PenaltyParams(2.0, 1.0)
        new = decrease_delta(old, PathConfig(omega=0.5))
        assert max_penalty(new) == pytest.approx(max_penalty(old), rel=1e-14)
        assert new.eta == pytest.approx(old.eta * math.sqrt(0.9))


class TestBVR:
    def test_unbiased(self):
        d = DataMatrix([[0.0], [2.0], [9.0]])
        s = ClusterState.from_assignment(d, [0, 0, 1])
        assert bvr(0, s, d) == 0.0 and bvr(1, s, d) == 0.0

    def test_singleton_example(self):
        d = DataMatrix([[0.0], [2.5], [3.5]])
        s = ClusterState(np.array([[0.5], [2.0]]), np.array([0, 1, 1]), np.array([1, 2]))
        # (0.5)^2 / (2/2)^2
        assert bvr(0, s, d) == pytest.approx(0.25)

    def test_zero_variance(self):
        d = DataMatrix([[1.0], [1.0], [5.0]])
        s = ClusterState(np.array([[1.5], [5.0]]), np.array([0, 0, 1]), np.array([2, 1]))
        assert bvr(0, s, d) == np.inf

    def test_vectorized_agrees(self):
        rng = np.random.default_rng(7)
        d = DataMatrix(rng.normal(size=(30, 2)))
        assignment = np.concatenate([np.arange(8), rng.integers(0, 8, 22)])
        sizes = np.bincount(assignment)
        s = ClusterState(rng.normal(size=(8, 2)), assignment, sizes)
        ref = [bvr(k, s, d) for k in range(8)]
        np.testing.assert_allclose(bvr_all(s, d), ref, rtol=1e-10)


class TestRunPath:
    def test_two_points_are_degenerate(self):
        with pytest.raises(DegenerateDataError):
            run_path(DataMatrix([[0.0], [1.0]]), PathConfig(omega=0.5))

    def test_two_pairs_end_at_grand_mean(self):
        d = DataMatrix([[0.0, 0.0], [3.0, 4.0], [0.1, 0.0], [3.0, 4.2]])
        path = run_path(d, PathConfig(omega=0.75, tau=0.25, grid_size=10))
        pairs = [s.state.assignment for s in path.solutions if s.k_total == 2]
        assert pairs and all(a[0] == a[2] != a[1] == a[3] for a in pairs)
        last = path.solutions[-1]
        assert last.k_total == 1
        np.testing.assert_allclose(last.state.centers[0], d.values.mean(axis=0))

    def test_path_invariants(self):
        rng = np.random.default_rng(11)
        y = np.concatenate([rng.normal(c, 0.3, size=(15, 2)) for c in (-4, 0, 4)])
        path = run_path(DataMatrix(y), PathConfig(omega=0.5, grid_size=20))
        ks = [s.k_total for s in path.solutions]
        assert ks[-1] == 1
        assert all(b <= a for a, b in zip(ks, ks[1:]))
        z = [max_penalty(s.params) for s in path.solutions]
        assert all(b >= a * (1 - 1e-12) for a, b in zip(z, z[1:]))
        for a, b in zip(path.solutions, path.solutions[1:]):
            if a.params.delta == b.params.delta:
                assert b.params.eta >= a.params.eta
            if a.bvr_triggered:
                assert b.params.delta < a.params.delta
        assert any(s.k_clust == 3 for s in path.solutions)

    def test_distinct_keeps_first(self):
        rng = np.random.default_rng(2)
        path = run_path(DataMatrix(rng.normal(size=(20, 2))), PathConfig(omega=0.5))
        keys = [(s.k_total, s.state.assignment.tobytes()) for s in path.distinct()]
        assert len(keys) == len(set(keys))
        assert path.distinct()[0] is path.solutions[0]

    def test_splits_off_is_default_pipeline(self):
        rng = np.random.default_rng(4)
        d = DataMatrix(rng.normal(size=(25, 2)))
        a = run_path(d, PathConfig(omega=0.5))
        b = run_path(d, PathConfig(omega=0.5, allow_splits=False))
        assert len(a) == len(b)
        for x, y in zip(a.solutions, b.solutions):
            np.testing.assert_array_equal(x.state.centers, y.state.centers)

    def test_splits_enabled_reaches_one_cluster(self):
        rng = np.random.default_rng(4)
        d = DataMatrix(rng.normal(size=(25, 2)))
        path = run_path(d, PathConfig(omega=0.5, allow_splits=True))
        assert path.solutions[-1].k_total == 1
