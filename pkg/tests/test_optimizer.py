import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spcluster import (ClusterState, DataMatrix, PenaltyParams, center_update,
                       merge_threshold, mm_iteration, run_mm)
from spcluster.optimizer import MAX_ITERATIONS


def two_points():
    d = DataMatrix([[0.0], [1.0]])
    return d, ClusterState.singletons(d)


class TestCenterUpdate:
    def test_example(self):
        d, s = two_points()
        # w = (1 - 1/4) / 2 = 0.375
        got = center_update(0, s, d, PenaltyParams(1.0, 4.0))
        assert got[0] == pytest.approx(0.375 / 1.375)

    def test_far_centers_give_mean(self):
        d = DataMatrix([[0.0], [2.0], [10.0]])
        s = ClusterState.from_assignment(d, [0, 0, 1])
        got = center_update(0, s, d, PenaltyParams(1.0, 2.0))
        assert got[0] == 1.0

    def test_single_cluster(self):
        d = DataMatrix([[1.0, 2.0], [3.0, 6.0]])
        s = ClusterState(np.array([[50.0, 50.0]]), np.array([0, 0]), np.array([2]))
        np.testing.assert_array_equal(center_update(0, s, d, PenaltyParams(9.0, 9.0)), [2.0, 4.0])


class TestMMIteration:
    def test_lambda_zero_is_mean_step(self):
        rng = np.random.default_rng(0)
        d = DataMatrix(rng.normal(size=(20, 3)))
        assignment = np.arange(20) % 4
        s = ClusterState(rng.normal(size=(4, 3)), assignment, np.full(4, 5))
        out = mm_iteration(s, d, PenaltyParams(1e-300, 1.0), 1e-9)
        assert out.n_clusters == 4
        np.testing.assert_allclose(out.centers, s.cluster_means(d), atol=1e-12)

    def test_close_singletons_merge_at_midpoint(self):
        d = DataMatrix([[0.0], [1e-6], [5.0]])
        s = ClusterState.singletons(d)
        out = mm_iteration(s, d, PenaltyParams(1e-6, 1.0), 1e-3)
        assert out.n_clusters == 2
        assert out.sizes.tolist() == [2, 1]
        assert out.centers[0, 0] == pytest.approx(0.5e-6, abs=1e-12)

    def test_two_point_half_step(self):
        d, s = two_points()
        # eta = 2 > d = 1; phi = 0.5 -> lam = 2*0.5*2*1 / (0.5*1) = 4
        params = PenaltyParams(4.0, 0.5)
        mu1 = center_update(0, s, d, params)
        assert abs(mu1[0] - 1.0) == pytest.approx(0.5)

    def test_merge_disabled_keeps_k(self):
        d, s = two_points()
        out = mm_iteration(s, d, PenaltyParams(100.0, 100.0), 10.0, merge=False)
        assert out.n_clusters == 2


class TestRunMM:
    def test_converged_state_takes_one_sweep(self):
        d = DataMatrix([[0.0], [1.0], [10.0], [11.0]])
        s = ClusterState.from_assignment(d, [0, 0, 1, 1])
        out, rep = run_mm(s, d, PenaltyParams(1e-12, 1.0), merge_threshold(d))
        assert rep.iterations == 1 and rep.converged
        np.testing.assert_array_equal(out.centers, s.centers)

    def test_two_point_merge(self):
        d, s = two_points()
        delta = 1.0
        params = PenaltyParams((1 + 1 / delta) * 1.0, delta)
        out, rep = run_mm(s, d, params, merge_threshold(d))
        assert out.n_clusters == 1 and rep.converged and rep.merges_performed == 1
        assert out.centers[0, 0] == pytest.approx(0.5, abs=merge_threshold(d).xi)

    def test_duplicate_rows_fused_up_front(self):
        d = DataMatrix([[1.0, 1.0], [1.0, 1.0], [4.0, 0.0]])
        out, rep = run_mm(ClusterState.singletons(d), d, PenaltyParams(0.1, 0.1),
                          merge_threshold(d))
        assert out.n_clusters == 2 and out.sizes.tolist() == [2, 1]

    def test_iteration_cap(self):
        rng = np.random.default_rng(5)
        d = DataMatrix(rng.normal(size=(30, 2)))
        _, rep = run_mm(ClusterState.singletons(d), d, PenaltyParams(0.5, 2.0), 0.0, max_iter=3)
        assert rep.iterations <= 3

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0.05, 3.0), st.floats(0.1, 5.0))
    def test_invariants(self, seed, lam, delta):
        rng = np.random.default_rng(seed)
        d = DataMatrix(rng.normal(size=(25, 3)))
        s = ClusterState.singletons(d)
        xi = merge_threshold(d)
        out, rep = run_mm(s, d, PenaltyParams(lam, delta), xi)
        assert out.sizes.sum() == d.n
        assert out.n_clusters <= s.n_clusters
        assert rep.iterations <= MAX_ITERATIONS
        again, rep2 = run_mm(s, d, PenaltyParams(lam, delta), xi)
        np.testing.assert_array_equal(out.centers, again.centers)
        assert rep == rep2
