import numpy as np
import pytest

from digopt.errors import InvalidWeightSum, ZeroWeight
from digopt.graph import MixingMatrix, build_ring, build_skewed_family, perturb_weights
from digopt.pushsum import push_sum_init, push_sum_step, run_push_sum
from digopt.spectral import equilibrium_vector, skewness_kappa, spectral_gap_beta


def random_case(seed, n=None, d=3):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(2, 21))
    W = perturb_weights(build_ring(n), seed, 0.5)
    z0 = rng.standard_normal((n, d))
    return W, z0


def test_init_identity_reweighting():
    z0 = np.arange(6.0).reshape(3, 2)
    s = push_sum_init(z0)
    assert np.array_equal(s.w, z0)
    assert s.k == 0


def test_init_rejects_bad_weight_sum():
    with pytest.raises(InvalidWeightSum):
        push_sum_init(np.zeros((3, 1)), v0=np.array([1.0, 1.0, 0.5]))
    with pytest.raises(InvalidWeightSum):
        push_sum_init(np.zeros((2, 1)), v0=np.array([3.0, -1.0]))


def test_init_flags_unavailable_rows():
    s = push_sum_init(np.ones((2, 2)), v0=np.array([2.0, 0.0]))
    assert np.all(np.isfinite(s.w[0]))
    assert np.all(np.isnan(s.w[1]))


def test_single_node_is_constant():
    W = MixingMatrix.from_array(np.array([[1.0]]))
    s = push_sum_init(np.array([[3.0, -1.0]]))
    for _ in range(5):
        s = push_sum_step(s, W)
    assert np.array_equal(s.w, np.array([[3.0, -1.0]]))
    assert s.k == 5


def test_identity_matrix_changes_only_counter():
    W = MixingMatrix.from_array(np.eye(4))
    z0 = np.random.default_rng(0).standard_normal((4, 2))
    s0 = push_sum_init(z0)
    s1 = push_sum_step(s0, W)
    assert s1.k == 1
    assert np.array_equal(s1.z, s0.z) and np.array_equal(s1.v, s0.v)


def test_rank_one_matrix_reaches_consensus_in_one_step():
    pi = equilibrium_vector(build_skewed_family(4, 0.0))
    W = MixingMatrix.from_array(np.outer(pi, np.ones(4)))
    z0 = np.random.default_rng(1).standard_normal((4, 3))
    s = push_sum_step(push_sum_init(z0), W)
    zbar = z0.mean(axis=0)
    assert np.max(np.abs(s.w - zbar[None, :])) <= 1e-12


def test_trajectory_matches_matrix_power_oracle():
    W = build_skewed_family(3, 0.0)
    z0 = np.zeros((3, 1))
    z0[0, 0] = 1.0
    s = push_sum_init(z0)
    for k in range(1, 8):
        s = push_sum_step(s, W)
        Pk = np.linalg.matrix_power(W.w, k)
        assert np.max(np.abs(s.z - Pk @ z0)) <= 1e-14
        assert np.max(np.abs(s.v - Pk @ np.ones(3))) <= 1e-14
        assert np.max(np.abs(s.w - (Pk @ z0) / (Pk @ np.ones(3))[:, None])) <= 1e-12


def test_equilibrium_weights_make_reweighting_exact():
    W = build_skewed_family(5, 0.0)
    pi = equilibrium_vector(W)
    rng = np.random.default_rng(7)
    z0 = rng.standard_normal((5, 2))
    s = push_sum_init(z0, v0=5.0 * pi)
    for k in range(1, 12):
        s = push_sum_step(s, W)
        oracle = np.linalg.matrix_power(W.w, k) @ z0 / (5.0 * pi)[:, None]
        assert np.max(np.abs(s.w - oracle)) <= 1e-12
        assert np.max(np.abs(s.v - 5.0 * pi)) <= 1e-12


def test_zero_weight_raise_and_defer():
    W = build_ring(4)
    s = push_sum_init(np.ones((4, 1)), v0=np.array([4.0, 0.0, 0.0, 0.0]))
    with pytest.raises(ZeroWeight):
        push_sum_step(s, W)
    deferred = push_sum_step(s, W, require_w=False)
    assert np.isnan(deferred.w).any() and np.isfinite(deferred.w[1, 0])


def test_run_k0_error_is_initial_spread():
    W, z0 = random_case(3, n=6)
    rows = run_push_sum(W, z0, K=0)
    assert len(rows) == 1
    assert rows[0].consensus_error == pytest.approx(np.linalg.norm(z0 - z0.mean(axis=0)), abs=1e-12)


def test_run_invariant_suite():
    for seed in range(20):
        W, z0 = random_case(seed)
        pi = equilibrium_vector(W)
        kappa = skewness_kappa(pi)
        beta = spectral_gap_beta(W, pi)
        rows = run_push_sum(W, z0, K=120, pi=pi)
        z0_norm = np.linalg.norm(z0)
        # conservation under the hood
        s = push_sum_init(z0)
        col_sums0 = s.z.sum(axis=0)
        for k in range(1, 121):
            s = push_sum_step(s, W)
            assert np.max(np.abs(s.z.sum(axis=0) - col_sums0)) <= 1e-9 * z0_norm
            assert abs(s.v.sum() - W.n) <= 1e-10
        for prev, cur in zip(rows, rows[1:]):
            assert cur.min_ratio >= prev.min_ratio * (1.0 - 1e-12)
            assert cur.max_ratio <= prev.max_ratio * (1.0 + 1e-12)
        for row in rows:
            assert row.vinv_norm <= kappa + 1e-9
            assert row.consensus_error <= kappa**1.5 * beta**row.k * z0_norm + 1e-9


def test_larger_kappa_means_larger_error_area():
    # same gap metric, different skewness: the skewed family versus a
    # doubly-stochastic matrix built to share its beta
    from digopt.harness import hub_cycle_by_metrics

    W_low = hub_cycle_by_metrics(7, 4.0, 10.0)
    W_high = hub_cycle_by_metrics(7, 2000.0, 10.0)
    rng = np.random.default_rng(5)
    z0 = rng.standard_normal((7, 4))
    area_low = sum(r.consensus_error for r in run_push_sum(W_low, z0, K=150))
    area_high = sum(r.consensus_error for r in run_push_sum(W_high, z0, K=150))
    assert area_high > area_low
