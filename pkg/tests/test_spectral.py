import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from digopt.errors import DimensionMismatch, NoConvergence, NonPositiveEntry
from digopt.graph import (
    MixingMatrix,
    build_grid,
    build_out_degree_matrix,
    build_ring,
    build_skewed_family,
    complete_digraph,
    perturb_weights,
)
from digopt.spectral import (
    equilibrium_profile,
    equilibrium_vector,
    pi_matrix_norm,
    pi_vector_norm,
    sigma_max,
    skewness_kappa,
    spectral_gap_beta,
    two_norm_deviation,
)

SQRT_HALF = np.sqrt(0.5)


def uniform_matrix(n):
    return MixingMatrix.from_array(np.full((n, n), 1.0 / n))


def circulant_doubly_stochastic(n):
    w = np.eye(n) / 3.0
    for j in range(n):
        w[(j + 1) % n, j] += 1.0 / 3.0
        w[(j - 1) % n, j] += 1.0 / 3.0
    return MixingMatrix.from_array(w)


def random_primitive(n, seed):
    builders = [build_ring, lambda m: build_out_degree_matrix(complete_digraph(m))]
    W = builders[seed % 2](n)
    return perturb_weights(W, seed, 0.6)


def test_equilibrium_uniform_for_doubly_stochastic():
    for W in (uniform_matrix(5), circulant_doubly_stochastic(7)):
        pi = equilibrium_vector(W)
        assert np.max(np.abs(pi - 1.0 / W.n)) <= 1e-12


@pytest.mark.parametrize("n,eps", [(3, 0.0), (7, 0.0), (5, -0.4), (6, 0.6)])
def test_equilibrium_skewed_closed_form(n, eps):
    pi = equilibrium_vector(build_skewed_family(n, eps))
    ratio = 2.0 / (1.0 + eps)
    exact = ratio ** np.arange(n - 1, -1.0, -1.0)
    exact /= exact.sum()
    assert np.max(np.abs(pi - exact) / exact) <= 1e-11


def test_equilibrium_matches_dense_solve_on_perturbed_ring():
    W = perturb_weights(build_ring(3), 42, 0.5)
    pi = equilibrium_vector(W)
    # independent oracle: least-squares solve of (W - I) pi = 0, sum pi = 1
    A = np.vstack([W.w - np.eye(3), np.ones(3)])
    oracle, *_ = np.linalg.lstsq(A, np.array([0.0, 0.0, 0.0, 1.0]), rcond=None)
    assert np.max(np.abs(pi - oracle)) <= 1e-9


def test_equilibrium_no_convergence_on_tiny_budget():
    W = build_skewed_family(6, 0.9)
    with pytest.raises(NoConvergence):
        equilibrium_vector(W, tol=1e-14, max_iters=2)


def test_equilibrium_rejects_bad_tol():
    with pytest.raises(NonPositiveEntry):
        equilibrium_vector(uniform_matrix(3), tol=0.0)


def test_pi_norm_of_pi_is_one():
    pi = equilibrium_vector(build_skewed_family(6, 0.0))
    assert pi_vector_norm(pi, pi) == pytest.approx(1.0, abs=1e-12)


def test_pi_norm_uniform_basis_vector():
    n = 9
    pi = np.full(n, 1.0 / n)
    e1 = np.zeros(n)
    e1[0] = 1.0
    assert pi_vector_norm(e1, pi) == pytest.approx(np.sqrt(n), abs=1e-12)


def test_pi_norm_hand_value():
    assert pi_vector_norm([1.0, 2.0], [1.0 / 3.0, 2.0 / 3.0]) == pytest.approx(3.0, abs=1e-12)


def test_pi_norm_errors():
    with pytest.raises(DimensionMismatch):
        pi_vector_norm([1.0, 2.0], [1.0])
    with pytest.raises(NonPositiveEntry):
        pi_vector_norm([1.0], [0.0])


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=2, max_value=12), st.integers(min_value=0, max_value=10**6))
def test_pi_norm_reduces_to_scaled_two_norm_at_uniform(n, seed):
    v = np.random.default_rng(seed).standard_normal(n)
    pi = np.full(n, 1.0 / n)
    assert pi_vector_norm(v, pi) == pytest.approx(np.sqrt(n) * np.linalg.norm(v), rel=1e-12)


@pytest.mark.parametrize("eps", [-0.5, 0.0, 0.5, 0.9])
@pytest.mark.parametrize("n", [3, 7, 15])
def test_beta_skewed_closed_form(n, eps):
    W = build_skewed_family(n, eps)
    assert spectral_gap_beta(W) == pytest.approx(np.sqrt((1.0 + eps) / 2.0), abs=1e-10)


def test_beta_zero_for_rank_one():
    W = uniform_matrix(6)
    assert spectral_gap_beta(W) <= 1e-12


def test_beta_skewed_two_nodes_is_half():
    # the deviation matrix has rank one at n=2, so the norm drops to 1/2;
    # the sqrt(1/2) value starts at n=3 (where mean-zero vectors with a
    # vanishing last coordinate first exist)
    assert spectral_gap_beta(build_skewed_family(2, 0.0)) == pytest.approx(0.5, abs=1e-12)


def test_kappa_values():
    assert skewness_kappa(np.full(4, 0.25)) == 1.0
    assert skewness_kappa([0.7, 0.2, 0.1]) == pytest.approx(7.0, rel=1e-12)
    with pytest.raises(NonPositiveEntry):
        skewness_kappa([0.5, 0.0, 0.5])


@pytest.mark.parametrize("n", [2, 5, 10, 20, 30])
def test_kappa_skewed_doubling(n):
    pi = equilibrium_vector(build_skewed_family(n, 0.0))
    assert skewness_kappa(pi) == pytest.approx(2.0 ** (n - 1), rel=1e-9)


def test_ln_kappa_reporting():
    prof = equilibrium_profile(build_skewed_family(25, 0.0))
    assert prof.ln_kappa_pi == pytest.approx(24.0 * np.log(2.0), rel=1e-9)


def test_two_norm_matches_beta_for_doubly_stochastic():
    W = circulant_doubly_stochastic(8)
    pi = equilibrium_vector(W)
    assert two_norm_deviation(W, pi) == pytest.approx(spectral_gap_beta(W, pi), abs=1e-9)


def test_two_norm_exceeds_one_on_skewed_and_matches_svd():
    W = build_skewed_family(20, 0.0)
    pi = equilibrium_vector(W)
    dev = W.w - np.outer(pi, np.ones(20))
    oracle = np.linalg.svd(dev, compute_uv=False)[0]
    value = two_norm_deviation(W, pi)
    assert value > 1.0
    assert value == pytest.approx(oracle, rel=1e-10)


def test_two_norm_zero_at_fixed_point():
    pi = equilibrium_vector(build_skewed_family(5, 0.0))
    W = MixingMatrix.from_array(np.outer(pi, np.ones(5)))
    assert two_norm_deviation(W, pi) <= 1e-12


def test_beta_matches_svd_oracle_on_random_matrices():
    for seed in range(25):
        W = random_primitive(3 + seed % 10, seed)
        pi = equilibrium_vector(W)
        root = np.sqrt(pi)
        M = ((W.w - np.outer(pi, np.ones(W.n))) * root[None, :]) / root[:, None]
        oracle = np.linalg.svd(M, compute_uv=False)[0]
        assert spectral_gap_beta(W, pi) == pytest.approx(oracle, rel=1e-9, abs=1e-12)


def test_beta_below_one_over_many_random_primitive_matrices():
    rng = np.random.default_rng(0)
    for trial in range(100):
        n = int(rng.integers(2, 21))
        W = random_primitive(n, trial)
        prof = equilibrium_profile(W)
        assert prof.beta_pi < 1.0
        assert prof.pi.sum() == pytest.approx(1.0, abs=1e-10)
        assert prof.pi.min() > 0.0
        assert np.linalg.norm(W.w @ prof.pi - prof.pi) <= 1e-10
        if abs(prof.kappa_pi - 1.0) <= 1e-9:
            assert prof.two_norm_dev == pytest.approx(prof.beta_pi, abs=1e-9)


def test_pi_matrix_norm_submultiplicative_powers():
    for W in (build_skewed_family(8, 0.0), perturb_weights(build_ring(6), 5, 0.5)):
        pi = equilibrium_vector(W)
        beta = spectral_gap_beta(W, pi)
        dev = W.w - np.outer(pi, np.ones(W.n))
        power = np.eye(W.n)
        for k in range(1, 11):
            power = power @ dev
            assert pi_matrix_norm(power, pi) <= beta**k + 1e-9


def test_sigma_max_on_zero_matrix():
    assert sigma_max(np.zeros((4, 4))) == 0.0
