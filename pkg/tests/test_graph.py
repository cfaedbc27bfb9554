import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from digopt.errors import InvalidParameter, NotStronglyConnected
from digopt.graph import (
    Digraph,
    MixingMatrix,
    build_grid,
    build_hub_cycle_matrix,
    build_out_degree_matrix,
    build_ring,
    build_skewed_family,
    complete_digraph,
    directed_cycle,
    hub_cycle_digraph,
    load_edge_list,
    load_matrix_csv,
    perturb_weights,
    save_edge_list,
    save_matrix_csv,
)


def skewed_reference(n, eps):
    """Entrywise reference for the skewed family, written out directly."""
    a = (1.0 + eps) / 2.0
    w = np.zeros((n, n))
    for j in range(n - 1):
        w[0, j] = 1.0 - a
        w[j + 1, j] = a
    w[0, n - 1] = 1.0
    if n == 1:
        w[0, 0] = 1.0
    return w


def test_out_degree_rule_on_directed_cycle():
    W = build_out_degree_matrix(directed_cycle(3))
    for j in range(3):
        col = W.w[:, j]
        assert col[j] == 0.5
        assert col[(j + 1) % 3] == 0.5
        assert np.count_nonzero(col) == 2


def test_out_degree_rule_complete_two_nodes():
    W = build_out_degree_matrix(complete_digraph(2))
    assert np.array_equal(W.w, np.full((2, 2), 0.5))


def test_out_degree_rule_weights_on_hub_cycle():
    # node 0 sends to {1}; interior nodes send to {next, 0}; node n-1 sends to {0}
    g = hub_cycle_digraph(7)
    W = build_out_degree_matrix(g)
    assert W.w[0, 0] == W.w[1, 0] == 0.5
    for j in range(1, 6):
        share = 1.0 / 3.0
        assert W.w[j, j] == share and W.w[j + 1, j] == share and W.w[0, j] == share
    assert W.w[6, 6] == W.w[0, 6] == 0.5
    assert W.is_primitive()


def test_out_degree_requires_strong_connectivity():
    g = Digraph(3, frozenset({(0, 1), (1, 2)}))
    with pytest.raises(NotStronglyConnected):
        build_out_degree_matrix(g)


def test_skewed_family_three_nodes_matches_display():
    W = build_skewed_family(3, 0.0)
    expected = np.array([[0.5, 0.5, 1.0], [0.5, 0.0, 0.0], [0.0, 0.5, 0.0]])
    assert np.array_equal(W.w, expected)


def test_skewed_family_single_node():
    assert np.array_equal(build_skewed_family(1, 0.7).w, np.array([[1.0]]))


@pytest.mark.parametrize("n", range(2, 21))
def test_skewed_family_entrywise_exact(n):
    assert np.array_equal(build_skewed_family(n, 0.0).w, skewed_reference(n, 0.0))


def test_skewed_family_column_sums_exact():
    W = build_skewed_family(4, 0.0)
    assert np.array_equal(W.w.sum(axis=0), np.ones(4))


@pytest.mark.parametrize("eps", [-1.0, 1.0, 1.5])
def test_skewed_family_rejects_bad_eps(eps):
    with pytest.raises(InvalidParameter):
        build_skewed_family(3, eps)


def test_ring_columns_are_two_halves():
    W = build_ring(4)
    for j in range(4):
        assert sorted(W.w[:, j][W.w[:, j] > 0]) == [0.5, 0.5]


def test_grid_is_valid_and_primitive():
    W = build_grid(3, 4)
    assert W.n == 12
    assert np.allclose(W.w.sum(axis=0), 1.0, atol=1e-12)
    assert W.is_primitive()
    assert W.pattern_digraph().is_strongly_connected()


def test_perturb_zero_strength_is_identity():
    W = build_ring(5)
    assert perturb_weights(W, 123, 0.0) is W


def test_perturb_keeps_stochasticity_and_pattern():
    W = build_ring(8)
    P = perturb_weights(W, 42, 0.5)
    assert np.max(np.abs(P.w.sum(axis=0) - 1.0)) <= 1e-12
    assert np.array_equal(P.w > 0, W.w > 0)


def test_perturb_deterministic_in_seed():
    W = build_grid(2, 3)
    assert np.array_equal(perturb_weights(W, 9, 0.3).w, perturb_weights(W, 9, 0.3).w)
    assert not np.array_equal(perturb_weights(W, 9, 0.3).w, perturb_weights(W, 10, 0.3).w)


def test_perturb_rejects_bad_strength():
    W = build_ring(4)
    for s in (-0.1, 1.0, 2.0):
        with pytest.raises(InvalidParameter):
            perturb_weights(W, 0, s)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=2, max_value=30))
def test_builders_column_stochastic(n):
    for W in (build_ring(n), build_skewed_family(n, 0.25), build_out_degree_matrix(complete_digraph(n))):
        assert np.max(np.abs(W.w.sum(axis=0) - 1.0)) <= 1e-12
        assert np.all(W.w >= 0.0)
        assert W.is_primitive()


def test_hub_cycle_matrix_requires_open_interval_weights():
    with pytest.raises(InvalidParameter):
        build_hub_cycle_matrix(4, [0.5, 1.0, 0.5])
    with pytest.raises(InvalidParameter):
        build_hub_cycle_matrix(4, [0.5, 0.5])


def test_mixing_matrix_rejects_bad_input():
    with pytest.raises(InvalidParameter):
        MixingMatrix.from_array(np.array([[0.5, 0.6], [0.5, 0.5]]))
    with pytest.raises(InvalidParameter):
        MixingMatrix.from_array(np.array([[1.5, 0.0], [-0.5, 1.0]]))


def test_digraph_validation_and_dedup():
    g = Digraph(3, frozenset({(0, 1), (0, 1), (1, 1)}))
    assert g.edges == frozenset({(0, 1)})  # duplicate collapsed, self-loop dropped
    with pytest.raises(InvalidParameter):
        Digraph(2, frozenset({(0, 5)}))
    assert Digraph(1).is_strongly_connected()


def test_edge_list_round_trip(tmp_path):
    g = hub_cycle_digraph(5)
    path = tmp_path / "edges.txt"
    save_edge_list(g, path)
    g2 = load_edge_list(path)
    assert g2.n == g.n and g2.edges == g.edges


def test_matrix_csv_round_trip(tmp_path):
    W = perturb_weights(build_ring(6), 3, 0.4)
    path = tmp_path / "w.csv"
    save_matrix_csv(W, path)
    W2 = load_matrix_csv(path)
    assert np.array_equal(W.w, W2.w)  # repr round-trips doubles exactly
