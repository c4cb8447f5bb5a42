"""Exact linear matcher, greedy neighborhood matcher, exhaustive search."""

import numpy as np
import pytest

from cgalign import (BpConfig, Mapping, SearchSpaceError, brute_force_optimum,
                     build_problem, generate_graph, nap_objective,
                     node_weight_map, solve_mcs_greedy, solve_mwm, solve_nap)
from cgalign import SimilarityConfig, build_similarity_matrix

from conftest import dense_sim, make_graph


def mwm_value(weights, mapping):
    return sum(weights[pair] for pair in mapping.pairs)


def exhaustive_mwm(weights):
    """Best total weight over every injective subset of the given pairs."""
    items = sorted(weights)
    best = [0.0]

    def rec(k, used_rows, used_cols, acc):
        best[0] = max(best[0], acc)
        for t in range(k, len(items)):
            i, j = items[t]
            if i in used_rows or j in used_cols:
                continue
            rec(t + 1, used_rows | {i}, used_cols | {j}, acc + weights[items[t]])

    rec(0, frozenset(), frozenset(), 0.0)
    return best[0]


def test_mwm_simple_instance():
    weights = {(0, 0): 1.0, (0, 1): 0.2, (1, 1): 1.0}
    m = solve_mwm(weights)
    assert m.sorted_pairs() == [(0, 0), (1, 1)]
    assert mwm_value(weights, m) == pytest.approx(2.0)


def test_mwm_all_negative_returns_empty():
    assert solve_mwm({(0, 0): -1.0, (1, 1): -0.5}) == Mapping.empty()


def test_mwm_negative_cell_does_not_distort_assignment():
    # a negative pair must behave exactly like an absent pair
    weights = {(0, 0): -0.2, (1, 1): 0.9, (0, 1): 0.8}
    m = solve_mwm(weights)
    assert m.sorted_pairs() == [(1, 1)]
    assert mwm_value(weights, m) == pytest.approx(0.9)


def test_mwm_empty_input():
    assert solve_mwm({}) == Mapping.empty()


def test_mwm_matches_exhaustive_on_random_instances():
    rng = np.random.default_rng(51)
    for _ in range(50):
        weights = {}
        for i in range(6):
            for j in range(6):
                if rng.random() < 0.7:
                    weights[(i, j)] = float(rng.uniform(-1.0, 1.0))
        m = solve_mwm(weights)
        assert mwm_value(weights, m) == pytest.approx(exhaustive_mwm(weights), abs=1e-9)


def path_pair():
    a = make_graph(3, edges=[(0, 1), (1, 2)], name="A")
    b = make_graph(3, edges=[(0, 1), (1, 2)], name="B")
    return a, b


def test_mcs_identity_on_matching_paths():
    a, b = path_pair()
    sim = dense_sim([[0.9, 0.2, 0.1], [0.2, 0.9, 0.2], [0.1, 0.2, 0.9]])
    p = build_problem(sim, a, b)
    m = solve_mcs_greedy(p, a, b)
    assert m.sorted_pairs() == [(0, 0), (1, 1), (2, 2)]


def test_mcs_without_edges_degenerates_to_mwm():
    a = make_graph(3, name="A")
    b = make_graph(3, name="B")
    sim = dense_sim([[0.9, 0.2, 0.1], [0.2, 0.9, 0.2], [0.1, 0.2, 0.9]])
    p = build_problem(sim, a, b)
    assert solve_mcs_greedy(p, a, b) == solve_mwm(node_weight_map(p))


def test_mcs_local_choice_can_lose_to_global_optimum():
    # strong decoys adjacent to the best seed pull the greedy expansion away
    # from the aligned paths; exhaustive search and message passing stay on it
    a, b = path_pair()
    sim = dense_sim([[0.10, 0.00, 0.80],
                     [0.00, 0.90, 0.00],
                     [0.85, 0.00, 0.10]])
    p = build_problem(sim, a, b, alpha=0.25)
    v_mcs = nap_objective(p, solve_mcs_greedy(p, a, b))
    bf_mapping, v_bf = brute_force_optimum(p)
    bp_mapping, _ = solve_nap(p, BpConfig())
    assert bf_mapping.sorted_pairs() == [(0, 0), (1, 1), (2, 2)]
    assert v_mcs < v_bf - 1e-9
    assert nap_objective(p, bp_mapping) == pytest.approx(v_bf, abs=1e-9)


def test_mcs_k_controls_expansion_radius():
    a, b = path_pair()
    sim = dense_sim([[0.9, 0.2, 0.1], [0.2, 0.9, 0.2], [0.1, 0.2, 0.9]])
    p = build_problem(sim, a, b)
    assert solve_mcs_greedy(p, a, b, k=1) == solve_mcs_greedy(p, a, b, k=2)


def test_brute_force_empty_problem():
    a = make_graph(0, name="A")
    b = make_graph(0, name="B")
    sim = build_similarity_matrix(a, b, SimilarityConfig())
    p = build_problem(sim, a, b)
    mapping, value = brute_force_optimum(p)
    assert mapping == Mapping.empty()
    assert value == 0.0


def test_brute_force_square_instance():
    a = make_graph(2, edges=[(0, 1)], name="A")
    b = make_graph(2, edges=[(0, 1)], name="B")
    sim = dense_sim([[1.0, 0.1], [0.1, 1.0]])
    p = build_problem(sim, a, b, alpha=0.75)
    mapping, value = brute_force_optimum(p)
    assert mapping.sorted_pairs() == [(0, 0), (1, 1)]
    assert value == pytest.approx(1.75, abs=1e-12)


def test_brute_force_beats_random_mappings():
    rng = np.random.default_rng(52)
    a = generate_graph(3, edge_density=0.4, seed=53, name="A")
    b = generate_graph(3, edge_density=0.4, seed=54, name="B")
    sim = build_similarity_matrix(a, b, SimilarityConfig())
    p = build_problem(sim, a, b)
    _, best = brute_force_optimum(p)
    for _ in range(100):
        k = int(rng.integers(0, 4))
        rows = rng.permutation(3)[:k]
        cols = rng.permutation(3)[:k]
        m = Mapping.from_pairs(zip(rows.tolist(), cols.tolist()))
        assert best >= nap_objective(p, m) - 1e-12


def test_brute_force_tie_breaks_lexicographically():
    a = make_graph(2, name="A")
    b = make_graph(2, name="B")
    sim = dense_sim([[0.6, 0.6], [0.6, 0.6]])
    p = build_problem(sim, a, b, alpha=1.0)
    mapping, _ = brute_force_optimum(p)
    assert mapping.sorted_pairs() == [(0, 0), (1, 1)]


def test_brute_force_refuses_oversized_search():
    a = generate_graph(12, edge_density=0.1, seed=55, name="A")
    b = generate_graph(12, edge_density=0.1, seed=56, name="B")
    sim = build_similarity_matrix(a, b, SimilarityConfig())
    p = build_problem(sim, a, b)
    with pytest.raises(SearchSpaceError):
        brute_force_optimum(p)


def test_node_weight_map_round_trip():
    a = make_graph(2, name="A")
    b = make_graph(2, name="B")
    sim = dense_sim([[0.9, 0.1], [0.2, 0.8]])
    p = build_problem(sim, a, b)
    weights = node_weight_map(p)
    assert weights[(0, 0)] == pytest.approx(0.9)
    assert len(weights) == 4
