"""Weighted Canberra similarity and the pruned candidate matrix."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cgalign import (SimilarityConfig, SimilarityMatrix, build_similarity_matrix,
                     canberra_similarity, generate_graph)
from cgalign.similarity import feature_weights

from conftest import make_features, make_graph

finite_feature = st.floats(min_value=0.0, max_value=1e6, allow_nan=False)


def test_identical_vectors_score_one():
    fv = make_features([3, 1, 4, 1, 5, 9])
    assert canberra_similarity(fv, fv) == 1.0


def test_all_zero_vectors_score_one():
    fv = make_features([0, 0, 0, 0, 0, 0], blocks=0, jumps=0, callers=0,
                       callees=0, max_block=0, max_callers=0, max_callees=0)
    assert canberra_similarity(fv, fv) == 1.0


def test_single_group_golden_value():
    # one weighted group of three slots: content for a 1-class layout
    cfg = SimilarityConfig(content_weight=1.0, topology_weight=0.0,
                           neighborhood_weight=0.0)
    base = make_features([2.0])
    fa = type(base)(content=(1.0, 2.0, 0.0), topology=base.topology,
                    neighborhood=base.neighborhood)
    fb = type(base)(content=(3.0, 2.0, 0.0), topology=base.topology,
                    neighborhood=base.neighborhood)
    expected = 1.0 - (1.0 / 3.0) * (2.0 / 4.0)
    assert canberra_similarity(fa, fb, cfg) == pytest.approx(expected, abs=1e-12)


def test_layout_mismatch_rejected():
    fa = make_features([1, 0, 0, 0, 0, 0])
    fb = make_features([1, 0])
    with pytest.raises(ValueError, match="layout"):
        canberra_similarity(fa, fb)


def test_all_zero_group_weights_rejected():
    with pytest.raises(ValueError, match="group weights"):
        SimilarityConfig(content_weight=0.0, topology_weight=0.0,
                         neighborhood_weight=0.0)


def test_feature_weights_split_evenly():
    w = feature_weights(6, SimilarityConfig())
    assert len(w) == 8 + 4 + 2
    assert np.allclose(w[:8], 23.0 / 8)
    assert np.allclose(w[8:12], 19.0 / 4)
    assert np.allclose(w[12:], 7.0 / 2)


@given(st.lists(finite_feature, min_size=6, max_size=6),
       st.lists(finite_feature, min_size=6, max_size=6))
def test_similarity_symmetric_and_bounded(counts_a, counts_b):
    fa = make_features(counts_a)
    fb = make_features(counts_b)
    s_ab = canberra_similarity(fa, fb)
    s_ba = canberra_similarity(fb, fa)
    assert s_ab == s_ba
    assert 0.0 <= s_ab <= 1.0


def test_dense_when_unpruned():
    a, b = make_graph(3, name="A"), make_graph(4, name="B")
    sim = build_similarity_matrix(a, b, SimilarityConfig(sparsity_ratio=0.0))
    assert len(sim) == 12
    assert sim.pruned == 0
    assert np.all(sim.scores >= 0.0) and np.all(sim.scores <= 1.0)


def test_two_by_two_unpruned_has_four_entries():
    a, b = make_graph(2, name="A"), make_graph(2, name="B")
    sim = build_similarity_matrix(a, b, SimilarityConfig(sparsity_ratio=0.0))
    assert len(sim) == 4


def test_ten_by_ten_at_ratio_point_nine_keeps_ten():
    a = generate_graph(10, edge_density=0.2, seed=1, name="A")
    b = generate_graph(10, edge_density=0.2, seed=2, name="B")
    sim = build_similarity_matrix(a, b, SimilarityConfig(sparsity_ratio=0.9))
    assert len(sim) == 10
    assert sim.pruned == 90


def test_pruning_drops_lowest_scores():
    a = generate_graph(6, edge_density=0.2, seed=3, name="A")
    b = generate_graph(6, edge_density=0.2, seed=4, name="B")
    full = build_similarity_matrix(a, b, SimilarityConfig(sparsity_ratio=0.0))
    cut = build_similarity_matrix(a, b, SimilarityConfig(sparsity_ratio=0.5))
    assert len(cut) == 36 - 18
    assert min(cut.scores) >= np.sort(full.scores)[17]


@given(st.integers(min_value=0, max_value=100))
def test_pruned_count_arithmetic(percent):
    ratio = percent / 100.0
    a = generate_graph(5, edge_density=0.2, seed=5, name="A")
    b = generate_graph(4, edge_density=0.2, seed=6, name="B")
    sim = build_similarity_matrix(a, b, SimilarityConfig(sparsity_ratio=ratio))
    assert len(sim) == 20 - int(np.floor(ratio * 20))


def test_identical_graphs_diagonal_strictly_best_per_row():
    g = generate_graph(12, edge_density=0.15, seed=7, name="g")
    sim = build_similarity_matrix(g, g, SimilarityConfig())
    dense = sim.to_dense(fill=-1.0)
    for i in range(12):
        row = dense[i].copy()
        diag = row[i]
        row[i] = -np.inf
        assert diag > row.max()


def test_order_bonus_breaks_feature_ties_below_cap():
    # b's two functions have identical features, so only the order bonus can
    # separate the columns of each row
    fv = make_features([5, 5, 5, 5, 5, 5])
    twin = make_features([5, 5, 5, 5, 5, 7])
    a = make_graph(2, features=[twin, twin], name="A")
    b = make_graph(2, features=[fv, fv], name="B")
    flat = build_similarity_matrix(a, b, SimilarityConfig(perturbation_scale=0.0))
    assert len(set(flat.scores.tolist())) == 1
    bumped = build_similarity_matrix(a, b, SimilarityConfig())
    dense = bumped.to_dense()
    assert dense[0, 0] > dense[0, 1]
    assert dense[1, 1] > dense[1, 0]


def test_bonus_capped_at_one():
    fv = make_features([5, 5, 5, 5, 5, 5])
    a = make_graph(1, features=[fv], name="A")
    b = make_graph(1, features=[fv], name="B")
    sim = build_similarity_matrix(a, b, SimilarityConfig())
    assert sim.scores[0] == 1.0


def test_entries_stay_lex_sorted_after_pruning():
    a = generate_graph(7, edge_density=0.2, seed=8, name="A")
    b = generate_graph(7, edge_density=0.2, seed=9, name="B")
    sim = build_similarity_matrix(a, b, SimilarityConfig(sparsity_ratio=0.4))
    keys = sim.flat_keys()
    assert np.all(np.diff(keys) > 0)


def test_lookup_helpers():
    a, b = make_graph(2, name="A"), make_graph(2, name="B")
    sim = build_similarity_matrix(a, b, SimilarityConfig())
    assert sim.contains(0, 1)
    assert sim.get(0, 0) == pytest.approx(sim.to_dense()[0, 0])
    pruned = SimilarityMatrix(n_a=2, n_b=2,
                              rows=np.array([0], dtype=np.int64),
                              cols=np.array([1], dtype=np.int64),
                              scores=np.array([0.5]))
    assert not pruned.contains(1, 0)
    with pytest.raises(KeyError):
        pruned.get(1, 0)


def test_empty_graph_gives_empty_matrix():
    a, b = make_graph(0, name="A"), make_graph(3, name="B")
    sim = build_similarity_matrix(a, b, SimilarityConfig())
    assert len(sim) == 0


def test_deterministic_across_runs():
    a = generate_graph(9, edge_density=0.2, seed=10, name="A")
    b = generate_graph(9, edge_density=0.2, seed=11, name="B")
    one = build_similarity_matrix(a, b, SimilarityConfig(sparsity_ratio=0.3))
    two = build_similarity_matrix(a, b, SimilarityConfig(sparsity_ratio=0.3))
    assert np.array_equal(one.scores, two.scores)
    assert np.array_equal(one.rows, two.rows)
    assert np.array_equal(one.cols, two.cols)
