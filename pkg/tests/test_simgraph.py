from __future__ import annotations

import numpy as np
import pytest

from framerank.features import FeatureVector, COLOR_DIMS, EDGE_DIMS
from framerank.simgraph import (
    SimilarityGraph,
    build_graph,
    distance_matrix,
    row_normalize,
)


def random_vectors(rng, n, dim=336):
    return [rng.random(dim) for _ in range(n)]


def test_distance_matrix_identical_vectors():
    v = np.full(336, 0.25)
    dm = distance_matrix([v, v, v])
    assert np.all(dm == 0.0)


def test_distance_matrix_single_vector():
    dm = distance_matrix([np.zeros(336)])
    assert dm.shape == (1, 1)
    assert dm[0, 0] == 0.0


def test_distance_matrix_matches_double_loop_oracle():
    rng = np.random.default_rng(3)
    vecs = random_vectors(rng, 3)
    dm = distance_matrix(vecs)
    for i in range(3):
        for j in range(3):
            expected = sum(abs(a - b) for a, b in zip(vecs[i], vecs[j]))
            assert dm[i, j] == pytest.approx(expected, abs=1e-12)
    assert np.array_equal(dm, dm.T)
    assert np.all(np.diag(dm) == 0.0)


def test_distance_matrix_accepts_feature_vectors():
    rng = np.random.default_rng(4)
    fvs = [
        FeatureVector(color=rng.random(COLOR_DIMS), edge=rng.random(EDGE_DIMS))
        for _ in range(3)
    ]
    dm = distance_matrix(fvs)
    assert dm[0, 1] == pytest.approx(
        float(np.abs(fvs[0].fused - fvs[1].fused).sum())
    )


def test_identical_frames_give_complete_graph():
    dm = np.zeros((4, 4))
    g = build_graph(dm, 0.5)
    # d_max 0 -> all sims 1, std 0 -> T = 1, ties kept by >=
    assert g.threshold == 1.0
    assert g.edge_count() == 6
    for _, _, sim in g.edges():
        assert sim == 1.0


def test_single_node_graph_has_no_edges():
    g = build_graph(np.zeros((1, 1)), 0.5)
    assert g.n == 1
    assert g.edge_count() == 0
    assert g.threshold is None


def test_two_clusters_stay_separate():
    # cluster {0,1,2} mutually close, cluster {3,4,5} mutually close,
    # clusters far apart; verify edges against a hand-computed threshold
    d_in, d_out = 0.2, 4.0
    dm = np.full((6, 6), d_out)
    for block in ((0, 1, 2), (3, 4, 5)):
        for i in block:
            for j in block:
                dm[i, j] = 0.0 if i == j else d_in
    g = build_graph(dm, 0.5)

    iu, ju = np.triu_indices(6, k=1)
    sims = 1.0 - dm[iu, ju] / d_out
    t = sims.mean() + 0.5 * sims.std()
    assert g.threshold == pytest.approx(t)
    expected = {
        (int(u), int(v)) for u, v, s in zip(iu, ju, sims) if s >= t
    }
    assert {(u, v) for u, v, _ in g.edges()} == expected
    # no inter-cluster edge survives
    for u, v, _ in g.edges():
        assert (u < 3) == (v < 3)


def test_raising_beta_never_adds_edges():
    rng = np.random.default_rng(8)
    vecs = random_vectors(rng, 12)
    dm = distance_matrix(vecs)
    edges_prev = None
    for beta in (0.0, 0.3, 0.6, 1.0, 1.8):
        edges = {(u, v) for u, v, _ in build_graph(dm, beta).edges()}
        if edges_prev is not None:
            assert edges <= edges_prev
        edges_prev = edges


def test_graph_invariants_on_random_input():
    rng = np.random.default_rng(11)
    dm = distance_matrix(random_vectors(rng, 15))
    g = build_graph(dm, 0.5)
    for u, v, sim in g.edges():
        assert u != v
        assert 0.0 < sim <= 1.0
        assert g.has_edge(v, u)
        assert g.sim(u, v) == g.sim(v, u)
        assert sim >= g.threshold


def test_edge_count_invariant_under_relabeling():
    rng = np.random.default_rng(13)
    vecs = random_vectors(rng, 10)
    dm = distance_matrix(vecs)
    perm = rng.permutation(10)
    dm_perm = dm[np.ix_(perm, perm)]
    assert build_graph(dm, 0.5).edge_count() == build_graph(dm_perm, 0.5).edge_count()


def test_row_normalize_uniform_weights():
    g = SimilarityGraph.from_edges(
        6,
        [(0, 1, 0.9), (0, 2, 0.8), (0, 3, 0.7), (0, 4, 0.95)],
    )
    x = row_normalize(g)
    assert np.allclose(x[0, [1, 2, 3, 4]], 0.25)
    assert x[0].sum() == pytest.approx(1.0)
    # isolated node 5 -> zero row
    assert np.all(x[5] == 0.0)
    for u in range(6):
        row_sum = x[u].sum()
        assert row_sum == pytest.approx(1.0) or row_sum == 0.0


def test_from_edges_rejects_bad_weights():
    with pytest.raises(ValueError):
        SimilarityGraph.from_edges(2, [(0, 1, 1.5)])
    with pytest.raises(ValueError):
        SimilarityGraph.from_edges(2, [(0, 0, 0.5)])


def test_subgraph_remaps_nodes_and_keeps_sims():
    g = SimilarityGraph.from_edges(
        5, [(0, 1, 0.9), (1, 2, 0.8), (2, 3, 0.7), (3, 4, 0.6)],
        frame_index_of=[10, 20, 30, 40, 50],
    )
    sub, mapping = g.subgraph([1, 2, 4])
    assert mapping == [1, 2, 4]
    assert sub.frame_index_of == [20, 30, 50]
    assert sub.edge_count() == 1
    assert sub.sim(0, 1) == 0.8


def test_graph_json_shape():
    g = SimilarityGraph.from_edges(3, [(0, 1, 0.9)], threshold=0.5)
    payload = g.to_json()
    assert payload == {"n": 3, "threshold": 0.5, "edges": [[0, 1, 0.9]]}
