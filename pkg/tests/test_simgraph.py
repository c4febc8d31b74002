import math

import numpy as np
import pytest

from oracles import graph_edges, planted_groups, reference_graph_edges
from vec2gc import (
    EmbeddingSet,
    SimilarityGraph,
    build_graph,
    cosine_similarity,
    edge_weight,
    induced_subgraph,
    write_edges_tsv,
)


def random_embeddings(rng, n, d):
    return EmbeddingSet(
        ids=[f"v{i}" for i in range(n)],
        vectors=rng.standard_normal((n, d)).astype(np.float32),
    )


class TestCosineSimilarity:
    def test_orthogonal(self):
        assert cosine_similarity([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_parallel_scale_invariant(self):
        assert cosine_similarity([2.0, 0.0], [5.0, 0.0]) == 1.0

    def test_45_degrees(self):
        cs = cosine_similarity([1.0, 1.0], [1.0, 0.0])
        # independent hand oracle: dot / (|a||b|)
        ref = 1.0 / (math.sqrt(2.0) * 1.0)
        assert abs(cs - 0.7071067811865475) < 1e-15
        assert abs(cs - ref) < 1e-15

    def test_zero_norm_rejected(self):
        with pytest.raises(ValueError, match="zero-norm"):
            cosine_similarity([0.0, 0.0], [1.0, 0.0])

    def test_clamped_into_unit_interval(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            a = rng.standard_normal(6)
            b = rng.standard_normal(6)
            assert -1.0 <= cosine_similarity(a, b) <= 1.0


class TestEdgeWeight:
    def test_worked_anchors(self):
        assert edge_weight(0.9, 0.5) == pytest.approx(10.0, rel=1e-14)
        assert edge_weight(0.95, 0.5) == pytest.approx(20.0, rel=1e-13)

    def test_below_threshold_is_zero(self):
        assert edge_weight(0.4, 0.5) == 0.0

    def test_cap_at_identical_vectors(self):
        assert edge_weight(1.0, 0.5) == 1e9

    def test_lower_bound_at_threshold(self):
        theta = 0.5
        assert edge_weight(theta, theta) >= 1.0 / (1.0 - theta)

    def test_monotone_in_similarity(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            cs1, cs2 = sorted(rng.uniform(-1.0, 1.0, size=2))
            assert edge_weight(cs1, 0.3) <= edge_weight(cs2, 0.3)

    def test_separability_stretches_gaps(self):
        # for cs1 < cs2 both above a non-negative threshold with weights
        # beyond 1, the weight gap exceeds the similarity gap
        rng = np.random.default_rng(12)
        for _ in range(500):
            theta = rng.uniform(0.05, 0.9)
            cs1, cs2 = np.sort(rng.uniform(theta, 0.999, size=2))
            if cs1 == cs2:
                continue
            w1, w2 = edge_weight(cs1, theta), edge_weight(cs2, theta)
            if w1 > 1.0:
                assert (w2 - w1) > (cs2 - cs1)

    def test_theta_validation(self):
        with pytest.raises(ValueError, match=r"theta out of \[0, 1\)"):
            edge_weight(0.5, 1.0 - 1e-12)
        with pytest.raises(ValueError, match=r"theta out of \[0, 1\)"):
            edge_weight(0.5, -0.1)
        with pytest.raises(ValueError, match=r"theta out of \[0, 1\)"):
            edge_weight(0.5, 1.2)


class TestBuildGraph:
    def test_three_identical_unit_vectors(self):
        emb = EmbeddingSet(ids=["a", "b", "c"], vectors=np.array([[1.0, 0.0]] * 3, dtype=np.float32))
        g = build_graph(emb, 0.9)
        assert graph_edges(g) == {(0, 1): 1e9, (0, 2): 1e9, (1, 2): 1e9}
        assert g.total_weight == 3e9

    def test_single_edge_and_isolated_node(self):
        emb = EmbeddingSet(
            ids=["a", "b", "c"],
            vectors=np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]], dtype=np.float32),
        )
        g = build_graph(emb, 0.5)
        assert graph_edges(g) == {(0, 2): 1e9}
        assert g.degrees[1] == 0.0

    def test_theta_at_one_rejected(self):
        emb = random_embeddings(np.random.default_rng(0), 20, 8)
        with pytest.raises(ValueError, match=r"theta out of \[0, 1\)"):
            build_graph(emb, 1.0 - 1e-12)
        # a merely-high theta is fine and matches the brute-force oracle
        g = build_graph(emb, 0.999)
        assert graph_edges(g).keys() == reference_graph_edges(emb.vectors, 0.999).keys()

    def test_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(42)
        for n, d, theta in [(30, 8, 0.3), (75, 16, 0.5), (120, 12, 0.2), (200, 24, 0.4)]:
            emb = random_embeddings(rng, n, d)
            ref = reference_graph_edges(emb.vectors, theta)
            got = graph_edges(build_graph(emb, theta))
            assert got.keys() == ref.keys()
            for pair, w in ref.items():
                assert got[pair] == pytest.approx(w, rel=1e-12)

    def test_thread_counts_give_identical_graphs(self):
        rng = np.random.default_rng(5)
        emb = random_embeddings(rng, 300, 10)
        base = build_graph(emb, 0.4, threads=1)
        for threads in (2, 4, 0):
            other = build_graph(emb, 0.4, threads=threads)
            assert np.array_equal(base.indptr, other.indptr)
            assert np.array_equal(base.indices, other.indices)
            assert np.array_equal(base.weights, other.weights)

    def test_power_of_two_scaling_is_bit_exact(self):
        rng = np.random.default_rng(6)
        emb = random_embeddings(rng, 60, 8)
        scaled = emb.vectors.copy()
        scaled[7] *= 4.0
        scaled[21] *= 0.25
        scaled[40] *= 2.0
        emb2 = EmbeddingSet(ids=list(emb.ids), vectors=scaled)
        g1 = build_graph(emb, 0.3)
        g2 = build_graph(emb2, 0.3)
        assert np.array_equal(g1.indptr, g2.indptr)
        assert np.array_equal(g1.indices, g2.indices)
        assert np.array_equal(g1.weights, g2.weights)

    def test_structural_invariants(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            emb = random_embeddings(rng, int(rng.integers(5, 80)), 8)
            theta = float(rng.uniform(0.0, 0.8))
            g = build_graph(emb, theta)
            edges = graph_edges(g)
            # symmetry comes with matching weights
            for a in range(g.n):
                nbrs, ws = g.row(a)
                assert a not in nbrs.tolist()
                assert nbrs.tolist() == sorted(nbrs.tolist())
                for b, w in zip(nbrs.tolist(), ws.tolist()):
                    assert edges[(min(a, b), max(a, b))] == w
                    assert w >= 1.0 / (1.0 - theta) - 1e-12
                    assert np.isfinite(w)
                assert g.degrees[a] == pytest.approx(float(ws.sum()), rel=1e-12, abs=1e-300)
            if edges:
                assert sum(g.degrees) == pytest.approx(2.0 * g.total_weight, rel=1e-9)


class TestFromEdgeList:
    def test_round_trip(self):
        g = SimilarityGraph.from_edge_list(4, [(0, 1, 2.0), (2, 3, 1.5)])
        assert graph_edges(g) == {(0, 1): 2.0, (2, 3): 1.5}
        assert g.total_weight == 3.5

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError, match="self-loop"):
            SimilarityGraph.from_edge_list(2, [(0, 0, 1.0)])

    def test_rejects_duplicate_edge(self):
        with pytest.raises(ValueError, match="duplicate edge"):
            SimilarityGraph.from_edge_list(2, [(0, 1, 1.0), (1, 0, 2.0)])


class TestInducedSubgraph:
    def test_keeps_internal_edges_only(self):
        emb, _ = planted_groups([5, 5], intra_cs=0.9)
        g = build_graph(emb, 0.5)
        sub = induced_subgraph(g, [0, 1, 2, 3, 4])
        assert sub.n == 5
        assert sub.edge_count == 10
        full = graph_edges(g)
        for (a, b), w in graph_edges(sub).items():
            assert full[(a, b)] == w

    def test_weights_are_reused_not_recomputed(self):
        emb, _ = planted_groups([4], intra_cs=0.9)
        g = build_graph(emb, 0.5)
        sub = induced_subgraph(g, [1, 2])
        assert sub.theta == g.theta
        assert graph_edges(sub) == {(0, 1): graph_edges(g)[(1, 2)]}


class TestEdgeTsv:
    def test_format(self, tmp_path):
        emb = EmbeddingSet(
            ids=["left", "mid", "right"],
            vectors=np.array([[1.0, 0.0], [1.0, 0.1], [0.0, 1.0]], dtype=np.float32),
        )
        g = build_graph(emb, 0.5)
        path = tmp_path / "edges.tsv"
        write_edges_tsv(g, emb.ids, path)
        lines = path.read_text().splitlines()
        assert len(lines) == g.edge_count
        src, dst, w = lines[0].split("\t")
        assert (src, dst) == ("left", "mid")
        assert float(w) == pytest.approx(graph_edges(g)[(0, 1)], rel=1e-11)
        # 12 significant digits
        assert len(w.replace(".", "").replace("-", "").lstrip("0")) <= 12
