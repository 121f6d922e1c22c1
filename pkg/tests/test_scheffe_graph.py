import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ldpselect import (
    DiscreteDistribution,
    HypothesisSet,
    build_scheffe_graph,
    check_metric_triple,
    check_triangle,
    count_low_indegree,
    find_dominating_set,
    random_hypothesis_set,
    scan_triangles,
    verify_domination,
)
from ldpselect.errors import ArgumentError, ConfigError
from ldpselect.scheffe_graph import (
    DominatingSetCertificate,
    VertexPair,
    all_pairs,
    domination_bound,
    graph_from_json_dict,
    graph_to_json_dict,
    minimum_cover_size,
    pair_count,
    pair_index,
    sample_size,
)

PHI = 1.0 / 6.0


def two_hypotheses():
    return HypothesisSet((DiscreteDistribution(np.array([1.0, 0.0])),
                          DiscreteDistribution(np.array([0.0, 1.0]))))


def duplicate_pair_set():
    """q1 = q2 plus a distinct q3; the {1,2} vertex has zero pair norm."""
    q = DiscreteDistribution(np.array([0.5, 0.5, 0.0]))
    q3 = DiscreteDistribution(np.array([0.0, 0.2, 0.8]))
    return HypothesisSet((q, q, q3))


class TestPairIndexing:
    def test_lexicographic(self):
        k = 5
        pairs = all_pairs(k)
        for vid, (i, j) in enumerate(pairs):
            assert pair_index(int(i), int(j), k) == vid
        assert pair_count(k) == len(pairs)

    def test_vertex_pair_round_trip(self):
        k = 7
        for vid in range(pair_count(k)):
            p = VertexPair.from_vertex_id(vid, k)
            assert p.vertex_id(k) == vid

    def test_vertex_pair_validation(self):
        with pytest.raises(Exception):
            VertexPair(3, 3)
        with pytest.raises(ArgumentError):
            VertexPair(2, 9).vertex_id(k=4)


class TestBuild:
    def test_k2_single_vertex_no_edges(self):
        G = build_scheffe_graph(two_hypotheses(), PHI)
        assert G.num_vertices == 1
        assert G.edge_count == 0

    def test_point_mass_edges(self, point_mass_triple):
        G = build_scheffe_graph(point_mass_triple, PHI)
        # {1,2}->{2,3} carries inner product 2; {1,2}->{1,3} carries 0.
        assert G.has_edge(0, 2)
        assert not G.has_edge(0, 1)
        assert [list(out) for out in G.out_edges] == [[2], [2], [1]]

    def test_duplicate_hypotheses_zero_norm_vertex(self):
        G = build_scheffe_graph(duplicate_pair_set(), PHI)
        v12 = VertexPair(1, 2).vertex_id(3)
        others = [v for v in range(G.num_vertices) if v != v12]
        assert all(G.has_edge(u, v12) for u in others)
        assert G.pair_norms[v12] == 0.0

    def test_phi_validation(self):
        with pytest.raises(ConfigError):
            build_scheffe_graph(two_hypotheses(), 0.0)
        with pytest.raises(ConfigError):
            build_scheffe_graph(two_hypotheses(), 1.5)

    def test_rebuild_reproduces_edges(self):
        Q = random_hypothesis_set(8, 10, seed=3)
        G1 = build_scheffe_graph(Q, PHI)
        G2 = build_scheffe_graph(Q, PHI)
        assert all(np.array_equal(a, b) for a, b in zip(G1.out_edges, G2.out_edges))
        assert np.array_equal(G1.in_degrees, G2.in_degrees)

    def test_self_test_identity(self):
        # each vertex's own Scheffe set recovers its own norm exactly
        Q = random_hypothesis_set(6, 12, seed=11)
        G = build_scheffe_graph(Q, PHI)
        own = np.abs((G.pair_signs.astype(float) * G.pair_deltas).sum(axis=1))
        assert np.allclose(own, G.pair_norms, atol=1e-9)
        positive = G.pair_norms > 0
        assert np.all(own[positive] >= PHI * G.pair_norms[positive] - 1e-12)

    def test_export_round_trip(self):
        Q = random_hypothesis_set(5, 6, seed=13)
        G = build_scheffe_graph(Q, PHI)
        phi, digraph = graph_from_json_dict(graph_to_json_dict(G))
        assert phi == pytest.approx(PHI)
        assert all(np.array_equal(a, b) for a, b in zip(G.out_edges, digraph.out_edges))


class TestDominatingSet:
    def test_k2(self):
        Q = two_hypotheses()
        G = build_scheffe_graph(Q, PHI)
        cert = find_dominating_set(G, Q, seed=0)
        assert cert.dominating_set == (VertexPair(1, 2),)
        assert cert.attempts == 1

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_instances_verified(self, seed):
        Q = random_hypothesis_set(10, 16, seed=seed)
        G = build_scheffe_graph(Q, PHI)
        cert = find_dominating_set(G, Q, seed=seed + 100)
        assert verify_domination(G, cert.dominating_set)
        bound = min(4 * 10 ** 1.5 * math.sqrt(math.log2(10)), pair_count(10))
        assert len(cert.dominating_set) <= bound == 45
        assert set(cert.dominating_set) == set(cert.random_part) | set(cert.low_indegree_part)

    def test_deterministic_in_seed(self):
        Q = random_hypothesis_set(9, 8, seed=5)
        G = build_scheffe_graph(Q, PHI)
        a = find_dominating_set(G, Q, seed=77)
        b = find_dominating_set(G, Q, seed=77)
        assert a.dominating_set == b.dominating_set

    def test_single_vertex_dominates_everything_graph(self):
        # identical hypotheses: every ordered pair is an edge, so any one vertex dominates
        q = DiscreteDistribution(np.array([0.25, 0.75]))
        Q = HypothesisSet((q, q, q))
        G = build_scheffe_graph(Q, PHI)
        assert verify_domination(G, [VertexPair(1, 2)])
        cert = find_dominating_set(G, Q, seed=4)
        assert verify_domination(G, cert.dominating_set)

    def test_mismatched_hypotheses_rejected(self):
        Q = random_hypothesis_set(6, 6, seed=1)
        other = random_hypothesis_set(7, 6, seed=1)
        G = build_scheffe_graph(Q, PHI)
        with pytest.raises(ArgumentError):
            find_dominating_set(G, other, seed=0)

    def test_certificate_round_trip(self, tmp_path):
        Q = random_hypothesis_set(6, 6, seed=2)
        G = build_scheffe_graph(Q, PHI)
        cert = find_dominating_set(G, Q, seed=8)
        path = tmp_path / "cert.json"
        cert.save(path)
        loaded = DominatingSetCertificate.load(path)
        assert loaded.dominating_set == cert.dominating_set
        assert loaded.target_bound == pytest.approx(cert.target_bound)

    def test_size_formulas(self):
        assert sample_size(2) == 1
        assert sample_size(16) == 120  # capped at |V|
        assert domination_bound(16) == 120.0
        assert sample_size(64) == 1255


class TestVerifyDomination:
    def test_full_set_dominates(self, point_mass_triple):
        G = build_scheffe_graph(point_mass_triple, PHI)
        assert verify_domination(G, G.vertices)

    def test_empty_set_fails(self, point_mass_triple):
        G = build_scheffe_graph(point_mass_triple, PHI)
        assert not verify_domination(G, [])

    def test_foreign_vertex_rejected(self, point_mass_triple):
        G = build_scheffe_graph(point_mass_triple, PHI)
        with pytest.raises(ArgumentError):
            verify_domination(G, [VertexPair(2, 5)])

    def test_partial_sets(self, point_mass_triple):
        G = build_scheffe_graph(point_mass_triple, PHI)
        # {1,2} covers only itself and {2,3}; {1,3} stays uncovered
        assert not verify_domination(G, [VertexPair(1, 2)])
        assert verify_domination(G, [VertexPair(1, 2), VertexPair(2, 3)])


class TestTriangles:
    def test_point_mass_triple_labels(self, point_mass_triple):
        G = build_scheffe_graph(point_mass_triple, PHI)
        labels = check_triangle(G, 1, 2, 3)
        assert labels == ("i", "iii")

    def test_duplicate_gives_case_i(self):
        G = build_scheffe_graph(duplicate_pair_set(), PHI)
        assert "i" in check_triangle(G, 1, 2, 3)

    def test_bad_indices(self, point_mass_triple):
        G = build_scheffe_graph(point_mass_triple, PHI)
        with pytest.raises(ArgumentError):
            check_triangle(G, 1, 1, 2)
        with pytest.raises(ArgumentError):
            check_triangle(G, 1, 2, 4)

    @pytest.mark.parametrize("seed,model", [(0, "dirichlet-uniform"), (1, "sparse"),
                                            (2, "point-mass-mixture")])
    def test_no_violations_on_random_sets(self, seed, model):
        Q = random_hypothesis_set(9, 12, seed=seed, model=model)
        G = build_scheffe_graph(Q, PHI)
        assert scan_triangles(G).violations == 0
        for trio in [(1, 2, 3), (2, 5, 9), (4, 7, 8)]:
            assert check_triangle(G, *trio) != ("violation",)

    def test_scan_agrees_with_single_checks(self):
        Q = random_hypothesis_set(6, 5, seed=42)
        G = build_scheffe_graph(Q, PHI)
        scan = scan_triangles(G)
        manual_violations = 0
        for a in range(1, 7):
            for b in range(a + 1, 7):
                for c in range(b + 1, 7):
                    if check_triangle(G, a, b, c) == ("violation",):
                        manual_violations += 1
        assert scan.violations == manual_violations == 0
        assert scan.triples == 20


class TestLowInDegree:
    def test_requires_r_at_least_one(self, point_mass_triple):
        G = build_scheffe_graph(point_mass_triple, PHI)
        with pytest.raises(ArgumentError):
            count_low_indegree(G, 0.5)

    def test_every_vertex_covered_graph(self):
        q = DiscreteDistribution(np.array([0.3, 0.7]))
        Q = HypothesisSet((q, q, q))
        G = build_scheffe_graph(Q, PHI)
        assert count_low_indegree(G, 1.0) == 0

    def test_vacuous_for_large_r(self, point_mass_triple):
        G = build_scheffe_graph(point_mass_triple, PHI)
        r = G.num_vertices + 1
        assert count_low_indegree(G, r) == G.num_vertices

    @pytest.mark.parametrize("r", [1, 2, 4, 8])
    def test_bound_on_random_graph(self, r):
        Q = random_hypothesis_set(10, 20, seed=17)
        G = build_scheffe_graph(Q, PHI)
        assert count_low_indegree(G, r) <= 3 * 10 * r


class TestMetricTriple:
    def test_degenerate_leg_is_short(self):
        assert check_metric_triple(0.0, 1.0, 1.0) == ("short",)

    def test_equilateral_is_long(self):
        assert check_metric_triple(1.0, 1.0, 1.0) == ("long",)

    def test_both_labels_possible(self):
        labels = check_metric_triple(1.2, 3.0, 3.0)
        assert labels == ("short", "long")

    def test_triangle_inequality_enforced(self):
        with pytest.raises(ArgumentError):
            check_metric_triple(3.0, 1.0, 1.0)
        with pytest.raises(ArgumentError):
            check_metric_triple(1.0, -0.5, 1.0)

    @given(st.tuples(st.floats(0, 2), st.floats(0, 2), st.floats(0, 2)).filter(
        lambda t: t[0] <= t[1] + t[2] and t[1] <= t[0] + t[2] and t[2] <= t[0] + t[1]
    ))
    def test_some_label_always_applies(self, triple):
        assert len(check_metric_triple(*triple)) >= 1

    def test_bulk_rejection_sampled_triples(self):
        # 1e5 valid triples, evaluated vectorized against the same predicates
        rng = np.random.default_rng(3141)
        found = 0
        while found < 100_000:
            t = rng.uniform(0, 2, size=(200_000, 3))
            a, b, c = t[:, 0], t[:, 1], t[:, 2]
            ok = (a <= b + c) & (b <= a + c) & (c <= a + b)
            a, b, c = a[ok], b[ok], c[ok]
            short = (a <= b / 2) & (a <= c / 2)
            long_ = (a > b / 3) & (a > c / 3)
            assert np.all(short | long_)
            found += a.size


class TestExactCover:
    def test_point_mass_domination_number(self, point_mass_triple):
        G = build_scheffe_graph(point_mass_triple, PHI)
        assert minimum_cover_size(G) == 2

    def test_single_target(self, point_mass_triple):
        G = build_scheffe_graph(point_mass_triple, PHI)
        assert minimum_cover_size(G, targets=[VertexPair(2, 3)]) == 1

    def test_heuristic_never_beats_exact(self):
        Q = random_hypothesis_set(6, 8, seed=23)
        G = build_scheffe_graph(Q, PHI)
        exact = minimum_cover_size(G)
        cert = find_dominating_set(G, Q, seed=1)
        assert len(cert.dominating_set) >= exact
