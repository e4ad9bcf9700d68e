import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corecluster.core import Partition
from corecluster.expression import ExpressionMatrix
from corecluster.graph import SimilarityMatrix
from corecluster.metrics import (
    AnnotationSet,
    DissimilarityMatrix,
    adjusted_rand,
    dissimilarity_from_similarity,
    dunn,
    fom,
    hypergeom_enrich,
    hypergeom_tail,
    modularity,
    silhouette,
)

from oracles import hypergeom_tail_exact, pair_count_ari, random_similarity


def part(labels):
    labels = np.array(labels)
    return Partition(labels, int(labels.max()))


def dis(entries):
    return DissimilarityMatrix(np.array(entries, dtype=float))


def two_pair_dissimilarity():
    # within-pair distance 0.1, across 0.9
    d = np.full((4, 4), 0.9)
    d[0, 1] = d[1, 0] = 0.1
    d[2, 3] = d[3, 2] = 0.1
    np.fill_diagonal(d, 0.0)
    return dis(d)


def expr(values):
    values = np.array(values, dtype=float)
    n, p = values.shape
    return ExpressionMatrix(
        values,
        np.zeros_like(values, dtype=bool),
        tuple(f"v{j}" for j in range(p)),
        tuple(f"s{i}" for i in range(n)),
    )


class TestDunn:
    def test_two_tight_pairs(self):
        assert dunn(two_pair_dissimilarity(), part([1, 1, 2, 2])) == pytest.approx(9.0)

    def test_single_cluster_rejected(self):
        with pytest.raises(ValueError):
            dunn(two_pair_dissimilarity(), part([1, 1, 1, 1]))

    def test_scale_invariance(self):
        d = two_pair_dissimilarity()
        doubled = dis(d.entries * 2)
        p = part([1, 1, 2, 2])
        assert dunn(d, p) == pytest.approx(dunn(doubled, p))

    def test_all_zero_diameters_is_explicit_error(self):
        d = dis([[0, 0, 0.5, 0.5], [0, 0, 0.5, 0.5], [0.5, 0.5, 0, 0], [0.5, 0.5, 0, 0]])
        with pytest.raises(ZeroDivisionError):
            dunn(d, part([1, 1, 2, 2]))

    def test_unclustered_nodes_excluded(self):
        d = two_pair_dissimilarity()
        with_zero = Partition(np.array([1, 1, 2, 0]), 2)
        # cluster 2 becomes a singleton; pair {0,1} still has diameter 0.1
        assert dunn(d, with_zero) == pytest.approx(9.0)


class TestSilhouette:
    def test_perfectly_placed_node(self):
        values, mean = silhouette(two_pair_dissimilarity(), part([1, 1, 2, 2]))
        assert mean == pytest.approx((0.9 - 0.1) / 0.9)
        assert np.allclose(values, (0.9 - 0.1) / 0.9)

    def test_direct_substitution(self):
        # a_i = 0.1, b_i = 0.9 -> 0.888...
        assert (0.9 - 0.1) / max(0.9, 0.1) == pytest.approx(0.888888888888888, rel=1e-12)

    def test_antisymmetry_when_a_and_b_swap(self):
        d = two_pair_dissimilarity()
        good, _ = silhouette(d, part([1, 1, 2, 2]))
        # regrouping node 0 with the far pair swaps its a and b exactly
        swapped, _ = silhouette(d, part([1, 2, 1, 1]))
        assert swapped[0] == pytest.approx(-good[0])

    def test_values_in_range_and_tight_fixture_high(self):
        d = np.full((4, 4), 0.95)
        d[0, 1] = d[1, 0] = 0.05
        d[2, 3] = d[3, 2] = 0.05
        np.fill_diagonal(d, 0.0)
        values, mean = silhouette(dis(d), part([1, 1, 2, 2]))
        assert np.all(values >= -1) and np.all(values <= 1)
        assert mean > 0.9

    def test_singleton_convention(self):
        d = two_pair_dissimilarity()
        values, _ = silhouette(d, part([1, 1, 2, 3]))
        assert values[2] == 0.0 and values[3] == 0.0


class TestFom:
    def test_constant_clusters_give_zero(self):
        x = expr([[1, 1, 5, 5], [2, 2, 7, 7]])
        assert fom(x, part([1, 1, 2, 2])) == pytest.approx(0.0, abs=1e-12)

    def test_hand_computed_single_cluster(self):
        x = expr([[1, 3]])
        assert fom(x, part([1, 1])) == pytest.approx(1.0)

    def test_non_negative(self):
        rng = np.random.default_rng(4)
        x = expr(rng.normal(size=(6, 10)))
        labels = rng.integers(1, 4, size=10)
        labels[:3] = [1, 2, 3]
        assert fom(x, part(labels)) >= 0.0

    def test_missing_values_rejected(self):
        vals = np.array([[1.0, np.nan], [2.0, 3.0]])
        x = ExpressionMatrix(vals, np.isnan(vals), ("a", "b"), ("s1", "s2"))
        with pytest.raises(ValueError, match="impute"):
            fom(x, part([1, 1]))

    @given(seed=st.integers(0, 500))
    @settings(max_examples=25, deadline=None)
    def test_refining_a_cluster_cannot_increase_fom(self, seed):
        rng = np.random.default_rng(seed)
        x = expr(rng.normal(size=(5, 12)))
        coarse = part([1] * 6 + [2] * 6)
        fine = part([1] * 3 + [3] * 3 + [2] * 6)
        assert fom(x, fine) <= fom(x, coarse) + 1e-12


class TestModularity:
    def test_single_cluster_is_zero(self):
        w = SimilarityMatrix(random_similarity(6, 8))
        assert modularity(w, part([1] * 6)) == pytest.approx(0.0, abs=1e-12)

    def test_two_disconnected_cliques(self):
        a = np.zeros((6, 6))
        for block in (range(3), range(3, 6)):
            for i in block:
                for j in block:
                    if i != j:
                        a[i, j] = 0.5
        w = SimilarityMatrix(a)
        assert modularity(w, part([1, 1, 1, 2, 2, 2])) == pytest.approx(0.5, abs=1e-12)

    def test_always_below_one_and_scale_free(self):
        for seed in range(5):
            a = random_similarity(8, seed)
            w = SimilarityMatrix(a)
            labels = part(np.random.default_rng(seed).integers(1, 4, 8).tolist())
            try:
                q = modularity(w, labels)
            except ValueError:
                continue
            assert q < 1.0
            assert modularity(SimilarityMatrix(a * 0.5), labels) == pytest.approx(q)

    def test_empty_graph_error(self):
        w = SimilarityMatrix(np.zeros((3, 3)))
        with pytest.raises(ValueError):
            modularity(w, part([1, 1, 2]))


class TestAdjustedRand:
    def test_identical_partitions(self):
        p = part([1, 1, 2, 2, 3])
        assert adjusted_rand(p, p) == 1.0

    def test_one_cluster_vs_singletons(self):
        a = part([1, 1, 1, 1])
        b = part([1, 2, 3, 4])
        assert adjusted_rand(a, b) == pytest.approx(0.0, abs=1e-12)

    def test_symmetry(self):
        a = part([1, 1, 2, 2, 3, 3])
        b = part([1, 2, 2, 3, 3, 3])
        assert adjusted_rand(a, b) == pytest.approx(adjusted_rand(b, a))

    def test_mismatched_sizes_rejected(self):
        with pytest.raises(ValueError):
            adjusted_rand(part([1, 2]), part([1, 2, 2]))

    def test_label_permutation_invariance(self):
        a = part([1, 1, 2, 2, 3, 3])
        b = part([3, 3, 1, 1, 2, 2])
        assert adjusted_rand(a, b) == 1.0

    def test_drop_vs_class_modes(self):
        a = Partition(np.array([0, 1, 1, 2, 2]), 2)
        b = Partition(np.array([1, 1, 1, 2, 2]), 2)
        assert adjusted_rand(a, b, "drop") == 1.0
        assert adjusted_rand(a, b, "class") < 1.0

    @given(seed=st.integers(0, 2000), p=st.integers(2, 25))
    @settings(max_examples=80, deadline=None)
    def test_matches_pair_counting_oracle(self, seed, p):
        rng = np.random.default_rng(seed)
        a = np.unique(rng.integers(1, 5, p), return_inverse=True)[1] + 1
        b = np.unique(rng.integers(1, 5, p), return_inverse=True)[1] + 1
        pa = Partition(a, int(a.max()))
        pb = Partition(b, int(b.max()))
        assert adjusted_rand(pa, pb) == pytest.approx(pair_count_ari(a, b), abs=1e-12)


class TestHypergeom:
    def test_zero_overlap_tail_is_one(self):
        assert hypergeom_tail(0, 10, 0, 5) == 1.0

    def test_full_overlap_combinatorial_value(self):
        assert hypergeom_tail(5, 10, 5, 5) == pytest.approx(1 / 252, rel=1e-12)

    @given(
        universe=st.integers(1, 30),
        data=st.data(),
    )
    @settings(max_examples=80, deadline=None)
    def test_matches_exact_rational(self, universe, data):
        term = data.draw(st.integers(0, universe))
        cluster = data.draw(st.integers(0, universe))
        overlap = data.draw(st.integers(0, min(term, cluster)))
        got = hypergeom_tail(overlap, universe, term, cluster)
        want = float(hypergeom_tail_exact(overlap, universe, term, cluster))
        assert got == pytest.approx(want, rel=1e-10, abs=1e-300)


class TestEnrichment:
    def annotations(self):
        universe = frozenset(f"g{i}" for i in range(10))
        terms = {
            "T1": frozenset({"g0", "g1", "g2", "g3", "g4"}),
            "T2": frozenset({"g5", "g6"}),
        }
        return AnnotationSet(universe, terms)

    def ids(self):
        return [f"g{i}" for i in range(10)]

    def test_fully_overlapping_cluster(self):
        labels = part([1, 1, 1, 1, 1, 2, 2, 2, 2, 2])
        rows = hypergeom_enrich(labels, self.ids(), self.annotations(), alpha=0.05)
        top = rows[0]
        assert top.cluster_id == 1 and top.term_id == "T1"
        # 4 tests total (2 clusters x 2 terms)
        assert top.p_adjusted == pytest.approx(min(1.0, (1 / 252) * 4), rel=1e-12)
        assert top.significant

    def test_bonferroni_cap_at_one(self):
        labels = part([1, 1, 1, 1, 1, 2, 2, 2, 2, 2])
        rows = hypergeom_enrich(labels, self.ids(), self.annotations(), alpha=1.0)
        assert all(r.p_adjusted <= 1.0 for r in rows)
        assert all(r.p_adjusted == pytest.approx(min(1.0, r.p_raw * 4)) for r in rows)

    def test_unknown_ids_rejected(self):
        labels = part([1, 1])
        with pytest.raises(ValueError, match="missing from the annotation universe"):
            hypergeom_enrich(labels, ["zz", "g0"], self.annotations())

    def test_rows_sorted_by_raw_p_within_cluster(self):
        labels = part([1, 1, 1, 1, 1, 2, 2, 2, 2, 2])
        rows = hypergeom_enrich(labels, self.ids(), self.annotations(), alpha=1.0)
        for k in (1, 2):
            ps = [r.p_raw for r in rows if r.cluster_id == k]
            assert ps == sorted(ps)

    def test_alpha_validated(self):
        with pytest.raises(ValueError):
            hypergeom_enrich(part([1, 1]), ["g0", "g1"], self.annotations(), alpha=0.0)


class TestDissimilarityHelpers:
    def test_from_similarity(self):
        w = SimilarityMatrix(random_similarity(5, 2))
        d = dissimilarity_from_similarity(w)
        assert np.allclose(d.entries + w.entries + np.eye(5) * -0.0, 1.0 - np.eye(5))

    def test_validation(self):
        with pytest.raises(ValueError):
            DissimilarityMatrix(np.array([[0.0, -0.1], [-0.1, 0.0]]))
