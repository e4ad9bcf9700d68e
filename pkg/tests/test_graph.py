import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corecluster.graph import (
    SimilarityMatrix,
    SpanningTree,
    WeightedGraph,
    component_of,
    connected_components,
    load_similarity,
    maximum_spanning_tree,
    save_similarity,
    threshold_graph,
)

from oracles import bottleneck_dp, kruskal_max_tree, random_similarity


def sim(entries, labels=None):
    return SimilarityMatrix(np.array(entries, dtype=float), labels)


def three_node():
    # weights: (0,1)=0.9, (0,2)=0.5, (1,2)=0.2
    return sim([[0, 0.9, 0.5], [0.9, 0, 0.2], [0.5, 0.2, 0]])


class TestSimilarityMatrix:
    def test_rejects_asymmetry(self):
        with pytest.raises(ValueError, match="symmetric"):
            sim([[0, 0.5], [0.4, 0]])

    def test_rejects_nonzero_diagonal(self):
        with pytest.raises(ValueError, match="diagonal"):
            sim([[0.1, 0.5], [0.5, 0]])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            sim([[0, 1.5], [1.5, 0]])

    def test_label_count_checked(self):
        with pytest.raises(ValueError):
            sim([[0, 0.5], [0.5, 0]], labels=("a",))

    def test_entries_read_only(self):
        w = three_node()
        with pytest.raises(ValueError):
            w.entries[0, 1] = 0.3


class TestThresholdGraph:
    def test_lambda_zero_keeps_every_positive_weight(self):
        g = threshold_graph(three_node(), 0.0)
        assert len(g.edges) == 3

    def test_lambda_exceeding_all_but_top(self):
        g = threshold_graph(three_node(), 0.6)
        assert g.edges == ((0, 1, 0.9),)

    def test_lambda_one_empties(self):
        g = threshold_graph(three_node(), 1.0)
        assert g.edges == ()

    def test_out_of_range_lambda(self):
        with pytest.raises(ValueError):
            threshold_graph(three_node(), 1.5)
        with pytest.raises(ValueError):
            threshold_graph(three_node(), -0.1)

    @given(seed=st.integers(0, 500), p=st.integers(3, 10))
    @settings(max_examples=30, deadline=None)
    def test_monotone_in_lambda(self, seed, p):
        w = sim(random_similarity(p, seed))
        lams = sorted(np.random.default_rng(seed).uniform(0, 1, 4))
        prev = None
        for lam in lams:
            edges = {(i, j) for i, j, _ in threshold_graph(w, lam).edges}
            if prev is not None:
                assert edges <= prev
            prev = edges


class TestComponents:
    def test_edgeless_graph_gives_singletons(self):
        g = WeightedGraph(4, ())
        assert connected_components(g) == [
            frozenset({0}),
            frozenset({1}),
            frozenset({2}),
            frozenset({3}),
        ]

    def test_tree_is_one_component(self):
        t = maximum_spanning_tree(sim(random_similarity(8, 3)))
        assert connected_components(t) == [frozenset(range(8))]

    def test_two_components_by_hand(self):
        g = WeightedGraph(5, ((0, 1, 0.5), (1, 2, 0.5), (3, 4, 0.5)))
        assert connected_components(g) == [frozenset({0, 1, 2}), frozenset({3, 4})]

    def test_component_of_singleton(self):
        g = WeightedGraph(4, ())
        assert component_of(g, 2) == frozenset({2})

    def test_component_of_path(self):
        g = WeightedGraph(3, ((0, 1, 0.4), (1, 2, 0.4)))
        assert component_of(g, 1) == frozenset({0, 1, 2})

    def test_component_of_matches_by_hand(self):
        g = WeightedGraph(6, ((0, 1, 0.4), (3, 4, 0.4)))
        assert component_of(g, 4) == frozenset({3, 4})

    def test_component_of_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            component_of(WeightedGraph(3, ()), 5)


class TestMaximumSpanningTree:
    def test_input_already_a_tree(self):
        w = sim([[0, 0.9, 0], [0.9, 0, 0.8], [0, 0.8, 0]])
        t = maximum_spanning_tree(w)
        assert t.edges == ((0, 1, 0.9), (1, 2, 0.8))

    def test_triangle_drops_weakest(self):
        # enumerating the three spanning trees: {ab, bc} has the top total
        w = sim([[0, 0.9, 0.2], [0.9, 0, 0.8], [0.2, 0.8, 0]])
        t = maximum_spanning_tree(w)
        assert {(i, j) for i, j, _ in t.edges} == {(0, 1), (1, 2)}

    def test_matches_kruskal_oracle_on_complete_graph(self):
        for seed in range(20):
            a = random_similarity(6, seed)
            t = maximum_spanning_tree(sim(a))
            assert {(i, j) for i, j, _ in t.edges} == kruskal_max_tree(a)

    def test_disconnected_rejected_with_component_count(self):
        a = np.zeros((4, 4))
        a[0, 1] = a[1, 0] = 0.5
        a[2, 3] = a[3, 2] = 0.5
        with pytest.raises(ValueError, match="2 components"):
            maximum_spanning_tree(sim(a))

    def test_single_node(self):
        t = maximum_spanning_tree(sim([[0.0]]))
        assert t.p == 1 and t.edges == ()

    @given(seed=st.integers(0, 1000), p=st.integers(2, 15))
    @settings(max_examples=40, deadline=None)
    def test_tree_shape(self, seed, p):
        t = maximum_spanning_tree(sim(random_similarity(p, seed)))
        assert len(t.edges) == p - 1
        assert len(connected_components(t)) == 1

    @given(seed=st.integers(0, 1000), p=st.integers(2, 12))
    @settings(max_examples=25, deadline=None)
    def test_bottleneck_property(self, seed, p):
        a = random_similarity(p, seed)
        t = maximum_spanning_tree(sim(a))
        cap = bottleneck_dp(a)
        mins = _tree_path_minima(t)
        for u in range(p):
            for v in range(u + 1, p):
                assert mins[u][v] == pytest.approx(cap[u, v], abs=0)

    @given(seed=st.integers(0, 1000), p=st.integers(3, 12))
    @settings(max_examples=25, deadline=None)
    def test_threshold_components_preserved_by_tree(self, seed, p):
        a = random_similarity(p, seed)
        w = sim(a)
        tree_w = maximum_spanning_tree(w).to_similarity()
        weights = sorted({a[i, j] for i in range(p) for j in range(i + 1, p)})
        for lam in weights:
            full = connected_components(threshold_graph(w, lam))
            pruned = connected_components(threshold_graph(tree_w, lam))
            assert full == pruned


def _tree_path_minima(tree: SpanningTree):
    """Minimum edge weight along the unique tree path, for all pairs."""
    p = tree.p
    adj = [[] for _ in range(p)]
    for i, j, w in tree.edges:
        adj[i].append((j, w))
        adj[j].append((i, w))
    out = [[0.0] * p for _ in range(p)]
    for s in range(p):
        stack = [(s, np.inf)]
        seen = {s}
        while stack:
            u, m = stack.pop()
            out[s][u] = m
            for v, w in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append((v, min(m, w)))
    return out


class TestSimilarityIO:
    def test_round_trip_with_labels(self, tmp_path):
        w = sim(random_similarity(5, 9), labels=tuple("abcde"))
        path = tmp_path / "w.tsv"
        save_similarity(w, path)
        back = load_similarity(path)
        assert back.labels == w.labels
        np.testing.assert_array_equal(back.entries, w.entries)

    def test_round_trip_headerless(self, tmp_path):
        w = sim(random_similarity(4, 2))
        path = tmp_path / "w.tsv"
        save_similarity(w, path)
        back = load_similarity(path)
        assert back.labels is None
        np.testing.assert_array_equal(back.entries, w.entries)

    def test_asymmetric_file_names_indices(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("0\t0.5\n0.4\t0\n")
        with pytest.raises(ValueError, match="row 0, column 1"):
            load_similarity(path)

    def test_non_numeric_cell_names_line(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("0\t0.5\nx\t0\n")
        with pytest.raises(ValueError, match="line 2"):
            load_similarity(path)

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("0\t0.5\n0.5\n")
        with pytest.raises(ValueError, match="line 2"):
            load_similarity(path)
