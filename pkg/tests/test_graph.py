import itertools
import math

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import atlas_connected_graphs
from rankshadow.errors import GraphError
from rankshadow.graph import (
    PatternGraph,
    barvinok_threshold,
    complete_bipartite_partition,
    complete_multipartite_parts,
    connected_components,
    disjoint_clique_packing,
    find_noncyclic_path3,
    find_triangle,
    max_clique,
    max_independent_set,
    mixed_loop_edge,
    two_coloring,
)


@st.composite
def graphs(draw, max_n=9, loops=False):
    n = draw(st.integers(1, max_n))
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + (0 if loops else 1), n + 1)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    return PatternGraph.from_edges(n, chosen)


def to_nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(1, g.n + 1))
    h.add_edges_from((i, j) for i, j in g.edges if i != j)
    return h


def test_edges_are_normalised():
    g = PatternGraph.from_edges(3, [(2, 1), (3, 3)])
    assert g.sorted_edges == ((1, 2), (3, 3))
    assert g.loops == {3}
    assert g.nonloops == {1, 2}
    assert g.has_edge(2, 1) and g.has_edge(1, 2)


@pytest.mark.parametrize(
    "n,edges",
    [(0, []), (2, [(1, 3)]), (2, [(0, 1)]), (3, [(1, 2), (2, 1)]), (2, [("a", 1)])],
)
def test_invalid_graphs_raise(n, edges):
    with pytest.raises(GraphError):
        PatternGraph.from_edges(n, edges)


def test_constructors():
    assert PatternGraph.complete(4).edge_count == 6
    assert PatternGraph.path(4).sorted_edges == ((1, 2), (2, 3), (3, 4))
    assert PatternGraph.cycle(4).edge_count == 4
    k = PatternGraph.complete_multipartite(1, 2, 2)
    assert k.n == 5 and k.edge_count == 8
    assert complete_multipartite_parts(k) == [[1], [2, 3], [4, 5]]
    assert complete_multipartite_parts(PatternGraph.path(4)) is None


def test_induced_relabels_in_sorted_order():
    g = PatternGraph.from_edges(5, [(2, 4), (4, 5), (1, 2), (5, 5)])
    sub, labels = g.induced([5, 4, 2])
    assert labels == (2, 4, 5)
    assert sub.sorted_edges == ((1, 2), (2, 3), (3, 3))


@settings(max_examples=150, deadline=None)
@given(graphs())
def test_components_match_networkx(g):
    comps = connected_components(g)
    expected = sorted(tuple(sorted(c)) for c in nx.connected_components(to_nx(g)))
    assert sorted(comps.blocks) == expected
    assert sum(comps.sizes) == g.n
    for block, sub in zip(comps.blocks, comps.subgraphs):
        assert sub.n == len(block)


@settings(max_examples=150, deadline=None)
@given(graphs())
def test_two_coloring_matches_bipartiteness(g):
    color = two_coloring(g)
    assert (color is not None) == nx.is_bipartite(to_nx(g))
    if color is not None:
        assert all(color[i] != color[j] for i, j in g.edges if i != j)


@settings(max_examples=150, deadline=None)
@given(graphs(max_n=12))
def test_max_clique_and_independent_set_are_optimal(g):
    h = to_nx(g)
    omega = max(len(c) for c in nx.find_cliques(h))
    k, members = max_clique(g)
    assert k == omega and g.is_clique(members)
    alpha = max(len(c) for c in nx.find_cliques(nx.complement(h)))
    k, members = max_independent_set(g)
    assert k == alpha and g.is_independent(members)


def test_greedy_clique_past_exact_limit_is_still_a_clique():
    g = PatternGraph.complete_multipartite(3, 3, 3)
    k, members = max_clique(g, exact_limit=2)
    assert 1 <= k <= 3 and g.is_clique(members)
    k, members = max_independent_set(g, exact_limit=2)
    assert 1 <= k <= 3 and g.is_independent(members)


def test_triangle_and_path_finders():
    assert find_triangle(PatternGraph.complete(4)) == (1, 2, 3)
    assert find_triangle(PatternGraph.cycle(4)) is None
    v1, v2, v3, v4 = find_noncyclic_path3(PatternGraph.path(4))
    g = PatternGraph.path(4)
    assert g.has_edge(v1, v2) and g.has_edge(v2, v3) and g.has_edge(v3, v4) and not g.has_edge(v1, v4)
    assert find_noncyclic_path3(PatternGraph.cycle(4)) is None
    assert find_noncyclic_path3(PatternGraph.complete_multipartite(2, 3)) is None


def test_bipartite_partition_on_known_graphs():
    assert complete_bipartite_partition(PatternGraph.complete_multipartite(2, 3)) == ((1, 2), (3, 4, 5))
    assert complete_bipartite_partition(PatternGraph.path(4)) is None
    assert complete_bipartite_partition(PatternGraph.complete(3)) is None
    assert complete_bipartite_partition(PatternGraph.from_edges(1, [])) == ((1,), ())
    with pytest.raises(GraphError):
        complete_bipartite_partition(PatternGraph.from_edges(2, []))
    with pytest.raises(GraphError):
        complete_bipartite_partition(PatternGraph.from_edges(2, [(1, 1), (1, 2)]))


def test_mixed_loop_edge():
    assert mixed_loop_edge(PatternGraph.from_edges(3, [(1, 1), (2, 2), (1, 2)])) is None
    assert mixed_loop_edge(PatternGraph.from_edges(3, [(2, 3), (3, 3)])) == (1, (3, 2))
    # looped and unlooped vertices in different components do not count
    assert mixed_loop_edge(PatternGraph.from_edges(3, [(1, 1), (2, 3)])) is None


@pytest.mark.parametrize("e,t", [(0, 0), (1, 1), (2, 1), (3, 2), (5, 2), (6, 3), (9, 3), (10, 4), (14, 4)])
def test_threshold_small_values(e, t):
    assert barvinok_threshold(e) == t


@given(st.integers(0, 10**15))
def test_threshold_closed_form_exact(e):
    t = barvinok_threshold(e)
    assert e <= (t + 2) * (t + 1) // 2 - 1
    assert t == 0 or e > (t + 1) * t // 2 - 1
    # float closed form agrees away from the perfect-square boundary
    approx = math.ceil(-1.5 + math.sqrt(9 + 8 * e) / 2)
    assert abs(approx - t) <= 1


def test_threshold_rejects_negative():
    with pytest.raises(ValueError):
        barvinok_threshold(-1)


def _packing_value(cliques):
    return sum(len(c) - 2 for c in cliques)


@pytest.mark.parametrize("g", list(itertools.islice(atlas_connected_graphs(6), 0, None, 7)))
def test_clique_packing_is_optimal(g):
    cliques = disjoint_clique_packing(g)
    assert all(g.is_clique(c) and len(c) >= 3 for c in cliques)
    flat = [v for c in cliques for v in c]
    assert len(flat) == len(set(flat))
    # brute force over all families of disjoint cliques
    h = to_nx(g)
    all_cliques = [
        tuple(sorted(s))
        for c in nx.find_cliques(h)
        for k in range(3, len(c) + 1)
        for s in itertools.combinations(c, k)
    ]
    all_cliques = sorted(set(all_cliques))
    best = 0

    def grow(start, used, value):
        nonlocal best
        best = max(best, value)
        for idx in range(start, len(all_cliques)):
            c = all_cliques[idx]
            if used.isdisjoint(c):
                grow(idx + 1, used | set(c), value + len(c) - 2)

    grow(0, set(), 0)
    assert _packing_value(cliques) == best
