import pytest
from hypothesis import given

from oracles import brute_cliques
from strategies import kpartite_graphs
from tilekit.cliques import CapacityError, cliques_through_vertex, enumerate_transversal_cliques
from tilekit.graphcore import KPartiteGraph, VertexRef, catlin_graph


def test_complete_count():
    assert len(enumerate_transversal_cliques(KPartiteGraph.complete(3, 3))) == 27


def test_catlin_cliques_match_brute_force():
    g = catlin_graph(3, 3)
    got = [tuple(map(tuple, c.vertices)) for c in enumerate_transversal_cliques(g)]
    assert got == brute_cliques(g)
    assert len(got) == 8
    columns = sorted(c.indices for c in enumerate_transversal_cliques(g))
    assert (2, 2, 2) in columns and (3, 3, 3) in columns
    multisets = sorted(tuple(sorted(c)) for c in columns)
    assert multisets.count((1, 2, 2)) == 3 and multisets.count((1, 3, 3)) == 3


def test_empty_graph():
    assert enumerate_transversal_cliques(KPartiteGraph.empty(3, 3)) == []


def test_cap():
    with pytest.raises(CapacityError):
        enumerate_transversal_cliques(KPartiteGraph.complete(3, 3), cap=26)


def test_through_vertex_examples():
    g = KPartiteGraph.complete(3, 3)
    cl = enumerate_transversal_cliques(g)
    assert len(cliques_through_vertex(g, (2, 2), cl)) == 9
    c = catlin_graph(3, 3)
    cc = enumerate_transversal_cliques(c)
    through = cliques_through_vertex(c, (1, 1), cc)
    assert sorted(t.indices for t in through) == [(1, 2, 2), (1, 3, 3)]
    lonely = KPartiteGraph.new_balanced(3, 2, [((1, 1), (2, 1)), ((1, 1), (3, 1)), ((2, 1), (3, 1))])
    assert cliques_through_vertex(lonely, (1, 2), enumerate_transversal_cliques(lonely)) == []


@given(kpartite_graphs())
def test_enumeration_matches_oracle(g):
    got = [tuple(map(tuple, c.vertices)) for c in enumerate_transversal_cliques(g)]
    assert got == brute_cliques(g)


@given(kpartite_graphs())
def test_double_counting(g):
    cl = enumerate_transversal_cliques(g)
    total = sum(len(cliques_through_vertex(g, v, cl)) for v in g.vertices())
    assert total == g.k * len(cl)


@given(kpartite_graphs())
def test_order_is_stable(g):
    a = [c.to_list() for c in enumerate_transversal_cliques(g)]
    b = [c.to_list() for c in enumerate_transversal_cliques(KPartiteGraph.from_json(g.to_json()))]
    assert a == b
    assert a == sorted(a)


def test_clique_membership():
    c = enumerate_transversal_cliques(KPartiteGraph.complete(2, 1))[0]
    assert VertexRef(1, 1) in c and (2, 1) in c and (2, 2) not in c
