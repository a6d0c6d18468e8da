from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from oracles import brute_has_perfect_matching, brute_has_perfect_tiling, edge_set
from strategies import kpartite_graphs
from tilekit.cliques import CapacityError, enumerate_transversal_cliques
from tilekit.errors import ParameterError
from tilekit.fraclp import build_primal_tiling_lp, common_denominator, fractional_tiling_number, solution_from_weights
from tilekit.graphcore import KPartiteGraph, VertexRef, catlin_graph
from tilekit.tiler import (
    Tiling,
    bipartite_perfect_matching,
    hall_violation,
    perfect_clique_tiling,
    perfect_multipartite_tiling,
    tiling_from_fractional,
    verify_tiling,
)


def V(p, i):
    return VertexRef(p, i)


def brute_khk(g, h) -> bool:
    """Perfect K_h^k-tiling existence by trying every way to carve part 1 into h-sets."""
    E = edge_set(g)
    count = g.n // h

    def complete(block):
        return all((u, v) in E for u, v in combinations(block, 2) if u[0] != v[0])

    def rec(free, placed):
        if placed == count:
            return True
        first = min(free[0])
        for rest1 in combinations(sorted(free[0] - {first}), h - 1):
            s1 = (first,) + rest1
            if extend(free, [s1], placed):
                return True
        # the least vertex of part 1 may stay uncovered when h does not divide n
        if len(free[0]) - 1 >= h * (count - placed):
            return rec([free[0] - {first}] + free[1:], placed)
        return False

    def extend(free, sets, placed):
        p = len(sets)
        if p == g.k:
            block = [(q + 1, x) for q, s in enumerate(sets) for x in s]
            if not complete(block):
                return False
            nxt = [f - set(s) for f, s in zip(free, sets)]
            return rec(nxt, placed + 1)
        return any(extend(free, sets + [s], placed) for s in combinations(sorted(free[p]), h))

    return rec([set(range(1, g.n + 1)) for _ in range(g.k)], 0)


# -- exact cover -----------------------------------------------------------


def test_complete_tiling():
    t = perfect_clique_tiling(KPartiteGraph.complete(3, 3))
    assert len(t) == 3 and verify_tiling(KPartiteGraph.complete(3, 3), t)


def test_catlin_gap_witness():
    assert perfect_clique_tiling(catlin_graph(3, 3)) is None
    g = catlin_graph(3, 6)
    t = perfect_clique_tiling(g)
    assert t is not None and verify_tiling(g, t)


def test_cap_and_timeout_are_not_none():
    with pytest.raises(CapacityError):
        perfect_clique_tiling(KPartiteGraph.complete(4, 10))
    with pytest.raises(CapacityError):
        perfect_clique_tiling(catlin_graph(3, 9), timeout=0.0)


def test_heuristic_agrees():
    for g in (catlin_graph(3, 3), catlin_graph(3, 6), catlin_graph(4, 4)):
        a = perfect_clique_tiling(g)
        b = perfect_clique_tiling(g, heuristic=True)
        assert (a is None) == (b is None)


@given(kpartite_graphs(k=st.integers(2, 3), n=st.integers(1, 3)))
def test_tiling_existence_matches_oracle(g):
    t = perfect_clique_tiling(g)
    assert (t is not None) == brute_has_perfect_tiling(g)
    if t is not None:
        assert verify_tiling(g, t)
        assert fractional_tiling_number(g)[0] == g.n
    elif fractional_tiling_number(g)[0] < g.n:
        assert t is None


@given(kpartite_graphs(k=st.integers(2, 4), n=st.integers(1, 4)))
def test_search_is_deterministic(g):
    a, b = perfect_clique_tiling(g), perfect_clique_tiling(g)
    assert (a is None and b is None) or a.tiles == b.tiles


# -- K_h^k -----------------------------------------------------------------


def test_multipartite_examples():
    g = KPartiteGraph.complete(3, 4)
    assert perfect_multipartite_tiling(g, 1).tiles == perfect_clique_tiling(g).tiles
    t = perfect_multipartite_tiling(g, 2)
    assert len(t) == 2 and verify_tiling(g, t, 2)
    k44 = KPartiteGraph.new_balanced(
        2, 4, [((1, a), (2, b)) for a in range(1, 5) for b in range(1, 5) if a != b]
    )
    t = perfect_multipartite_tiling(k44, 2)
    assert t is not None and verify_tiling(k44, t, 2)


def test_multipartite_rejects_bad_h():
    with pytest.raises(ParameterError):
        perfect_multipartite_tiling(KPartiteGraph.complete(2, 2), 0)


@given(kpartite_graphs(k=st.integers(2, 3), n=st.integers(2, 5)), st.integers(2, 3))
def test_multipartite_matches_oracle(g, h):
    if h * g.k * (g.n // h) > 36:
        return
    t = perfect_multipartite_tiling(g, h)
    assert (t is not None) == brute_khk(g, h)
    if t is not None:
        assert verify_tiling(g, t, h)


# -- matching --------------------------------------------------------------


def test_matching_examples():
    m = bipartite_perfect_matching(KPartiteGraph.complete(2, 3))
    assert m and len(m.matching) == 3
    g = KPartiteGraph.new_balanced(2, 2, [((1, 1), (2, 2)), ((1, 2), (2, 1))])
    m = bipartite_perfect_matching(g)
    assert sorted(m.matching.tiles) == [(V(1, 1), V(2, 2)), (V(1, 2), V(2, 1))]
    star = KPartiteGraph.new_balanced(2, 2, [((1, 1), (2, 1)), ((1, 2), (2, 1))])
    m = bipartite_perfect_matching(star)
    assert not m
    assert m.violator == [V(1, 1), V(1, 2)] and m.neighbourhood == [V(2, 1)]
    assert hall_violation(star, m.violator)


def test_matching_needs_k2():
    with pytest.raises(ParameterError):
        bipartite_perfect_matching(KPartiteGraph.complete(3, 2))


@given(kpartite_graphs(k=2, n=st.integers(1, 6)))
def test_matching_matches_oracle(g):
    m = bipartite_perfect_matching(g)
    left = [{v.index for v in g.neighbours(V(1, a), 2)} for a in range(1, g.n + 1)]
    assert bool(m) == brute_has_perfect_matching(left)
    if m:
        assert verify_tiling(g, m.matching)
    else:
        assert hall_violation(g, m.violator)
        nb = set()
        for v in m.violator:
            nb |= set(g.neighbours(v, 2))
        assert sorted(nb) == m.neighbourhood and len(nb) < len(m.violator)


# -- blow-up tiling --------------------------------------------------------


def test_triangle_blow_up():
    g = KPartiteGraph.complete(3, 1)
    tau, primal, _ = fractional_tiling_number(g)
    big, t = tiling_from_fractional(g, primal, 1)
    assert big == g and t.tiles == [(V(1, 1), V(2, 1), V(3, 1))]


def test_catlin_half_weights_blow_up():
    g = catlin_graph(3, 3)
    cl = enumerate_transversal_cliques(g)
    w = [Fraction(0) if len(set(c.indices)) == 1 else Fraction(1, 2) for c in cl]
    sol = solution_from_weights(build_primal_tiling_lp(g, cl), w)
    big, t = tiling_from_fractional(g, sol, 2)
    assert big.n == 6 and len(t) == 6 and t.deficiency is None
    assert verify_tiling(big, t)


def test_four_cycle_blow_up():
    c4 = KPartiteGraph.new_balanced(2, 2, [((1, 1), (2, 1)), ((1, 1), (2, 2)), ((1, 2), (2, 1)), ((1, 2), (2, 2))])
    cl = enumerate_transversal_cliques(c4)
    sol = solution_from_weights(build_primal_tiling_lp(c4, cl), [Fraction(1, 2)] * 4)
    big, t = tiling_from_fractional(c4, sol, 2)
    assert big.k * big.n == 8 and len(t) == 4 and verify_tiling(big, t)


def test_blow_up_errors_and_deficiency():
    g = catlin_graph(3, 3)
    cl = enumerate_transversal_cliques(g)
    w = [Fraction(0) if len(set(c.indices)) == 1 else Fraction(1, 2) for c in cl]
    sol = solution_from_weights(build_primal_tiling_lp(g, cl), w)
    with pytest.raises(ParameterError):
        tiling_from_fractional(g, sol, 1)
    part = solution_from_weights(build_primal_tiling_lp(g, cl), [int(c.indices == (2, 2, 2)) for c in cl])
    big, t = tiling_from_fractional(g, part, 1)
    assert t.deficiency == {"tiles": 1, "required": 3, "uncovered": 6}
    assert not verify_tiling(big, t)


@given(kpartite_graphs(k=st.integers(2, 3), n=st.integers(1, 3)))
def test_blow_up_tiling_property(g):
    tau, primal, _ = fractional_tiling_number(g)
    if tau != g.n:
        return
    D = common_denominator(primal)
    big, t = tiling_from_fractional(g, primal, D)
    assert len(t) == D * g.n
    assert verify_tiling(big, t)


# -- verifier --------------------------------------------------------------


def test_verifier_reports():
    g = KPartiteGraph.new_balanced(2, 2, [((1, 1), (2, 1)), ((1, 2), (2, 2))])
    bad = Tiling([(V(1, 1), V(2, 2)), (V(1, 2), V(2, 1))])
    chk = verify_tiling(g, bad)
    assert not chk and chk.witness == (V(1, 1), V(2, 2))
    overlap = Tiling([(V(1, 1), V(2, 1)), (V(1, 1), V(2, 1))])
    chk = verify_tiling(g, overlap)
    assert not chk and chk.witness == (V(1, 1),)
