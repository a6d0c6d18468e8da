import json
from fractions import Fraction
from math import ceil

import pytest
from hypothesis import given, settings, strategies as st

from tilekit.errors import InvariantError, ParameterError
from tilekit.graphcore import KPartiteGraph, VertexRef, min_bipartite_degree, random_min_degree_graph
from tilekit.cliques import Clique
from tilekit.pipeline import (
    ClusterCounts,
    ClusterLedger,
    ColumnStructure,
    assign_leftover,
    balance_columns,
    belongs,
    build_auxiliary_graph,
    random_nu,
    reach,
    receptacle_remainder,
    run_experiment,
    synthetic_ledger,
    verify_reach,
)
from tilekit.tiler import Tiling

F = Fraction
V = VertexRef


def identity_columns(k, ell, clusters=None):
    g = KPartiteGraph.complete(k, ell)
    tiles = Tiling([tuple(V(i, j) for i in range(1, k + 1)) for j in range(1, ell + 1)])
    return ColumnStructure.from_tiling(g, tiles, clusters)


# -- column structure and reach --------------------------------------------------


def test_columns_are_cliques():
    cs = ColumnStructure.find(KPartiteGraph.complete(3, 4))
    cs.check()
    assert cs.k == 3 and cs.ell == 4 and len(cs.original) == 12


def test_from_tiling_rejects_non_tiling():
    g = KPartiteGraph.complete(2, 2)
    with pytest.raises(ParameterError):
        ColumnStructure.from_tiling(g, Tiling([(V(1, 1), V(2, 1))]))


def test_reach_complete_three_partite():
    cs = identity_columns(3, 6)
    t1, t2 = reach(cs, 1, 2)
    assert V(1, 1) in t1.vertices and V(1, 2) in t2.vertices
    shared = set(t1.vertices) & set(t2.vertices)
    assert len(shared) == 2 and all(3 <= w.index <= 6 for w in shared)
    assert verify_reach(cs, 1, 2, t1, t2)


def test_reach_needs_degree():
    with pytest.raises(ParameterError, match="below"):
        reach(identity_columns(3, 5), 1, 2)


def test_reach_bipartite():
    cs = identity_columns(2, 4)
    t1, t2 = reach(cs, 1, 3)
    assert t1.vertices == (V(1, 1), V(2, 2))
    assert t2.vertices == (V(1, 3), V(2, 2))


def test_verify_reach_rejects_column_reuse():
    cs = identity_columns(2, 4)
    bad1 = Clique((V(1, 1), V(2, 3)))
    bad2 = Clique((V(1, 3), V(2, 3)))
    assert not verify_reach(cs, 1, 3, bad1, bad2)


@settings(max_examples=25)
@given(st.sampled_from([(2, 6), (3, 9), (4, 12), (2, 8), (3, 12)]), st.integers(0, 10**6))
def test_reach_on_random_reduced_graphs(kl, seed):
    k, ell = kl
    delta = ceil(F((k - 1) * ell, k) + 2)
    g = random_min_degree_graph(k, ell, delta, seed)
    assert min_bipartite_degree(g)[0] >= delta
    cs = ColumnStructure.find(g)
    for i in range(1, k + 1):
        for j in range(2, ell + 1):
            t1, t2 = reach(cs, i, j)
            assert verify_reach(cs, i, j, t1, t2)


# -- belongs and leftover assignment -------------------------------------------------


def cluster_map(k, ell, L):
    return {(i, j): [(i, (j - 1) * L + x) for x in range(1, L + 1)] for i in range(1, k + 1) for j in range(1, ell + 1)}


def ledger_for(k, ell, L, n, eps_prime=F(1, 1000), d_prime=F(1, 2), gamma=F(1, 2)):
    return ClusterLedger(k, ell, L, 1, d_prime, F(1, 100), eps_prime, gamma, n)


def test_belongs_complete_and_isolated():
    k, ell, L = 3, 3, 4
    cs = identity_columns(k, ell, cluster_map(k, ell, L))
    g = KPartiteGraph.complete(k, ell * L)
    led = ledger_for(k, ell, L, ell * L)
    assert all(belongs(g, (1, 1), cs, j, led) for j in (1, 2, 3))
    e = KPartiteGraph.empty(k, ell * L)
    assert not any(belongs(e, (1, 1), cs, j, led) for j in (1, 2, 3))


def test_belongs_threshold_boundary():
    k, ell, L = 3, 3, 4
    cs = identity_columns(k, ell, cluster_map(k, ell, L))
    led = ledger_for(k, ell, L, ell * L)
    need = ceil(led.d_prime / 2 * L)
    edges = [((1, 1), (p, 2 * L + x)) for p in (2, 3) for x in range(1, need + 1)]
    g = KPartiteGraph.new_balanced(k, ell * L, edges)
    assert [belongs(g, (1, 1), cs, j, led) for j in (1, 2, 3)] == [False, False, True]
    thin = KPartiteGraph.new_balanced(k, ell * L, edges[1:])
    assert not belongs(thin, (1, 1), cs, 3, led)


def test_assign_empty_leftover():
    cs = identity_columns(3, 3, cluster_map(3, 3, 2))
    out = assign_leftover(KPartiteGraph.complete(3, 6), cs, {}, ledger_for(3, 3, 2, 6))
    assert out.columns == {} and set(out.intake.values()) == {0}


def test_assign_complete_graph_round_robin():
    k, ell, L, extra = 3, 6, 2, 9
    n = ell * L + extra
    cs = identity_columns(k, ell, cluster_map(k, ell, L))
    led = ledger_for(k, ell, L, n, eps_prime=F(1, 7))
    assert k * led.eps_prime * n == extra
    left = {i: [(i, ell * L + x) for x in range(1, extra + 1)] for i in range(1, k + 1)}
    out = assign_leftover(KPartiteGraph.complete(k, n), cs, left, led)
    assert len(out.columns) == k * extra
    assert out.cap == F(18, 7)
    for i in range(1, k + 1):
        got = [out.intake[(i, j)] for j in range(2, ell + 1)]
        assert got == [2, 2, 2, 2, 1]
    assert out.cap_within_bound and out.cap == k * k * led.eps_prime * L


def test_assign_rejects_vertex_that_belongs_to_one_column():
    k, ell, L, extra = 2, 4, 2, 2
    n = ell * L + extra
    cs = identity_columns(k, ell, cluster_map(k, ell, L))
    led = ledger_for(k, ell, L, n, eps_prime=F(1, 10))
    edges = [((1, a), (2, b)) for a in range(1, ell * L + 1) for b in range(1, ell * L + 1)]
    for x in range(1, extra + 1):
        v = ell * L + x
        edges += [((1, v), (2, b)) for b in (3, 4)]  # column 2 of part 2 only
        edges += [((2, v), (1, b)) for b in (3, 4)]
    g = KPartiteGraph.new_balanced(k, n, edges)
    left = {i: [(i, ell * L + x) for x in range(1, extra + 1)] for i in (1, 2)}
    with pytest.raises(ParameterError, match="belongs in 1 columns"):
        assign_leftover(g, cs, left, led)


def test_assign_rejects_oversized_leftover():
    cs = identity_columns(2, 4, cluster_map(2, 4, 2))
    led = ledger_for(2, 4, 2, 10, eps_prime=F(1, 100))
    with pytest.raises(ParameterError, match="above k eps' n"):
        assign_leftover(KPartiteGraph.complete(2, 10), cs, {1: [(1, 9), (1, 10)]}, led)


# -- auxiliary graph and balancing ----------------------------------------------------


def uniform_ledger(nu=1200, k=3, ell=3):
    led = ClusterLedger(k, ell, 1200, 1, F(1, 5), F(1, 100), F(1, 1000), F(1, 2), n=3600)
    for i in range(1, k + 1):
        for j in range(1, ell + 1):
            led.counts[(i, j)] = ClusterCounts(nu)
    return led


def test_auxiliary_uniform_multiplicity():
    led = uniform_ledger()
    assert led.base == 1140 and led.quantum(1) == 12
    aux = build_auxiliary_graph(identity_columns(3, 3), led, 1)
    assert set(aux.raw.values()) == {4} and set(aux.multiplicity.values()) == {4}
    assert aux.part_size == 8 and aux.degree_ratio >= F(2, 3)


def test_auxiliary_lower_boundary():
    lo = 1081  # least integer above (1 - sqrt(zeta)) L' = 1080
    led = uniform_ledger(nu=lo)
    assert led.in_window(lo) and not led.in_window(1080)
    aux = build_auxiliary_graph(identity_columns(3, 3), led, 1)
    assert aux.raw[(1, 2)] == F(lo - 1140, 12) - 1
    assert set(aux.multiplicity.values()) == {0} and aux.graph is None


def test_auxiliary_unequal_totals():
    led = uniform_ledger()
    led.counts[(2, 2)] = ClusterCounts(1190)
    with pytest.raises(ParameterError, match="totals differ"):
        build_auxiliary_graph(identity_columns(3, 3), led, 1)


def test_auxiliary_window():
    led = uniform_ledger(nu=1000)
    with pytest.raises(ParameterError, match="window"):
        build_auxiliary_graph(identity_columns(3, 3), led, 1)


def test_balance_uniform():
    led = uniform_ledger()
    plan = balance_columns(identity_columns(3, 3), led)
    assert plan.D0 == 1 and plan.quantum == 12
    assert set(plan.removed.values()) == {48}
    assert set(plan.final.values()) == {1140}
    assert set(plan.to_leftover.values()) == {12}
    assert plan.leftover == {1: 24, 2: 24, 3: 24}
    assert plan.tiles == 8


def test_balance_leaves_one_quantum_above_base():
    # the rounded removal stops one quantum above ceil((1 - d'/4) L')
    led = uniform_ledger(nu=1140 + 12 * 3)
    plan = balance_columns(identity_columns(3, 3), led)
    assert set(plan.removed.values()) == {12 * 2}
    assert set(plan.to_leftover.values()) == {12 + led.base - led.target} == {12}


def test_balance_shortfall_is_reported():
    with pytest.raises(ParameterError, match="below the target"):
        balance_columns(identity_columns(3, 3), uniform_ledger(nu=1081))


@pytest.mark.parametrize("k,ell", [(2, 2), (2, 3), (3, 3), (3, 4), (2, 4)])
@pytest.mark.parametrize("seed", range(4))
def test_balance_random_nu(k, ell, seed):
    cs = identity_columns(k, ell)
    led = synthetic_ledger(cs, 12800, 2, F(4, 5), F(1, 64), F(1, 1000), F(1, 2), seed)
    plan = balance_columns(cs, led)
    for c, v in plan.final.items():
        assert v == led.target == 2 * ceil((1 - F(4, 5) / 4) * 12800 / 2)
        assert led.nu(*c) - plan.removed[c] - plan.to_leftover[c] == v
    assert all(s <= led.leftover_cap() for s in plan.leftover.values())


def test_random_nu_in_window_and_balanced():
    cs = identity_columns(3, 4)
    led = ClusterLedger(3, 4, 12800, 2, F(4, 5), F(1, 64), F(1, 1000), F(1, 2), n=0)
    nu = random_nu(led, 5)
    assert all(led.in_window(v) for v in nu.values())
    assert len({sum(nu[(i, j)] for j in range(2, 5)) for i in (1, 2, 3)}) == 1


@pytest.mark.parametrize("n,h,r", [(10, 3, 1), (12, 3, 0), (7, 7, 0), (5, 1, 0)])
def test_receptacle_remainder(n, h, r):
    assert receptacle_remainder(n, h) == r


def test_receptacle_remainder_rejects_zero():
    with pytest.raises(ParameterError):
        receptacle_remainder(0, 2)


# -- experiment harness ---------------------------------------------------------------


def test_run_empty_list(tmp_path):
    rep = run_experiment({"scenarios": []}, tmp_path)
    assert rep["scenarios"] == [] and json.loads((tmp_path / "report.json").read_text()) == {"scenarios": []}


def test_run_unknown_scenario():
    with pytest.raises(ParameterError, match="unknown scenario"):
        run_experiment({"scenario": "nope"})


def test_run_gap_witness_rows():
    rep = run_experiment({"scenario": "gap-witness", "k": 3, "ns": [3, 6]})
    assert rep["csv"]["gap-witness"] == "k,n,min_degree,tau,tiled\n3,3,2,3,no\n3,6,4,6,yes\n"


def test_run_tau_sweep_is_deterministic(tmp_path):
    cfg = {"scenario": "tau-sweep", "k": 3, "n": 6, "deltas": [3, 4, 5, 6], "seeds": list(range(5))}
    a = run_experiment(cfg, tmp_path / "a")
    b = run_experiment(cfg, tmp_path / "b")
    ta = (tmp_path / "a" / "tau-sweep.csv").read_bytes()
    assert ta == (tmp_path / "b" / "tau-sweep.csv").read_bytes()
    lines = ta.decode().splitlines()
    assert lines[0] == "seed,delta,tau_num,tau_den,tiled" and len(lines) == 21
    assert a["scenarios"] == b["scenarios"]
    for line in lines[1:]:
        seed, delta, num, den, tiled = line.split(",")
        if int(delta) >= 4:
            assert (num, den) == ("6", "1")


def test_run_pipeline_demo():
    rep = run_experiment({"scenario": "pipeline-demo", "k": 2, "ell": 4})
    s = rep["scenarios"][0]["summary"]
    assert s["blowup_verified"] and s["reach_pairs_verified"] == 2 * 3
    for row in rep["csv"]["pipeline-demo"].splitlines()[1:]:
        assert int(row.split(",")[-1]) == s["target"]


def test_run_missing_key():
    with pytest.raises(ParameterError, match="needs config key"):
        run_experiment({"scenario": "tau-sweep"})
