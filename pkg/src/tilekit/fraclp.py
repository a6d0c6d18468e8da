"""The fractional K_k-tiling number and its certificates.

Primal: maximise the total clique weight with every vertex loaded at most 1.
Dual:   minimise the total vertex weight with every clique covered at least 1.
Both are solved independently with the exact engine in :mod:`tilekit.lp`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, lcm

from .cliques import Clique, enumerate_transversal_cliques, DEFAULT_CLIQUE_CAP
from .graphcore import GraphError, KPartiteGraph, VertexRef
from .lp import GE, LE, LinearProgram, LPSolution, solve_exact


class VerificationError(ValueError):
    pass


def build_primal_tiling_lp(g: KPartiteGraph, cliques) -> LinearProgram:
    verts = g.vertices()
    col = {}
    rows = [[0] * len(cliques) for _ in verts]
    for t, c in enumerate(cliques):
        for v in c.vertices:
            rows[g.vid(v)][t] = 1
    return LinearProgram(
        objective=[1] * len(cliques),
        rows=rows,
        rhs=[1] * len(verts),
        senses=[LE] * len(verts),
        sense="max",
        var_labels=list(cliques),
        row_labels=verts,
    )


def build_dual_tiling_lp(g: KPartiteGraph, cliques) -> LinearProgram:
    verts = g.vertices()
    rows = []
    for c in cliques:
        row = [0] * len(verts)
        for v in c.vertices:
            row[g.vid(v)] = 1
        rows.append(row)
    return LinearProgram(
        objective=[1] * len(verts),
        rows=rows,
        rhs=[1] * len(cliques),
        senses=[GE] * len(cliques),
        sense="min",
        var_labels=verts,
        row_labels=list(cliques),
    )


def fractional_tiling_number(g: KPartiteGraph, cap: int = DEFAULT_CLIQUE_CAP, rule: str = "bland"):
    """Return ``(tau, primal, dual)`` with strong duality checked exactly.

    ``rule`` is the simplex pivot rule passed to both solves.
    """
    cliques = enumerate_transversal_cliques(g, cap=cap)
    primal = solve_exact(build_primal_tiling_lp(g, cliques), rule=rule)
    dual = solve_exact(build_dual_tiling_lp(g, cliques), rule=rule)
    if primal.objective != dual.objective:
        raise VerificationError(
            f"duality gap: primal {primal.objective} != dual {dual.objective}"
        )
    return primal.objective, primal, dual


def vertex_loads(g: KPartiteGraph, primal: LPSolution) -> dict:
    loads = {v: Fraction(0) for v in g.vertices()}
    for c, w in zip(primal.lp.var_labels, primal.values):
        if w:
            for v in c.vertices:
                loads[v] += w
    return loads


def slack_vertices(g: KPartiteGraph, primal: LPSolution) -> set:
    """Vertices whose load under ``primal`` is strictly below 1."""
    return {v for v, load in vertex_loads(g, primal).items() if load < 1}


def common_denominator(sol) -> int:
    """Least common multiple of the denominators of the solution values."""
    values = sol.values if isinstance(sol, LPSolution) else sol
    return lcm(1, *(Fraction(v).denominator for v in values))


def slack_dual_conflicts(g: KPartiteGraph, primal: LPSolution, dual: LPSolution) -> list:
    """Slack vertices that carry positive dual weight.

    The induction step wants a dual optimum vanishing on slack vertices; a
    simplex vertex need not have that property, so it is reported, not forced.
    """
    slack = slack_vertices(g, primal)
    return [v for v, x in zip(dual.lp.var_labels, dual.values) if v in slack and x > 0]


def witness_neighbours(g: KPartiteGraph, i: int, z) -> list:
    """First ``ceil((k-1)n/k)`` neighbours of ``z`` in each part other than ``i``."""
    z = VertexRef(*z)
    if z.part != i:
        raise GraphError(f"vertex {z} is not in part {i}")
    k, n = g.k, g.n
    size = ceil((k - 1) * n / k)
    parts = []
    for j in range(1, k + 1):
        if j == i:
            continue
        nb = g.neighbours(z, j)
        if len(nb) < size:
            raise GraphError(
                f"vertex {z} has {len(nb)} neighbours in part {j}, needs {size}"
            )
        parts.append(nb[:size])
    return parts


def inductive_witness(g: KPartiteGraph, i: int, z, dual: LPSolution | None = None) -> KPartiteGraph:
    """(k-1)-partite subgraph induced on the chosen neighbours of ``z``.

    Parts other than ``i`` are renumbered in increasing order.  ``dual`` is
    accepted for symmetry with the induction step; the graph does not depend on it.
    """
    if g.k < 3:
        raise GraphError("the induction step needs k >= 3")
    return g.induced(witness_neighbours(g, i, z))


@dataclass
class DualityReport:
    equal: bool
    gap: Fraction
    violations: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.equal and not self.violations


def verify_duality(primal: LPSolution, dual: LPSolution) -> DualityReport:
    """Exact objective comparison plus complementary slackness.

    Both solutions must belong to a primal/dual tiling pair over the same
    clique list.  Infeasible inputs raise :class:`VerificationError`.
    """
    for name, sol in (("primal", primal), ("dual", dual)):
        bad = sol.lp.violations(sol.values)
        if bad:
            raise VerificationError(f"{name} solution violates constraint {bad[0]}")
    gap = dual.objective - primal.objective
    violations = []
    if gap == 0:
        verts = dual.lp.var_labels
        cliques = primal.lp.var_labels
        x = dict(zip(verts, dual.values))
        loads = {v: Fraction(0) for v in verts}
        for c, w in zip(cliques, primal.values):
            if w:
                cover = sum(x[v] for v in c.vertices)
                if cover != 1:
                    violations.append(("clique", c, w, cover))
                for v in c.vertices:
                    loads[v] += w
        for v in verts:
            if x[v] and loads[v] != 1:
                violations.append(("vertex", v, x[v], loads[v]))
    return DualityReport(equal=gap == 0, gap=gap, violations=violations)


def uniform_dual(g: KPartiteGraph, cliques) -> LPSolution:
    """The feasible dual x = 1/k, objective n."""
    lp = build_dual_tiling_lp(g, cliques)
    x = [Fraction(1, g.k)] * len(lp.var_labels)
    return LPSolution(lp, x, lp.evaluate(x), [], [], [], method="given")


def solution_from_weights(lp: LinearProgram, values) -> LPSolution:
    values = [Fraction(v) for v in values]
    return LPSolution(lp, values, lp.evaluate(values), [], [], [], method="given")
