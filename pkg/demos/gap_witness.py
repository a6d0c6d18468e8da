#!/usr/bin/env python3
"""Catlin graphs: the degree bound holds, the LP optimum is n, and yet no perfect tiling exists when n/k is odd."""
import argparse
from fractions import Fraction

from tilekit.cliques import enumerate_transversal_cliques
from tilekit.fraclp import build_primal_tiling_lp, common_denominator, fractional_tiling_number, solution_from_weights
from tilekit.graphcore import catlin_graph, min_bipartite_degree
from tilekit.tiler import perfect_clique_tiling, tiling_from_fractional, verify_tiling


def show(k, n):
    g = catlin_graph(k, n)
    delta, _ = min_bipartite_degree(g)
    tau, primal, _ = fractional_tiling_number(g)
    tiling = perfect_clique_tiling(g)
    print(f"Gamma_{k}({n}): min bipartite degree {delta}, tau* = {tau}, "
          f"perfect tiling: {'yes' if tiling else 'no'}")
    return g


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=3)
    args = ap.parse_args()
    g = show(args.k, args.k)
    show(args.k, 2 * args.k)

    if args.k == 3:
        # weight 1/2 on every clique that is not a "diagonal" triangle
        cl = enumerate_transversal_cliques(g)
        w = [Fraction(0) if len(set(c.indices)) == 1 else Fraction(1, 2) for c in cl]
        sol = solution_from_weights(build_primal_tiling_lp(g, cl), w)
        D = common_denominator(sol)
        big, t = tiling_from_fractional(g, sol, D)
        print(f"half-weight optimum has value {sol.objective}; its {D}-fold blow-up "
              f"({big.k * big.n} vertices) has {len(t)} disjoint triangles, verified={bool(verify_tiling(big, t))}")
