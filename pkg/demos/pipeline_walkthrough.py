#!/usr/bin/env python3
"""Reduced graph -> columns -> linking cliques -> balanced cluster sizes, on synthetic counts."""
import argparse
from fractions import Fraction

from tilekit.graphcore import random_min_degree_graph
from tilekit.pipeline import ColumnStructure, balance_columns, reach, receptacle_remainder, synthetic_ledger

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--ell", type=int, default=9)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    k, ell = args.k, args.ell

    need = -(-((k - 1) * ell + 2 * k) // k)
    g_r = random_min_degree_graph(k, ell, need, args.seed)
    cs = ColumnStructure.find(g_r)
    print(f"reduced graph: k={k}, l'={ell}, min bipartite degree >= {need}; columns:")
    for j in range(1, ell + 1):
        print(f"  column {j}: " + " ".join(str(cs.original[(i, j)]) for i in range(1, k + 1)))

    t1, t2 = reach(cs, 1, 2)
    print(f"reach(1, 2): T1={[str(v) for v in t1.vertices]} T2={[str(v) for v in t2.vertices]}")

    led = synthetic_ledger(cs, 12800, 2, Fraction(4, 5), Fraction(1, 64), Fraction(1, 1000), Fraction(1, 2), args.seed)
    plan = balance_columns(cs, led)
    print(f"balancing: D0={plan.D0}, removal quantum {plan.quantum}, target {led.target}")
    print("part column   nu  removed  to_leftover  final")
    for c in sorted(plan.final):
        print(f"{c[0]:>4} {c[1]:>6} {led.nu(*c):>5} {plan.removed[c]:>8} {plan.to_leftover[c]:>12} {plan.final[c]:>6}")
    print(f"new leftover per part: {plan.leftover} (cap 3 h zeta n = {float(led.leftover_cap()):.0f})")
    print(f"receptacle remainder n - h*floor(n/h) for n={led.n}, h=2: {receptacle_remainder(led.n, 2)}")
