"""Command-line entry point: ``tilekit <command> ...``.

Rationals are always printed as ``p/q``.  CSV outputs:

  slice-experiment   trial, failures, good_pair_min, bound
  run tau-sweep      seed, delta, tau_num, tau_den, tiled
  run gap-witness    k, n, min_degree, tau, tiled
  run pipeline-demo  part, column, multiplicity, removed, to_leftover, final
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

from .cliques import CapacityError
from .errors import InvariantError, ParameterError
from .graphcore import GraphError, KPartiteGraph, catlin_graph, load_graph, random_graph, random_min_degree_graph
from .lp import PIVOT_RULES, fmt, parse_rational


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_run(args) -> int:
    from .pipeline import run_experiment

    with open(args.config) as fh:
        config = json.load(fh)
    report = run_experiment(config, out=args.out)
    report.pop("csv")
    _emit(report)
    return 0


def cmd_gen(args) -> int:
    if args.catlin:
        g = catlin_graph(args.k, args.n)
    elif args.p is not None:
        g = random_graph(args.k, args.n, args.p, args.seed)
    else:
        delta = args.min_degree
        if delta is None:
            delta = -(-(args.k - 1) * args.n // args.k)
        g = random_min_degree_graph(args.k, args.n, delta, args.seed)
    text = g.to_json()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_tau(args) -> int:
    from .fraclp import fractional_tiling_number

    g = load_graph(args.graph)
    tau, primal, dual = fractional_tiling_number(g, rule=args.rule)
    _emit({
        "tau": fmt(tau),
        "weights": {" ".join(str(v) for v in c.vertices): fmt(w)
                    for c, w in zip(primal.lp.var_labels, primal.values) if w},
        "dual": {str(v): fmt(y) for v, y in zip(dual.lp.var_labels, dual.values)},
    })
    return 0


def cmd_tile(args) -> int:
    from .tiler import perfect_multipartite_tiling

    g = load_graph(args.graph)
    try:
        t = perfect_multipartite_tiling(g, args.h, cap=args.cap, timeout=args.timeout)
    except CapacityError as exc:
        _emit({"result": "capacity", "reason": str(exc)})
        return 0
    if t is None:
        _emit({"result": "none"})
    else:
        _emit({"result": "tiling", **t.to_dict()})
    return 0


def cmd_reach(args) -> int:
    from .pipeline import ColumnStructure, reach

    g = load_graph(args.graph)
    cs = ColumnStructure.find(g, cap=args.cap)
    t1, t2 = reach(cs, args.i, args.j)
    _emit({
        "columns": {str(j): [str(cs.original[(i, j)]) for i in range(1, cs.k + 1)]
                    for j in range(1, cs.ell + 1)},
        "T1": [list(v) for v in t1.vertices],
        "T2": [list(v) for v in t2.vertices],
    })
    return 0


def cmd_slice(args) -> int:
    from .pipeline import CSV_COLUMNS
    from .regkit import random_slicing_experiment

    rep = random_slicing_experiment(args.L, args.Lprime, parse_rational(args.d),
                                    parse_rational(args.eps), args.trials, args.seed)
    w = csv.DictWriter(sys.stdout, fieldnames=CSV_COLUMNS["slicing"], lineterminator="\n")
    w.writeheader()
    w.writerows(rep.to_csv_rows())
    for flag in rep.flags:
        print(f"warning: {flag}", file=sys.stderr)
    return 0


def cmd_certify(args) -> int:
    from .regkit import EXACT_CAP, BipartitePair, exact_certificate, kr_certificate

    g = load_graph(args.graph)
    i, j = args.pair
    pair = BipartitePair.from_graph(g, list(g.part_vertices(i)), list(g.part_vertices(j)))
    eps = parse_rational(args.eps)
    if g.n <= EXACT_CAP:
        cert = exact_certificate(pair, eps)
    else:
        cert = kr_certificate(pair, eps)
    if cert is None:
        _emit({"result": "not-certified", "epsilon": fmt(eps)})
    else:
        _emit({"result": "certified", **cert.to_dict()})
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tilekit",
        description="Exact fractional and integral clique tilings of balanced multipartite graphs.",
        epilog=__doc__.split("\n\n", 1)[1],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run", help="run experiment scenarios from a JSON config")
    s.add_argument("config")
    s.add_argument("--out", help="directory for CSV + report.json (default: config 'out')")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("gen", help="generate a balanced k-partite graph as JSON")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--min-degree", type=int, help="target minimum bipartite degree (default ceil((k-1)n/k))")
    s.add_argument("--p", type=float, help="independent edge probability instead of a degree target")
    s.add_argument("--catlin", action="store_true", help="emit the Catlin graph for (k, n)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("tau", help="exact fractional K_k-tiling number with both certificates")
    s.add_argument("graph")
    s.add_argument("--rule", choices=PIVOT_RULES, default="bland")
    s.set_defaults(func=cmd_tau)

    s = sub.add_parser("tile", help="perfect K_h^k-tiling by exhaustive search")
    s.add_argument("graph")
    s.add_argument("--h", type=int, default=1)
    s.add_argument("--cap", type=int, default=36)
    s.add_argument("--timeout", type=float)
    s.set_defaults(func=cmd_tile)

    s = sub.add_parser("reach", help="two cliques linking column 1 to column j in a reduced graph")
    s.add_argument("graph")
    s.add_argument("--i", type=int, required=True, help="part")
    s.add_argument("--j", type=int, required=True, help="column >= 2")
    s.add_argument("--cap", type=int, default=48)
    s.set_defaults(func=cmd_reach)

    s = sub.add_parser("slice-experiment", help="random slicing Monte Carlo; CSV on stdout")
    s.add_argument("--L", type=int, required=True)
    s.add_argument("--Lprime", type=int, required=True)
    s.add_argument("--d", required=True, help="density, decimal or p/q")
    s.add_argument("--eps", required=True)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, default=1)
    s.set_defaults(func=cmd_slice)

    s = sub.add_parser("certify", help="regularity certificate for the pair of parts i, j")
    s.add_argument("graph")
    s.add_argument("--pair", type=int, nargs=2, required=True, metavar=("I", "J"))
    s.add_argument("--eps", required=True)
    s.set_defaults(func=cmd_certify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, GraphError, CapacityError, OSError, json.JSONDecodeError) as exc:
        print(f"tilekit {args.command}: {exc}", file=sys.stderr)
        return 1
    except InvariantError as exc:
        print(f"tilekit {args.command}: internal invariant failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
