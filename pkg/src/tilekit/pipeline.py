"""Cluster-level bookkeeping for the absorption argument, plus the experiment harness.

Everything here works on a reduced graph whose vertices are clusters.
``(i, j)`` is the cluster of part ``i`` in column ``j``; column 1 is the
receptacle.  Vertex-level surgery is replaced by counts in a
:class:`ClusterLedger`.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor, lcm
from pathlib import Path
from typing import Sequence

from .cliques import CapacityError, Clique
from .errors import InvariantError, ParameterError
from .fraclp import common_denominator, fractional_tiling_number
from .graphcore import KPartiteGraph, VertexRef, catlin_graph, min_bipartite_degree, random_min_degree_graph
from .lp import as_rational, fmt
from .tiler import Tiling, perfect_clique_tiling, tiling_from_fractional, verify_tiling


# ---------------------------------------------------------------------------
# columns


@dataclass
class ColumnStructure:
    """A reduced graph relabelled so that tile ``t`` of a perfect tiling is column ``t + 1``.

    After relabelling, vertex ``(i, j)`` is the cluster of part ``i`` in
    column ``j``.  ``clusters`` optionally maps ``(i, j)`` to the vertices of
    an underlying graph.
    """

    reduced: KPartiteGraph
    original: dict = field(default_factory=dict)
    clusters: dict | None = None

    @classmethod
    def from_tiling(cls, g_r: KPartiteGraph, tiling: Tiling, clusters: dict | None = None) -> "ColumnStructure":
        check = verify_tiling(g_r, tiling, 1)
        if not check:
            raise ParameterError(f"not a perfect K_k-tiling: {check.reason}")
        k, ell = g_r.k, g_r.n
        new_index = {}
        original = {}
        for t, tile in enumerate(tiling.tiles):
            for v in tile:
                new_index[v] = t + 1
                original[(v.part, t + 1)] = v
        edges = [
            ((u.part, new_index[u]), (v.part, new_index[v])) for u, v in g_r.edges()
        ]
        reduced = KPartiteGraph.new_balanced(k, ell, edges)
        remapped = None
        if clusters is not None:
            remapped = {(v.part, new_index[v]): list(c) for v, c in
                        ((VertexRef(*key), c) for key, c in clusters.items())}
        cs = cls(reduced, original, remapped)
        cs.check()
        return cs

    @classmethod
    def find(cls, g_r: KPartiteGraph, cap: int = 48, clusters: dict | None = None) -> "ColumnStructure":
        """Search for a perfect tiling of ``g_r`` and build the columns from it."""
        tiling = perfect_clique_tiling(g_r, cap=cap, heuristic=True)
        if tiling is None:
            raise ParameterError("reduced graph has no perfect K_k-tiling")
        return cls.from_tiling(g_r, tiling, clusters)

    @property
    def k(self) -> int:
        return self.reduced.k

    @property
    def ell(self) -> int:
        return self.reduced.n

    def column(self, j: int) -> list:
        return [VertexRef(i, j) for i in range(1, self.k + 1)]

    def check(self) -> None:
        if self.ell < 1:
            raise InvariantError("no receptacle column")
        for j in range(1, self.ell + 1):
            col = self.column(j)
            for a, u in enumerate(col):
                for v in col[a + 1 :]:
                    if not self.reduced.adjacent(u, v):
                        raise InvariantError(f"column {j} is not a clique: {u} !~ {v}")

    def cluster(self, i: int, j: int) -> list:
        if self.clusters is None:
            raise ParameterError("column structure carries no cluster map")
        return self.clusters[(i, j)]


# ---------------------------------------------------------------------------
# reachability


@dataclass
class ReachCheck:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_reach(cs: ColumnStructure, i: int, j: int, t1: Clique, t2: Clique) -> ReachCheck:
    g = cs.reduced
    a, b = VertexRef(i, 1), VertexRef(i, j)
    s1, s2 = set(t1.vertices), set(t2.vertices)
    for t in (t1, t2):
        vs = t.vertices
        if len(vs) != g.k or any(v.part != p + 1 for p, v in enumerate(vs)):
            return ReachCheck(False, "not a transversal clique")
        for x, u in enumerate(vs):
            for v in vs[x + 1 :]:
                if not g.adjacent(u, v):
                    return ReachCheck(False, f"{u} and {v} are not adjacent")
    if s1 ^ s2 != {a, b} or a not in s1:
        return ReachCheck(False, "symmetric difference is not the two endpoints")
    special = set(cs.column(1)) | set(cs.column(j))
    if (s1 | s2) & special != {a, b}:
        return ReachCheck(False, "cliques use further vertices of column 1 or column j")
    return ReachCheck(True)


def reach(cs: ColumnStructure, i: int, j: int) -> tuple[Clique, Clique]:
    """Two cliques through ``(i,1)`` and ``(i,j)`` sharing all other vertices.

    The shared vertices avoid columns 1 and ``j``; each is the least-index
    common neighbour of everything chosen so far.
    """
    g, k, ell = cs.reduced, cs.k, cs.ell
    if not 1 <= i <= k:
        raise ParameterError(f"part {i} out of range")
    if not 2 <= j <= ell:
        raise ParameterError(f"column {j} must lie in 2..{ell}")
    delta, _ = min_bipartite_degree(g)
    need = Fraction((k - 1) * ell, k) + 2
    if delta < need:
        raise ParameterError(f"minimum bipartite degree {delta} is below (k-1)l'/k + 2 = {need}")
    a, b = VertexRef(i, 1), VertexRef(i, j)
    chosen = [a, b]
    ws = []
    for t in range(1, k + 1):
        if t == i:
            continue
        cand = g.neighbour_bits(a, t)
        for w in chosen[1:]:
            cand &= g.neighbour_bits(w, t)
        cand &= ~((1 << 0) | (1 << (j - 1)))
        if not cand:
            raise InvariantError(f"no common neighbour left in part {t} for ({i},{j})")
        w = VertexRef(t, (cand & -cand).bit_length())
        ws.append(w)
        chosen.append(w)
    t1 = Clique(tuple(sorted([a] + ws)))
    t2 = Clique(tuple(sorted([b] + ws)))
    check = verify_reach(cs, i, j, t1, t2)
    if not check:
        raise InvariantError(f"reach({i},{j}) produced an invalid pair: {check.reason}")
    return t1, t2


# ---------------------------------------------------------------------------
# ledger


@dataclass
class ClusterCounts:
    total: int
    red: int = 0
    blue: int = 0

    @property
    def uncolored(self) -> int:
        return self.total - self.red - self.blue

    @property
    def non_red(self) -> int:
        return self.total - self.red


@dataclass
class ClusterLedger:
    """Cluster counts and parameters; ``nu`` is read off as the non-red count."""

    k: int
    ell: int
    L: int
    h: int
    d_prime: Fraction
    zeta: Fraction
    eps_prime: Fraction
    gamma: Fraction
    n: int
    counts: dict = field(default_factory=dict)
    leftover: dict = field(default_factory=dict)
    D0: int | None = None

    def __post_init__(self):
        for name in ("d_prime", "zeta", "eps_prime", "gamma"):
            setattr(self, name, Fraction(as_rational(getattr(self, name))))
        self.check()

    def check(self) -> None:
        for key, c in self.counts.items():
            if min(c.total, c.red, c.blue, c.uncolored) < 0:
                raise InvariantError(f"negative count in cluster {key}")
        for i, size in self.leftover.items():
            if size < 0:
                raise InvariantError(f"negative leftover in part {i}")

    def nu(self, i: int, j: int) -> int:
        return self.counts[(i, j)].non_red

    @property
    def base(self) -> int:
        """ceil((1 - d'/4) L')."""
        return ceil((1 - self.d_prime / 4) * self.L)

    @property
    def target(self) -> int:
        """h * ceil((1 - d'/4) L' / h)."""
        return self.h * ceil((1 - self.d_prime / 4) * self.L / self.h)

    def quantum(self, D0: int) -> int:
        """h * D0 * ceil(zeta L' / D0), the vertices one tile removes from a cluster."""
        return self.h * D0 * ceil(self.zeta * self.L / D0)

    def in_window(self, nu: int) -> bool:
        """(1 - sqrt(zeta)) L' < nu < (1 + k^2 eps') L', decided exactly."""
        L = self.L
        if not nu < (1 + self.k**2 * self.eps_prime) * L:
            return False
        gap = L - nu
        return gap <= 0 or gap * gap < self.zeta * L * L

    def leftover_cap(self) -> Fraction:
        """3 h zeta n."""
        return 3 * self.h * self.zeta * self.n

    def to_dict(self) -> dict:
        return {
            "k": self.k, "ell": self.ell, "L": self.L, "h": self.h, "n": self.n,
            "d_prime": fmt(self.d_prime), "zeta": fmt(self.zeta),
            "eps_prime": fmt(self.eps_prime), "gamma": fmt(self.gamma), "D0": self.D0,
            "clusters": {f"{i},{j}": [c.total, c.red, c.blue] for (i, j), c in sorted(self.counts.items())},
            "leftover": {str(i): s for i, s in sorted(self.leftover.items())},
        }


def random_nu(ledger: ClusterLedger, seed: int, tries: int = 1000) -> dict:
    """Non-red counts in the legal window with equal totals across parts.

    Returns ``{(i, j): nu}`` for the non-receptacle clusters.
    """
    rng = random.Random(seed)
    L, k, ell = ledger.L, ledger.k, ledger.ell
    lo = L - 1
    while lo > 0 and ledger.in_window(lo - 1):
        lo -= 1
    if not ledger.in_window(lo):
        lo = L
    hi = L
    while ledger.in_window(hi + 1):
        hi += 1
    if not ledger.in_window(lo) or not ledger.in_window(hi):
        raise ParameterError("the legal window for nu is empty")
    cols = list(range(2, ell + 1))
    for _ in range(tries):
        first = [rng.randint(lo, hi) for _ in cols]
        total = sum(first)
        out = {(1, j): v for j, v in zip(cols, first)}
        ok = True
        for i in range(2, k + 1):
            vals = [rng.randint(lo, hi) for _ in cols]
            diff = total - sum(vals)
            order = list(range(len(cols)))
            rng.shuffle(order)
            for p in order:
                step = max(lo - vals[p], min(hi - vals[p], diff))
                vals[p] += step
                diff -= step
            if diff:
                ok = False
                break
            out.update({(i, j): v for j, v in zip(cols, vals)})
        if ok:
            return out
    raise ParameterError("could not draw balanced nu vectors")


# ---------------------------------------------------------------------------
# leftover assignment


def belongs(g: KPartiteGraph, v, cs: ColumnStructure, j: int, ledger: ClusterLedger) -> bool:
    """``v`` has at least (d'/2) L' neighbours in every other cluster of column ``j``."""
    v = VertexRef(*v)
    need = ledger.d_prime / 2 * ledger.L
    row = g._adj[g.vid(v)]
    for i2 in range(1, cs.k + 1):
        if i2 == v.part:
            continue
        mask = sum(1 << g.vid(VertexRef(*u)) for u in cs.cluster(i2, j))
        if (row & mask).bit_count() < need:
            return False
    return True


@dataclass
class Assignment:
    columns: dict
    intake: dict
    cap: Fraction
    cap_within_bound: bool


def assign_leftover(g: KPartiteGraph, cs: ColumnStructure, leftover: dict, ledger: ClusterLedger) -> Assignment:
    """Greedy placement of leftover vertices into non-receptacle columns.

    ``leftover[i]`` lists the leftover vertices of part ``i``.  Each vertex
    goes to the least-filled column j >= 2 it belongs in (ties to the smaller
    j), provided that column's intake from part ``i`` stays within
    k eps' n / ((1/k + gamma/2) l').
    """
    k, ell = cs.k, cs.ell
    cap = k * ledger.eps_prime * ledger.n / ((Fraction(1, k) + ledger.gamma / 2) * ell)
    need = (Fraction(1, k) + ledger.gamma / 2) * ell
    intake = {(i, j): 0 for i in range(1, k + 1) for j in range(2, ell + 1)}
    columns = {}
    for i in sorted(leftover):
        verts = [VertexRef(*v) for v in leftover[i]]
        if len(verts) > k * ledger.eps_prime * ledger.n:
            raise ParameterError(f"leftover of part {i} has {len(verts)} vertices, above k eps' n")
        homes = {v: [j for j in range(2, ell + 1) if belongs(g, v, cs, j, ledger)] for v in verts}
        for v in verts:
            if len(homes[v]) < need:
                raise ParameterError(
                    f"vertex {v} belongs in {len(homes[v])} columns, needs (1/k + gamma/2) l' = {need}"
                )
        for v in verts:
            open_ = [j for j in homes[v] if intake[(i, j)] + 1 <= cap]
            spot = min(open_, key=lambda j: (intake[(i, j)], j), default=None)
            if spot is None:
                raise InvariantError(f"no column with spare intake for {v}")
            intake[(i, spot)] += 1
            columns[v] = spot
    within = cap <= k * k * ledger.eps_prime * ledger.L
    return Assignment(columns, intake, cap, within)


# ---------------------------------------------------------------------------
# auxiliary graph and balancing


@dataclass
class AuxiliaryGraph:
    graph: KPartiteGraph | None
    multiplicity: dict
    raw: dict
    owner: dict
    part_size: int
    degree_ratio: Fraction
    size_bound: Fraction
    D0: int


def _aux_multiplicities(cs: ColumnStructure, ledger: ClusterLedger, D0: int):
    k, ell = cs.k, cs.ell
    q = ledger.quantum(D0)
    base = ledger.base
    target = ledger.target
    raw = {}
    for i in range(1, k + 1):
        for j in range(2, ell + 1):
            nu = ledger.nu(i, j)
            if not ledger.in_window(nu):
                raise ParameterError(f"nu({i},{j}) = {nu} outside the legal window")
            raw[(i, j)] = Fraction(nu - base, q) - 1
    totals = {sum(ledger.nu(i, j) for j in range(2, ell + 1)) for i in range(1, k + 1)}
    if len(totals) > 1:
        raise ParameterError(f"non-receptacle totals differ across parts: {sorted(totals)}")
    mult = {}
    if ell < 2:
        return raw, mult, 0
    # a negative multiplicity means the cluster is left out of A_r
    lo = {c: max(floor(r), 0) for c, r in raw.items()}
    hi = {c: max(ceil(r), 0) for c, r in raw.items()}
    # equal nu totals make the raw sums equal, so the largest floor sum is reachable everywhere
    S = max(sum(lo[(i, j)] for j in range(2, ell + 1)) for i in range(1, k + 1))
    for i in range(1, k + 1):
        keys = [(i, j) for j in range(2, ell + 1)]
        extra = S - sum(lo[c] for c in keys)
        movable = [c for c in keys if hi[c] > lo[c]]
        if not 0 <= extra <= len(movable):
            raise ParameterError(f"part {i} cannot be balanced to {S} copies")

        def lands(c):
            # remaining non-red count after rounding up must still reach the target
            return ledger.nu(*c) - hi[c] * q >= target

        movable.sort(key=lambda c: (not lands(c), -(raw[c] - floor(raw[c])), c[1]))
        for c in keys:
            mult[c] = lo[c]
        for c in movable[:extra]:
            mult[c] = hi[c]
    return raw, mult, S


def build_auxiliary_graph(cs: ColumnStructure, ledger: ClusterLedger, D0: int | None = None) -> AuxiliaryGraph:
    """Blow up the non-receptacle part of the reduced graph by the rounded multiplicities.

    Rounding uses the fewest ceilings that balance the parts; ceilings go
    first to clusters that still reach the target after the extra removal,
    then to larger fractional parts, then to smaller column index.
    """
    D0 = ledger.D0 if D0 is None else D0
    if D0 is None or D0 < 1:
        raise ParameterError("D0 must be a positive integer")
    k, ell = cs.k, cs.ell
    raw, mult, S = _aux_multiplicities(cs, ledger, D0)
    size_bound = (ell - 1) * (ledger.d_prime / 4 + k * k * ledger.eps_prime) / (ledger.h * ledger.zeta)
    if S == 0:
        return AuxiliaryGraph(None, mult, raw, {}, 0, Fraction(1), size_bound, D0)
    owner = {}
    for i in range(1, k + 1):
        idx = 0
        for j in range(2, ell + 1):
            for _ in range(mult[(i, j)]):
                idx += 1
                owner[VertexRef(i, idx)] = (i, j)
        if idx != S:
            raise InvariantError(f"part {i} has {idx} copies, expected {S}")
    edges = []
    verts = sorted(owner)
    for a, u in enumerate(verts):
        cu = owner[u]
        for v in verts[a + 1 :]:
            if v.part != u.part and cs.reduced.adjacent(VertexRef(*cu), VertexRef(*owner[v])):
                edges.append((u, v))
    A = KPartiteGraph.new_balanced(k, S, edges)
    ratio = Fraction(min_bipartite_degree(A)[0], S)
    return AuxiliaryGraph(A, mult, raw, owner, S, ratio, size_bound, D0)


@dataclass
class BalancePlan:
    removed: dict
    final: dict
    to_leftover: dict
    leftover: dict
    D0: int
    quantum: int
    aux: AuxiliaryGraph
    tiles: int

    def to_rows(self) -> list:
        rows = []
        for c in sorted(self.removed):
            rows.append({
                "part": c[0], "column": c[1], "multiplicity": self.aux.multiplicity[c],
                "removed": self.removed[c], "to_leftover": self.to_leftover[c], "final": self.final[c],
            })
        return rows


def balance_columns(cs: ColumnStructure, ledger: ClusterLedger, max_rounds: int = 8) -> BalancePlan:
    """Removal plan bringing every non-receptacle cluster to h*ceil((1-d'/4)L'/h) non-red vertices.

    D0 starts at 1 and is replaced by lcm(D0, D) until the optimum found on
    the auxiliary graph built with D0 has a common denominator D dividing
    D0.  Each tile of the resulting blow-up tiling removes
    h*ceil(zeta L'/D0) uncolored vertices from every cluster it touches.
    """
    k, ell = cs.k, cs.ell
    k_ratio = Fraction(k - 1, k)
    D0 = ledger.D0 or 1
    for _ in range(max_rounds):
        aux = build_auxiliary_graph(cs, ledger, D0)
        if aux.graph is None:
            primal, D = None, 1
            break
        if aux.degree_ratio < k_ratio:
            raise ParameterError(
                f"auxiliary degree ratio {aux.degree_ratio} is below (k-1)/k, so tau* = part size is not guaranteed"
            )
        tau, primal, _ = fractional_tiling_number(aux.graph)
        if tau < aux.part_size:
            raise ParameterError(f"fractional tiling number {tau} is below the part size {aux.part_size}")
        D = common_denominator(primal)
        if D0 % D == 0:
            break
        D0 = lcm(D0, D)
    else:
        raise InvariantError(f"common denominator did not settle within {max_rounds} rounds")
    ledger.D0 = D0
    q = ledger.quantum(D0)
    per_tile = ledger.h * ceil(ledger.zeta * ledger.L / D0)
    removed = {(i, j): 0 for i in range(1, k + 1) for j in range(2, ell + 1)}
    tiles = 0
    if primal is not None:
        big, tiling = tiling_from_fractional(aux.graph, primal, D0)
        if tiling.deficiency is not None or not verify_tiling(big, tiling, 1):
            raise InvariantError("blow-up tiling of the auxiliary graph is not perfect")
        tiles = len(tiling)
        for tile in tiling.tiles:
            for v in tile:
                copy = VertexRef(v.part, (v.index - 1) // D0 + 1)
                removed[aux.owner[copy]] += per_tile
    for c, r in removed.items():
        if r != aux.multiplicity[c] * q:
            raise InvariantError(f"cluster {c}: removed {r}, expected {aux.multiplicity[c] * q}")
    target = ledger.target
    final, to_left = {}, {}
    leftover = {i: 0 for i in range(1, k + 1)}
    for c in sorted(removed):
        rest = ledger.nu(*c) - removed[c]
        if rest < target:
            msg = f"cluster {c} ends with {rest} non-red vertices, below the target {target}"
            if ledger.zeta >= (ledger.d_prime / 4) ** 2:
                raise ParameterError(msg + "; sqrt(zeta) < d'/4 does not hold")
            raise InvariantError(msg)
        to_left[c] = rest - target
        final[c] = target
        leftover[c[0]] += rest - target
    cap = ledger.leftover_cap()
    for i, size in leftover.items():
        if size > cap:
            raise InvariantError(f"new leftover of part {i} has {size} vertices, above 3 h zeta n = {cap}")
    return BalancePlan(removed, final, to_left, leftover, D0, q, aux, tiles)


def receptacle_remainder(n: int, h: int) -> int:
    """Non-red vertices to drop from each receptacle cluster: n - h*floor(n/h)."""
    if n < 1 or h < 1:
        raise ParameterError("n and h must be positive")
    return n - h * (n // h)


def synthetic_ledger(cs: ColumnStructure, L: int, h: int, d_prime, zeta, eps_prime, gamma, seed: int) -> ClusterLedger:
    """Ledger with random balanced non-red counts and random red counts."""
    k, ell = cs.k, cs.ell
    ledger = ClusterLedger(k, ell, L, h, d_prime, zeta, eps_prime, gamma, n=0)
    nu = random_nu(ledger, seed)
    rng = random.Random(seed + 10**6)
    red_cap = math.isqrt(int(ledger.zeta * L * L))
    red_col1 = rng.randint(0, red_cap)
    for i in range(1, k + 1):
        ledger.counts[(i, 1)] = ClusterCounts(L, red_col1, 0)
        for j in range(2, ell + 1):
            red = rng.randint(0, red_cap)
            ledger.counts[(i, j)] = ClusterCounts(nu[(i, j)] + red, red, 0)
        ledger.leftover[i] = 0
    ledger.n = max(sum(c.total for (i, _), c in ledger.counts.items() if i == p) for p in range(1, k + 1))
    return ledger


# ---------------------------------------------------------------------------
# experiment harness


SCENARIOS = ("tau-sweep", "gap-witness", "slicing", "pipeline-demo")

CSV_COLUMNS = {
    "tau-sweep": ["seed", "delta", "tau_num", "tau_den", "tiled"],
    "gap-witness": ["k", "n", "min_degree", "tau", "tiled"],
    "slicing": ["trial", "failures", "good_pair_min", "bound"],
    "pipeline-demo": ["part", "column", "multiplicity", "removed", "to_leftover", "final"],
}


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _tau_sweep(cfg: dict):
    k, n = int(cfg["k"]), int(cfg["n"])
    deltas = cfg.get("deltas") or list(range(ceil((k - 1) * n / k), n + 1))
    seeds = cfg.get("seeds", [0])
    caps = cfg.get("caps", {})
    tile_cap = int(caps.get("tile", 36))
    rows, partial = [], False
    for delta in deltas:
        for seed in seeds:
            g = random_min_degree_graph(k, n, int(delta), seed)
            tau, _, _ = fractional_tiling_number(g, cap=int(caps.get("cliques", 5_000_000)))
            try:
                tiled = "yes" if perfect_clique_tiling(g, cap=tile_cap) else "no"
            except CapacityError:
                tiled, partial = "capacity", True
            rows.append({"seed": seed, "delta": delta, "tau_num": tau.numerator,
                         "tau_den": tau.denominator, "tiled": tiled})
    return rows, {"instances": len(rows), "partial": partial}


def _gap_witness(cfg: dict):
    k = int(cfg.get("k", 3))
    ns = cfg.get("ns") or ([int(cfg["n"])] if "n" in cfg else [k, 2 * k])
    rows = []
    for n in ns:
        g = catlin_graph(k, int(n))
        delta, _ = min_bipartite_degree(g)
        tau, _, _ = fractional_tiling_number(g)
        tiled = perfect_clique_tiling(g, cap=int(cfg.get("caps", {}).get("tile", 36)))
        rows.append({"k": k, "n": n, "min_degree": delta, "tau": str(tau), "tiled": "yes" if tiled else "no"})
    return rows, {"instances": len(rows)}


def _slicing(cfg: dict):
    from .regkit import random_slicing_experiment

    rep = random_slicing_experiment(
        int(cfg.get("L", 2000)), int(cfg.get("Lprime", 500)), Fraction(str(cfg.get("d", "1/2"))),
        Fraction(str(cfg.get("eps", "3/10"))), int(cfg.get("trials", 100)), int(cfg.get("seed", 1)),
    )
    summary = {
        "failure_rate": rep.failure_rate,
        "bound": rep.bound.aggregate,
        "bound_exponent": fmt(rep.bound.aggregate_exponent),
        "threshold": fmt(rep.threshold),
        "flags": rep.flags,
    }
    return rep.to_csv_rows(), summary


def _pipeline_demo(cfg: dict):
    k = int(cfg.get("k", 3))
    ell = int(cfg.get("ell", 3))
    h = int(cfg.get("h", 2))
    L = int(cfg.get("Lprime", 12800))
    gamma = Fraction(str(cfg.get("gamma", "1/2")))
    d_prime = Fraction(str(cfg.get("d_prime", "4/5")))
    zeta = Fraction(str(cfg.get("zeta", "1/64")))
    eps_prime = Fraction(str(cfg.get("eps_prime", "1/1000")))
    seed = int((cfg.get("seeds") or [0])[0])
    g_r = KPartiteGraph.complete(k, ell)
    cs = ColumnStructure.find(g_r)
    reach_ok = 0
    if ell >= 2 * k:
        for i in range(1, k + 1):
            for j in range(2, ell + 1):
                t1, t2 = reach(cs, i, j)
                reach_ok += bool(verify_reach(cs, i, j, t1, t2))
    tau, primal, _ = fractional_tiling_number(g_r)
    D = common_denominator(primal)
    big, tiling = tiling_from_fractional(g_r, primal, D)
    ledger = synthetic_ledger(cs, L, h, d_prime, zeta, eps_prime, gamma, seed)
    plan = balance_columns(cs, ledger)
    summary = {
        "tau": fmt(tau),
        "blowup_tiles": len(tiling),
        "blowup_verified": bool(verify_tiling(big, tiling, 1)),
        "reach_pairs_verified": reach_ok,
        "D0": plan.D0,
        "target": ledger.target,
        "leftover": {str(i): s for i, s in plan.leftover.items()},
        "leftover_cap": fmt(ledger.leftover_cap()),
        "receptacle_remainder": receptacle_remainder(ledger.n, h),
    }
    return plan.to_rows(), summary


_RUNNERS = {
    "tau-sweep": _tau_sweep,
    "gap-witness": _gap_witness,
    "slicing": _slicing,
    "pipeline-demo": _pipeline_demo,
}


def run_experiment(config: dict, out: str | Path | None = None) -> dict:
    """Run the scenarios named in ``config`` and write CSV + JSON reports.

    ``config["scenario"]`` names one scenario; ``config["scenarios"]`` may
    list several (each entry a name or a dict overriding top-level keys).
    Files go to ``out`` (or ``config["out"]``): ``<scenario>.csv`` per
    scenario and one ``report.json``.
    """
    if not isinstance(config, dict):
        raise ParameterError("config must be a JSON object")
    if "scenarios" in config:
        entries = config["scenarios"]
    elif "scenario" in config:
        entries = [config["scenario"]]
    else:
        raise ParameterError("config names no scenario")
    if not isinstance(entries, list):
        raise ParameterError("'scenarios' must be a list")
    base = {key: v for key, v in config.items() if key not in ("scenario", "scenarios")}
    out = out if out is not None else config.get("out")
    report = {"scenarios": []}
    csvs = {}
    for entry in entries:
        cfg = dict(base)
        if isinstance(entry, dict):
            cfg.update(entry)
            name = entry.get("scenario")
        else:
            name = entry
        if name not in _RUNNERS:
            raise ParameterError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
        try:
            rows, summary = _RUNNERS[name](cfg)
        except KeyError as exc:
            raise ParameterError(f"scenario {name} needs config key {exc}") from None
        csvs[name] = _csv(CSV_COLUMNS[name], rows)
        report["scenarios"].append({"scenario": name, "rows": len(rows), "summary": summary})
    if out is not None:
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        for name, text in csvs.items():
            (path / f"{name}.csv").write_text(text)
        (path / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    report["csv"] = csvs
    return report
