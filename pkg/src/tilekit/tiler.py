"""Integral tilings: exact-cover search, bipartite matching and blow-up tilings."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .cliques import CapacityError, enumerate_transversal_cliques
from .errors import ParameterError
from .graphcore import GraphError, KPartiteGraph, VertexRef, blow_up
from .lp import LPSolution

DEFAULT_TILE_CAP = 36


@dataclass
class Tiling:
    """Vertex-disjoint tiles; each tile is a sorted tuple of vertices.

    ``h`` is the number of vertices per part in every tile (1 for K_k tiles).
    ``deficiency`` is set only for partial tilings and says what is missing.
    """

    tiles: list
    h: int = 1
    deficiency: dict | None = None

    def __len__(self) -> int:
        return len(self.tiles)

    def covered(self) -> set:
        return {v for t in self.tiles for v in t}

    def to_dict(self) -> dict:
        d = {"h": self.h, "tiles": [[list(v) for v in t] for t in self.tiles]}
        if self.deficiency is not None:
            d["deficiency"] = self.deficiency
        return d


def _tile(vertices) -> tuple:
    return tuple(sorted(VertexRef(*v) for v in vertices))


# ---------------------------------------------------------------------------
# exact cover


def perfect_clique_tiling(
    g: KPartiteGraph,
    cap: int = DEFAULT_TILE_CAP,
    heuristic: bool = False,
    timeout: float | None = None,
) -> Tiling | None:
    """A perfect K_k-tiling of ``g`` or ``None`` once the search tree is exhausted.

    Branches on the lexicographically least uncovered vertex.  With
    ``heuristic=True`` it branches on the uncovered vertex with the fewest
    usable cliques instead, which is faster but visits tilings in a
    different order.  Hitting ``timeout`` (seconds) raises
    :class:`CapacityError`, never a false "none".
    """
    k, n = g.k, g.n
    if k * n > cap:
        raise CapacityError(f"{k * n} vertices exceed the tiling search cap {cap}")
    cliques = enumerate_transversal_cliques(g)
    masks = [sum(1 << g.vid(v) for v in c.vertices) for c in cliques]
    through: list[list[int]] = [[] for _ in range(k * n)]
    for t, c in enumerate(cliques):
        for v in c.vertices:
            through[g.vid(v)].append(t)
    full = (1 << (k * n)) - 1
    deadline = None if timeout is None else time.monotonic() + timeout
    chosen: list[int] = []
    steps = 0

    def pick(covered: int) -> int:
        free = full & ~covered
        if not heuristic:
            return (free & -free).bit_length() - 1
        best, best_count = -1, None
        while free:
            low = free & -free
            v = low.bit_length() - 1
            free ^= low
            count = sum(1 for t in through[v] if not masks[t] & covered)
            if best_count is None or count < best_count:
                best, best_count = v, count
                if count == 0:
                    break
        return best

    def search(covered: int) -> bool:
        nonlocal steps
        if covered == full:
            return True
        steps += 1
        if deadline is not None and steps % 1024 == 0 and time.monotonic() > deadline:
            raise CapacityError(f"tiling search timed out after {timeout} s")
        v = pick(covered)
        for t in through[v]:
            if not masks[t] & covered:
                chosen.append(t)
                if search(covered | masks[t]):
                    return True
                chosen.pop()
        return False

    if not search(0):
        return None
    return Tiling([_tile(cliques[t].vertices) for t in sorted(chosen)], h=1)


def perfect_multipartite_tiling(
    g: KPartiteGraph, h: int, cap: int = DEFAULT_TILE_CAP, timeout: float | None = None
) -> Tiling | None:
    """``n // h`` disjoint copies of K_h^k, or ``None`` after exhaustive search.

    Tiles are canonical: every h-subset is sorted and tiles are ordered by
    their least part-1 vertex, so each tiling is reached once.
    """
    if h < 1:
        raise ParameterError(f"h must be >= 1, got {h}")
    if h == 1:
        return perfect_clique_tiling(g, cap=cap, timeout=timeout)
    k, n = g.k, g.n
    count = n // h
    if h * k * count > cap:
        raise CapacityError(f"{h * k * count} tiled vertices exceed the search cap {cap}")
    if count == 0:
        return Tiling([], h=h)
    deadline = None if timeout is None else time.monotonic() + timeout
    nb = [
        [[g.neighbour_bits(VertexRef(p + 1, x + 1), q + 1) for q in range(k)] for x in range(n)]
        for p in range(k)
    ]
    full = (1 << n) - 1
    free = [full] * k
    tiles: list[tuple] = []
    steps = 0

    def bits(mask: int) -> list[int]:
        out = []
        while mask:
            low = mask & -mask
            out.append(low.bit_length() - 1)
            mask ^= low
        return out

    def fill(p: int, cand: list[int], parts: list[tuple], first: bool = False) -> bool:
        # choose the h-subset of part p+1 among cand[p], then recurse
        nonlocal steps
        if first:
            cand = list(cand)
            for q in range(1, k):
                for x in parts[0]:
                    cand[q] &= nb[0][x][q]
                if cand[q].bit_count() < h:
                    return False
        if p == k:
            tiles.append(tuple(parts))
            for q, s in enumerate(parts):
                for x in s:
                    free[q] &= ~(1 << x)
            if place(len(tiles)):
                return True
            for q, s in enumerate(parts):
                for x in s:
                    free[q] |= 1 << x
            tiles.pop()
            return False
        for s in combinations(bits(cand[p]), h):
            steps += 1
            if deadline is not None and steps % 1024 == 0 and time.monotonic() > deadline:
                raise CapacityError(f"tiling search timed out after {timeout} s")
            nxt = list(cand)
            ok = True
            for q in range(p + 1, k):
                for x in s:
                    nxt[q] &= nb[p][x][q]
                if nxt[q].bit_count() < h:
                    ok = False
                    break
            if ok and fill(p + 1, nxt, parts + [s]):
                return True
        return False

    def place(done: int) -> bool:
        if done == count:
            return True
        avail = free[0]
        if not avail:
            return False
        # the least free part-1 vertex either opens the next tile or is skipped
        v = (avail & -avail).bit_length() - 1
        for others in combinations(bits(avail & ~(1 << v)), h - 1):
            s = (v,) + others
            if fill(1, [0] + free[1:], [s], first=True):
                return True
        rest = avail & ~(1 << v)
        if rest.bit_count() < h * (count - done):
            return False
        free[0] = rest
        found = place(done)
        free[0] |= 1 << v
        return found

    if not place(0):
        return None
    out = []
    for parts in sorted(tiles):
        out.append(_tile(VertexRef(q + 1, x + 1) for q, s in enumerate(parts) for x in s))
    return Tiling(out, h=h)


# ---------------------------------------------------------------------------
# bipartite matching


@dataclass
class MatchingResult:
    """Either a perfect matching or a Hall violator ``S`` with ``|N(S)| < |S|``."""

    matching: Tiling | None
    violator: list | None = None
    neighbourhood: list | None = None

    def __bool__(self) -> bool:
        return self.matching is not None


def bipartite_perfect_matching(g: KPartiteGraph) -> MatchingResult:
    """Augmenting-path matching on a balanced bipartite graph."""
    if g.k != 2:
        raise ParameterError(f"bipartite matching needs k = 2, got k={g.k}")
    n = g.n
    adj = [g.neighbours(VertexRef(1, a + 1), 2) for a in range(n)]
    adj = [[v.index - 1 for v in row] for row in adj]
    match_right = [-1] * n

    def augment(u: int, seen: list) -> bool:
        for w in adj[u]:
            if not seen[w]:
                seen[w] = True
                if match_right[w] < 0 or augment(match_right[w], seen):
                    match_right[w] = u
                    return True
        return False

    for u in range(n):
        seen = [False] * n
        if not augment(u, seen):
            # the alternating tree grown from u is a Hall violator
            left = {u} | {match_right[w] for w in range(n) if seen[w]}
            s = sorted(VertexRef(1, a + 1) for a in left)
            ns = sorted(VertexRef(2, w + 1) for w in range(n) if seen[w])
            return MatchingResult(None, s, ns)
    tiles = [(VertexRef(1, match_right[w] + 1), VertexRef(2, w + 1)) for w in range(n)]
    return MatchingResult(Tiling(sorted(tiles), h=1))


def hall_violation(g: KPartiteGraph, s) -> bool:
    """True iff the part-1 set ``s`` has fewer neighbours than elements."""
    nbhd = 0
    for v in s:
        nbhd |= g.neighbour_bits(VertexRef(*v), 2)
    return nbhd.bit_count() < len(set(s))


# ---------------------------------------------------------------------------
# blow-up tiling from a fractional optimum


def tiling_from_fractional(g_r: KPartiteGraph, primal: LPSolution, D: int):
    """Blow ``g_r`` up by ``D`` and read a K_k-tiling off the weights.

    Each clique ``T`` with weight ``w`` receives ``D*w`` fresh copies from
    every blown-up class it touches.  Returns ``(blow_up, tiling)``; when
    the weights sum to less than ``n`` the tiling is partial and carries a
    deficiency report.
    """
    if D < 1:
        raise ParameterError(f"D must be a positive integer, got {D}")
    big = blow_up(g_r, D)
    used = {v: 0 for v in g_r.vertices()}
    tiles = []
    for c, w in zip(primal.lp.var_labels, primal.values):
        w = Fraction(w)
        if w < 0:
            raise ParameterError(f"negative weight {w} on clique {c}")
        copies = w * D
        if copies.denominator != 1:
            raise ParameterError(f"D*w = {copies} is not integral for clique {c}")
        for _ in range(int(copies)):
            tile = []
            for v in c.vertices:
                used[v] += 1
                if used[v] > D:
                    raise ParameterError(f"weights overload vertex {v}")
                tile.append(VertexRef(v.part, (v.index - 1) * D + used[v]))
            tiles.append(_tile(tile))
    tiling = Tiling(tiles, h=1)
    if len(tiles) < D * g_r.n:
        tiling.deficiency = {
            "tiles": len(tiles),
            "required": D * g_r.n,
            "uncovered": sum(D - u for u in used.values()),
        }
    return big, tiling


# ---------------------------------------------------------------------------
# verification


@dataclass
class TilingCheck:
    ok: bool
    reason: str = ""
    witness: tuple = field(default_factory=tuple)

    def __bool__(self) -> bool:
        return self.ok


def verify_tiling(g: KPartiteGraph, t: Tiling, h: int | None = None) -> TilingCheck:
    """Disjointness, completeness of every tile, and the tile count ``n // h``."""
    h = t.h if h is None else h
    seen: set = set()
    for tile in t.tiles:
        per_part: dict[int, int] = {}
        for v in tile:
            try:
                g.vid(v)
            except GraphError:
                return TilingCheck(False, "vertex outside the graph", (v,))
            if v in seen:
                return TilingCheck(False, "vertex used twice", (v,))
            seen.add(v)
            per_part[v.part] = per_part.get(v.part, 0) + 1
        if any(per_part.get(p, 0) != h for p in range(1, g.k + 1)):
            return TilingCheck(False, f"tile does not have {h} vertices per part", tuple(tile))
        for a, u in enumerate(tile):
            for v in tile[a + 1 :]:
                if u.part != v.part and not g.adjacent(u, v):
                    return TilingCheck(False, "missing adjacency", (u, v))
    want = g.n // h
    if len(t.tiles) != want:
        return TilingCheck(False, f"{len(t.tiles)} tiles, expected {want}")
    return TilingCheck(True)
