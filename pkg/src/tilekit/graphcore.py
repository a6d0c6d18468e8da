"""Balanced k-partite graphs, bipartite degree profiles and standard constructions.

Vertices are addressed as ``VertexRef(part, index)`` with both coordinates
1-based.  Internally every vertex gets a flat id ``(part-1)*n + (index-1)`` and
its neighbourhood is one Python ``int`` used as a bitset over flat ids, so the
neighbours of ``v`` inside part ``j`` are a contiguous ``n``-bit window.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from itertools import product
from typing import Iterable, NamedTuple, Sequence


class GraphError(ValueError):
    """Raised when a graph cannot be built from the given parameters."""


class VertexRef(NamedTuple):
    part: int
    index: int

    def __str__(self) -> str:
        return f"({self.part},{self.index})"


@dataclass(frozen=True)
class DegreeProfile:
    """Minimum degree of ``V_i`` into ``V_j`` for every ordered part pair."""

    entries: dict

    @property
    def minimum(self) -> int:
        return min(self.entries.values()) if self.entries else 0

    def __getitem__(self, pair):
        return self.entries[pair]


class KPartiteGraph:
    """Immutable balanced k-partite graph with bitset adjacency."""

    __slots__ = ("k", "n", "_adj", "_mask")

    def __init__(self, k: int, n: int, adjacency: Sequence[int]):
        if k < 2:
            raise GraphError(f"need at least 2 parts, got k={k}")
        if n < 1:
            raise GraphError(f"need at least 1 vertex per part, got n={n}")
        if len(adjacency) != k * n:
            raise GraphError("adjacency length does not match k*n")
        self.k = k
        self.n = n
        self._adj = tuple(adjacency)
        self._mask = (1 << n) - 1

    # -- construction -----------------------------------------------------

    @classmethod
    def new_balanced(cls, k: int, n: int, edges: Iterable) -> "KPartiteGraph":
        """Build a graph from an edge list of ``((i, a), (j, b))`` pairs.

        Duplicate edges (in either orientation) are collapsed.
        """
        if k < 2 or n < 1:
            raise GraphError(f"invalid dimensions k={k}, n={n}")
        adj = [0] * (k * n)
        for e in edges:
            try:
                u, v = e
                u = VertexRef(*map(int, u))
                v = VertexRef(*map(int, v))
            except (TypeError, ValueError):
                raise GraphError(f"malformed edge {e!r}") from None
            for w in (u, v):
                if not (1 <= w.part <= k and 1 <= w.index <= n):
                    raise GraphError(f"vertex {w} out of range in edge ({u}, {v})")
            if u.part == v.part:
                raise GraphError(f"edge ({u}, {v}) joins two vertices of part {u.part}")
            a = (u.part - 1) * n + u.index - 1
            b = (v.part - 1) * n + v.index - 1
            adj[a] |= 1 << b
            adj[b] |= 1 << a
        return cls(k, n, adj)

    @classmethod
    def complete(cls, k: int, n: int) -> "KPartiteGraph":
        full = (1 << (k * n)) - 1
        part = (1 << n) - 1
        adj = [full & ~(part << (p * n)) for p in range(k) for _ in range(n)]
        return cls(k, n, adj)

    @classmethod
    def empty(cls, k: int, n: int) -> "KPartiteGraph":
        return cls(k, n, [0] * (k * n))

    @classmethod
    def from_bitsets(cls, k: int, n: int, adjacency: Sequence[int]) -> "KPartiteGraph":
        """Trusted constructor; checks symmetry and the no-intra-part-edge rule."""
        g = cls(k, n, adjacency)
        g.check_invariants()
        return g

    def check_invariants(self) -> None:
        k, n = self.k, self.n
        for a, bits in enumerate(self._adj):
            p = a // n
            if bits >> (k * n):
                raise GraphError(f"vertex {self.ref(a)} has neighbours outside the graph")
            if (bits >> (p * n)) & self._mask:
                raise GraphError(f"vertex {self.ref(a)} has a neighbour in its own part")
            rest = bits
            while rest:
                low = rest & -rest
                b = low.bit_length() - 1
                if not (self._adj[b] >> a) & 1:
                    raise GraphError(f"asymmetric edge {self.ref(a)}-{self.ref(b)}")
                rest ^= low

    # -- addressing -------------------------------------------------------

    def vid(self, v: VertexRef) -> int:
        part, index = v
        if not (1 <= part <= self.k and 1 <= index <= self.n):
            raise GraphError(f"vertex {tuple(v)} not in graph with k={self.k}, n={self.n}")
        return (part - 1) * self.n + index - 1

    def ref(self, vid: int) -> VertexRef:
        return VertexRef(vid // self.n + 1, vid % self.n + 1)

    def vertices(self):
        return [VertexRef(p, i) for p in range(1, self.k + 1) for i in range(1, self.n + 1)]

    def part_vertices(self, part: int):
        return [VertexRef(part, i) for i in range(1, self.n + 1)]

    # -- queries ----------------------------------------------------------

    def adjacent(self, u: VertexRef, v: VertexRef) -> bool:
        return bool((self._adj[self.vid(u)] >> self.vid(v)) & 1)

    def neighbour_bits(self, v: VertexRef, part: int) -> int:
        """Neighbours of ``v`` inside ``part`` as an ``n``-bit mask (bit i = index i+1)."""
        return (self._adj[self.vid(v)] >> ((part - 1) * self.n)) & self._mask

    def neighbours(self, v: VertexRef, part: int):
        bits = self.neighbour_bits(v, part)
        return [VertexRef(part, i + 1) for i in range(self.n) if (bits >> i) & 1]

    def degree(self, v: VertexRef, part: int) -> int:
        return self.neighbour_bits(v, part).bit_count()

    def degree_into(self, v: VertexRef, vertices: Iterable[VertexRef]) -> int:
        a = self.vid(v)
        return sum((self._adj[a] >> self.vid(w)) & 1 for w in vertices)

    def edges(self):
        """Edges listed once with the lexicographically smaller endpoint first."""
        out = []
        for a, bits in enumerate(self._adj):
            rest = bits >> (a + 1)
            b = a + 1
            while rest:
                if rest & 1:
                    out.append((self.ref(a), self.ref(b)))
                rest >>= 1
                b += 1
        return out

    def edge_count(self) -> int:
        return sum(bits.bit_count() for bits in self._adj) // 2

    def induced(self, parts: Sequence[Sequence[VertexRef]]) -> "KPartiteGraph":
        """Subgraph induced on equal-size vertex lists, one list per new part."""
        m = len(parts[0])
        if any(len(p) != m for p in parts):
            raise GraphError("induced subgraph needs equal-size part lists")
        ids = [self.vid(v) for p in parts for v in p]
        pos = {a: i for i, a in enumerate(ids)}
        adj = []
        for a in ids:
            bits = 0
            for b, i in pos.items():
                if (self._adj[a] >> b) & 1:
                    bits |= 1 << i
            adj.append(bits)
        return KPartiteGraph(len(parts), m, adj)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, KPartiteGraph)
            and (self.k, self.n, self._adj) == (other.k, other.n, other._adj)
        )

    def __hash__(self) -> int:
        return hash((self.k, self.n, self._adj))

    def __repr__(self) -> str:
        return f"KPartiteGraph(k={self.k}, n={self.n}, edges={self.edge_count()})"

    # -- serialisation ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "edges": [[list(u), list(v)] for u, v in self.edges()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "KPartiteGraph":
        try:
            return cls.new_balanced(int(data["k"]), int(data["n"]), data["edges"])
        except KeyError as exc:
            raise GraphError(f"graph document missing field {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "KPartiteGraph":
        return cls.from_dict(json.loads(text))


def load_graph(path) -> KPartiteGraph:
    with open(path) as fh:
        return KPartiteGraph.from_dict(json.load(fh))


def save_graph(g: KPartiteGraph, path) -> None:
    with open(path, "w") as fh:
        json.dump(g.to_dict(), fh)


def min_bipartite_degree(g: KPartiteGraph) -> tuple[int, DegreeProfile]:
    """Return the minimum bipartite degree and the full per-pair profile."""
    entries = {}
    for i in range(1, g.k + 1):
        for j in range(1, g.k + 1):
            if i != j:
                entries[(i, j)] = min(g.degree(v, j) for v in g.part_vertices(i))
    prof = DegreeProfile(entries)
    return prof.minimum, prof


def blow_up(g: KPartiteGraph, t: int) -> KPartiteGraph:
    """Replace every vertex by ``t`` independent copies and every edge by K_{t,t}.

    Vertex ``(i, j)`` becomes ``(i, (j-1)t+1) .. (i, jt)``.
    """
    if t < 1:
        raise GraphError(f"blow-up factor must be >= 1, got {t}")
    k, n = g.k, g.n
    N = n * t
    adj = []
    for p in range(1, k + 1):
        for j in range(1, n + 1):
            bits = 0
            v = VertexRef(p, j)
            for q in range(1, k + 1):
                if q == p:
                    continue
                nb = g.neighbour_bits(v, q)
                block = 0
                for i in range(n):
                    if (nb >> i) & 1:
                        block |= ((1 << t) - 1) << (i * t)
                bits |= block << ((q - 1) * N)
            adj.extend([bits] * t)
    return KPartiteGraph(k, N, adj)


def catlin_graph(k: int, n: int) -> KPartiteGraph:
    """Catlin's type-2 graph on parts of size ``n`` (needs k >= 3 and k | n).

    In the base graph on ``h_{ij}`` (row i = part, column j), two vertices in
    different rows are adjacent when they share one of the last two columns, or
    sit in distinct columns at least one of which is among the first k-2.
    """
    if k < 3:
        raise GraphError(f"Catlin graphs need k >= 3, got k={k}")
    if n % k:
        raise GraphError(f"Catlin graphs need k | n, got k={k}, n={n}")
    edges = []
    for i, j, i2, j2 in product(range(1, k + 1), repeat=4):
        if i >= i2:
            continue
        if j == j2:
            ok = j >= k - 1
        else:
            ok = j <= k - 2 or j2 <= k - 2
        if ok:
            edges.append(((i, j), (i2, j2)))
    return blow_up(KPartiteGraph.new_balanced(k, k, edges), n // k)


def random_min_degree_graph(
    k: int, n: int, target: int, seed: int, budget: int | None = None
) -> KPartiteGraph:
    """Random balanced graph with minimum bipartite degree at least ``target``.

    Starts from the complete k-partite graph and walks the cross edges in a
    seeded random order, deleting each one whose removal keeps both endpoints
    at degree >= target into the other's part.  Degrees only decrease, so one
    pass leaves no deletable edge.  ``budget`` caps the number of deletions.
    """
    if not 0 <= target <= n:
        raise GraphError(f"target degree {target} outside [0, {n}]")
    rng = random.Random(seed)
    g = KPartiteGraph.complete(k, n)
    adj = list(g._adj)
    deg = {(a, q): n for a in range(k * n) for q in range(k) if q != a // n}
    pairs = [(a, b) for a in range(k * n) for b in range(a + 1, k * n) if a // n != b // n]
    rng.shuffle(pairs)
    removed = 0
    for a, b in pairs:
        if budget is not None and removed >= budget:
            break
        pa, pb = a // n, b // n
        if deg[(a, pb)] > target and deg[(b, pa)] > target:
            adj[a] &= ~(1 << b)
            adj[b] &= ~(1 << a)
            deg[(a, pb)] -= 1
            deg[(b, pa)] -= 1
            removed += 1
    return KPartiteGraph(k, n, adj)


def random_graph(k: int, n: int, p: float, seed: int) -> KPartiteGraph:
    """Each cross pair is an edge independently with probability ``p``."""
    import numpy as np

    rng = np.random.default_rng(seed)
    adj = [0] * (k * n)
    for a in range(k):
        for b in range(a + 1, k):
            block = rng.random((n, n)) < p
            for x in range(n):
                row = block[x]
                bits = int.from_bytes(np.packbits(row[::-1]).tobytes(), "big") >> (
                    (-n) % 8
                )
                adj[a * n + x] |= bits << (b * n)
            for y in range(n):
                col = block[:, y]
                bits = int.from_bytes(np.packbits(col[::-1]).tobytes(), "big") >> (
                    (-n) % 8
                )
                adj[b * n + y] |= bits << (a * n)
    return KPartiteGraph(k, n, adj)
