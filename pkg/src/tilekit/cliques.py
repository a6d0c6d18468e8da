"""Transversal K_k enumeration (one vertex per part) by bitset backtracking."""

from __future__ import annotations

from typing import NamedTuple

from .graphcore import KPartiteGraph, VertexRef

DEFAULT_CLIQUE_CAP = 5_000_000


class CapacityError(RuntimeError):
    """The instance is too large for an exact computation under the configured cap."""


class Clique(NamedTuple):
    """A transversal clique; ``vertices[p]`` lies in part ``p + 1``."""

    vertices: tuple

    def __contains__(self, v) -> bool:
        v = VertexRef(*v)
        return 1 <= v.part <= len(self.vertices) and self.vertices[v.part - 1] == v

    @property
    def indices(self) -> tuple:
        return tuple(v.index for v in self.vertices)

    def to_list(self) -> list:
        return [list(v) for v in self.vertices]

    def __str__(self) -> str:
        return "{" + ",".join(str(v) for v in self.vertices) + "}"


def enumerate_transversal_cliques(
    g: KPartiteGraph, cap: int = DEFAULT_CLIQUE_CAP
) -> list[Clique]:
    """Every transversal K_k of ``g`` exactly once, in lexicographic order."""
    k, n = g.k, g.n
    full = (1 << n) - 1
    # nb[p][x][q]: neighbours of (p+1, x+1) in part q+1 as an n-bit mask
    nb = [
        [[g.neighbour_bits(VertexRef(p + 1, x + 1), q + 1) for q in range(k)] for x in range(n)]
        for p in range(k)
    ]
    out: list[Clique] = []
    chosen = [0] * k

    def extend(p: int, cands: list[int]) -> None:
        bits = cands[p]
        while bits:
            low = bits & -bits
            x = low.bit_length() - 1
            bits ^= low
            chosen[p] = x
            if p == k - 1:
                if len(out) >= cap:
                    raise CapacityError(
                        f"more than {cap} transversal cliques; instance too large for the exact LP"
                    )
                out.append(Clique(tuple(VertexRef(q + 1, chosen[q] + 1) for q in range(k))))
                continue
            row = nb[p][x]
            nxt = cands[: p + 1] + [cands[q] & row[q] for q in range(p + 1, k)]
            if all(nxt[q] for q in range(p + 1, k)):
                extend(p + 1, nxt)

    extend(0, [full] * k)
    return out


def cliques_through_vertex(g: KPartiteGraph, v, all_cliques) -> list[Clique]:
    """The cliques of ``all_cliques`` that contain ``v``, order preserved."""
    v = VertexRef(*v)
    g.vid(v)
    return [c for c in all_cliques if c.vertices[v.part - 1] == v]
