"""Regularity-method primitives on bipartite pairs.

Densities and all thresholds are exact.  Regularity is certified either by
exhaustive search (at most 14 vertices per side) or by the good-pairs count
criterion, whose parameter is the radical (16 eps)^(1/5); that radical is
carried as an exact :class:`RationalRoot` rather than rounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from itertools import combinations
from typing import Sequence

import numpy as np

from .cliques import CapacityError
from .errors import ParameterError
from .graphcore import KPartiteGraph, VertexRef
from .lp import as_rational

EXACT_CAP = 14


# ---------------------------------------------------------------------------
# exact radicals


@total_ordering
class RationalRoot:
    """The real number ``radicand ** (1/degree)`` for a nonnegative rational radicand.

    Comparisons against rationals and other roots are exact (both sides are
    raised to a common power).  Multiplying or dividing by a positive
    rational stays inside the class.
    """

    __slots__ = ("radicand", "degree")

    def __init__(self, radicand, degree: int):
        radicand = as_rational(radicand)
        if radicand < 0 or degree < 1:
            raise ParameterError("need a nonnegative radicand and a positive degree")
        self.radicand = Fraction(radicand)
        self.degree = degree

    def _key(self, other):
        if isinstance(other, RationalRoot):
            return self.radicand ** other.degree, other.radicand ** self.degree
        other = as_rational(other)
        if other < 0:
            return 1, -1
        return self.radicand, Fraction(other) ** self.degree

    def __eq__(self, other) -> bool:
        try:
            a, b = self._key(other)
        except (TypeError, ValueError):
            return NotImplemented
        return a == b

    def __lt__(self, other) -> bool:
        a, b = self._key(other)
        return a < b

    def __hash__(self) -> int:
        return hash((self.radicand, self.degree))

    def __mul__(self, q):
        q = as_rational(q)
        if q < 0:
            raise ParameterError("roots are only scaled by nonnegative rationals")
        return RationalRoot(self.radicand * Fraction(q) ** self.degree, self.degree)

    __rmul__ = __mul__

    def __truediv__(self, q):
        return self * (1 / Fraction(as_rational(q)))

    def __float__(self) -> float:
        return float(self.radicand) ** (1.0 / self.degree)

    def exact(self) -> Fraction | None:
        """The rational value when the root happens to be rational."""
        num = _int_root(self.radicand.numerator, self.degree)
        den = _int_root(self.radicand.denominator, self.degree)
        return Fraction(num, den) if num is not None and den is not None else None

    def __repr__(self) -> str:
        return f"({self.radicand})^(1/{self.degree})"


def _int_root(x: int, k: int) -> int | None:
    r = round(x ** (1.0 / k)) if x else 0
    for c in (r - 1, r, r + 1):
        if c >= 0 and c**k == x:
            return c
    return None


def kr_parameter(eps) -> RationalRoot:
    """(16 eps)^(1/5), the regularity parameter of a good-pairs certificate."""
    return RationalRoot(16 * Fraction(as_rational(eps)), 5)


def _eps(eps):
    return eps if isinstance(eps, RationalRoot) else Fraction(as_rational(eps))


def _min(a, b):
    return a if a <= b else b


def _max(a, b):
    return a if a >= b else b


# ---------------------------------------------------------------------------
# pairs


class BipartitePair:
    """Biadjacency matrix between two labelled vertex sets ``A`` and ``B``."""

    __slots__ = ("A", "B", "M")

    def __init__(self, A: Sequence, B: Sequence, M):
        M = np.asarray(M, dtype=np.int64)
        if M.shape != (len(A), len(B)):
            raise ParameterError(f"matrix shape {M.shape} does not match |A|={len(A)}, |B|={len(B)}")
        if not len(A) or not len(B):
            raise ParameterError("both sides of a pair must be nonempty")
        if set(A) & set(B):
            raise ParameterError("the two sides of a pair must be disjoint")
        if M.size and (M.min() < 0 or M.max() > 1):
            raise ParameterError("biadjacency entries must be 0 or 1")
        self.A, self.B, self.M = tuple(A), tuple(B), M

    @classmethod
    def from_matrix(cls, M) -> "BipartitePair":
        M = np.asarray(M, dtype=np.int64)
        a, b = M.shape
        return cls([("A", i) for i in range(a)], [("B", j) for j in range(b)], M)

    @classmethod
    def from_graph(cls, g: KPartiteGraph, A: Sequence, B: Sequence) -> "BipartitePair":
        A = [VertexRef(*v) for v in A]
        B = [VertexRef(*v) for v in B]
        M = np.zeros((len(A), len(B)), dtype=np.int64)
        for r, u in enumerate(A):
            row = g._adj[g.vid(u)]
            for c, v in enumerate(B):
                M[r, c] = (row >> g.vid(v)) & 1
        return cls(A, B, M)

    @property
    def shape(self) -> tuple[int, int]:
        return self.M.shape

    def edges(self) -> int:
        return int(self.M.sum())

    def sub(self, rows: Sequence[int], cols: Sequence[int]) -> "BipartitePair":
        rows, cols = list(rows), list(cols)
        return BipartitePair(
            [self.A[r] for r in rows], [self.B[c] for c in cols], self.M[np.ix_(rows, cols)]
        )

    def transpose(self) -> "BipartitePair":
        return BipartitePair(self.B, self.A, self.M.T)

    def degrees_a(self) -> np.ndarray:
        return self.M.sum(axis=1)

    def degrees_b(self) -> np.ndarray:
        return self.M.sum(axis=0)

    def __repr__(self) -> str:
        return f"BipartitePair({len(self.A)}x{len(self.B)}, e={self.edges()})"


def random_pair(a: int, b: int, p: float, seed: int) -> BipartitePair:
    """Each of the a*b edges present independently with probability ``p``."""
    rng = np.random.default_rng(seed)
    return BipartitePair.from_matrix((rng.random((a, b)) < p).astype(np.int64))


def density(pair: BipartitePair) -> Fraction:
    a, b = pair.shape
    return Fraction(pair.edges(), a * b)


# ---------------------------------------------------------------------------
# exhaustive checking


@dataclass
class SubpairExtremes:
    """Extreme edge counts over qualifying subpairs, grouped by size."""

    # (x, t) -> (min e(X,Y), max e(X,Y)) over |X| = x, |Y| = t
    groups: dict
    argmin: dict
    argmax: dict

    def __bool__(self) -> bool:
        return bool(self.groups)


def subpair_extremes(pair: BipartitePair, eps) -> SubpairExtremes:
    """For every qualifying size pair, the least and largest e(X,Y).

    For a fixed X the extreme e(X,Y) over |Y| = t is a sum of the t
    smallest (or largest) column sums, so only the 2^|A| subsets X are
    enumerated.
    """
    a, b = pair.shape
    if a > EXACT_CAP or b > EXACT_CAP:
        raise CapacityError(
            f"exact regularity check is capped at {EXACT_CAP} vertices per side, "
            f"got {a}x{b}; use kr_certificate instead"
        )
    eps = _eps(eps)
    ts = [t for t in range(1, b + 1) if Fraction(t, b) >= eps]
    groups, argmin, argmax = {}, {}, {}
    for x in range(1, a + 1):
        if not Fraction(x, a) >= eps or not ts:
            continue
        subsets = list(combinations(range(a), x))
        ind = np.zeros((len(subsets), a), dtype=np.int64)
        for r, s in enumerate(subsets):
            ind[r, list(s)] = 1
        S = ind @ pair.M
        order = np.argsort(S, axis=1, kind="stable")
        srt = np.take_along_axis(S, order, axis=1)
        low = np.cumsum(srt, axis=1)
        high = np.cumsum(srt[:, ::-1], axis=1)
        for t in ts:
            lo_row = int(np.argmin(low[:, t - 1]))
            hi_row = int(np.argmax(high[:, t - 1]))
            groups[(x, t)] = (int(low[lo_row, t - 1]), int(high[hi_row, t - 1]))
            argmin[(x, t)] = (subsets[lo_row], tuple(sorted(order[lo_row, :t].tolist())))
            argmax[(x, t)] = (subsets[hi_row], tuple(sorted(order[hi_row, ::-1][:t].tolist())))
    return SubpairExtremes(groups, argmin, argmax)


@dataclass
class RegularityReport:
    regular: bool
    deviation: Fraction
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.regular


def regularity_report(pair: BipartitePair, eps) -> RegularityReport:
    """Largest |d(X,Y) - d(A,B)| over qualifying subpairs, with a worst witness."""
    eps = _eps(eps)
    a, b = pair.shape
    E = pair.edges()
    ext = subpair_extremes(pair, eps)
    worst, witness = Fraction(0), None
    for (x, t), (lo, hi) in ext.groups.items():
        den = x * t * a * b
        for e, arg in ((hi, ext.argmax), (lo, ext.argmin)):
            dev = Fraction(abs(e * a * b - E * x * t), den)
            if dev > worst:
                worst, witness = dev, arg[(x, t)]
    return RegularityReport(worst <= eps, worst, witness if worst > eps else None)


def is_regular_exact(pair: BipartitePair, eps) -> bool:
    """Exhaustive eps-regularity test (both sides at most 14 vertices)."""
    return regularity_report(pair, eps).regular


def regularity_index(pair: BipartitePair, grid: Sequence) -> Fraction | None:
    """Least value of ``grid`` (sorted ascending) at which the pair is regular."""
    for eps in grid:
        if is_regular_exact(pair, eps):
            return Fraction(as_rational(eps))
    return None


def min_subpair_density(pair: BipartitePair, eps) -> Fraction | None:
    """Least d(X,Y) over qualifying subpairs, or None when none qualify."""
    ext = subpair_extremes(pair, eps)
    vals = [Fraction(lo, x * t) for (x, t), (lo, _) in ext.groups.items()]
    return min(vals) if vals else None


def degree_floor(pair: BipartitePair) -> Fraction:
    """Largest delta with deg_B(a) >= delta|B| and deg_A(b) >= delta|A| throughout."""
    a, b = pair.shape
    return min(Fraction(int(pair.degrees_a().min()), b), Fraction(int(pair.degrees_b().min()), a))


# ---------------------------------------------------------------------------
# certificates


KINDS = ("exact-exhaustive", "kr-good-pairs", "slicing-derived", "by-construction")


@dataclass
class RegularityCertificate:
    kind: str
    epsilon: object
    density_bound: Fraction | None = None
    density_upper: Fraction | None = None
    witness: dict = field(default_factory=dict)
    vacuous: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown certificate kind {self.kind!r}")
        if not (0 < self.epsilon <= 1):
            raise ParameterError(f"certificate parameter {self.epsilon} outside (0, 1]")

    def to_dict(self) -> dict:
        eps = self.epsilon
        d = {
            "kind": self.kind,
            "epsilon": str(eps) if isinstance(eps, RationalRoot) else _fmt(eps),
            "epsilon_float": float(eps),
            "vacuous": self.vacuous,
        }
        if self.density_bound is not None:
            d["density_bound"] = _fmt(self.density_bound)
        if self.density_upper is not None:
            d["density_upper"] = _fmt(self.density_upper)
        w = {}
        for key, val in self.witness.items():
            if isinstance(val, RegularityCertificate):
                w[key] = val.to_dict()
            elif isinstance(val, Fraction):
                w[key] = _fmt(val)
            elif isinstance(val, RationalRoot):
                w[key] = str(val)
            else:
                w[key] = val
        d["witness"] = w
        return d


def _fmt(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def exact_certificate(pair: BipartitePair, eps) -> RegularityCertificate | None:
    eps = _eps(eps)
    if not is_regular_exact(pair, eps):
        return None
    return RegularityCertificate("exact-exhaustive", _min(eps, Fraction(1)), density(pair))


def good_pair_count(pair: BipartitePair, eps, d=None) -> int:
    """Ordered pairs (x, x') meeting the degree and codegree conditions.

    ``d`` defaults to the density of the pair.  Pairs with x = x' count
    whenever x itself qualifies.
    """
    eps = Fraction(as_rational(eps))
    d = density(pair) if d is None else Fraction(as_rational(d))
    nb = pair.shape[1]
    lo = (d - eps) * nb
    hi = (d + eps) ** 2 * nb
    # integer degree > lo  <=>  degree >= floor(lo) + 1
    deg_min = math.floor(lo) + 1
    # integer codegree < hi  <=>  codegree <= ceil(hi) - 1
    co_max = math.ceil(hi) - 1
    ok = pair.degrees_a() >= deg_min
    if not ok.any():
        return 0
    sub = pair.M[ok].astype(np.float64)
    codeg = sub @ sub.T
    return int(np.count_nonzero(codeg <= co_max))


def kr_certificate(pair: BipartitePair, eps) -> RegularityCertificate | None:
    """Good-pairs certificate of (16 eps)^(1/5)-regularity, or None (inconclusive).

    A count above (1 - 4.5 eps)|X|^2 certifies; when eps <= 1/9 and
    4 eps <= d <= 1 - 4 eps the weaker threshold (1 - 5 eps)|X|^2 is used.
    Parameters at or above 1 are clamped to 1 and flagged as vacuous.
    """
    eps = Fraction(as_rational(eps))
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    nx = pair.shape[0]
    if nx < 2 / eps:
        raise ParameterError(f"|X| = {nx} is below 2/eps = {2 / eps}")
    d = density(pair)
    refined = eps <= Fraction(1, 9) and 4 * eps <= d <= 1 - 4 * eps
    factor = 1 - 5 * eps if refined else 1 - Fraction(9, 2) * eps
    threshold = factor * nx * nx
    P = good_pair_count(pair, eps, d)
    if not P > threshold:
        return None
    root = kr_parameter(eps)
    vacuous = root >= 1
    return RegularityCertificate(
        "kr-good-pairs",
        Fraction(1) if vacuous else root,
        density_bound=d,
        density_upper=d,
        witness={"P": P, "threshold": threshold, "rule": "5" if refined else "4.5", "eps": eps},
        vacuous=vacuous,
    )


def is_super_regular(
    pair: BipartitePair, eps, delta, certificate: RegularityCertificate | None = None
) -> bool:
    """(eps, delta)-super-regularity.

    The degree floors are always checked directly.  The density clause is
    checked exhaustively when both sides have at most 14 vertices; larger
    pairs need a certificate whose parameter is at most ``eps`` and whose
    density bound minus its parameter is at least ``delta``.
    """
    eps, delta = _eps(eps), Fraction(as_rational(delta))
    a, b = pair.shape
    if degree_floor(pair) < delta:
        return False
    if a <= EXACT_CAP and b <= EXACT_CAP:
        low = min_subpair_density(pair, eps)
        return low is None or low >= delta
    if certificate is None:
        raise CapacityError(
            f"{a}x{b} pair exceeds the exact cap; supply a regularity certificate"
        )
    if certificate.vacuous or certificate.epsilon > eps or certificate.density_bound is None:
        return False
    # any qualifying X, Y has d(X,Y) >= d(A,B) - eps_c
    return certificate.density_bound - certificate.epsilon >= delta


def sampled_min_density(pair: BipartitePair, eps, samples: int, seed: int) -> Fraction:
    """Least d(X,Y) over random qualifying subpairs of the smallest allowed size.

    A sampling check, not a certificate.
    """
    eps = Fraction(as_rational(eps))
    a, b = pair.shape
    x, t = max(1, math.ceil(eps * a)), max(1, math.ceil(eps * b))
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(samples):
        rows = rng.choice(a, size=x, replace=False)
        cols = rng.choice(b, size=t, replace=False)
        d = Fraction(int(pair.M[np.ix_(rows, cols)].sum()), x * t)
        best = d if best is None or d < best else best
    return best


# ---------------------------------------------------------------------------
# slicing


def slicing_parameter(eps, alpha) -> Fraction:
    """max{2 eps, eps / alpha}."""
    eps, alpha = Fraction(as_rational(eps)), Fraction(as_rational(alpha))
    return max(2 * eps, eps / alpha)


def slice_certificate(parent: RegularityCertificate, alpha, d) -> RegularityCertificate:
    """Regularity of every subpair with both sides at least an ``alpha`` fraction."""
    eps = parent.epsilon
    alpha, d = Fraction(as_rational(alpha)), Fraction(as_rational(d))
    if not 0 < eps:
        raise ParameterError("need 0 < eps")
    if not eps < alpha:
        raise ParameterError(f"need eps < alpha, got eps={eps}, alpha={alpha}")
    if not alpha < 1:
        raise ParameterError(f"need alpha < 1, got alpha={alpha}")
    eps0 = _max(2 * eps, eps / alpha)
    if not d >= eps0:
        raise ParameterError(f"need d >= max(2 eps, eps/alpha) = {eps0}, got d={d}")
    if not 1 - d >= eps0:
        raise ParameterError(f"need 1 - d >= max(2 eps, eps/alpha) = {eps0}, got 1-d={1 - d}")
    if eps0 > 1:
        raise ParameterError(f"derived parameter {eps0} exceeds 1")
    lo, hi = d - eps, d + eps
    return RegularityCertificate(
        "slicing-derived",
        eps0,
        density_bound=lo if not isinstance(lo, RationalRoot) else None,
        density_upper=hi if not isinstance(hi, RationalRoot) else None,
        witness={"parent": parent, "alpha": alpha, "d": d},
    )


@dataclass
class SliceResult:
    subsets: list
    discarded: list
    target: int
    shortfall: int = 0
    violations: list = field(default_factory=list)


def super_slice(
    g: KPartiteGraph, clusters: Sequence[Sequence], eps_prime, d_prime, h: int
) -> SliceResult:
    """Drop low-degree vertices from a k-tuple of clusters, then trim.

    A vertex of cluster i is dropped when it has fewer than
    (d' - eps')|A_j| neighbours in some other cluster j.  Survivors are
    trimmed in index order to h*ceil((1-(k-1)eps')L'/h), or to the largest
    multiple of h that the survivors allow when rounding up overshoots
    (``shortfall`` records the difference).
    """
    eps_prime, d_prime = Fraction(as_rational(eps_prime)), Fraction(as_rational(d_prime))
    k = len(clusters)
    clusters = [sorted(VertexRef(*v) for v in c) for c in clusters]
    L = len(clusters[0])
    if any(len(c) != L for c in clusters):
        raise ParameterError("clusters must have equal sizes")
    if h < 1:
        raise ParameterError(f"h must be >= 1, got {h}")
    if not 0 < eps_prime < d_prime / (2 * (k + 1)):
        raise ParameterError(f"need 0 < eps' < d'/(2(k+1)) = {d_prime / (2 * (k + 1))}")
    masks = [sum(1 << g.vid(v) for v in c) for c in clusters]
    need = (d_prime - eps_prime) * L
    keep, dropped, violations = [], [], []
    for i, c in enumerate(clusters):
        kept, gone = [], []
        for v in c:
            row = g._adj[g.vid(v)]
            if all((row & masks[j]).bit_count() >= need for j in range(k) if j != i):
                kept.append(v)
            else:
                gone.append(v)
        if len(gone) > (k - 1) * eps_prime * L:
            violations.append((i + 1, len(gone)))
        keep.append(kept)
        dropped.append(gone)
    target = h * math.ceil((1 - (k - 1) * eps_prime) * L / h)
    avail = min(len(kk) for kk in keep)
    size = target if avail >= target else h * (avail // h)
    return SliceResult(
        [kk[:size] for kk in keep],
        dropped,
        target,
        shortfall=target - size,
        violations=violations,
    )


def augment_super_regular_check(
    before: BipartitePair, after: BipartitePair, eps1, delta1, eps2, delta2
) -> bool:
    """Check the augmented pair at eps0 = eps1 + eps2, delta0 = min(delta1, delta2)/(1+eps2)^2.

    ``after`` must contain ``before`` (matched by labels).  Each precondition
    is checked and a violation raises :class:`ParameterError` naming it.
    """
    eps1, delta1 = Fraction(as_rational(eps1)), Fraction(as_rational(delta1))
    eps2, delta2 = Fraction(as_rational(eps2)), Fraction(as_rational(delta2))
    A, B = before.A, before.B
    if not set(A) <= set(after.A) or not set(B) <= set(after.B):
        raise ParameterError("clause 'after contains before' fails")
    ra = {v: r for r, v in enumerate(after.A)}
    cb = {v: c for c, v in enumerate(after.B)}
    inner = after.sub([ra[v] for v in A], [cb[v] for v in B])
    if not np.array_equal(inner.M, before.M):
        raise ParameterError("clause 'after agrees with before on the original pair' fails")
    new_a = [v for v in after.A if v not in set(A)]
    new_b = [v for v in after.B if v not in set(B)]
    if len(new_a) > eps2 * len(A):
        raise ParameterError(f"clause '|A'-A| <= eps2|A|' fails: {len(new_a)} added")
    if len(new_b) > eps2 * len(B):
        raise ParameterError(f"clause '|B'-B| <= eps2|B|' fails: {len(new_b)} added")
    cols_b = [cb[v] for v in B]
    rows_a = [ra[v] for v in A]
    for v in new_a:
        if after.M[ra[v], cols_b].sum() < delta2 * len(B):
            raise ParameterError(f"clause 'added vertex {v} has delta2|B| neighbours' fails")
    for v in new_b:
        if after.M[rows_a, cb[v]].sum() < delta2 * len(A):
            raise ParameterError(f"clause 'added vertex {v} has delta2|A| neighbours' fails")
    if not is_super_regular(before, eps1, delta1):
        raise ParameterError("clause 'before is (eps1, delta1)-super-regular' fails")
    eps0 = eps1 + eps2
    delta0 = min(delta1, delta2) / (1 + eps2) ** 2
    return is_super_regular(after, eps0, delta0)


# ---------------------------------------------------------------------------
# random slicing


@dataclass
class AzumaBound:
    single_exponent: Fraction
    aggregate_exponent: Fraction
    single: float
    aggregate: float
    m: int

    @property
    def vacuous(self) -> bool:
        return self.aggregate >= 1


def azuma_slice_bound(eps, L, L_prime, m) -> AzumaBound:
    """exp{-eps^2 L'^2/(2L)} and 8m exp{-c L'^2/(2L)}, c = min{eps^2, 9 eps^4}.

    Exponents are exact rationals; the exponentials are IEEE doubles
    (relative error about 1e-16, underflowing to 0.0 beyond ~745).
    """
    eps, L, Lp = Fraction(as_rational(eps)), Fraction(as_rational(L)), Fraction(as_rational(L_prime))
    if min(eps, L, Lp, m) <= 0:
        raise ParameterError("all parameters must be positive")
    single = eps**2 * Lp**2 / (2 * L)
    coeff = min(eps**2, 9 * eps**4)
    aggregate = coeff * Lp**2 / (2 * L)
    return AzumaBound(
        single_exponent=single,
        aggregate_exponent=aggregate,
        single=math.exp(-float(single)),
        aggregate=8 * m * math.exp(-float(aggregate)),
        m=int(m),
    )


@dataclass
class SlicingReport:
    rows: list
    failure_rate: float
    bound: AzumaBound
    threshold: Fraction
    flags: list

    def to_csv_rows(self) -> list:
        return [
            {"trial": r["trial"], "failures": r["failures"], "good_pair_min": r["good_pair_min"],
             "bound": repr(self.bound.aggregate)}
            for r in self.rows
        ]


def random_slicing_experiment(
    L: int, L_prime: int, d, eps, trials: int, seed: int
) -> SlicingReport:
    """Slice random pairs into L/L' blocks per side and test every block pair.

    Trial ``t`` draws a random L x L pair of density ``d`` from seed
    ``seed + t`` and a uniformly random equipartition of both sides.  A
    block pair fails when it is not certified by :func:`kr_certificate` at
    ``eps`` or has fewer than (1 - 8 eps)L'^2 pairs that are good in the
    block (degree > (d - 2 eps)L', codegree < (d + 2 eps)^2 L', measured
    against the density of the whole pair).
    """
    if L % L_prime:
        raise ParameterError(f"L' = {L_prime} does not divide L = {L}")
    d, eps = Fraction(as_rational(d)), Fraction(as_rational(eps))
    flags = []
    if not 0 < eps <= Fraction(1, 3):
        flags.append("eps outside (0, 1/3]")
    if not 0 < d < Fraction(1, 3):
        flags.append("d outside (0, 1/3)")
    m = L // L_prime
    threshold = max(Fraction(0), (1 - 8 * eps) * L_prime**2)
    rows = []
    failed = 0
    for t in range(trials):
        rng = np.random.default_rng(seed + t)
        M = (rng.random((L, L)) < float(d)).astype(np.int64)
        px, py = rng.permutation(L), rng.permutation(L)
        parent_d = Fraction(int(M.sum()), L * L)
        fails, good_min = 0, None
        for i in range(m):
            rows_i = np.sort(px[i * L_prime : (i + 1) * L_prime])
            for j in range(m):
                cols_j = np.sort(py[j * L_prime : (j + 1) * L_prime])
                block = BipartitePair.from_matrix(M[np.ix_(rows_i, cols_j)])
                good = _good_in_block(block, eps, parent_d)
                cert = kr_certificate(block, eps) if L_prime >= 2 / eps else None
                good_min = good if good_min is None else min(good_min, good)
                if cert is None or good < threshold:
                    fails += 1
        failed += fails > 0
        rows.append({"trial": t, "failures": fails, "good_pair_min": good_min})
    bound = azuma_slice_bound(eps, L, L_prime, m)
    return SlicingReport(rows, failed / trials if trials else 0.0, bound, threshold, flags)


def _good_in_block(block: BipartitePair, eps: Fraction, d: Fraction) -> int:
    nb = block.shape[1]
    deg_min = math.floor((d - 2 * eps) * nb) + 1
    co_max = math.ceil((d + 2 * eps) ** 2 * nb) - 1
    ok = block.degrees_a() >= deg_min
    if not ok.any():
        return 0
    sub = block.M[ok].astype(np.float64)
    return int(np.count_nonzero(sub @ sub.T <= co_max))


# ---------------------------------------------------------------------------
# reduced graph and embedding


def reduced_graph(g: KPartiteGraph, clusters: Sequence[Sequence[Sequence]], eps, d) -> KPartiteGraph:
    """Cluster graph: ``clusters[i][j]`` is cluster j of part i+1.

    Two clusters are joined when their density exceeds ``d`` and the pair is
    certified eps-regular: exhaustively when both have at most 14 vertices,
    otherwise by a good-pairs certificate at eps^5/16 (whose parameter is
    exactly eps).  Pairs that cannot be certified are not joined.
    """
    eps, d = Fraction(as_rational(eps)), Fraction(as_rational(d))
    k = g.k
    if len(clusters) != k:
        raise ParameterError(f"expected clusters for {k} parts, got {len(clusters)}")
    ell = len(clusters[0])
    if any(len(c) != ell for c in clusters) or ell == 0:
        raise ParameterError("every part needs the same positive number of clusters")
    for i, part in enumerate(clusters):
        for c in part:
            if not c or any(VertexRef(*v).part != i + 1 for v in c):
                raise ParameterError(f"cluster of part {i + 1} is empty or holds foreign vertices")
    kr_eps = eps**5 / 16
    edges = []
    for i in range(k):
        for i2 in range(i + 1, k):
            for j in range(ell):
                for j2 in range(ell):
                    pair = BipartitePair.from_graph(g, clusters[i][j], clusters[i2][j2])
                    if not density(pair) > d:
                        continue
                    a, b = pair.shape
                    if a <= EXACT_CAP and b <= EXACT_CAP:
                        ok = is_regular_exact(pair, eps)
                    elif a >= 2 / kr_eps:
                        ok = kr_certificate(pair, kr_eps) is not None
                    else:
                        ok = False
                    if ok:
                        edges.append(((i + 1, j + 1), (i2 + 1, j2 + 1)))
    return KPartiteGraph.new_balanced(k, ell, edges)


@dataclass
class Embedding:
    ok: bool
    parts: list
    stuck: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


def greedy_embed_khk(g: KPartiteGraph, clusters: Sequence[Sequence], h: int) -> Embedding:
    """Greedy copy of K_h^k with h vertices in each cluster (one cluster per part).

    Slots are filled cluster by cluster in round-robin order.  Each step
    takes the candidate whose neighbourhood keeps the smallest remaining
    candidate set (over clusters still to be filled) as large as possible,
    ties by vertex order.  Failure returns the stuck slot as (cluster, slot).
    """
    k = len(clusters)
    vids = [[g.vid(VertexRef(*v)) for v in c] for c in clusters]
    cand = [sum(1 << x for x in c) for c in vids]
    picked: list[list[int]] = [[] for _ in range(k)]
    if any(len(c) < h for c in vids):
        i = next(i for i, c in enumerate(vids) if len(c) < h)
        return Embedding(False, [], (i + 1, len(vids[i]) + 1))
    for slot in range(h):
        for i in range(k):
            pool = cand[i]
            if not pool:
                return Embedding(False, _refs(g, picked), (i + 1, slot + 1))
            best, best_score = None, None
            while pool:
                low = pool & -pool
                x = low.bit_length() - 1
                pool ^= low
                row = g._adj[x]
                score = None
                for j in range(k):
                    if j == i:
                        continue
                    left = h - len(picked[j])
                    if left <= 0:
                        continue
                    s = (cand[j] & row).bit_count() - left
                    score = s if score is None else min(score, s)
                if score is None:
                    score = 0
                if best_score is None or score > best_score:
                    best, best_score = x, score
            picked[i].append(best)
            cand[i] &= ~(1 << best)
            row = g._adj[best]
            for j in range(k):
                if j != i:
                    cand[j] &= row
            for j in range(k):
                if cand[j].bit_count() < h - len(picked[j]):
                    return Embedding(False, _refs(g, picked), (j + 1, len(picked[j]) + 1))
    return Embedding(True, _refs(g, picked))


def _refs(g: KPartiteGraph, picked) -> list:
    return [sorted(g.ref(x) for x in p) for p in picked]


def verify_embedding(g: KPartiteGraph, emb: Embedding, clusters: Sequence[Sequence], h: int) -> bool:
    if not emb.ok or len(emb.parts) != len(clusters):
        return False
    flat = [v for p in emb.parts for v in p]
    if len(set(flat)) != len(flat):
        return False
    for p, c in zip(emb.parts, clusters):
        if len(p) != h or not set(p) <= {VertexRef(*v) for v in c}:
            return False
    for a, pa in enumerate(emb.parts):
        for pb in emb.parts[a + 1 :]:
            if not all(g.adjacent(u, v) for u in pa for v in pb):
                return False
    return True


# ---------------------------------------------------------------------------
# parameters


@dataclass
class ParameterChain:
    """Constants of the regularity argument, ordered gamma >> d >> eps' >> eps >> zeta."""

    gamma: Fraction
    d: Fraction
    eps_prime: Fraction
    eps: Fraction
    zeta: Fraction
    h: int
    k: int
    M: int
    D: int

    @property
    def d_prime(self) -> Fraction:
        return self.d - self.eps

    @classmethod
    def from_gamma(cls, gamma, h: int, k: int, M: int, D: int, eps_blowup) -> "ParameterChain":
        """The standard assignment: d = gamma/4, eps' = min(eps_bu^2, d/(12k^2)), ..."""
        gamma, eb = Fraction(as_rational(gamma)), Fraction(as_rational(eps_blowup))
        d = gamma / 4
        eps_prime = min(eb**2, d / (12 * k * k))
        eps = min(eps_prime**5 / 16, d / (4 * (k + 2)))
        zeta = Fraction(1, 12 * h * h * k * k * M * M * D * D)
        chain = cls(gamma, d, eps_prime, eps, zeta, h, k, M, D)
        chain.validate()
        return chain

    def violations(self) -> list:
        bad = []
        k, h = self.k, self.h
        if not (0 < self.gamma < 1):
            bad.append("0 < gamma < 1")
        if self.d != self.gamma / 4:
            bad.append("d = gamma/4")
        if not 0 < self.eps_prime <= self.d / (12 * k * k):
            bad.append("0 < eps' <= d/(12k^2)")
        if self.eps != min(self.eps_prime**5 / 16, self.d / (4 * (k + 2))):
            bad.append("eps = min{eps'^5/16, d/(4(k+2))}")
        if not 0 < self.zeta <= Fraction(1, 12 * h * h * k * k * self.M**2 * self.D**2):
            bad.append("0 < zeta <= 1/(12 h^2 k^2 M^2 D^2)")
        if not (self.gamma > self.d > self.eps_prime > self.eps > self.zeta):
            bad.append("gamma > d > eps' > eps > zeta")
        if min(h, k - 1, self.M, self.D) < 1:
            bad.append("h, M, D >= 1 and k >= 2")
        return bad

    def validate(self) -> None:
        bad = self.violations()
        if bad:
            raise ParameterError("parameter chain violates: " + "; ".join(bad))
