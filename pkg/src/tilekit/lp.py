"""Exact rational linear programming.

The solver works on an integer dictionary (condensed tableau) and uses
fraction-free pivoting: all entries are kept as integers sharing one common
denominator, which is the determinant of the current basis.  Each pivot is
one Bareiss step, so every division is exact and no gcd work is done inside
the loop.  Rows are numpy object arrays of Python ints.

Pivoting follows Bland's smallest-subscript rule (primal and dual variants),
which cannot cycle.  The optional ``dantzig`` rule takes the steepest
coefficient and falls back to Bland's rule after a degenerate pivot.  The initial basis decides the method:

* slack basis primal feasible  -> primal simplex
* slack basis dual feasible    -> dual simplex
* otherwise                    -> auxiliary-variable phase 1, then primal simplex

Infeasible programs raise :class:`InfeasibleLP` with a Farkas certificate and
unbounded ones raise :class:`UnboundedLP` with an improving ray.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

LE, GE, EQ = "<=", ">=", "="
PIVOT_RULES = ("bland", "dantzig")


class LPError(RuntimeError):
    pass


class InfeasibleLP(LPError):
    """``farkas[r]`` multiplies original row ``r``.

    Signs follow the row senses (>= 0 on ``<=`` rows, <= 0 on ``>=`` rows,
    free on ``=`` rows).  The combined row has all coefficients >= 0 and a
    negative right-hand side.
    """

    def __init__(self, farkas):
        super().__init__("linear program is infeasible")
        self.farkas = farkas


class UnboundedLP(LPError):
    """``ray`` is a nonnegative direction that keeps every row satisfied and improves the objective."""

    def __init__(self, ray, point):
        super().__init__("linear program is unbounded")
        self.ray = ray
        self.point = point


def as_rational(x) -> Fraction | int:
    """Exact conversion; floats go through their shortest repr (0.1 -> 1/10).

    Python ints are already exact and are returned unchanged.
    """
    if type(x) is int or isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def fmt(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(s) -> Fraction:
    return as_rational(s) if not isinstance(s, str) else Fraction(s)


@dataclass
class LinearProgram:
    objective: list
    rows: list
    rhs: list
    senses: list
    sense: str = "max"
    var_labels: list | None = None
    row_labels: list | None = None

    def __post_init__(self):
        self.objective = [as_rational(c) for c in self.objective]
        self.rows = [[as_rational(a) for a in row] for row in self.rows]
        self.rhs = [as_rational(b) for b in self.rhs]
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")
        if len(self.rows) != len(self.rhs) or len(self.rows) != len(self.senses):
            raise ValueError("row, rhs and sense counts differ")
        for r, row in enumerate(self.rows):
            if len(row) != len(self.objective):
                raise ValueError(f"row {r} has {len(row)} entries, expected {len(self.objective)}")
        for s in self.senses:
            if s not in (LE, GE, EQ):
                raise ValueError(f"unknown row sense {s!r}")

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def evaluate(self, x) -> Fraction:
        return sum((c * v for c, v in zip(self.objective, x)), Fraction(0))

    def row_value(self, r: int, x) -> Fraction:
        return sum((a * v for a, v in zip(self.rows[r], x) if a and v), Fraction(0))

    def violations(self, x) -> list:
        """Indices of violated constraints; ``-1 - j`` marks a negative variable ``j``."""
        bad = [-1 - j for j, v in enumerate(x) if v < 0]
        for r in range(self.num_rows):
            lhs, b, s = self.row_value(r, x), self.rhs[r], self.senses[r]
            if (s == LE and lhs > b) or (s == GE and lhs < b) or (s == EQ and lhs != b):
                bad.append(r)
        return bad

    def is_feasible(self, x) -> bool:
        return len(x) == self.num_vars and not self.violations(x)

    def to_dict(self) -> dict:
        return {
            "sense": self.sense,
            "objective": [fmt(c) for c in self.objective],
            "rows": [[fmt(a) for a in row] for row in self.rows],
            "rhs": [fmt(b) for b in self.rhs],
            "senses": list(self.senses),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearProgram":
        return cls(
            objective=[Fraction(c) for c in d["objective"]],
            rows=[[Fraction(a) for a in row] for row in d["rows"]],
            rhs=[Fraction(b) for b in d["rhs"]],
            senses=list(d["senses"]),
            sense=d["sense"],
        )


@dataclass
class LPSolution:
    lp: LinearProgram
    values: list
    objective: Fraction
    basis: list
    tight: list
    duals: list
    method: str = ""
    pivots: int = 0

    def to_dict(self) -> dict:
        return {
            "objective": fmt(self.objective),
            "values": [fmt(v) for v in self.values],
            "duals": [fmt(y) for y in self.duals],
            "basis": list(self.basis),
            "tight": list(self.tight),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def dual_of(lp: LinearProgram) -> LinearProgram:
    """Textbook dual; a ``max`` program with ``<=`` rows maps to ``min`` with ``>=`` rows.

    Dual variables are required nonnegative, so rows whose sense points the
    "wrong" way are negated first and equality rows are split in two.
    """
    rows, rhs = [], []
    want = LE if lp.sense == "max" else GE
    for row, b, s in zip(lp.rows, lp.rhs, lp.senses):
        if s == want or s == EQ:
            rows.append(row)
            rhs.append(b)
        if s != want:
            rows.append([-a for a in row])
            rhs.append(-b)
    m, n = len(rows), lp.num_vars
    cols = [[rows[r][j] for r in range(m)] for j in range(n)]
    return LinearProgram(
        objective=rhs,
        rows=cols,
        rhs=list(lp.objective),
        senses=[GE if lp.sense == "max" else LE] * n,
        sense="min" if lp.sense == "max" else "max",
    )


# ---------------------------------------------------------------------------
# integer dictionary


class _Dictionary:
    """Condensed integer tableau for  max c.x  s.t.  A x <= b, x >= 0.

    Row ``r < m`` reads  det*x_B[r] + sum_j T[r, j] x_N[j] = T[r, -1];
    row ``m`` is the objective  det*z + sum_j T[m, j] x_N[j] = T[m, -1].
    Variable labels: structurals 0..n-1, slacks n..n+m-1, auxiliary n+m.

    Entries are subdeterminants of the scaled constraint matrix.  They are
    held in int64 while a pivot provably cannot overflow and in Python ints
    (object dtype) from the first pivot where it might.
    """

    def __init__(self, A, b, c, rule: str = "bland"):
        m, n = len(A), len(c)
        self.m, self.n = m, n
        self.rule = rule
        T = np.empty((m + 1, n + 1), dtype=object)
        for r in range(m):
            T[r, :n] = A[r]
            T[r, n] = b[r]
        T[m, :n] = [-cj for cj in c]
        T[m, n] = 0
        self.T = _narrow(T)
        self.det = 1
        self.basic = np.arange(n, n + m)
        self.nonbasic = np.arange(n)
        self.pivots = 0

    def add_column(self, coeffs, cost, label):
        col = np.array(list(coeffs) + [-cost], dtype=object)
        T = self.T.astype(object)
        self.T = _narrow(np.concatenate([T[:, :-1], col[:, None], T[:, -1:]], axis=1))
        self.nonbasic = np.append(self.nonbasic, label)

    def drop_column(self, s: int) -> None:
        self.T = np.delete(self.T, s, axis=1)
        self.nonbasic = np.delete(self.nonbasic, s)

    def pivot(self, r: int, s: int) -> None:
        T, d = self.T, self.det
        if T.dtype != object:
            big = int(np.abs(T).max())
            if 2 * big * big >= _SAFE:
                T = T.astype(object)
        p = T[r, s]
        col = T[:, s].copy()
        row = T[r, :].copy()
        T = (T * p - np.multiply.outer(col, row)) // d
        T[r, :] = row
        T[:, s] = -col
        T[r, s] = d
        if p < 0:
            T = -T
            p = -p
        self.T, self.det = T, int(p)
        self.basic[r], self.nonbasic[s] = self.nonbasic[s], self.basic[r]
        self.pivots += 1

    # -- pivot selection --------------------------------------------------

    def _candidates(self, mask, allowed):
        idx = np.flatnonzero(mask)
        if allowed is not None:
            idx = idx[[allowed(int(self.nonbasic[s])) for s in idx]] if len(idx) else idx
        return idx

    def entering(self, bland: bool, allowed=None) -> int | None:
        obj = self.T[self.m, :-1]
        idx = self._candidates(obj < 0, allowed)
        if not len(idx):
            return None
        if not bland:
            best = obj[idx].min()
            idx = idx[obj[idx] == best]
        return int(idx[np.argmin(self.nonbasic[idx])])

    def leaving_ratio(self, s: int) -> int | None:
        T = self.T
        best = None
        for r in np.flatnonzero(T[: self.m, s] > 0):
            if best is None:
                best = r
                continue
            lhs = int(T[r, -1]) * int(T[best, s])
            rhs = int(T[best, -1]) * int(T[r, s])
            if lhs < rhs or (lhs == rhs and self.basic[r] < self.basic[best]):
                best = r
        return None if best is None else int(best)

    def run_primal(self, allowed=None) -> int | None:
        """Primal simplex to optimality; returns the unbounded column or None.

        With the ``dantzig`` rule a degenerate pivot switches to Bland's rule
        until the objective moves again, so the method still terminates.
        """
        degenerate = False
        while True:
            s = self.entering(self.rule == "bland" or degenerate, allowed)
            if s is None:
                return None
            r = self.leaving_ratio(s)
            if r is None:
                return s
            degenerate = self.T[r, -1] == 0
            self.pivot(r, s)

    def run_dual(self) -> int | None:
        """Dual simplex from a dual feasible basis; returns an infeasible row or None."""
        degenerate = False
        while True:
            T = self.T
            rhs = T[: self.m, -1]
            idx = np.flatnonzero(rhs < 0)
            if not len(idx):
                return None
            if not (self.rule == "bland" or degenerate):
                idx = idx[rhs[idx] == rhs[idx].min()]
            r = int(idx[np.argmin(self.basic[idx])])
            obj = T[self.m]
            best = None
            for s in np.flatnonzero(T[r, :-1] < 0):
                if best is None:
                    best = s
                    continue
                # minimise obj[s] / -T[r, s]
                lhs = int(obj[s]) * -int(T[r, best])
                rhs_ = int(obj[best]) * -int(T[r, s])
                if lhs < rhs_ or (lhs == rhs_ and self.nonbasic[s] < self.nonbasic[best]):
                    best = s
            if best is None:
                return r
            degenerate = obj[best] == 0
            self.pivot(r, int(best))

    # -- read-out ---------------------------------------------------------

    def primal_values(self) -> list:
        x = [Fraction(0)] * (self.n + self.m + 1)
        for r, v in enumerate(self.basic):
            x[v] = Fraction(int(self.T[r, -1]), self.det)
        return x

    def row_duals(self) -> list:
        """Objective-row coefficients on slack columns = optimal duals."""
        y = [Fraction(0)] * self.m
        for s, v in enumerate(self.nonbasic):
            if self.n <= v < self.n + self.m:
                y[v - self.n] = Fraction(int(self.T[self.m, s]), self.det)
        return y


_SAFE = 2**62


def _narrow(T):
    """int64 copy of an object tableau when every entry fits comfortably."""
    big = max((abs(int(v)) for v in T.flat), default=0)
    return T.astype(np.int64) if 2 * big * big < _SAFE else T


def _integer_row(coeffs, rhs):
    scale = lcm(*(q.denominator for q in coeffs), rhs.denominator)
    if scale == 1:
        return [int(q) for q in coeffs], int(rhs), 1
    return [int(q * scale) for q in coeffs], int(rhs * scale), scale


def solve_exact(lp: LinearProgram, rule: str = "bland") -> LPSolution:
    """Exact optimal basic solution of ``lp``.

    Raises :class:`InfeasibleLP` or :class:`UnboundedLP` with certificates.
    """
    n = lp.num_vars
    sign = 1 if lp.sense == "max" else -1
    # internal rows: (original row, multiplier sign, integer coeffs, integer rhs, scale)
    A, b, origin = [], [], []
    for r, (row, rhs, s) in enumerate(zip(lp.rows, lp.rhs, lp.senses)):
        for mult in ((1,) if s == LE else (-1,) if s == GE else (1, -1)):
            coeffs, bb, scale = _integer_row([mult * a for a in row], mult * rhs)
            A.append(coeffs)
            b.append(bb)
            origin.append((r, mult * scale))
    cscale = lcm(*(q.denominator for q in lp.objective)) if n else 1
    c = [int(sign * q * cscale) for q in lp.objective]
    m = len(A)

    if rule not in PIVOT_RULES:
        raise ValueError(f"unknown pivot rule {rule!r}")
    D = _Dictionary(A, b, c, rule)
    if all(bi >= 0 for bi in b):
        method = "primal"
        unbounded = D.run_primal()
    elif all(cj <= 0 for cj in c):
        method = "dual"
        bad = D.run_dual()
        if bad is not None:
            raise InfeasibleLP(_farkas_from_row(D, bad, origin, lp.num_rows))
        unbounded = None
    else:
        method = "two-phase"
        unbounded = _two_phase(D, c, origin, lp.num_rows)

    if unbounded is not None:
        ray, point = _ray(D, unbounded)
        raise UnboundedLP(ray, point)

    x = D.primal_values()[:n]
    y_int = D.row_duals()
    duals = [Fraction(0)] * lp.num_rows
    for (r, mult), y in zip(origin, y_int):
        duals[r] += sign * y * mult / cscale
    tight = [r for r in range(lp.num_rows) if lp.row_value(r, x) == lp.rhs[r]]
    basis = [_label(int(v), n) for v in D.basic]
    return LPSolution(
        lp=lp,
        values=x,
        objective=lp.evaluate(x),
        basis=basis,
        tight=tight,
        duals=duals,
        method=method,
        pivots=D.pivots,
    )


def _label(v: int, n: int) -> str:
    return f"x{v}" if v < n else f"s{v - n}"


def _two_phase(D: _Dictionary, c, origin, num_rows):
    m, n = D.m, D.n
    aux = n + m
    # phase 1: max -x0 subject to A x - x0 <= b
    D.T[m, :] = 0
    D.add_column([-1] * m, -1, aux)
    s = len(D.nonbasic) - 1
    rhs = D.T[:m, -1]
    r = min(range(m), key=lambda i: (rhs[i], D.basic[i]))
    D.pivot(r, s)
    D.run_primal()
    if D.T[m, -1] < 0:
        # phase-1 optimum -x0 < 0: the phase-1 duals form a Farkas certificate
        y = D.row_duals()
        farkas = [Fraction(0)] * num_rows
        for (row, mult), yi in zip(origin, y):
            farkas[row] += yi * mult
        raise InfeasibleLP(farkas)
    if aux in D.basic:
        r = int(np.flatnonzero(D.basic == aux)[0])
        for s in range(len(D.nonbasic)):
            if D.T[r, s] != 0:
                D.pivot(r, s)
                break
    if aux in D.nonbasic:
        D.drop_column(int(np.flatnonzero(D.nonbasic == aux)[0]))
    # rebuild objective row for the original costs in the current basis
    cost = [0] * (n + m + 1)
    for j in range(n):
        cost[j] = c[j]
    T = D.T.astype(object)
    obj = np.zeros(T.shape[1], dtype=object)
    for r, v in enumerate(D.basic):
        if cost[v]:
            obj = obj + cost[v] * T[r, :]
    for s, v in enumerate(D.nonbasic):
        obj[s] -= cost[v] * D.det
    T[m, :] = obj
    D.T = _narrow(T)
    return D.run_primal(allowed=lambda v: v != aux)


def _farkas_from_row(D: _Dictionary, r: int, origin, num_rows):
    m, n = D.m, D.n
    y = [Fraction(0)] * m
    for s, v in enumerate(D.nonbasic):
        if n <= v < n + m:
            y[v - n] = Fraction(int(D.T[r, s]), D.det)
    v = D.basic[r]
    if n <= v < n + m:
        y[v - n] = Fraction(1)
    farkas = [Fraction(0)] * num_rows
    for (row, mult), yi in zip(origin, y):
        farkas[row] += yi * mult
    return farkas


def _ray(D: _Dictionary, s: int):
    n = D.n
    x = D.primal_values()[:n]
    ray = [Fraction(0)] * n
    v = D.nonbasic[s]
    if v < n:
        ray[v] = Fraction(1)
    for r, bv in enumerate(D.basic):
        if bv < n:
            ray[bv] = Fraction(-int(D.T[r, s]), D.det)
    return ray, x


def check_farkas(lp: LinearProgram, y: Sequence[Fraction]) -> bool:
    """True iff ``y`` proves infeasibility of ``lp`` (with x >= 0)."""
    for yi, s in zip(y, lp.senses):
        if (s == LE and yi < 0) or (s == GE and yi > 0):
            return False
    for j in range(lp.num_vars):
        if sum((yi * row[j] for yi, row in zip(y, lp.rows)), Fraction(0)) < 0:
            return False
    return sum((yi * b for yi, b in zip(y, lp.rhs)), Fraction(0)) < 0


def check_ray(lp: LinearProgram, ray: Sequence[Fraction]) -> bool:
    """True iff ``ray`` is a feasible improving recession direction."""
    if any(v < 0 for v in ray):
        return False
    for row, s in zip(lp.rows, lp.senses):
        a = sum((x * v for x, v in zip(row, ray)), Fraction(0))
        if (s == LE and a > 0) or (s == GE and a < 0) or (s == EQ and a != 0):
            return False
    gain = lp.evaluate(ray)
    return gain > 0 if lp.sense == "max" else gain < 0
