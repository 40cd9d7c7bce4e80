"""Dense primal simplex with Bland's rule, exact over rationals.

The linear programs decided here are small (desk-scale incidence matrices),
so a dense tableau is fine.  In rational mode every comparison is exact and
Bland's anti-cycling rule makes termination unconditional; float mode reuses
the same pivoting with a 1e-9 feasibility tolerance.

Two entry points cover what the gluing module needs:

* :func:`maximize_leq` -- max c.x subject to A x <= b, x >= 0 (b >= 0).
* :func:`feasible_eq`  -- find x >= 0 with A x = b, or a Farkas certificate
  y with y.A >= 0 and y.b < 0 proving infeasibility.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .errors import SolverBudgetExceeded

Number = Union[Fraction, float]

#: Default ceiling on simplex pivots before giving up.
PIVOT_BUDGET = 10**6

FLOAT_TOL = 1e-9


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list[Number] | None
    objective: Number | None
    dual: list[Number] | None
    certificate: list[Number] | None
    pivots: int


def _tol(mode: str) -> Number:
    return Fraction(0) if mode == "rational" else FLOAT_TOL


def _zero(mode: str) -> Number:
    return Fraction(0) if mode == "rational" else 0.0


def _one(mode: str) -> Number:
    return Fraction(1) if mode == "rational" else 1.0


class _Tableau:
    """Rows [A | I | b] with an explicit reduced-cost row."""

    def __init__(self, a: Sequence[Sequence[Number]], b: Sequence[Number],
                 cost: Sequence[Number], mode: str, budget: int) -> None:
        self.mode = mode
        self.tol = _tol(mode)
        self.budget = budget
        self.m = len(a)
        self.n = len(cost) - self.m  # structural columns
        zero, one = _zero(mode), _one(mode)
        self.rows = [list(a[i]) + [one if k == i else zero for k in range(self.m)] + [b[i]]
                     for i in range(self.m)]
        self.cost = list(cost)
        # reduced costs start equal to cost (initial basis is the identity block
        # only when its cost is zero; callers with costed identity columns must
        # price the basis out first via _price_out).
        self.red = list(cost) + [zero]
        self.basis = [self.n + i for i in range(self.m)]
        self.pivots = 0

    def _price_out(self) -> None:
        # Make reduced costs of the initial basic columns zero.
        for i, col in enumerate(self.basis):
            coef = self.red[col]
            if coef != 0:
                row = self.rows[i]
                for j in range(len(self.red)):
                    self.red[j] -= coef * row[j]

    def _pivot(self, row: int, col: int) -> None:
        piv = self.rows[row][col]
        self.rows[row] = [v / piv for v in self.rows[row]]
        prow = self.rows[row]
        for i in range(self.m):
            if i != row and self.rows[i][col] != 0:
                coef = self.rows[i][col]
                self.rows[i] = [v - coef * p for v, p in zip(self.rows[i], prow)]
        coef = self.red[col]
        if coef != 0:
            for j in range(len(self.red)):
                self.red[j] -= coef * prow[j]
        self.basis[row] = col
        self.pivots += 1

    def solve(self) -> str:
        """Run primal simplex to optimality; returns "optimal" or "unbounded"."""
        width = self.n + self.m
        while True:
            if self.pivots > self.budget:
                raise SolverBudgetExceeded(f"simplex exceeded {self.budget} pivots")
            enter = -1
            for j in range(width):  # Bland: smallest improving index
                if self.red[j] > self.tol:
                    enter = j
                    break
            if enter < 0:
                return "optimal"
            leave = -1
            best = None
            for i in range(self.m):
                coef = self.rows[i][enter]
                if coef > self.tol:
                    ratio = self.rows[i][-1] / coef
                    if best is None or ratio < best or (
                        ratio == best and self.basis[i] < self.basis[leave]
                    ):
                        best = ratio
                        leave = i
            if leave < 0:
                return "unbounded"
            self._pivot(leave, enter)

    def primal(self) -> list[Number]:
        x = [_zero(self.mode)] * (self.n + self.m)
        for i, col in enumerate(self.basis):
            x[col] = self.rows[i][-1]
        return x

    def dual(self) -> list[Number]:
        # y_i = c(identity col i) - reduced cost(identity col i)
        return [self.cost[self.n + i] - self.red[self.n + i] for i in range(self.m)]

    def objective(self) -> Number:
        x = self.primal()
        return sum(self.cost[j] * x[j] for j in range(self.n + self.m))


def maximize_leq(
    c: Sequence[Number],
    a: Sequence[Sequence[Number]],
    b: Sequence[Number],
    mode: str = "rational",
    budget: int = PIVOT_BUDGET,
) -> LPResult:
    """Maximize c.x subject to A x <= b, x >= 0, with b >= 0 componentwise.

    The slack basis is feasible because b >= 0, so no phase I is needed.
    """
    if any(bi < 0 for bi in b):
        raise ValueError("maximize_leq requires b >= 0")
    m, n = len(a), len(c)
    cost = list(c) + [_zero(mode)] * m
    tab = _Tableau(a, b, cost, mode, budget)
    status = tab.solve()
    if status != "optimal":
        return LPResult("unbounded", None, None, None, None, tab.pivots)
    x = tab.primal()[:n]
    return LPResult("optimal", x, tab.objective(), tab.dual(), None, tab.pivots)


def feasible_eq(
    a: Sequence[Sequence[Number]],
    b: Sequence[Number],
    mode: str = "rational",
    budget: int = PIVOT_BUDGET,
) -> LPResult:
    """Find x >= 0 with A x = b via phase-I artificials.

    Infeasibility comes with a Farkas certificate y (in the original row
    orientation): y.A >= 0 componentwise while y.b < 0.
    """
    m, n = len(a), (len(a[0]) if a else 0)
    signs = [1 if bi >= 0 else -1 for bi in b]
    a_pos = [[s * v for v in row] for s, row in zip(signs, a)]
    b_pos = [s * bi for s, bi in zip(signs, b)]
    neg_one = -_one(mode)
    cost = [_zero(mode)] * n + [neg_one] * m
    tab = _Tableau(a_pos, b_pos, cost, mode, budget)
    tab._price_out()
    status = tab.solve()
    if status != "optimal":  # phase I is bounded above by zero
        raise AssertionError("phase I cannot be unbounded")
    residual = -tab.objective()
    tol = FLOAT_TOL if mode == "float" else 0
    if residual > tol:
        y = tab.dual()
        y_orig = [s * yi for s, yi in zip(signs, y)]
        return LPResult("infeasible", None, None, None, y_orig, tab.pivots)
    x = tab.primal()[:n]
    return LPResult("optimal", x, _zero(mode), None, None, tab.pivots)
