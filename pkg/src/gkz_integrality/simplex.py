"""Exact two-phase simplex over Fractions with Bland's rule.

Solves min c . t subject to A t = b, t >= 0 and returns the optimum together
with a dual vector y (y . a_j <= c_j for every column, y . b = optimum) that
certifies it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

from gkz_integrality.exceptions import ConsistencyError, InfeasibleError
from gkz_integrality.utils import Vector, dot, solve

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LPSolution:
    """An optimal solution with its dual certificate.

    Attributes:
        value: Optimal objective value.
        primal: Optimal t.
        dual: y with y . a_j <= c_j for all j and y . b = value.
    """

    value: Fraction
    primal: Vector
    dual: Vector


class SimplexTableau:
    """Dense tableau for A t = b with one artificial variable per row."""

    def __init__(self, columns: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> None:
        self.n = len(columns)
        self.m = len(rhs)
        self.rows: List[List[Fraction]] = []
        self.b: List[Fraction] = []
        for i in range(self.m):
            sign = -1 if rhs[i] < 0 else 1
            row = [sign * Fraction(col[i]) for col in columns]
            row.extend(Fraction(int(k == i)) for k in range(self.m))
            self.rows.append(row)
            self.b.append(sign * Fraction(rhs[i]))
        self.basis = [self.n + i for i in range(self.m)]

    def pivot(self, i: int, j: int) -> None:
        """Make column j basic in row i."""
        piv = self.rows[i][j]
        self.rows[i] = [x / piv for x in self.rows[i]]
        self.b[i] /= piv
        for k in range(len(self.rows)):
            if k != i and self.rows[k][j] != 0:
                f = self.rows[k][j]
                self.rows[k] = [x - f * y for x, y in zip(self.rows[k], self.rows[i])]
                self.b[k] -= f * self.b[i]
        self.basis[i] = j

    def reduced_costs(self, costs: Sequence[Fraction]) -> List[Fraction]:
        """d_j = c_j - sum_i c_{basis_i} T[i][j]."""
        width = len(costs)
        return [
            costs[j] - sum((costs[self.basis[i]] * self.rows[i][j]
                            for i in range(len(self.rows))), Fraction(0))
            for j in range(width)
        ]

    def bland_step(self, costs: Sequence[Fraction], allowed: int) -> str:
        """One Bland pivot; returns 'optimal', 'unbounded' or 'go_on'."""
        reduced = self.reduced_costs(costs)
        entering = next((j for j in range(allowed) if reduced[j] < 0), None)
        if entering is None:
            return "optimal"
        candidates = [(self.b[i] / self.rows[i][entering], self.basis[i], i)
                      for i in range(len(self.rows)) if self.rows[i][entering] > 0]
        if not candidates:
            return "unbounded"
        _, _, leaving = min(candidates)
        self.pivot(leaving, entering)
        return "go_on"

    def optimize(self, costs: Sequence[Fraction], allowed: int) -> str:
        """Run Bland pivots until optimal or unbounded."""
        while True:
            status = self.bland_step(costs, allowed)
            if status != "go_on":
                return status

    def drive_out_artificials(self) -> None:
        """Pivot zero-level artificials out of the basis; drop redundant rows."""
        i = 0
        while i < len(self.rows):
            if self.basis[i] >= self.n:
                j = next((j for j in range(self.n) if self.rows[i][j] != 0), None)
                if j is None:
                    del self.rows[i]
                    del self.b[i]
                    del self.basis[i]
                    continue
                self.pivot(i, j)
            i += 1

    def primal(self) -> Vector:
        """Current basic solution restricted to the original variables."""
        t = [Fraction(0)] * self.n
        for i, var in enumerate(self.basis):
            if var < self.n:
                t[var] = self.b[i]
        return tuple(t)


def minimize(costs: Sequence[Fraction], columns: Sequence[Sequence[Fraction]],
             rhs: Sequence[Fraction]) -> LPSolution:
    """Solve min costs . t subject to sum_j t_j columns[j] = rhs, t >= 0.

    Raises:
        InfeasibleError: If no nonnegative t reaches rhs.
        ConsistencyError: If the program is unbounded or the dual certificate fails.
    """
    costs = [Fraction(c) for c in costs]
    rhs = [Fraction(x) for x in rhs]
    tableau = SimplexTableau(columns, rhs)
    n, m = tableau.n, tableau.m
    phase_one = [Fraction(0)] * n + [Fraction(1)] * m
    tableau.optimize(phase_one, n)
    infeasibility = sum((b for b, var in zip(tableau.b, tableau.basis) if var >= n), Fraction(0))
    if infeasibility > 0:
        raise InfeasibleError(f"No nonnegative combination reaches {rhs}")
    tableau.drive_out_artificials()
    status = tableau.optimize(costs + [Fraction(0)] * m, n)
    if status == "unbounded":
        raise ConsistencyError("Linear program is unbounded")
    primal = tableau.primal()
    value = dot(costs, primal)
    dual = _dual_certificate(costs, columns, rhs, tableau.basis, value)
    logger.debug("LP optimum %s after phase two", value)
    return LPSolution(value, primal, dual)


def _dual_certificate(costs: Sequence[Fraction], columns: Sequence[Sequence[Fraction]],
                      rhs: Sequence[Fraction], basis: Sequence[int], value: Fraction) -> Vector:
    basic = [j for j in basis if j < len(columns)]
    system = [[Fraction(x) for x in columns[j]] for j in basic]
    y: Optional[Vector] = solve(system, [costs[j] for j in basic], len(rhs))
    if y is None:
        raise ConsistencyError("Basic columns admit no dual vector")
    for j, col in enumerate(columns):
        if dot(y, col) > costs[j]:
            raise ConsistencyError(f"Dual vector violates column {j}")
    if dot(y, rhs) != value:
        raise ConsistencyError("Dual objective differs from the primal optimum")
    return y

