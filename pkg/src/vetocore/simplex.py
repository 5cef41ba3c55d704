"""Exact rational simplex for  maximize c.x  subject to  A x <= b, x >= 0  with b >= 0.

Dictionary form: row i reads  x_B[i] + sum_j A[i][j] x_N[j] = b[i]  and the objective reads
z = z0 + sum_j c[j] x_N[j]. Variables 0..n-1 are the decision variables, slack of the k-th
constraint is variable n+k. Pivoting follows Bland's rule (smallest label), so it cannot cycle.
Constraints may be added after a solve; the tableau is then repaired with dual simplex steps.
"""

import enum
import logging
from fractions import Fraction
from typing import Mapping, Sequence

import attrs

from vetocore.errors import InvariantViolation

logger = logging.getLogger(__name__)


class LPStatus(enum.Enum):
    OPTIMAL = 'optimal'
    UNBOUNDED = 'unbounded'


@attrs.frozen
class LPResult:
    """OPTIMAL carries the value and an optimal vertex; UNBOUNDED carries a feasible point and an improving ray."""
    status: LPStatus
    point: tuple[Fraction, ...]
    value: Fraction | None = None
    ray: tuple[Fraction, ...] | None = None

    @property
    def is_optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


def _as_row(coefficients: Mapping[int, object] | Sequence[object], size: int) -> list[Fraction]:
    row = [Fraction(0)] * size
    items = coefficients.items() if isinstance(coefficients, Mapping) else enumerate(coefficients)
    for k, value in items:
        row[k] += Fraction(value)
    return row


class SimplexTableau:
    def __init__(self, objective: Sequence[object]):
        self.n = len(objective)
        self.objective = [Fraction(v) for v in objective]
        self.constraints: list[tuple[list[Fraction], Fraction]] = []
        self._reset()

    def _reset(self):
        self.A: list[list[Fraction]] = []
        self.b: list[Fraction] = []
        self.c = list(self.objective)
        self.z = Fraction(0)
        self.nb_vars = list(range(self.n))
        self.b_vars: list[int] = []
        self.status: LPStatus | None = None
        self._entering: int | None = None
        for row, bound in self.constraints:
            self._append_row(row, bound)

    def add_constraint(self, coefficients: Mapping[int, object] | Sequence[object], bound: object) -> None:
        """Add  sum_k coefficients[k] x_k <= bound  with bound >= 0."""
        bound = Fraction(bound)
        if bound < 0:
            raise ValueError(f"right-hand sides must be non-negative, got {bound}")
        row = _as_row(coefficients, self.n)
        self.constraints.append((row, bound))
        if self._append_row(row, bound) and self.status is LPStatus.UNBOUNDED:
            # no dual-feasible basis to repair from: start over at the all-slack basis
            self._reset()

    def _append_row(self, row: list[Fraction], bound: Fraction) -> bool:
        """Express a new row in the current nonbasic variables; True if it makes the basis infeasible."""
        column = {v: j for j, v in enumerate(self.nb_vars)}
        new_row = [Fraction(0)] * self.n
        rhs = bound
        for k, a in enumerate(row):
            if not a:
                continue
            if k in column:
                new_row[column[k]] += a
            else:
                i = self.b_vars.index(k)
                rhs -= a * self.b[i]
                for j, value in enumerate(self.A[i]):
                    if value:
                        new_row[j] -= a * value
        self.A.append(new_row)
        self.b.append(rhs)
        self.b_vars.append(self.n + len(self.b_vars))
        return rhs < 0

    def pivot(self, i: int, j: int):
        piv = self.A[i][j]
        row = self.A[i]
        for l in range(self.n):
            row[l] = 1 / piv if l == j else row[l] / piv
        self.b[i] /= piv
        nonzero = [l for l in range(self.n) if row[l]]
        for k in range(len(self.A)):
            if k == i:
                continue
            f = self.A[k][j]
            if not f:
                continue
            other = self.A[k]
            for l in nonzero:
                if l != j:
                    other[l] -= f * row[l]
            other[j] = -f * row[j]
            self.b[k] -= f * self.b[i]
        f = self.c[j]
        if f:
            for l in nonzero:
                if l != j:
                    self.c[l] -= f * row[l]
            self.c[j] = -f * row[j]
            self.z += f * self.b[i]
        self.nb_vars[j], self.b_vars[i] = self.b_vars[i], self.nb_vars[j]

    def bland_primal_step(self) -> LPStatus | None:
        candidates = [(self.nb_vars[j], j) for j in range(self.n) if self.c[j] > 0]
        if not candidates:
            return LPStatus.OPTIMAL
        _, j = min(candidates)
        rows = [(self.b[i] / self.A[i][j], self.b_vars[i], i) for i in range(len(self.A)) if self.A[i][j] > 0]
        if not rows:
            self._entering = j
            return LPStatus.UNBOUNDED
        _, _, i = min(rows)
        self.pivot(i, j)
        return None

    def bland_dual(self):
        while True:
            rows = [(self.b_vars[i], i) for i in range(len(self.A)) if self.b[i] < 0]
            if not rows:
                return
            _, i = min(rows)
            columns = [(self.c[j] / self.A[i][j], self.nb_vars[j], j) for j in range(self.n) if self.A[i][j] < 0]
            if not columns:
                raise InvariantViolation("linear program became infeasible")
            _, _, j = min(columns)
            self.pivot(i, j)

    def point(self) -> tuple[Fraction, ...]:
        x = [Fraction(0)] * self.n
        for i, v in enumerate(self.b_vars):
            if v < self.n:
                x[v] = self.b[i]
        return tuple(x)

    def ray(self, j: int) -> tuple[Fraction, ...]:
        r = [Fraction(0)] * self.n
        if self.nb_vars[j] < self.n:
            r[self.nb_vars[j]] = Fraction(1)
        for i, v in enumerate(self.b_vars):
            if v < self.n:
                r[v] = -self.A[i][j]
        return tuple(r)

    def solve(self) -> LPResult:
        self.bland_dual()
        pivots = 0
        while True:
            status = self.bland_primal_step()
            if status is None:
                pivots += 1
                continue
            self.status = status
            logger.debug(f"simplex {status.value} after {pivots} pivots on {len(self.A)} rows")
            if status is LPStatus.OPTIMAL:
                return LPResult(status, self.point(), value=self.z)
            return LPResult(status, self.point(), ray=self.ray(self._entering))


def maximize(
        objective: Sequence[object],
        constraints: Sequence[tuple[Mapping[int, object] | Sequence[object], object]],
) -> LPResult:
    tableau = SimplexTableau(objective)
    for coefficients, bound in constraints:
        tableau.add_constraint(coefficients, bound)
    return tableau.solve()
