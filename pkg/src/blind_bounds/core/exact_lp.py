"""Dense two-phase simplex over rationals.

Solves ``min c.x  s.t.  A x = b, x >= 0`` exactly with Bland's rule. Meant
for desk-scale oracles (a few dozen variables), not as a general solver.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence

from ..utils.logger import get_logger

logger = get_logger(__name__)


class LPStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    """Outcome of :func:`solve_lp`."""
    status: LPStatus
    value: Optional[Fraction] = None
    x: List[Fraction] = field(default_factory=list)
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == LPStatus.OPTIMAL


class _Tableau:
    """Canonical-form tableau: rows[i] . x = rhs[i] with basis[i] basic in row i."""

    def __init__(self, rows: List[List[Fraction]], rhs: List[Fraction], basis: List[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.pivots = 0

    @property
    def n_cols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def pivot(self, i: int, j: int):
        piv = self.rows[i][j]
        self.rows[i] = [a / piv for a in self.rows[i]]
        self.rhs[i] = self.rhs[i] / piv
        for k in range(len(self.rows)):
            if k == i:
                continue
            f = self.rows[k][j]
            if f != 0:
                self.rows[k] = [a - f * b for a, b in zip(self.rows[k], self.rows[i])]
                self.rhs[k] = self.rhs[k] - f * self.rhs[i]
        self.basis[i] = j
        self.pivots += 1

    def reduced_costs(self, cost: Sequence[Fraction]) -> List[Fraction]:
        out = list(cost)
        for i, bj in enumerate(self.basis):
            cb = cost[bj]
            if cb != 0:
                out = [r - cb * a for r, a in zip(out, self.rows[i])]
        return out

    def objective(self, cost: Sequence[Fraction]) -> Fraction:
        return sum((cost[bj] * self.rhs[i] for i, bj in enumerate(self.basis)), Fraction(0))

    def optimize(self, cost: Sequence[Fraction], allowed: int) -> LPStatus:
        """Bland's rule over columns < allowed."""
        while True:
            reduced = self.reduced_costs(cost)
            entering = next((j for j in range(allowed) if reduced[j] < 0), None)
            if entering is None:
                return LPStatus.OPTIMAL
            best = None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    key = (self.rhs[i] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return LPStatus.UNBOUNDED
            self.pivot(best[1], entering)


def solve_lp(c: Sequence, A: Sequence[Sequence], b: Sequence) -> LPResult:
    """Minimize c.x subject to A x = b and x >= 0, exactly.

    Args:
        c: Objective coefficients (length n)
        A: Constraint rows (m rows of length n)
        b: Right-hand side (length m)

    Returns:
        LPResult with status, optimal value and a basic optimal solution
    """
    n = len(c)
    cost = [Fraction(v) for v in c]
    rows = []
    rhs = []
    for row, bi in zip(A, b):
        row = [Fraction(v) for v in row]
        bi = Fraction(bi)
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
        rows.append(row)
        rhs.append(bi)
    m = len(rows)

    if m == 0:
        if any(v < 0 for v in cost):
            return LPResult(LPStatus.UNBOUNDED)
        return LPResult(LPStatus.OPTIMAL, Fraction(0), [Fraction(0)] * n)

    # phase one: artificial columns n..n+m-1 start basic
    for i in range(m):
        rows[i] = rows[i] + [Fraction(1) if k == i else Fraction(0) for k in range(m)]
    tableau = _Tableau(rows, rhs, list(range(n, n + m)))
    phase_one_cost = [Fraction(0)] * n + [Fraction(1)] * m
    tableau.optimize(phase_one_cost, allowed=n + m)
    if tableau.objective(phase_one_cost) > 0:
        logger.debug(f"LP infeasible after {tableau.pivots} pivots")
        return LPResult(LPStatus.INFEASIBLE, pivots=tableau.pivots)

    # drive remaining artificials out of the basis, dropping redundant rows
    i = 0
    while i < len(tableau.rows):
        if tableau.basis[i] >= n:
            j = next((j for j in range(n) if tableau.rows[i][j] != 0), None)
            if j is None:
                del tableau.rows[i]
                del tableau.rhs[i]
                del tableau.basis[i]
                continue
            tableau.pivot(i, j)
        i += 1

    full_cost = cost + [Fraction(0)] * m
    status = tableau.optimize(full_cost, allowed=n)
    if status == LPStatus.UNBOUNDED:
        return LPResult(status, pivots=tableau.pivots)

    x = [Fraction(0)] * n
    for i, bj in enumerate(tableau.basis):
        x[bj] = tableau.rhs[i]
    value = sum((ci * xi for ci, xi in zip(cost, x)), Fraction(0))
    logger.debug(f"LP optimal value {value} after {tableau.pivots} pivots")
    return LPResult(LPStatus.OPTIMAL, value, x, tableau.pivots)
