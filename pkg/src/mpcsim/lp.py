"""A small exact simplex over Fractions.

Solves  min c.x  subject to  A_ub.x <= b_ub,  A_eq.x == b_eq,  x >= 0
with arbitrary-precision rational arithmetic (two-phase, Bland's rule).
Problem sizes in this package are tiny (tens of rows), so clarity beats
sparsity tricks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

Row = Sequence[Fraction]


class InfeasibleLP(ValueError):
    pass


class UnboundedLP(ValueError):
    pass


@dataclass
class LPResult:
    x: list[Fraction]
    objective: Fraction


def _pivot(T: list[list[Fraction]], basis: list[int], row: int, col: int):
    piv = T[row][col]
    T[row] = [v / piv for v in T[row]]
    for r in range(len(T)):
        if r != row and T[r][col] != 0:
            f = T[r][col]
            T[r] = [a - f * b for a, b in zip(T[r], T[row])]
    basis[row] = col


def _simplex(T: list[list[Fraction]], basis: list[int], ncols: int) -> None:
    """Minimize the objective in the last tableau row over columns [0, ncols)."""
    while True:
        obj = T[-1]
        col = next((j for j in range(ncols) if obj[j] < 0), None)
        if col is None:
            return
        best_row, best_ratio = None, None
        for r in range(len(T) - 1):
            if T[r][col] > 0:
                ratio = T[r][-1] / T[r][col]
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[r] < basis[best_row])
                ):
                    best_row, best_ratio = r, ratio
        if best_row is None:
            raise UnboundedLP("objective unbounded below")
        _pivot(T, basis, best_row, col)


def solve_lp(
    c: Row,
    a_ub: Sequence[Row] = (),
    b_ub: Row = (),
    a_eq: Sequence[Row] = (),
    b_eq: Row = (),
) -> LPResult:
    n = len(c)
    c = [Fraction(v) for v in c]
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    slack_flags: list[bool] = []
    for row, b in zip(a_ub, b_ub):
        rows.append([Fraction(v) for v in row])
        rhs.append(Fraction(b))
        slack_flags.append(True)
    for row, b in zip(a_eq, b_eq):
        rows.append([Fraction(v) for v in row])
        rhs.append(Fraction(b))
        slack_flags.append(False)
    m = len(rows)
    nslack = sum(slack_flags)

    # Columns: structural | slack | artificial | rhs
    ncols = n + nslack + m
    T: list[list[Fraction]] = []
    basis: list[int] = []
    si = 0
    for i in range(m):
        row, b = rows[i], rhs[i]
        if b < 0:
            row = [-v for v in row]
            b = -b
            flip = True
        else:
            flip = False
        line = [Fraction(0)] * (ncols + 1)
        line[:n] = row
        if slack_flags[i]:
            line[n + si] = Fraction(-1) if flip else Fraction(1)
            si += 1
        line[n + nslack + i] = Fraction(1)
        line[-1] = b
        T.append(line)
        basis.append(n + nslack + i)

    # Phase 1: minimize sum of artificials.
    phase1 = [Fraction(0)] * (ncols + 1)
    for i in range(m):
        for j in range(ncols + 1):
            phase1[j] -= T[i][j]
    for i in range(m):
        phase1[n + nslack + i] = Fraction(0)
    T.append(phase1)
    _simplex(T, basis, n + nslack)
    if T[-1][-1] != 0:
        raise InfeasibleLP("no feasible point")
    T.pop()

    # Drive lingering artificials out of the basis where possible.
    for r in range(m):
        if basis[r] >= n + nslack:
            col = next((j for j in range(n + nslack) if T[r][j] != 0), None)
            if col is not None:
                _pivot(T, basis, r, col)

    # Phase 2.
    obj = [Fraction(0)] * (ncols + 1)
    obj[:n] = c
    T.append(obj)
    for r in range(m):
        j = basis[r]
        if j < n and T[-1][j] != 0:
            f = T[-1][j]
            T[-1] = [a - f * b for a, b in zip(T[-1], T[r])]
    _simplex(T, basis, n + nslack)

    x = [Fraction(0)] * n
    for r in range(m):
        if basis[r] < n:
            x[basis[r]] = T[r][-1]
    return LPResult(x=x, objective=sum(ci * xi for ci, xi in zip(c, x)))


def lexmin(
    a_ub: Sequence[Row],
    b_ub: Row,
    n: int,
    a_eq: Sequence[Row] = (),
    b_eq: Row = (),
) -> list[Fraction]:
    """Lexicographically smallest point of {x >= 0 : A_ub.x <= b_ub, A_eq.x == b_eq}.

    Minimizes x_0, fixes it, then x_1, and so on.
    """
    a_eq = [list(map(Fraction, row)) for row in a_eq]
    b_eq = [Fraction(b) for b in b_eq]
    out: list[Fraction] = []
    for i in range(n):
        c = [Fraction(0)] * n
        c[i] = Fraction(1)
        res = solve_lp(c, a_ub, b_ub, a_eq, b_eq)
        vi = res.x[i]
        out.append(vi)
        row = [Fraction(0)] * n
        row[i] = Fraction(1)
        a_eq.append(row)
        b_eq.append(vi)
    return out


def solve_square(A: Sequence[Row], b: Row) -> Optional[list[Fraction]]:
    """Solve A.x = b exactly; None when A is singular."""
    n = len(b)
    M = [[Fraction(v) for v in row] + [Fraction(bv)] for row, bv in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [v / pv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * bb for a, bb in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]
