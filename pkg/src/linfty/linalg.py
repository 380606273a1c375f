"""Exact rational matrix helpers backed by sympy's DomainMatrix over QQ."""
from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

Matrix = List[List[Fraction]]


def _dm(rows: Sequence[Sequence], ncols: Optional[int] = None) -> DomainMatrix:
    nrows = len(rows)
    if ncols is None:
        ncols = len(rows[0]) if nrows else 0
    data = [[QQ(int(Fraction(v).numerator), int(Fraction(v).denominator)) for v in row] for row in rows]
    return DomainMatrix(data, (nrows, ncols), QQ)


def _fr(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def rank(rows: Sequence[Sequence]) -> int:
    if not rows or not rows[0]:
        return 0
    return _dm(rows).rank()


def nullspace(rows: Sequence[Sequence], ncols: int) -> Matrix:
    """Basis (list of column vectors) of the kernel of an m x ncols matrix."""
    if ncols == 0:
        return []
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    ns = _dm(rows, ncols).nullspace().to_Matrix()
    return [[Fraction(int(v.p), int(v.q)) for v in ns.row(i)] for i in range(ns.rows)]


def solve(rows: Sequence[Sequence], rhs: Sequence, ncols: int) -> Optional[List[Fraction]]:
    """One solution x of A x = b, or None when inconsistent."""
    m = len(rows)
    if ncols == 0:
        return [] if all(Fraction(b) == 0 for b in rhs) else None
    if m == 0:
        return [Fraction(0)] * ncols
    aug = [list(r) + [rhs[i]] for i, r in enumerate(rows)]
    rref, pivots = _dm(aug, ncols + 1).rref()
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    rr = rref.to_Matrix()
    for i, p in enumerate(pivots):
        x[p] = Fraction(int(rr[i, ncols].p), int(rr[i, ncols].q))
    return x


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if not a:
        return []
    inner = len(b)
    ncols = len(b[0]) if b else 0
    return [[sum((a[i][k] * b[k][j] for k in range(inner)), Fraction(0)) for j in range(ncols)]
            for i in range(len(a))]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def zeros(m: int, n: int) -> Matrix:
    return [[Fraction(0)] * n for _ in range(m)]
