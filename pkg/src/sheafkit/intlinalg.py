"""Exact integer matrix algebra: Smith normal form and what it buys.

Everything works on arbitrary-precision Python ints, so entry growth during
reduction is harmless at the matrix sizes used here.  The Smith form S = U A V
(U, V unimodular) yields integer solvability of A x = b, an integer kernel
basis, and the invariant factors of quotient groups.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


@dataclass
class ZMat:
    """Dense integer matrix with an explicit shape (rows may be empty)."""

    m: int
    n: int
    a: list[list[int]]

    def __post_init__(self) -> None:
        if len(self.a) != self.m or any(len(r) != self.n for r in self.a):
            raise ValueError("matrix data does not match declared shape")

    @staticmethod
    def zeros(m: int, n: int) -> "ZMat":
        return ZMat(m, n, [[0] * n for _ in range(m)])

    @staticmethod
    def identity(n: int) -> "ZMat":
        return ZMat(n, n, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @staticmethod
    def from_rows(rows: Sequence[Sequence[int]], n: int | None = None) -> "ZMat":
        rows = [list(r) for r in rows]
        if n is None:
            if not rows:
                raise ValueError("need explicit column count for an empty matrix")
            n = len(rows[0])
        return ZMat(len(rows), n, rows)

    def clone(self) -> "ZMat":
        return ZMat(self.m, self.n, [row[:] for row in self.a])

    def matmul(self, other: "ZMat") -> "ZMat":
        if self.n != other.m:
            raise ValueError(f"shape mismatch {self.m}x{self.n} @ {other.m}x{other.n}")
        out = ZMat.zeros(self.m, other.n)
        for i in range(self.m):
            row = self.a[i]
            orow = out.a[i]
            for k, coef in enumerate(row):
                if coef:
                    brow = other.a[k]
                    for j in range(other.n):
                        orow[j] += coef * brow[j]
        return out

    def matvec(self, x: Sequence[int]) -> list[int]:
        if len(x) != self.n:
            raise ValueError("vector length mismatch")
        return [sum(c * v for c, v in zip(row, x)) for row in self.a]

    def is_zero(self) -> bool:
        return all(v == 0 for row in self.a for v in row)

    def submatrix_rows(self, start: int) -> "ZMat":
        return ZMat(self.m - start, self.n, [row[:] for row in self.a[start:]])


@dataclass
class SmithForm:
    """S = U A V with S diagonal and each divisor dividing the next."""

    s: ZMat
    u: ZMat
    v: ZMat
    v_inv: ZMat
    rank: int
    divisors: list[int]


def smith_normal_form(mat: ZMat) -> SmithForm:
    s = mat.clone()
    m, n = s.m, s.n
    u = ZMat.identity(m)
    v = ZMat.identity(n)
    v_inv = ZMat.identity(n)

    def row_add(i: int, k: int, q: int) -> None:
        s.a[i] = [x + q * y for x, y in zip(s.a[i], s.a[k])]
        u.a[i] = [x + q * y for x, y in zip(u.a[i], u.a[k])]

    def row_swap(i: int, k: int) -> None:
        s.a[i], s.a[k] = s.a[k], s.a[i]
        u.a[i], u.a[k] = u.a[k], u.a[i]

    def row_neg(i: int) -> None:
        s.a[i] = [-x for x in s.a[i]]
        u.a[i] = [-x for x in u.a[i]]

    def col_add(j: int, k: int, q: int) -> None:
        # col_j += q * col_k; the inverse op lands on v_inv's rows.
        for row in s.a:
            row[j] += q * row[k]
        for row in v.a:
            row[j] += q * row[k]
        v_inv.a[k] = [x - q * y for x, y in zip(v_inv.a[k], v_inv.a[j])]

    def col_swap(j: int, k: int) -> None:
        for row in s.a:
            row[j], row[k] = row[k], row[j]
        for row in v.a:
            row[j], row[k] = row[k], row[j]
        v_inv.a[j], v_inv.a[k] = v_inv.a[k], v_inv.a[j]

    t = 0
    while t < min(m, n):
        # Find the smallest-magnitude nonzero entry in the trailing block.
        pivot = None
        best = None
        for i in range(t, m):
            for j in range(t, n):
                val = abs(s.a[i][j])
                if val and (best is None or val < best):
                    best = val
                    pivot = (i, j)
        if pivot is None:
            break
        pi, pj = pivot
        if pi != t:
            row_swap(t, pi)
        if pj != t:
            col_swap(t, pj)
        if s.a[t][t] < 0:
            row_neg(t)

        dirty = False
        for i in range(t + 1, m):
            if s.a[i][t]:
                q = s.a[i][t] // s.a[t][t]
                row_add(i, t, -q)
                if s.a[i][t]:
                    dirty = True  # remainder smaller than pivot; re-select
        if dirty:
            continue
        for j in range(t + 1, n):
            if s.a[t][j]:
                q = s.a[t][j] // s.a[t][t]
                col_add(j, t, -q)
                if s.a[t][j]:
                    dirty = True
        if dirty:
            continue
        # Divisibility pass: fold any non-multiple into row t and retry.
        d = s.a[t][t]
        offender = None
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if s.a[i][j] % d:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            row_add(t, offender, 1)
            continue
        t += 1

    divisors = [s.a[i][i] for i in range(min(m, n)) if s.a[i][i] != 0]
    return SmithForm(s, u, v, v_inv, len(divisors), divisors)


def solve(mat: ZMat, b: Sequence[int]) -> list[int] | None:
    """One integer solution of A x = b, or None when none exists."""
    if len(b) != mat.m:
        raise ValueError("right-hand side length mismatch")
    nf = smith_normal_form(mat)
    ub = nf.u.matvec(list(b))
    w = [0] * mat.n
    for k in range(mat.m):
        if k < nf.rank:
            d = nf.s.a[k][k]
            if ub[k] % d:
                return None
            if k < mat.n:
                w[k] = ub[k] // d
        elif ub[k] != 0:
            return None
    return nf.v.matvec(w)


def kernel_basis(mat: ZMat) -> list[list[int]]:
    """Integer basis of ker A (columns of V past the rank)."""
    nf = smith_normal_form(mat)
    return [[nf.v.a[i][j] for i in range(mat.n)] for j in range(nf.rank, mat.n)]


def rank(mat: ZMat) -> int:
    return smith_normal_form(mat).rank


def quotient_invariants(d_out: ZMat, d_in: ZMat) -> tuple[int, list[int]]:
    """Structure of ker(d_out) / im(d_in) as (free rank, torsion divisors).

    Requires d_out @ d_in = 0.  The inclusion map is re-expressed in kernel
    coordinates via the Smith form of d_out, then reduced again.
    """
    if d_out.n != d_in.m:
        raise ValueError("chain maps do not compose")
    if not d_out.matmul(d_in).is_zero():
        raise ValueError("d_out . d_in != 0; not a chain complex")
    nf_out = smith_normal_form(d_out)
    kernel_dim = d_out.n - nf_out.rank
    coords = nf_out.v_inv.matmul(d_in).submatrix_rows(nf_out.rank)
    nf_in = smith_normal_form(coords)
    torsion = [d for d in nf_in.divisors if d not in (1, -1)]
    return kernel_dim - nf_in.rank, torsion
