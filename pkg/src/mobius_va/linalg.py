"""Exact rational linear algebra on small sparse matrices.

Scalars are ``gmpy2.mpq``.  Matrices acting between weight spaces are stored
column-sparse (:class:`SMat`); rank and determinants use fraction-free
(Bareiss) elimination on integer-cleared rows.
"""

from __future__ import annotations

from math import lcm
from typing import Iterable, Sequence

from gmpy2 import mpq, mpz

Q = mpq
ZERO = mpq(0)
ONE = mpq(1)


def to_q(x) -> mpq:
    """Coerce ints, Fractions, mpq and ``"p/q"`` strings to an exact scalar."""
    if isinstance(x, str):
        return mpq(x.strip())
    if isinstance(x, float):
        raise TypeError("floats are not exact scalars")
    return mpq(x)


def binom(n: int, k: int) -> int:
    """Generalised binomial coefficient n(n-1)...(n-k+1)/k!, valid for negative n."""
    if k < 0:
        return 0
    num = 1
    den = 1
    for i in range(k):
        num *= n - i
        den *= i + 1
    return num // den


class SMat:
    """Column-sparse matrix: ``cols[j]`` lists the nonzero ``(row, value)`` pairs."""

    __slots__ = ("nrows", "ncols", "cols")

    def __init__(self, nrows: int, ncols: int, cols: Sequence[Sequence[tuple[int, mpq]]]):
        self.nrows = nrows
        self.ncols = ncols
        self.cols = tuple(tuple(c) for c in cols)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "SMat":
        return cls(nrows, ncols, [()] * ncols)

    @classmethod
    def identity(cls, n: int) -> "SMat":
        return cls(n, n, [((i, ONE),) for i in range(n)])

    @classmethod
    def from_columns(cls, nrows: int, columns: Iterable[Sequence]) -> "SMat":
        cols = []
        for col in columns:
            cols.append(tuple((i, mpq(x)) for i, x in enumerate(col) if x))
        return cls(nrows, len(cols), cols)

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence], ncols: int | None = None) -> "SMat":
        nrows = len(rows)
        if ncols is None:
            ncols = len(rows[0]) if nrows else 0
        cols = [[] for _ in range(ncols)]
        for i, row in enumerate(rows):
            if len(row) != ncols:
                raise ValueError("ragged matrix")
            for j, x in enumerate(row):
                if x:
                    cols[j].append((i, mpq(x)))
        return cls(nrows, ncols, cols)

    def to_dense(self) -> list[list[mpq]]:
        out = [[ZERO] * self.ncols for _ in range(self.nrows)]
        for j, col in enumerate(self.cols):
            for i, x in col:
                out[i][j] = x
        return out

    def column(self, j: int) -> tuple[mpq, ...]:
        out = [ZERO] * self.nrows
        for i, x in self.cols[j]:
            out[i] = x
        return tuple(out)

    def apply(self, x: Sequence) -> tuple[mpq, ...]:
        out = [ZERO] * self.nrows
        for j, xj in enumerate(x):
            if xj:
                for i, a in self.cols[j]:
                    out[i] += a * xj
        return tuple(out)

    def transpose(self) -> "SMat":
        cols: list[list] = [[] for _ in range(self.nrows)]
        for j, col in enumerate(self.cols):
            for i, x in col:
                cols[i].append((j, x))
        return SMat(self.ncols, self.nrows, cols)

    def __matmul__(self, other: "SMat") -> "SMat":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        cols = []
        for col in other.cols:
            acc: dict[int, mpq] = {}
            for k, b in col:
                for i, a in self.cols[k]:
                    acc[i] = acc.get(i, ZERO) + a * b
            cols.append(tuple(sorted((i, x) for i, x in acc.items() if x)))
        return SMat(self.nrows, other.ncols, cols)

    def scale(self, s) -> "SMat":
        s = mpq(s)
        if not s:
            return SMat.zeros(self.nrows, self.ncols)
        return SMat(self.nrows, self.ncols, [tuple((i, x * s) for i, x in c) for c in self.cols])

    def __add__(self, other: "SMat") -> "SMat":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")
        cols = []
        for a, b in zip(self.cols, other.cols):
            acc = dict(a)
            for i, x in b:
                acc[i] = acc.get(i, ZERO) + x
            cols.append(tuple(sorted((i, x) for i, x in acc.items() if x)))
        return SMat(self.nrows, self.ncols, cols)

    def __sub__(self, other: "SMat") -> "SMat":
        return self + other.scale(-1)

    def is_zero(self) -> bool:
        return not any(self.cols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SMat):
            return NotImplemented
        return (self.nrows, self.ncols) == (other.nrows, other.ncols) and self.cols == other.cols

    def __hash__(self):
        return hash((self.nrows, self.ncols, self.cols))

    def __repr__(self) -> str:
        return f"SMat({self.nrows}x{self.ncols}, nnz={sum(len(c) for c in self.cols)})"


def _integer_rows(rows: Sequence[Sequence]) -> list[list[mpz]]:
    out = []
    for row in rows:
        qs = [mpq(x) for x in row]
        den = 1
        for x in qs:
            den = lcm(den, int(x.denominator))
        out.append([mpz(x * den) for x in qs])
    return out


def bareiss(rows: Sequence[Sequence]) -> tuple[int, list[list[mpz]], int]:
    """Fraction-free row reduction.

    Returns ``(rank, reduced_rows, sign)`` where ``sign`` tracks row swaps.
    Entries stay integral throughout: each elimination step divides exactly by
    the previous pivot.
    """
    a = _integer_rows(rows)
    n = len(a)
    m = len(a[0]) if n else 0
    sign = 1
    prev = mpz(1)
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if a[i][c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            a[r], a[piv] = a[piv], a[r]
            sign = -sign
        p = a[r][c]
        for i in range(r + 1, n):
            f = a[i][c]
            row_i = a[i]
            row_r = a[r]
            for j in range(c, m):
                row_i[j] = (p * row_i[j] - f * row_r[j]) // prev
        prev = p
        r += 1
        if r == n:
            break
    return r, a, sign


def rank(rows: Sequence[Sequence]) -> int:
    if not rows or not len(rows[0]):
        return 0
    return bareiss(rows)[0]


def det(rows: Sequence[Sequence]) -> mpq:
    """Exact determinant of a square rational matrix."""
    n = len(rows)
    if n == 0:
        return ONE
    qs = [[mpq(x) for x in row] for row in rows]
    scale = mpq(1)
    for row in qs:
        den = 1
        for x in row:
            den = lcm(den, int(x.denominator))
        scale *= den
    r, a, sign = bareiss(qs)
    if r < n:
        return ZERO
    return mpq(sign * a[n - 1][n - 1]) / scale


def ldl_pivots(gram: Sequence[Sequence]) -> list[mpq]:
    """Diagonal of the exact LDL^T factorisation (no pivoting).

    Stops at the first nonpositive pivot, which is returned as the last
    entry; a symmetric matrix is positive definite iff every pivot is > 0.
    """
    n = len(gram)
    a = [[mpq(x) for x in row] for row in gram]
    pivots = []
    for k in range(n):
        d = a[k][k]
        pivots.append(d)
        if d <= 0:
            break
        for i in range(k + 1, n):
            f = a[i][k] / d
            if f:
                for j in range(k + 1, n):
                    a[i][j] -= f * a[k][j]
    return pivots


def inverse(rows: Sequence[Sequence]) -> list[list[mpq]]:
    """Gauss-Jordan inverse; raises ``ZeroDivisionError`` when singular."""
    n = len(rows)
    a = [[mpq(x) for x in row] + [ONE if i == j else ZERO for j in range(n)] for i, row in enumerate(rows)]
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[c], a[piv] = a[piv], a[c]
        p = a[c][c]
        a[c] = [x / p for x in a[c]]
        for i in range(n):
            if i != c and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return [row[n:] for row in a]


def nullspace(rows: Sequence[Sequence]) -> list[list[mpq]]:
    """Basis of the right kernel of a rational matrix (reduced echelon form)."""
    n = len(rows)
    m = len(rows[0]) if n else 0
    a = [[mpq(x) for x in row] for row in rows]
    pivcols = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        a[r] = [x / p for x in a[r]]
        for i in range(n):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivcols.append(c)
        r += 1
    free = [c for c in range(m) if c not in pivcols]
    basis = []
    for fcol in free:
        v = [ZERO] * m
        v[fcol] = ONE
        for i, pc in enumerate(pivcols):
            v[pc] = -a[i][fcol]
        basis.append(v)
    return basis


def solve_in_span(vectors: Sequence[Sequence], target: Sequence) -> list[mpq] | None:
    """Coefficients x with sum_i x_i vectors[i] == target, or None if target is outside the span.

    ``vectors`` must be linearly independent.
    """
    k = len(vectors)
    m = len(target)
    # augmented system: columns are the vectors
    a = [[mpq(vectors[j][i]) for j in range(k)] + [mpq(target[i])] for i in range(m)]
    pivcols = []
    r = 0
    for c in range(k):
        piv = next((i for i in range(r, m) if a[i][c]), None)
        if piv is None:
            raise ValueError("vectors are linearly dependent")
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        a[r] = [x / p for x in a[r]]
        for i in range(m):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivcols.append(c)
        r += 1
    if any(a[i][k] for i in range(r, m)):
        return None
    return [a[i][k] for i in range(k)]
