"""Truncated N-graded inner-product spaces with an sl2 = {L_-1, L_0, L_1} action.

A :class:`GradedSpace` holds the weight spaces V(0), ..., V(D) of depth D.
Vectors (:class:`Vec`) are degree-indexed coefficient tuples over exact
rationals.  Anything pushed above degree D is dropped and the result carries
``truncated=True``; no identity is ever asserted on a truncated value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .linalg import ONE, ZERO, Q, SMat, ldl_pivots, to_q


class InvariantViolation(ValueError):
    def __init__(self, kind: str, detail: str = ""):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind}: {detail}" if detail else kind)


class SpaceMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GradedSpace:
    dims: tuple[int, ...]
    gram: tuple[tuple[tuple[Q, ...], ...], ...]
    lminus1: tuple[SMat, ...]  # lminus1[n]: V(n) -> V(n+1), n < depth
    l1: tuple[SMat, ...]  # l1[n]: V(n) -> V(n-1), l1[0] is 0 x dim V(0)
    labels: tuple[tuple[str, ...], ...]
    positive: bool = True

    @property
    def depth(self) -> int:
        return len(self.dims) - 1

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def basis(self):
        """All basis vectors in canonical (degree, index) order."""
        for n, dim in enumerate(self.dims):
            for i in range(dim):
                yield Vec.basis(self, n, i)

    def vacuum(self) -> "Vec":
        return Vec.basis(self, 0, 0)

    def zero(self) -> "Vec":
        return Vec(self, {})

    def label(self, degree: int, index: int) -> str:
        return self.labels[degree][index]

    def __repr__(self) -> str:
        return f"GradedSpace(dims={list(self.dims)})"


@dataclass(frozen=True, eq=False)
class Vec:
    space: GradedSpace
    comps: Mapping[int, tuple[Q, ...]] = field(default_factory=dict)
    truncated: bool = False

    @classmethod
    def basis(cls, space: GradedSpace, degree: int, index: int) -> "Vec":
        dim = space.dims[degree]
        return cls(space, {degree: tuple(ONE if i == index else ZERO for i in range(dim))})

    @classmethod
    def from_coeffs(cls, space: GradedSpace, degree: int, coeffs: Sequence) -> "Vec":
        if len(coeffs) != space.dims[degree]:
            raise ValueError(f"degree {degree} has dimension {space.dims[degree]}, got {len(coeffs)} coefficients")
        return cls(space, {degree: tuple(to_q(x) for x in coeffs)})

    def component(self, degree: int) -> tuple[Q, ...]:
        c = self.comps.get(degree)
        if c is None:
            if 0 <= degree <= self.space.depth:
                return (ZERO,) * self.space.dims[degree]
            raise IndexError(degree)
        return c

    def degrees(self) -> list[int]:
        """Degrees carrying a nonzero component, ascending."""
        return sorted(n for n, c in self.comps.items() if any(c))

    @property
    def degree(self) -> int | None:
        """The degree of a nonzero homogeneous vector, else None."""
        ds = self.degrees()
        return ds[0] if len(ds) == 1 else None

    def is_zero(self) -> bool:
        return not self.degrees()

    def _check(self, other: "Vec") -> None:
        if other.space is not self.space:
            raise SpaceMismatch("vectors live in different spaces")

    def __add__(self, other: "Vec") -> "Vec":
        self._check(other)
        comps = dict(self.comps)
        for n, c in other.comps.items():
            if n in comps:
                comps[n] = tuple(a + b for a, b in zip(comps[n], c))
            else:
                comps[n] = c
        return Vec(self.space, comps, self.truncated or other.truncated)

    def __neg__(self) -> "Vec":
        return self.scale(-1)

    def __sub__(self, other: "Vec") -> "Vec":
        return self + other.scale(-1)

    def scale(self, s) -> "Vec":
        s = to_q(s)
        return Vec(self.space, {n: tuple(x * s for x in c) for n, c in self.comps.items()}, self.truncated)

    def __rmul__(self, s) -> "Vec":
        return self.scale(s)

    def flagged(self, truncated: bool = True) -> "Vec":
        return Vec(self.space, self.comps, self.truncated or truncated)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vec) or other.space is not self.space:
            return NotImplemented
        for n in set(self.comps) | set(other.comps):
            if self.component(n) != other.component(n):
                return False
        return True

    def __hash__(self):
        return hash(tuple((n, self.comps[n]) for n in self.degrees()))

    def as_dict(self) -> dict[str, list[str]]:
        return {str(n): [str(x) for x in self.comps[n]] for n in self.degrees()}

    def pretty(self) -> str:
        terms = []
        for n in self.degrees():
            for i, x in enumerate(self.comps[n]):
                if x:
                    terms.append(f"{x}*{self.space.labels[n][i]}")
        s = " + ".join(terms) if terms else "0"
        return s + (" [truncated]" if self.truncated else "")

    def __repr__(self) -> str:
        return f"Vec({self.pretty()})"


def make_space(
    dims: Sequence[int],
    gram: Sequence[Sequence[Sequence]],
    Lminus1: Sequence,
    L1: Sequence,
    labels: Sequence[Sequence[str]] | None = None,
    *,
    require_positive: bool = True,
) -> GradedSpace:
    """Build and validate a truncated graded space.

    ``Lminus1[n]`` is the matrix of L_-1 : V(n) -> V(n+1) for n < D and
    ``L1[n]`` the matrix of L_1 : V(n) -> V(n-1) for 1 <= n <= D (``L1`` may
    also be given with a leading entry for n = 0, which is ignored).  Matrices
    may be :class:`SMat` or dense row lists.

    With ``require_positive=False`` an indefinite or degenerate form is kept
    and recorded in ``space.positive``; positivity is then left to the
    unitarity checks.
    """
    dims = tuple(int(d) for d in dims)
    D = len(dims) - 1
    if D < 0:
        raise InvariantViolation("dims", "need at least degree 0")
    if dims[0] != 1:
        raise InvariantViolation("vacuum", f"dim V(0) = {dims[0]}, expected 1")
    if any(d < 0 for d in dims):
        raise InvariantViolation("dims", "negative dimension")
    if len(gram) != D + 1:
        raise InvariantViolation("shape", f"gram has {len(gram)} levels, expected {D + 1}")

    grams = []
    for n, g in enumerate(gram):
        rows = tuple(tuple(to_q(x) for x in row) for row in g)
        if len(rows) != dims[n] or any(len(r) != dims[n] for r in rows):
            raise InvariantViolation("shape", f"gram at degree {n} is not {dims[n]}x{dims[n]}")
        for i in range(dims[n]):
            for j in range(i):
                if rows[i][j] != rows[j][i]:
                    raise InvariantViolation("symmetry", f"gram at degree {n}, entries ({i},{j})")
        grams.append(rows)

    def as_smat(m, nrows, ncols, what):
        if isinstance(m, SMat):
            mat = m
        elif nrows == 0 or ncols == 0:
            mat = SMat.zeros(nrows, ncols)
        else:
            mat = SMat.from_dense(m)
        if (mat.nrows, mat.ncols) != (nrows, ncols):
            raise InvariantViolation("shape", f"{what} is {mat.nrows}x{mat.ncols}, expected {nrows}x{ncols}")
        return mat

    if len(Lminus1) < D:
        raise InvariantViolation("shape", f"need {D} L_-1 blocks, got {len(Lminus1)}")
    lm = tuple(as_smat(Lminus1[n], dims[n + 1], dims[n], f"L_-1 on V({n})") for n in range(D))

    l1_in = list(L1)
    if len(l1_in) == D:
        l1_in = [None] + l1_in
    if len(l1_in) != D + 1:
        raise InvariantViolation("shape", f"need {D} L_1 blocks, got {len(L1)}")
    l1 = [SMat.zeros(0, dims[0])]
    for n in range(1, D + 1):
        l1.append(as_smat(l1_in[n], dims[n - 1], dims[n], f"L_1 on V({n})"))
    l1 = tuple(l1)

    if labels is None:
        labels = [[f"e{n}_{i}" for i in range(dims[n])] for n in range(D + 1)]
    labels = tuple(tuple(str(s) for s in level) for level in labels)
    if tuple(len(level) for level in labels) != dims:
        raise InvariantViolation("shape", "labels do not match dims")

    # [L_1, L_-1] = 2 L_0 on V(n), n < D
    for n in range(D):
        lhs = l1[n + 1] @ lm[n]
        if n > 0:
            lhs = lhs - lm[n - 1] @ l1[n]
        if lhs != SMat.identity(dims[n]).scale(2 * n):
            raise InvariantViolation("sl2", f"[L_1, L_-1] != 2 L_0 on V({n})")

    # <L_-1 u, v> = <u, L_1 v> for u in V(n), v in V(n+1)
    for n in range(D):
        g_lo = SMat.from_dense(grams[n]) if dims[n] else SMat.zeros(0, 0)
        g_hi = SMat.from_dense(grams[n + 1]) if dims[n + 1] else SMat.zeros(0, 0)
        if lm[n].transpose() @ g_hi != g_lo @ l1[n + 1]:
            raise InvariantViolation("adjoint", f"<L_-1 u, v> != <u, L_1 v> between V({n}) and V({n + 1})")

    positive = True
    for n in range(D + 1):
        if dims[n] == 0:
            continue
        piv = ldl_pivots(grams[n])
        if len(piv) < dims[n] or piv[-1] <= 0:
            positive = False
            if require_positive:
                raise InvariantViolation("positivity", f"gram at degree {n} is not positive definite (pivot {piv[-1]})")

    return GradedSpace(dims, tuple(grams), lm, l1, labels, positive)


def apply_sl2(space: GradedSpace, k: int, v: Vec) -> Vec:
    """L_k v for k in {-1, 0, 1}; components pushed above the depth are dropped and flagged."""
    if v.space is not space:
        raise SpaceMismatch("vector does not belong to this space")
    truncated = v.truncated
    comps: dict[int, tuple] = {}
    for n, c in v.comps.items():
        if not any(c):
            continue
        if k == 0:
            comps[n] = tuple(x * n for x in c)
        elif k == -1:
            if n == space.depth:
                truncated = True
                continue
            comps[n + 1] = space.lminus1[n].apply(c)
        elif k == 1:
            if n == 0:
                continue
            comps[n - 1] = space.l1[n].apply(c)
        else:
            raise ValueError(f"k must be -1, 0 or 1, got {k}")
    return Vec(space, comps, truncated)


def inner(u: Vec, v: Vec) -> Q:
    """Degree-wise Gram pairing <u, v>."""
    if u.space is not v.space:
        raise SpaceMismatch("vectors live in different spaces")
    g = u.space.gram
    total = ZERO
    for n, a in u.comps.items():
        b = v.comps.get(n)
        if b is None:
            continue
        gn = g[n]
        for i, x in enumerate(a):
            if x:
                row = gn[i]
                for j, y in enumerate(b):
                    if y:
                        total += x * row[j] * y
    return total
