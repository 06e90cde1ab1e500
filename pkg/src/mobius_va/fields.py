"""Formal distributions A(z) = sum_n A_(n) z^(-n-1) stored as truncated mode tables.

A homogeneous :class:`FieldTable` of weight d keeps one sparse block per
(unshifted mode n, source degree m), mapping V(m) -> V(m + d - n - 1).  Blocks
whose target leaves [0, D] are never stored: a negative target is exactly
zero, a target above D is truncated.  Blocks that should exist but could not
be computed exactly (an intermediate degree left the window) are listed in
``missing`` and behave as truncated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .core import GradedSpace, SpaceMismatch, Vec, apply_sl2
from .linalg import ONE, ZERO, SMat, binom, to_q

TRUNC = object()


class UndefinedWeight(ValueError):
    pass


class HeadroomExceeded(RuntimeError):
    def __init__(self, details: str):
        self.details = details
        super().__init__(details)


@dataclass(frozen=True, eq=False)
class FieldTable:
    space: GradedSpace
    weight: int | None
    blocks: Mapping[tuple[int, int], SMat] = field(default_factory=dict)
    missing: frozenset = frozenset()
    parts: tuple["FieldTable", ...] = ()
    name: str = ""

    @classmethod
    def from_function(
        cls,
        space: GradedSpace,
        weight: int,
        column: Callable[[int, int, int], Sequence],
        name: str = "",
    ) -> "FieldTable":
        """Tabulate a homogeneous field from ``column(n, m, i)``.

        ``column`` returns the coefficients of A_(n) e_i in V(m + weight - n - 1)
        for the i-th basis vector e_i of V(m).
        """
        blocks = {}
        for n, m, t in expected_keys(space, weight):
            mat = SMat.from_columns(space.dims[t], (column(n, m, i) for i in range(space.dims[m])))
            if not mat.is_zero():
                blocks[(n, m)] = mat
        return cls(space, weight, blocks, frozenset(), (), name)

    @property
    def homogeneous(self) -> bool:
        return self.weight is not None

    def target(self, n: int, m: int) -> int:
        return m + self.weight - n - 1

    def is_valid(self, n: int, m: int) -> bool:
        """True when the (n, m) block is known exactly (possibly zero)."""
        if self.parts:
            return all(p.is_valid(n, m) for p in self.parts)
        t = self.target(n, m)
        if t < 0:
            return True
        return t <= self.space.depth and (n, m) not in self.missing

    def block(self, n: int, m: int):
        """The (n, m) block, ``None`` when it is exactly zero, or ``TRUNC``."""
        t = self.target(n, m)
        if t < 0:
            return None
        if t > self.space.depth or (n, m) in self.missing:
            return TRUNC
        return self.blocks.get((n, m))

    def mode_indices(self) -> range:
        """Unshifted mode indices that can act nontrivially inside the window."""
        if self.parts:
            lo = min(p.mode_indices().start for p in self.parts)
            hi = max(p.mode_indices().stop for p in self.parts)
            return range(lo, hi)
        D = self.space.depth
        return range(self.weight - 1 - D, self.weight + D)

    def __repr__(self) -> str:
        w = "mixed" if self.weight is None else self.weight
        return f"FieldTable({self.name or '?'}, weight={w}, blocks={len(self.blocks)}, missing={len(self.missing)})"


def expected_keys(space: GradedSpace, weight: int):
    """(n, m, target) for every block with source and target inside [0, D] and nonzero dims."""
    D = space.depth
    for m in range(D + 1):
        if not space.dims[m]:
            continue
        for t in range(D + 1):
            if not space.dims[t]:
                continue
            yield m + weight - t - 1, m, t


def _act(F: FieldTable, n: int, m: int, x: Sequence):
    """A_(n) applied to the coefficient tuple x in V(m): None (zero), TRUNC, or (target, coeffs)."""
    t = m + F.weight - n - 1
    if t < 0:
        return None
    if t > F.space.depth or (n, m) in F.missing:
        return TRUNC
    blk = F.blocks.get((n, m))
    if blk is None:
        return None
    y = blk.apply(x)
    if not any(y):
        return None
    return t, y


def _unit(dim: int, i: int) -> tuple:
    return tuple(ONE if j == i else ZERO for j in range(dim))


def mode_apply(A: FieldTable, n: int, v: Vec) -> Vec:
    """A_(n) v; flagged truncated when any needed block is unavailable."""
    if v.space is not A.space:
        raise SpaceMismatch("vector and field live in different spaces")
    if A.parts:
        out = A.space.zero().flagged(v.truncated)
        for p in A.parts:
            out = out + mode_apply(p, n, v)
        return out
    comps: dict[int, list] = {}
    truncated = v.truncated
    for m, x in v.comps.items():
        if not any(x):
            continue
        r = _act(A, n, m, x)
        if r is None:
            continue
        if r is TRUNC:
            truncated = True
            continue
        t, y = r
        if t in comps:
            comps[t] = [a + b for a, b in zip(comps[t], y)]
        else:
            comps[t] = list(y)
    return Vec(A.space, {t: tuple(c) for t, c in comps.items()}, truncated)


def shifted_mode_apply(A: FieldTable, n: int, v: Vec) -> Vec:
    """Degree-shifted mode A_n = A_(n + d - 1), which maps V(m) into V(m - n)."""
    if A.weight is None:
        raise UndefinedWeight(f"field {A.name or '?'} is not homogeneous; shifted modes are undefined")
    return mode_apply(A, n + A.weight - 1, v)


def identity_field(space: GradedSpace) -> FieldTable:
    """Y(Omega, z) = Id: the only nonzero mode is Id_(-1) = 1."""
    blocks = {(-1, m): SMat.identity(space.dims[m]) for m in range(space.depth + 1) if space.dims[m]}
    return FieldTable(space, 0, blocks, frozenset(), (), "Id")


def derivative(A: FieldTable) -> FieldTable:
    """(dA/dz)_(n) = -n A_(n-1); weight goes up by one."""
    if A.parts:
        return combine([(ONE, derivative(p)) for p in A.parts], name=f"d({A.name})")
    blocks = {}
    for (n, m), blk in A.blocks.items():
        if n + 1 != 0:
            blocks[(n + 1, m)] = blk.scale(-(n + 1))
    missing = frozenset((n + 1, m) for (n, m) in A.missing if n + 1 != 0)
    return FieldTable(A.space, A.weight + 1, blocks, missing, (), f"d({A.name})")


def combine(terms: Iterable[tuple], name: str = "") -> FieldTable:
    """Linear combination sum_i c_i F_i; mixed weights give a non-homogeneous field."""
    terms = [(to_q(c), F) for c, F in terms if c]
    if not terms:
        raise ValueError("empty combination; use zero_field")
    space = terms[0][1].space
    flat = []
    for c, F in terms:
        if F.space is not space:
            raise SpaceMismatch("fields live in different spaces")
        if F.parts:
            flat.extend((c, p) for p in F.parts)
        else:
            flat.append((c, F))
    by_weight: dict[int, list] = {}
    for c, F in flat:
        by_weight.setdefault(F.weight, []).append((c, F))
    homog = []
    for w in sorted(by_weight):
        blocks: dict = {}
        missing = set()
        for c, F in by_weight[w]:
            missing |= F.missing
            for key, blk in F.blocks.items():
                blocks[key] = blocks[key] + blk.scale(c) if key in blocks else blk.scale(c)
        blocks = {k: b for k, b in blocks.items() if k not in missing and not b.is_zero()}
        homog.append(FieldTable(space, w, blocks, frozenset(missing), (), name))
    if len(homog) == 1:
        return homog[0]
    return FieldTable(space, None, {}, frozenset(), tuple(homog), name)


def zero_field(space: GradedSpace, weight: int, name: str = "0") -> FieldTable:
    return FieldTable(space, weight, {}, frozenset(), (), name)


def n_product(A: FieldTable, B: FieldTable, n: int, *, strict: bool = False, name: str | None = None) -> FieldTable:
    """Borcherds product A_(n)B via the residue expansion

        (A_(n)B)_(k) = sum_j (-1)^j C(n, j) (A_(n-j) B_(k+j) - (-1)^n B_(n+k-j) A_(j)).

    Blocks whose evaluation needs a degree above the depth are dropped into
    ``missing``; with ``strict=True`` the first such block raises
    :class:`HeadroomExceeded` instead.
    """
    if A.space is not B.space:
        raise SpaceMismatch("fields live in different spaces")
    if A.weight is None or B.weight is None:
        raise UndefinedWeight("n-products are taken between homogeneous fields")
    space = A.space
    dA, dB = A.weight, B.weight
    d = dA + dB - n - 1
    sign_n = -1 if n % 2 else 1
    # the j-sums terminate: binom(n, j) = 0 for j > n >= 0, and modes annihilate past the grading bound
    coeffs1 = {}
    coeffs2 = {}
    blocks = {}
    missing = set()
    for k, m, t in expected_keys(space, d):
        jmax1 = m + dB - k - 1
        jmax2 = m + dA - 1
        if n >= 0:
            jmax1 = min(jmax1, n)
            jmax2 = min(jmax2, n)
        cols = []
        bad = None
        for i in range(space.dims[m]):
            x = _unit(space.dims[m], i)
            acc = [ZERO] * space.dims[t]
            for j in range(jmax1 + 1):
                c = coeffs1.get(j)
                if c is None:
                    c = coeffs1[j] = (-1) ** j * binom(n, j)
                if not c:
                    continue
                r = _act(B, k + j, m, x)
                if r is None:
                    continue
                if r is TRUNC:
                    bad = ("B", k + j, m)
                    break
                r = _act(A, n - j, r[0], r[1])
                if r is None:
                    continue
                if r is TRUNC:
                    bad = ("A", n - j, m)
                    break
                for q, y in enumerate(r[1]):
                    if y:
                        acc[q] += c * y
            if bad:
                break
            for j in range(jmax2 + 1):
                c = coeffs2.get(j)
                if c is None:
                    c = coeffs2[j] = -sign_n * (-1) ** j * binom(n, j)
                if not c:
                    continue
                r = _act(A, j, m, x)
                if r is None:
                    continue
                if r is TRUNC:
                    bad = ("A", j, m)
                    break
                r = _act(B, n + k - j, r[0], r[1])
                if r is None:
                    continue
                if r is TRUNC:
                    bad = ("B", n + k - j, m)
                    break
                for q, y in enumerate(r[1]):
                    if y:
                        acc[q] += c * y
            if bad:
                break
            cols.append(acc)
        if bad:
            if strict:
                raise HeadroomExceeded(
                    f"mode {k} of ({A.name})_({n})({B.name}) on V({m}) needs {bad[0]}_({bad[1]}) beyond depth {space.depth}"
                )
            missing.add((k, m))
            continue
        mat = SMat.from_columns(space.dims[t], cols)
        if not mat.is_zero():
            blocks[(k, m)] = mat
    if name is None:
        name = f"{A.name}_({n}){B.name}"
    return FieldTable(space, d, blocks, frozenset(missing), (), name)


def default_headroom(A: FieldTable, B: FieldTable, n: int) -> int:
    """Degrees of slack that make every block of A_(n)B exact on [0, D - H]."""
    return A.weight + B.weight + abs(n) + 2


def compare_fields(A: FieldTable, B: FieldTable, window: int | None = None) -> tuple[list, int]:
    """Blocks where A and B differ, among blocks valid for both; also returns the number compared."""
    if A.space is not B.space:
        raise SpaceMismatch("fields live in different spaces")
    if A.weight is None or B.weight is None:
        raise UndefinedWeight("comparison is blockwise on homogeneous fields")
    space = A.space
    D = space.depth if window is None else window
    diffs = []
    compared = 0
    if A.weight != B.weight:
        # different gradings: equal only if both vanish on the valid window
        for F in (A, B):
            for key, blk in F.blocks.items():
                if key[1] <= D and F.target(*key) <= D:
                    diffs.append(key)
        return diffs, len(A.blocks) + len(B.blocks)
    for n, m, t in expected_keys(space, A.weight):
        if m > D or t > D:
            continue
        if (n, m) in A.missing or (n, m) in B.missing:
            continue
        compared += 1
        a = A.blocks.get((n, m))
        b = B.blocks.get((n, m))
        if a is None and b is None:
            continue
        if a is None or b is None or a != b:
            diffs.append((n, m))
    return diffs, compared


def direct_commutator(A: FieldTable, B: FieldTable, m: int, n: int, v: Vec) -> Vec:
    """[A_m, B_n] v by composing shifted modes directly."""
    ab = shifted_mode_apply(A, m, shifted_mode_apply(B, n, v))
    ba = shifted_mode_apply(B, n, shifted_mode_apply(A, m, v))
    return ab - ba


def borcherds_products(A: FieldTable, B: FieldTable) -> list[FieldTable]:
    """The (s)-products A_(s)B for s = 0 .. d_A + d_B - 1."""
    if A.weight is None or B.weight is None:
        raise UndefinedWeight("commutator formula needs homogeneous fields")
    return [n_product(A, B, s) for s in range(A.weight + B.weight)]


def commutator_via_borcherds(
    A: FieldTable, B: FieldTable, m: int, n: int, products: Sequence[FieldTable] | None = None
) -> Callable[[Vec], Vec]:
    """The operator sum_s C(m + d_A - 1, s) (A_(s)B)_{m+n} from the commutator formula.

    ``m`` and ``n`` are shifted indices.  Pass ``products`` from
    :func:`borcherds_products` to reuse them across many (m, n).
    """
    if products is None:
        products = borcherds_products(A, B)
    dA = A.weight
    terms = [(binom(m + dA - 1, s), P) for s, P in enumerate(products)]
    terms = [(c, P) for c, P in terms if c]

    def op(v: Vec) -> Vec:
        out = A.space.zero().flagged(v.truncated)
        for c, P in terms:
            out = out + shifted_mode_apply(P, m + n, v).scale(c)
        return out

    return op


@dataclass(frozen=True)
class LocalityResult:
    order: int | None
    n_max: int
    checked_depth: int
    checked: int = 0
    witness: tuple | None = None  # failing (N, p, q, basis label) at order - 1 or at n_max

    @property
    def local(self) -> bool:
        return self.order is not None

    def __str__(self) -> str:
        if self.order is None:
            return f"NotLocalUpTo({self.n_max})"
        return f"order {self.order}"


class _CommCache:
    """Memoised [A_(a), B_(b)] e for one basis vector e."""

    def __init__(self, A: FieldTable, B: FieldTable, m: int, x: tuple):
        self.A, self.B, self.m, self.x = A, B, m, x
        self.memo: dict = {}

    def get(self, a: int, b: int):
        key = (a, b)
        if key in self.memo:
            return self.memo[key]
        self.memo[key] = res = self._compute(a, b)
        return res

    def _compute(self, a: int, b: int):
        A, B, m, x = self.A, self.B, self.m, self.x
        t = m + A.weight + B.weight - a - b - 2
        if t < 0:
            return None
        if t > A.space.depth:
            return TRUNC
        acc = None
        for first, fa, second, fb, sign in ((B, b, A, a, 1), (A, a, B, b, -1)):
            r = _act(first, fb, m, x)
            if r is None:
                continue
            if r is TRUNC:
                return TRUNC
            r = _act(second, fa, r[0], r[1])
            if r is None:
                continue
            if r is TRUNC:
                return TRUNC
            y = r[1]
            if acc is None:
                acc = [sign * c for c in y]
            else:
                acc = [p + sign * c for p, c in zip(acc, y)]
        if acc is None or not any(acc):
            return None
        return tuple(acc)


def locality_order(A: FieldTable, B: FieldTable, N_max: int) -> LocalityResult:
    """Smallest N <= N_max with (z - w)^N [A(z), B(w)] = 0 on every untruncated coefficient.

    The coefficient of z^(-p-1) w^(-q-1) is
    sum_k (-1)^k C(N, k) [A_(p+N-k), B_(q+k)], tested on each basis vector.
    """
    if A.space is not B.space:
        raise SpaceMismatch("fields live in different spaces")
    if A.weight is None or B.weight is None:
        raise UndefinedWeight("locality is tested between homogeneous fields")
    space = A.space
    D = space.depth
    dA, dB = A.weight, B.weight
    caches = []
    for s, dim in enumerate(space.dims):
        for i in range(dim):
            caches.append((s, space.labels[s][i], _CommCache(A, B, s, _unit(dim, i))))
    witness = None
    checked_total = 0
    for N in range(N_max + 1):
        coeffs = [(-1) ** k * binom(N, k) for k in range(N + 1)]
        failed = None
        checked = 0
        for s, label, cache in caches:
            for p in range(dA - D - 2 - N, D + dA + 1):
                # only targets t in [0, D]: t < 0 is exactly zero, t > D is truncated
                base = s + dA + dB - p - N - 2
                for q in range(base - D, base + 1):
                    acc = None
                    skip = False
                    for k, c in enumerate(coeffs):
                        r = cache.get(p + N - k, q + k)
                        if r is None:
                            continue
                        if r is TRUNC:
                            skip = True
                            break
                        if acc is None:
                            acc = [c * y for y in r]
                        else:
                            acc = [a + c * y for a, y in zip(acc, r)]
                    if skip:
                        continue
                    checked += 1
                    if acc is not None and any(acc):
                        failed = (N, p, q, label)
                        break
                if failed:
                    break
            if failed:
                break
        checked_total += checked
        if failed is None:
            return LocalityResult(N, N_max, D, checked, witness)
        witness = failed
    return LocalityResult(None, N_max, D, checked_total, witness)


@dataclass
class CovarianceReport:
    weight: int
    checked: int = 0
    truncated: int = 0
    violations: list = field(default_factory=list)  # (k, m, basis label)

    @property
    def passed(self) -> bool:
        return not self.violations and self.checked > 0


def covariance_check(A: FieldTable, d: int, ks: Sequence[int] = (-1, 0, 1)) -> CovarianceReport:
    """Check [L_k, phi_m] = (k(d - 1) - m) phi_{m+k} with phi_m = A_(m + d - 1).

    This is the mode form of [L_k, phi(z)] = (z^(k+1) d/dz + (k+1) z^k d) phi(z);
    the declared ``d`` fixes both the index shift and the coefficient.
    """
    space = A.space
    D = space.depth
    rep = CovarianceReport(d)
    for k in ks:
        for m in range(-D - 2, D + 3):
            coef = k * (d - 1) - m
            for e in space.basis():
                lhs = apply_sl2(space, k, mode_apply(A, m + d - 1, e)) - mode_apply(A, m + d - 1, apply_sl2(space, k, e))
                rhs = mode_apply(A, m + k + d - 1, e).scale(coef)
                if lhs.truncated or rhs.truncated:
                    rep.truncated += 1
                    continue
                rep.checked += 1
                if lhs != rhs:
                    rep.violations.append((k, m, space.labels[e.degree][_index(e)]))
    return rep


def _index(e: Vec) -> int:
    c = e.comps[e.degree]
    return next(i for i, x in enumerate(c) if x)
