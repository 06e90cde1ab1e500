"""Reconstruction of a vertex algebra from generating fields.

Starting from mutually local, Moebius covariant generators, the closure under
derivatives and (n)-products is built breadth first; the states A_(-1)|0> of
the closure span the truncated space and give the state-field map Y.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import GradedSpace, SpaceMismatch, Vec, apply_sl2
from .fields import (
    TRUNC,
    FieldTable,
    _act,
    combine,
    compare_fields,
    derivative,
    expected_keys,
    identity_field,
    locality_order,
    mode_apply,
    n_product,
    zero_field,
)
from .linalg import ONE, SMat, binom, rank, solve_in_span
from .report import Check, Report


class SingularAtOrigin(ValueError):
    def __init__(self, n: int):
        self.n = n
        super().__init__(f"A_({n})|0> != 0: the field is singular at z = 0")


class BudgetExhausted(RuntimeError):
    def __init__(self, span_dims: list[int]):
        self.span_dims = span_dims
        super().__init__(f"closure budget exhausted with span dims {span_dims}")


class NotGenerating(RuntimeError):
    def __init__(self, span_dims: list[int], dims: Sequence[int]):
        self.span_dims = span_dims
        self.dims = list(dims)
        super().__init__(f"closure stabilised with span dims {span_dims}, space has {list(dims)}")


class InjectivityFailure(RuntimeError):
    def __init__(self, first: str, second: str, blocks: list):
        self.first, self.second, self.blocks = first, second, blocks
        super().__init__(f"fields {first} and {second} have equal states but differ on blocks {blocks[:5]}")


def state_of_field(A: FieldTable) -> Vec:
    """A_(-1)|0>, after checking A_(n)|0> = 0 for every n >= 0 inside the window."""
    space = A.space
    parts = A.parts or (A,)
    x = (ONE,)
    for F in parts:
        for n in range(0, F.weight):
            r = _act(F, n, 0, x)
            if r is not None and r is not TRUNC:
                raise SingularAtOrigin(n)
    return mode_apply(A, -1, space.vacuum())


@dataclass
class Closure:
    space: GradedSpace
    fields: list[FieldTable]  # one per basis direction, degree by degree in discovery order
    redundant: list[FieldTable] = field(default_factory=list)
    span_dims: list[int] = field(default_factory=list)
    evaluated: int = 0

    def __iter__(self):
        return iter(self.fields)

    def __len__(self) -> int:
        return len(self.fields)


def dong_closure(
    generators: Sequence[FieldTable],
    budget: int = 5000,
    *,
    keep_redundant: int = 8,
    raise_on_partial: bool = True,
) -> Closure:
    """Close {Id} + generators under derivatives and (n)-products.

    Candidates are visited breadth first: derivatives of each new field, then
    products with every earlier field in creation order, n ascending over the
    finitely many values whose product weight lies in [0, D].  A candidate is
    kept when its state raises the rank of the span at its degree.  Up to
    ``keep_redundant`` rejected candidates are retained for the uniqueness
    check in :func:`build_Y`.  ``budget`` caps the number of evaluated products.
    """
    if not generators:
        raise ValueError("need at least one generator")
    space = generators[0].space
    for g in generators:
        if g.space is not space:
            raise SpaceMismatch("generators live in different spaces")
        if g.weight is None:
            raise ValueError(f"generator {g.name} is not homogeneous")
    D = space.depth
    span: list[list[tuple]] = [[] for _ in range(D + 1)]
    accepted: list[FieldTable] = []
    redundant: list[FieldTable] = []
    queue: deque = deque()
    evaluated = 0

    def full() -> bool:
        return all(len(span[n]) == space.dims[n] for n in range(D + 1))

    def offer(F: FieldTable) -> bool:
        if F.weight is None or F.weight < 0 or F.weight > D:
            return False
        s = state_of_field(F)
        if s.truncated:
            return False
        w = F.weight
        vec = s.component(w)
        if any(vec) and rank(span[w] + [vec]) > len(span[w]):
            span[w].append(vec)
            accepted.append(F)
            queue.append(F)
            return True
        if any(vec) and len(redundant) < keep_redundant:
            redundant.append(F)
        return False

    for F in [identity_field(space), *generators]:
        offer(F)
    while queue and not full():
        F = queue.popleft()
        k = accepted.index(F)
        dF = derivative(F)
        offer(dF)
        for G in accepted[: k + 1]:
            pairs = [(G, F)] if G is F else [(G, F), (F, G)]
            for A, B in pairs:
                lo = A.weight + B.weight - 1 - D
                for n in range(lo, A.weight + B.weight):
                    if evaluated >= budget:
                        dims = [len(s) for s in span]
                        raise BudgetExhausted(dims)
                    evaluated += 1
                    offer(n_product(A, B, n))
                    if full():
                        break
                if full():
                    break
            if full():
                break
    dims = [len(s) for s in span]
    closure = Closure(space, accepted, redundant, dims, evaluated)
    if not full() and raise_on_partial:
        raise NotGenerating(dims, space.dims)
    # a few extra candidates for the uniqueness check, if the loop ended early
    if len(redundant) < keep_redundant:
        for F in accepted[1:]:
            for G in accepted[1:]:
                if len(redundant) >= keep_redundant:
                    break
                n = F.weight + G.weight - 1 - D
                cand = n_product(F, G, n)
                if cand.weight == D and not state_of_field(cand).is_zero():
                    redundant.append(cand)
            if len(redundant) >= keep_redundant:
                break
    return closure


@dataclass(eq=False)
class VAStructure:
    space: GradedSpace
    Y: dict  # (degree, index) -> FieldTable
    generators: tuple[FieldTable, ...]
    closure: Closure | None = None

    def field(self, degree: int, index: int) -> FieldTable:
        return self.Y[(degree, index)]

    def Y_of(self, v: Vec) -> FieldTable:
        """Y(v) for an arbitrary (possibly inhomogeneous) vector, by linearity."""
        terms = []
        for n in v.degrees():
            for i, c in enumerate(v.comps[n]):
                if c:
                    terms.append((c, self.Y[(n, i)]))
        if not terms:
            return zero_field(self.space, 0)
        return combine(terms, name=v.pretty())

    def basis_fields(self):
        for n, dim in enumerate(self.space.dims):
            for i in range(dim):
                yield n, i, self.Y[(n, i)]


def build_Y(space: GradedSpace, generators: Sequence[FieldTable], **closure_kw) -> VAStructure:
    """The state-field correspondence determined by the generators.

    Each basis state is written in the states of the closure fields at its
    degree and Y(state) is the same combination of fields.  Redundant closure
    fields are then compared with the combination their own state predicts.
    """
    closure = dong_closure(generators, **closure_kw)
    if closure.space is not space:
        raise SpaceMismatch("generators do not live in the given space")
    by_degree: dict[int, list[FieldTable]] = {}
    for F in closure.fields:
        by_degree.setdefault(F.weight, []).append(F)
    states = {w: [state_of_field(F).component(w) for F in Fs] for w, Fs in by_degree.items()}

    Y = {}
    for n, dim in enumerate(space.dims):
        for i in range(dim):
            e = Vec.basis(space, n, i)
            coeffs = solve_in_span(states[n], e.component(n))
            Y[(n, i)] = combine(zip(coeffs, by_degree[n]), name=space.labels[n][i])

    va = VAStructure(space, Y, tuple(generators), closure)
    # uniqueness: a field is determined by its state
    for R in closure.redundant:
        w = R.weight
        s = state_of_field(R)
        coeffs = solve_in_span(states[w], s.component(w))
        predicted = combine(zip(coeffs, by_degree[w]), name=f"Y({s.pretty()})")
        diffs, _ = compare_fields(R, predicted)
        if diffs:
            raise InjectivityFailure(R.name, predicted.name, diffs)
    return va


# ---------------------------------------------------------------- axiom suite

ANCHORS = {
    "VA1": "VA1: V = sum of finite-dimensional V(n), L_0 = n on V(n), dim V(0) = 1",
    "VA2": "VA2: L_k |0> = 0 for k = -1, 0, 1 and Y(|0>, z) = Id",
    "VA3": "VA3: Y(v, z)|0> has only non-negative powers of z and Y(v, z)|0> at z = 0 equals v",
    "translation": "Y(L_-1 v, z) = d/dz Y(v, z)",
    "VA4": "VA4: [L_k, Y(v, z)] = sum_j binom(k+1, j) z^(k+1-j) Y(L_(j-1) v, z), k = -1, 0, 1",
    "VA5": "VA5: (z - w)^N [Y(v, z), Y(u, w)] = 0 for N large enough",
}


def _check_va1(va: VAStructure) -> Check:
    space = va.space
    witnesses = []
    checked = 0
    if space.dims[0] != 1:
        witnesses.append({"dim V(0)": space.dims[0]})
    checked += 1
    for n, i, F in va.basis_fields():
        checked += 1
        if F.weight != n:
            witnesses.append({"state": space.labels[n][i], "field weight": F.weight, "degree": n})
    for e in space.basis():
        checked += 1
        if apply_sl2(space, 0, e) != e.scale(e.degree):
            witnesses.append({"state": e.pretty(), "issue": "L_0 eigenvalue"})
    return Check.from_counts("VA1", ANCHORS["VA1"], checked, 0, witnesses, dims=list(space.dims))


def _check_va2(va: VAStructure) -> Check:
    space = va.space
    witnesses = []
    checked = 0
    truncated = 0
    omega = space.vacuum()
    for k in (-1, 0, 1):
        r = apply_sl2(space, k, omega)
        if r.truncated:
            truncated += 1
            continue
        checked += 1
        if not r.is_zero():
            witnesses.append({"k": k, "L_k|0>": r.pretty()})
    diffs, compared = compare_fields(va.Y[(0, 0)], identity_field(space))
    checked += compared
    witnesses.extend({"Y(|0>) block": list(d)} for d in diffs)
    return Check.from_counts("VA2", ANCHORS["VA2"], checked, truncated, witnesses)


def _check_va3(va: VAStructure) -> Check:
    space = va.space
    witnesses = []
    checked = 0
    truncated = 0
    omega = space.vacuum()
    for n, i, F in va.basis_fields():
        for k in range(0, F.weight):
            r = mode_apply(F, k, omega)
            if r.truncated:
                truncated += 1
                continue
            checked += 1
            if not r.is_zero():
                witnesses.append({"state": space.labels[n][i], "mode": k, "value": r.pretty()})
        s = mode_apply(F, -1, omega)
        if s.truncated:
            truncated += 1
            continue
        checked += 1
        if s != Vec.basis(space, n, i):
            witnesses.append({"state": space.labels[n][i], "mode": -1, "value": s.pretty()})
    return Check.from_counts("VA3", ANCHORS["VA3"], checked, truncated, witnesses)


def _check_translation(va: VAStructure) -> Check:
    space = va.space
    witnesses = []
    checked = 0
    truncated = 0
    for n, i, F in va.basis_fields():
        e = Vec.basis(space, n, i)
        le = apply_sl2(space, -1, e)
        if le.truncated:
            truncated += 1
            continue
        lhs = va.Y_of(le) if not le.is_zero() else zero_field(space, n + 1)
        diffs, compared = compare_fields(lhs, derivative(F))
        checked += compared
        witnesses.extend({"state": space.labels[n][i], "block": list(d)} for d in diffs)
    return Check.from_counts("translation", ANCHORS["translation"], checked, truncated, witnesses)


def _check_va4(va: VAStructure, ks: Sequence[int] = (-1, 0, 1)) -> Check:
    space = va.space
    witnesses = []
    checked = 0
    truncated = 0
    basis = list(space.basis())
    for n, i, F in va.basis_fields():
        v = Vec.basis(space, n, i)
        for k in ks:
            # Y(L_(j-1) v) for j = 0 .. k+1
            rhs_fields = []
            bad = False
            for j in range(k + 2):
                c = binom(k + 1, j)
                w = apply_sl2(space, j - 1, v)
                if w.truncated:
                    bad = True
                    break
                if c and not w.is_zero():
                    rhs_fields.append((j, c, va.Y_of(w)))
            for p in F.mode_indices():
                for e in basis:
                    if bad:
                        truncated += 1
                        continue
                    lhs = apply_sl2(space, k, mode_apply(F, p, e)) - mode_apply(F, p, apply_sl2(space, k, e))
                    rhs = space.zero()
                    for j, c, G in rhs_fields:
                        rhs = rhs + mode_apply(G, p + k + 1 - j, e).scale(c)
                    if lhs.truncated or rhs.truncated:
                        truncated += 1
                        continue
                    checked += 1
                    if lhs != rhs:
                        witnesses.append(
                            {"state": space.labels[n][i], "k": k, "mode": p, "on": e.pretty(), "lhs": lhs.pretty(), "rhs": rhs.pretty()}
                        )
    return Check.from_counts("VA4", ANCHORS["VA4"], checked, truncated, witnesses)


def _check_va5(va: VAStructure, margin: int = 2) -> Check:
    space = va.space
    items = list(va.basis_fields())
    witnesses = []
    orders = {}
    checked = 0
    for a in range(len(items)):
        for b in range(a, len(items)):
            na, ia, A = items[a]
            nb, ib, B = items[b]
            res = locality_order(A, B, A.weight + B.weight + margin)
            checked += res.checked
            key = f"{space.labels[na][ia]} x {space.labels[nb][ib]}"
            if res.order is None:
                witnesses.append({"pair": key, "not local up to": res.n_max, "coefficient": list(res.witness or ())})
            else:
                orders[key] = res.order
    return Check.from_counts("VA5", ANCHORS["VA5"], checked, 0, witnesses, orders=orders)


AXIOMS = ("VA1", "VA2", "VA3", "translation", "VA4", "VA5")
_AXIOM_FUNCS = {
    "VA1": _check_va1,
    "VA2": _check_va2,
    "VA3": _check_va3,
    "translation": _check_translation,
    "VA4": _check_va4,
    "VA5": _check_va5,
}


def axiom_check(va: VAStructure, name: str) -> Check:
    return _AXIOM_FUNCS[name](va)


def axiom_suite(va: VAStructure, axioms: Iterable[str] = AXIOMS, executor=None) -> Report:
    """Check VA1-VA5 and translation covariance on every untruncated entry."""
    axioms = list(axioms)
    if executor is None:
        checks = [axiom_check(va, a) for a in axioms]
    else:
        checks = list(executor.map(lambda a: axiom_check(va, a), axioms))
    return Report("axioms", checks)


# ---------------------------------------------------------------- L_1 relation


def l1_defect(A: FieldTable) -> FieldTable:
    """The field D_A with D_A,(q) = [L_1, A_(q)] - (2d - q - 2) A_(q+1), of weight d - 1.

    A satisfies [L_1, A(z)] = (z^2 d/dz + 2 d z) A(z) + D_A(z); for A = Y(a)
    in a Moebius vertex algebra D_A = Y(L_1 a).
    """
    if A.weight is None:
        raise ValueError("L_1 relation is stated for homogeneous fields")
    space = A.space
    d = A.weight
    w = d - 1
    blocks = {}
    missing = set()
    for q, m, t in expected_keys(space, w):
        cols = []
        bad = False
        for i in range(space.dims[m]):
            e = Vec.basis(space, m, i)
            val = (
                apply_sl2(space, 1, mode_apply(A, q, e))
                - mode_apply(A, q, apply_sl2(space, 1, e))
                - mode_apply(A, q + 1, e).scale(2 * d - q - 2)
            )
            if val.truncated:
                bad = True
                break
            cols.append(val.component(t))
        if bad:
            missing.add((q, m))
            continue
        mat = SMat.from_columns(space.dims[t], cols)
        if not mat.is_zero():
            blocks[(q, m)] = mat
    return FieldTable(space, w, blocks, frozenset(missing), (), f"D[{A.name}]")


def l1_relation_check(A: FieldTable, va: "VAStructure | None" = None) -> Check:
    """A single field obeys the L_1 relation: its defect D_A is creative with state L_1 a.

    With ``va`` the defect is also compared entrywise with Y(L_1 a); without it
    only the state is checked, which is all that can be said of a lone field.
    """
    space = A.space
    D_A = l1_defect(A)
    witnesses = []
    checked = 0
    truncated = 0
    try:
        a = state_of_field(A)
        da = state_of_field(D_A)
    except SingularAtOrigin as exc:
        witnesses.append({"field": A.name, "singular mode": exc.n})
        return Check.from_counts("l1_relation", _L1_ANCHOR, 1, 0, witnesses)
    la = apply_sl2(space, 1, a)
    if a.truncated or da.truncated:
        truncated += 1
    else:
        checked += 1
        if da != la:
            witnesses.append({"field": A.name, "D_A|0>": da.pretty(), "L_1 a": la.pretty()})
    if va is not None and not la.truncated:
        target = zero_field(space, D_A.weight) if la.is_zero() else va.Y_of(la)
        diffs, compared = compare_fields(D_A, target)
        checked += compared
        witnesses.extend({"field": A.name, "block of D_A != Y(L_1 a)": list(d)} for d in diffs)
    return Check.from_counts("l1_relation", _L1_ANCHOR, checked, truncated, witnesses, field=A.name)


_L1_ANCHOR = "[L_1, Y(v, z)] = (z^2 d/dz + 2 d_v z) Y(v, z) + Y(L_1 v, z)"


class _L1Cache:
    def __init__(self):
        self.defects: dict = {}
        self.products: dict = {}

    def defect(self, A: FieldTable) -> FieldTable:
        key = id(A)
        if key not in self.defects:
            self.defects[key] = (A, l1_defect(A))
        return self.defects[key][1]

    def product(self, A: FieldTable, B: FieldTable, n: int) -> FieldTable:
        key = (id(A), id(B), n)
        if key not in self.products:
            self.products[key] = (A, B, n_product(A, B, n))
        return self.products[key][2]


def l1_closure_check(
    A: FieldTable, B: FieldTable, n: int, cache: _L1Cache | None = None, va: VAStructure | None = None
) -> Report:
    """The (n)-product of two fields obeying the L_1 relation obeys it again.

    With C = A_(n)B the defect must be
    D_C = (2 d_A - n - 2) A_(n+1)B + (D_A)_(n)B + A_(n)(D_B),
    and C itself must satisfy the single-field relation (entrywise against
    Y(L_1 c) when ``va`` is given).
    """
    if cache is None:
        cache = _L1Cache()
    pre_a = l1_relation_check(A, va)
    pre_b = l1_relation_check(B, va)
    checks = [
        Check(f"pre:{A.name}", pre_a.status, pre_a.anchor, pre_a.checked, pre_a.truncated, pre_a.witnesses),
        Check(f"pre:{B.name}", pre_b.status, pre_b.anchor, pre_b.checked, pre_b.truncated, pre_b.witnesses),
    ]
    if pre_a.status == "fail" or pre_b.status == "fail":
        return Report("l1_closure", checks)
    C = cache.product(A, B, n)
    D_C = cache.defect(C)
    dA = A.weight
    terms = [(ONE, cache.product(cache.defect(A), B, n)), (ONE, cache.product(A, cache.defect(B), n))]
    if 2 * dA - n - 2:
        terms.append((2 * dA - n - 2, cache.product(A, B, n + 1)))
    predicted = combine(terms, name="predicted")
    if predicted.weight is None:
        raise AssertionError("defect terms must share weight d_A + d_B - n - 2")
    diffs, compared = compare_fields(D_C, predicted)
    witnesses = [{"product": f"{A.name}_({n}){B.name}", "block": list(d)} for d in diffs]
    checks.append(Check.from_counts("defect_identity", _L1_ANCHOR, compared, 0, witnesses, weight=C.weight))
    rel = l1_relation_check(C, va)
    checks.append(Check(f"relation:{A.name}_({n}){B.name}", rel.status, rel.anchor, rel.checked, rel.truncated, rel.witnesses))
    return Report("l1_closure", checks)


def l1_closure_sweep(fields: Sequence[FieldTable], va: VAStructure | None = None) -> Report:
    """l1_closure_check over all ordered pairs and every n whose product weight lies in [0, D]."""
    cache = _L1Cache()
    checks = []
    D = fields[0].space.depth
    for A in fields:
        for B in fields:
            for n in range(A.weight + B.weight - 1 - D, A.weight + B.weight):
                rep = l1_closure_check(A, B, n, cache, va)
                status = rep.status
                wit = [w for c in rep.failures() for w in c.witnesses]
                checks.append(
                    Check(
                        f"{A.name}_({n}){B.name}",
                        status,
                        _L1_ANCHOR,
                        sum(c.checked for c in rep.checks),
                        sum(c.truncated for c in rep.checks),
                        wit,
                    )
                )
    return Report("l1_closure", checks)
