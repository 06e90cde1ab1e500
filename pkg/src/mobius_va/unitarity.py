"""Unitary structure: the involution Theta, the invariant form and Hermitian fields.

Over rational scalars the antilinear Theta acts linearly; ``ThetaMap.antilinear``
records that complex coefficients must be conjugated, which only matters in
the numeric smearing code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Sequence

from .core import GradedSpace, SpaceMismatch, Vec, apply_sl2, inner
from .fields import FieldTable, mode_apply, shifted_mode_apply
from .linalg import Q, SMat, ldl_pivots
from .report import Check, Report

ANCHORS = {
    "theta": "Theta is an antilinear involution fixing |0> and commuting with L_-1, L_0, L_1",
    "invariant_form": "<v_n u, u'> = <u, (e^(L_1) (-1)^(L_0) Theta v)_(-n) u'>",
    "hermitian": "Hermitian quasi-primary field: <phi_n u, u'> = <u, phi_(-n) u'>, equivalently Theta v = (-1)^d v",
    "vacuum": "dim V(0) = 1",
    "positivity": "the form is positive definite on every V(n)",
    "sl2_unitary": "<L_-1 u, v> = <u, L_1 v>",
    "quasi_primary": "L_1 v = 0 for every generator state v",
    "criterion": "unitary iff generated by Hermitian quasi-primary fields",
}


@dataclass(frozen=True, eq=False)
class ThetaMap:
    space: GradedSpace
    mats: tuple[SMat, ...]  # one per degree
    antilinear: bool = True

    def apply(self, v: Vec) -> Vec:
        if v.space is not self.space:
            raise SpaceMismatch("vector does not belong to Theta's space")
        return Vec(self.space, {n: self.mats[n].apply(c) for n, c in v.comps.items()}, v.truncated)

    def __call__(self, v: Vec) -> Vec:
        return self.apply(v)

    def validate(self) -> list[dict]:
        """Problems found with Theta; empty when it is a valid involution."""
        space = self.space
        problems = []
        for n, M in enumerate(self.mats):
            if (M.nrows, M.ncols) != (space.dims[n], space.dims[n]):
                problems.append({"degree": n, "issue": "shape"})
                continue
            if M @ M != SMat.identity(space.dims[n]):
                problems.append({"degree": n, "issue": "Theta^2 != Id"})
            if space.dims[n]:
                G = SMat.from_dense(space.gram[n])
                if M.transpose() @ G @ M != G:
                    problems.append({"degree": n, "issue": "Theta does not preserve the form"})
        if self.apply(space.vacuum()) != space.vacuum():
            problems.append({"degree": 0, "issue": "Theta |0> != |0>"})
        for e in space.basis():
            for k in (-1, 1):
                a = self.apply(apply_sl2(space, k, e))
                b = apply_sl2(space, k, self.apply(e))
                if not (a.truncated or b.truncated) and a != b:
                    problems.append({"on": e.pretty(), "issue": f"Theta does not commute with L_{k}"})
        return problems


def conjugate_state(v: Vec, theta: ThetaMap) -> Vec:
    """e^(L_1) (-1)^(L_0) Theta v; the exponential terminates since L_1 lowers degree."""
    space = v.space
    w = theta.apply(v)
    w = Vec(space, {n: tuple(-x for x in c) if n % 2 else c for n, c in w.comps.items()}, w.truncated)
    out = w
    term = w
    k = 1
    while True:
        term = apply_sl2(space, 1, term)
        if term.is_zero():
            break
        out = out + term.scale(Q(1, factorial(k)))
        k += 1
    return out


def _shifted_of_mixed(va, w: Vec, n: int, u: Vec) -> Vec:
    """w_n u for an inhomogeneous w: each homogeneous part uses its own degree shift."""
    out = u.space.zero().flagged(u.truncated)
    for deg in w.degrees():
        part = Vec(w.space, {deg: w.comps[deg]})
        out = out + shifted_mode_apply(va.Y_of(part), n, u)
    return out


def _pair(gram, u: Vec, v: Vec):
    if gram is None:
        return inner(u, v)
    total = Q(0)
    for n, a in u.comps.items():
        b = v.comps.get(n)
        if b is None:
            continue
        g = gram[n]
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        total += x * g[i][j] * y
    return total


def invariant_form_check(va, theta: ThetaMap, gram: Sequence | None = None) -> Check:
    """<v_n u, u'> = <u, vtilde_(-n) u'> for all basis v, u, u' (n = deg u - deg u').

    ``gram`` optionally replaces the space's form, to test whether another
    bilinear form is invariant.
    """
    space = va.space
    basis = list(space.basis())
    witnesses = []
    checked = truncated = 0
    for deg, i, F in va.basis_fields():
        v = Vec.basis(space, deg, i)
        vt = conjugate_state(v, theta)
        for u in basis:
            for up in basis:
                n = u.degree - up.degree
                lhs_vec = shifted_mode_apply(F, n, u)
                rhs_vec = _shifted_of_mixed(va, vt, -n, up)
                if lhs_vec.truncated or rhs_vec.truncated:
                    truncated += 1
                    continue
                checked += 1
                lhs = _pair(gram, lhs_vec, up)
                rhs = _pair(gram, u, rhs_vec)
                if lhs != rhs:
                    witnesses.append({"v": v.pretty(), "n": n, "u": u.pretty(), "u'": up.pretty(), "lhs": lhs, "rhs": rhs})
    return Check.from_counts("invariant_form", ANCHORS["invariant_form"], checked, truncated, witnesses)


@dataclass
class HermitianResult:
    passed: bool
    checked: int
    witnesses: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


def hermitian_check(A: FieldTable, d: int) -> HermitianResult:
    """<phi_n u, u'> = <u, phi_(-n) u'> with phi_n = A_(n + d - 1)."""
    space = A.space
    basis = list(space.basis())
    witnesses = []
    checked = 0
    for u in basis:
        for up in basis:
            n = u.degree - up.degree
            a = mode_apply(A, n + d - 1, u)
            b = mode_apply(A, -n + d - 1, up)
            if a.truncated or b.truncated:
                continue
            checked += 1
            lhs, rhs = inner(a, up), inner(u, b)
            if lhs != rhs:
                witnesses.append({"n": n, "u": u.pretty(), "u'": up.pretty(), "lhs": lhs, "rhs": rhs})
    return HermitianResult(not witnesses and checked > 0, checked, witnesses)


def positivity_witness(space: GradedSpace) -> dict | None:
    """First degree where the form fails to be positive definite, with the offending pivot."""
    for n, dim in enumerate(space.dims):
        if not dim:
            continue
        piv = ldl_pivots(space.gram[n])
        if piv[-1] <= 0:
            k = len(piv) - 1
            return {
                "level": n,
                "basis": space.labels[n][k],
                "pivot": piv[-1],
                "norm": space.gram[n][k][k],
            }
    return None


def hermitian_generating_criterion(va, theta: ThetaMap) -> Report:
    """Check the hypotheses that make the structure a unitary Moebius vertex algebra."""
    space = va.space
    checks = []
    checks.append(
        Check.from_counts("vacuum", ANCHORS["vacuum"], 1, 0, [] if space.dims[0] == 1 else [{"dim V(0)": space.dims[0]}])
    )
    pw = positivity_witness(space)
    checks.append(Check.from_counts("positivity", ANCHORS["positivity"], len(space.dims), 0, [pw] if pw else []))

    wit = []
    count = 0
    for n in range(space.depth):
        for u in (Vec.basis(space, n, i) for i in range(space.dims[n])):
            for v in (Vec.basis(space, n + 1, j) for j in range(space.dims[n + 1])):
                count += 1
                a, b = inner(apply_sl2(space, -1, u), v), inner(u, apply_sl2(space, 1, v))
                if a != b:
                    wit.append({"u": u.pretty(), "v": v.pretty(), "<L_-1 u, v>": a, "<u, L_1 v>": b})
    checks.append(Check.from_counts("sl2_unitary", ANCHORS["sl2_unitary"], count, 0, wit))

    problems = theta.validate()
    checks.append(Check.from_counts("theta", ANCHORS["theta"], len(theta.mats), 0, problems))

    from .reconstruct import state_of_field

    for g in va.generators:
        s = state_of_field(g)
        qp = apply_sl2(space, 1, s)
        checks.append(
            Check.from_counts(
                f"quasi_primary:{g.name}", ANCHORS["quasi_primary"], 1, 0, [] if qp.is_zero() else [{"L_1 v": qp.pretty()}]
            )
        )
        herm = hermitian_check(g, g.weight)
        sign_ok = theta.apply(s) == s.scale((-1) ** g.weight)
        wit = list(herm.witnesses)
        if sign_ok != herm.passed:
            wit.append({"generator": g.name, "hermitian": herm.passed, "Theta v = (-1)^d v": sign_ok})
        checks.append(Check.from_counts(f"hermitian:{g.name}", ANCHORS["hermitian"], herm.checked, 0, wit))
    return Report("unitarity", checks)


def unitarity_suite(va, theta: ThetaMap) -> Report:
    rep = hermitian_generating_criterion(va, theta)
    rep.checks.append(invariant_form_check(va, theta))
    return rep
