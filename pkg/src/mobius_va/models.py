"""Built-in example algebras with exact structure constants.

* ``heisenberg(D)``: the rank-one free boson.  Basis vectors are partition
  monomials a(-l1)...a(-lk)|0> with l1 >= ... >= lk >= 1, the generator J has
  weight 1 and modes a(n), and Theta = (-1)^(number of parts).
* ``virasoro(c, D)``: the vacuum module of the Virasoro algebra with central
  charge c, spanned by L(-l1)...L(-lk)|0> with parts >= 2.  The generator T
  has weight 2 and shifted modes L(n); Theta is the identity.

Within a level, basis monomials are listed in descending lexicographic order
of their parts, e.g. level 4 of Virasoro is L(-4)|0>, L(-2)L(-2)|0>.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, Mapping

from .core import GradedSpace, make_space
from .fields import FieldTable
from .linalg import ONE, ZERO, Q, SMat, det, inverse, rank, to_q
from .unitarity import ThetaMap

MODEL_KINDS = ("heisenberg", "virasoro")
NULL_POLICIES = ("raise", "keep", "quotient")


class GramDegenerate(ValueError):
    def __init__(self, level: int):
        self.level = level
        super().__init__(f"Gram form is singular at level {level}")


def partitions(n: int, min_part: int = 1) -> list[tuple[int, ...]]:
    """Partitions of n into parts >= min_part, descending lexicographic order."""

    def gen(rest: int, largest: int):
        if rest == 0:
            yield ()
            return
        for p in range(min(rest, largest), min_part - 1, -1):
            for tail in gen(rest - p, p):
                yield (p,) + tail

    return list(gen(n, n))


def _label(prefix: str, parts: tuple[int, ...]) -> str:
    return "".join(f"{prefix}(-{p})" for p in parts) + "|0>"


def _add(acc: dict, key, c) -> None:
    v = acc.get(key, ZERO) + c
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


@dataclass(frozen=True)
class ModelDescriptor:
    kind: str
    depth: int
    c: Q | None = None
    null: str = "raise"

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"model kind must be one of {MODEL_KINDS}, got {self.kind!r}")
        if self.depth < 0:
            raise ValueError(f"depth must be >= 0, got {self.depth}")
        if self.kind == "virasoro" and self.c is None:
            raise ValueError("virasoro needs a central charge c")
        if self.null not in NULL_POLICIES:
            raise ValueError(f"null policy must be one of {NULL_POLICIES}, got {self.null!r}")

    @classmethod
    def from_mapping(cls, data: Mapping) -> "ModelDescriptor":
        """Parse ``{"kind": ..., "depth": ..., "c": "1/2", "null": ...}``; errors name the field."""
        if not isinstance(data, Mapping):
            raise ValueError("model: expected an object")
        kind = data.get("kind")
        if not isinstance(kind, str):
            raise ValueError("model.kind: expected a string")
        depth = data.get("depth")
        if not isinstance(depth, int) or isinstance(depth, bool):
            raise ValueError("model.depth: expected an integer")
        c = data.get("c")
        if c is not None:
            if isinstance(c, float):
                raise ValueError("model.c: give c as an exact rational string such as \"1/2\"")
            try:
                c = to_q(c)
            except (ValueError, TypeError, ZeroDivisionError) as exc:
                raise ValueError(f"model.c: not a rational number ({exc})") from None
        null = data.get("null", "raise")
        try:
            return cls(kind, depth, c, null)
        except ValueError as exc:
            raise ValueError(f"model: {exc}") from None

    def as_dict(self) -> dict:
        out = {"kind": self.kind, "depth": self.depth}
        if self.c is not None:
            out["c"] = str(self.c)
        out["null"] = self.null
        return out

    def build(self) -> "Model":
        if self.kind == "heisenberg":
            return heisenberg(self.depth)
        return virasoro(self.c, self.depth, null=self.null)


@dataclass(frozen=True, eq=False)
class Model:
    descriptor: ModelDescriptor
    space: GradedSpace
    generator: FieldTable
    theta: ThetaMap
    notes: tuple[str, ...] = field(default=())

    def __iter__(self) -> Iterator:
        return iter((self.space, self.generator, self.theta))


# ---------------------------------------------------------------- Heisenberg


def heisenberg_mode(m: int, parts: tuple[int, ...]) -> dict:
    """a(m) applied to a(-parts)|0>, using [a(m), a(n)] = m delta_{m+n,0} and a(m)|0> = 0 for m >= 0."""
    if m == 0:
        return {}
    if m < 0:
        return {tuple(sorted(parts + (-m,), reverse=True)): ONE}
    k = parts.count(m)
    if not k:
        return {}
    rest = list(parts)
    rest.remove(m)
    return {tuple(rest): Q(m * k)}


def _heis_apply_word(word: tuple[int, ...], vec: dict) -> dict:
    """Apply a(word[0]) a(word[1]) ... (rightmost first) to a partition-keyed vector."""
    for m in reversed(word):
        out: dict = {}
        for key, c in vec.items():
            for k2, c2 in heisenberg_mode(m, key).items():
                _add(out, k2, c * c2)
        vec = out
    return vec


def _heis_sl2(k: int, parts: tuple[int, ...], depth: int) -> dict:
    """L(k) for k = +-1 from the quadratic (Sugawara) expression in the a(n)."""
    out: dict = {}
    level = sum(parts)
    for j in range(1, level + depth + 2):
        word = (-j - 1, j) if k == -1 else (-j, j + 1)
        for key, c in _heis_apply_word(word, {parts: ONE}).items():
            _add(out, key, c)
    return out


def heisenberg(D: int) -> Model:
    if D < 0:
        raise ValueError("depth must be >= 0")
    levels = [partitions(n) for n in range(D + 1)]
    index = [{p: i for i, p in enumerate(lv)} for lv in levels]
    dims = [len(lv) for lv in levels]

    def gram_entry(p: tuple[int, ...]) -> Q:
        g = 1
        for k in set(p):
            mult = p.count(k)
            f = 1
            for i in range(2, mult + 1):
                f *= i
            g *= k**mult * f
        return Q(g)

    gram = [[[gram_entry(p) if i == j else ZERO for j in range(len(lv))] for i, p in enumerate(lv)] for lv in levels]

    def matrix(fn: Callable, src: int, tgt: int) -> SMat:
        cols = []
        for p in levels[src]:
            col = [ZERO] * dims[tgt]
            for key, c in fn(p).items():
                col[index[tgt][key]] += c
            cols.append(col)
        return SMat.from_columns(dims[tgt], cols)

    lm1 = [matrix(lambda p: _heis_sl2(-1, p, D), n, n + 1) for n in range(D)]
    l1 = [matrix(lambda p: _heis_sl2(1, p, D), n, n - 1) for n in range(1, D + 1)]
    labels = [[_label("a", p) for p in lv] for lv in levels]
    space = make_space(dims, gram, lm1, l1, labels)

    def column(n: int, m: int, i: int):
        t = m - n
        col = [ZERO] * dims[t]
        for key, c in heisenberg_mode(n, levels[m][i]).items():
            col[index[t][key]] += c
        return col

    J = FieldTable.from_function(space, 1, column, name="J")
    theta = ThetaMap(
        space,
        tuple(SMat.from_columns(dims[n], ([ZERO] * i + [Q((-1) ** len(p))] + [ZERO] * (dims[n] - i - 1) for i, p in enumerate(lv))) for n, lv in enumerate(levels)),
    )
    return Model(ModelDescriptor("heisenberg", D), space, J, theta)


# ---------------------------------------------------------------- Virasoro


class VirasoroVacuum:
    """Straightening of L(m) L(-l1) ... L(-lk)|0> into the parts->=2 monomial basis."""

    def __init__(self, c):
        self.c = to_q(c)
        self.apply = lru_cache(maxsize=None)(self._apply)

    def _apply(self, m: int, parts: tuple[int, ...]) -> Mapping:
        if not parts:
            return {(-m,): ONE} if m <= -2 else {}
        a, rest = parts[0], parts[1:]
        if m <= -2 and -m >= a:
            return {(-m,) + parts: ONE}
        out: dict = {}
        # L(m) L(-a) X = L(-a) L(m) X + (m + a) L(m - a) X + delta_{m,a} c/12 (m^3 - m) X
        for key, c in self.apply(m, rest).items():
            for k2, c2 in self.apply(-a, key).items():
                _add(out, k2, c * c2)
        if m + a:
            for key, c in self.apply(m - a, rest).items():
                _add(out, key, (m + a) * c)
        if m == a:
            _add(out, rest, self.c * (m**3 - m) / 12)
        return out

    def apply_vec(self, m: int, vec: Mapping) -> dict:
        out: dict = {}
        for key, c in vec.items():
            for k2, c2 in self.apply(m, key).items():
                _add(out, k2, c * c2)
        return out

    def pairing(self, lam: tuple[int, ...], mu: tuple[int, ...]) -> Q:
        """<L(-lam)|0>, L(-mu)|0>> with L(n)^dagger = L(-n)."""
        vec: dict = {mu: ONE}
        for part in lam:
            vec = self.apply_vec(part, vec)
        return vec.get((), ZERO)


def virasoro_gram(c, level: int) -> list[list[Q]]:
    vir = VirasoroVacuum(c)
    basis = partitions(level, 2)
    return [[vir.pairing(p, q) for q in basis] for p in basis]


def virasoro(c, D: int, null: str = "raise") -> Model:
    """Virasoro vacuum module at central charge c, truncated at depth D.

    ``null`` selects what happens when the Gram form is singular at some
    level <= D: ``"raise"`` raises :class:`GramDegenerate`, ``"keep"`` keeps the
    universal module (an indefinite or degenerate form, recorded in
    ``space.positive``), and ``"quotient"`` divides out the radical of the form,
    which is the maximal proper submodule, giving the simple quotient.
    """
    if D < 0:
        raise ValueError("depth must be >= 0")
    if null not in NULL_POLICIES:
        raise ValueError(f"null policy must be one of {NULL_POLICIES}")
    c = to_q(c)
    vir = VirasoroVacuum(c)
    full = [partitions(n, 2) for n in range(D + 1)]
    index = [{p: i for i, p in enumerate(lv)} for lv in full]
    grams = [[[vir.pairing(p, q) for q in lv] for p in lv] for lv in full]

    notes = []
    degenerate = [n for n in range(D + 1) if full[n] and det(grams[n]) == 0]
    if degenerate and null == "raise":
        raise GramDegenerate(degenerate[0])

    # representatives per level: all monomials, or a greedy full-rank subset for the quotient
    reps = [list(range(len(lv))) for lv in full]
    if null == "quotient":
        for n in degenerate:
            target = rank(grams[n])
            chosen: list[int] = []
            for i in range(len(full[n])):
                trial = chosen + [i]
                if rank([[grams[n][a][b] for b in trial] for a in trial]) == len(trial):
                    chosen = trial
                if len(chosen) == target:
                    break
            reps[n] = chosen
            notes.append(f"level {n}: quotient by a {len(full[n]) - target}-dimensional radical")
    elif degenerate:
        notes.append(f"Gram form singular at levels {degenerate}; universal module kept")

    dims = [len(r) for r in reps]
    sub_gram = [[[grams[n][a][b] for b in reps[n]] for a in reps[n]] for n in range(D + 1)]
    # reduction: a full-module vector w at level n -> quotient coordinates G_sub^-1 (<rep_a, w>)_a
    reducers = []
    for n in range(D + 1):
        if null == "quotient" and n in degenerate:
            reducers.append((inverse(sub_gram[n]), [grams[n][a] for a in reps[n]]))
        else:
            reducers.append(None)

    def reduce(n: int, vec: Mapping) -> list[Q]:
        full_coeffs = [ZERO] * len(full[n])
        for key, coef in vec.items():
            full_coeffs[index[n][key]] += coef
        red = reducers[n]
        if red is None:
            return full_coeffs
        inv, rows = red
        pair = [sum((r[j] * full_coeffs[j] for j in range(len(full_coeffs)) if full_coeffs[j]), ZERO) for r in rows]
        return [sum((inv[a][b] * pair[b] for b in range(len(pair))), ZERO) for a in range(len(pair))]

    def mode_column(k: int, src: int, i: int) -> list[Q]:
        """Coordinates of L(k) applied to the i-th representative of level src."""
        tgt = src - k
        return reduce(tgt, vir.apply(k, full[src][reps[src][i]]))

    def matrix(k: int, src: int) -> SMat:
        tgt = src - k
        return SMat.from_columns(dims[tgt], (mode_column(k, src, i) for i in range(dims[src])))

    lm1 = [matrix(-1, n) for n in range(D)]
    l1 = [matrix(1, n) for n in range(1, D + 1)]
    labels = [[_label("L", full[n][i]) for i in reps[n]] for n in range(D + 1)]
    space = make_space(dims, sub_gram, lm1, l1, labels, require_positive=False)

    # T_(n) = L(n - 1)
    T = FieldTable.from_function(space, 2, lambda n, m, i: mode_column(n - 1, m, i), name="T")
    theta = ThetaMap(space, tuple(SMat.identity(d) for d in dims))
    return Model(ModelDescriptor("virasoro", D, c, null), space, T, theta, tuple(notes))
