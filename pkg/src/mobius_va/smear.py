"""Numeric lab on the circle: smeared fields, Sobolev norms and decay probes.

Test functions are trigonometric polynomials f(e^{it}) = sum_n fhat(n) e^{int}
with complex double coefficients.  The smeared field acts on finite-energy
vectors by Y0(A, f) u = sum_n fhat(n) A_n u, where A_n are the shifted modes.
Exact identities are evaluated in floating point and compared against a
relative tolerance; asymptotic claims (decay rates, growth orders) are
reported as probes with their raw tables.
"""

from __future__ import annotations

import math
import warnings
import weakref
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import integrate

from .core import GradedSpace, SpaceMismatch, Vec, inner
from .fields import (
    FieldTable,
    UndefinedWeight,
    borcherds_products,
    shifted_mode_apply,
)
from .linalg import binom

DEFAULT_RTOL = 1e-10
ABS_FLOOR = 1e-14


class SupportOverlap(ValueError):
    pass


class NonPositiveXGamma(ArithmeticError):
    pass


# ---------------------------------------------------------------- test functions


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """Fourier data fhat(n), |n| <= cutoff, stored at position n + cutoff."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or len(c) % 2 == 0:
            raise ValueError("coefficient array must have odd length 2M+1")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_dict(cls, coeffs: dict, cutoff: int | None = None) -> "TrigPoly":
        M = max((abs(n) for n in coeffs), default=0) if cutoff is None else cutoff
        arr = np.zeros(2 * M + 1, dtype=complex)
        for n, c in coeffs.items():
            if abs(n) > M:
                raise ValueError(f"index {n} beyond cutoff {M}")
            arr[n + M] += c
        return cls(arr)

    @classmethod
    def monomial(cls, n: int, coeff: complex = 1.0) -> "TrigPoly":
        return cls.from_dict({n: coeff})

    @classmethod
    def from_samples(cls, samples: np.ndarray, cutoff: int) -> "TrigPoly":
        """Discrete Fourier coefficients of values on the uniform grid t_j = 2 pi j / len(samples)."""
        N = len(samples)
        if N < 2 * cutoff + 1:
            raise ValueError("grid too coarse for the requested cutoff")
        spectrum = np.fft.fft(np.asarray(samples, dtype=complex)) / N
        idx = np.arange(-cutoff, cutoff + 1) % N
        return cls(spectrum[idx])

    @property
    def cutoff(self) -> int:
        return (len(self.coeffs) - 1) // 2

    def coef(self, n: int) -> complex:
        M = self.cutoff
        return complex(self.coeffs[n + M]) if abs(n) <= M else 0j

    def items(self):
        """(n, fhat(n)) for the nonzero coefficients, n ascending."""
        M = self.cutoff
        for k, c in enumerate(self.coeffs):
            if c != 0:
                yield k - M, complex(c)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        n = np.arange(-self.cutoff, self.cutoff + 1)
        return np.exp(1j * np.multiply.outer(t, n)) @ self.coeffs

    def truncate(self, M: int) -> "TrigPoly":
        return TrigPoly.from_dict(dict(self.items()) if M >= self.cutoff else {n: c for n, c in self.items() if abs(n) <= M}, M)

    def _aligned(self, other: "TrigPoly"):
        M = max(self.cutoff, other.cutoff)
        return self.truncate(M).coeffs, other.truncate(M).coeffs

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        a, b = self._aligned(other)
        return TrigPoly(a + b)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        a, b = self._aligned(other)
        return TrigPoly(a - b)

    def __mul__(self, s: complex) -> "TrigPoly":
        return TrigPoly(self.coeffs * s)

    __rmul__ = __mul__

    def conj(self) -> "TrigPoly":
        """The complex conjugate function: its n-th coefficient is conj(fhat(-n))."""
        return TrigPoly(np.conj(self.coeffs[::-1]))

    def derivative(self) -> "TrigPoly":
        n = np.arange(-self.cutoff, self.cutoff + 1)
        return TrigPoly(1j * n * self.coeffs)

    def shift(self, k: int) -> "TrigPoly":
        """Multiplication by e^{ikt}."""
        return TrigPoly.from_dict({n + k: c for n, c in self.items()}, self.cutoff + abs(k))

    def rotate(self, theta: float) -> "TrigPoly":
        """t -> f(t - theta): coefficients pick up e^{-in theta}."""
        n = np.arange(-self.cutoff, self.cutoff + 1)
        return TrigPoly(self.coeffs * np.exp(-1j * n * theta))


def sobolev_norm(f: TrigPoly, N: float) -> float:
    """(sum_n |fhat(n)|^2 (1 + n^2)^N)^(1/2)."""
    if N < 0:
        raise ValueError("Sobolev order must be >= 0")
    n = np.arange(-f.cutoff, f.cutoff + 1, dtype=float)
    return float(math.sqrt(math.fsum(np.abs(f.coeffs) ** 2 * (1.0 + n * n) ** N)))


# ---------------------------------------------------------------- bumps


def _bump_profile(t: float) -> float:
    return math.exp(-1.0 / (1.0 - t * t)) if abs(t) < 1.0 else 0.0


@dataclass(frozen=True)
class Bump:
    """exp(-1/(1 - s^2)) * (1 + tilt*s) on the arc |t - center| < halfwidth, s = (t - center)/halfwidth."""

    center: float
    halfwidth: float
    tilt: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.halfwidth < math.pi:
            raise ValueError("halfwidth must lie in (0, pi)")
        if abs(self.tilt) >= 1:
            raise ValueError("|tilt| must be < 1 to keep the bump positive")

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        s = (np.mod(t - self.center + math.pi, 2 * math.pi) - math.pi) / self.halfwidth
        inside = np.abs(s) < 1
        out = np.zeros_like(s)
        si = s[inside]
        out[inside] = self.scale * np.exp(-1.0 / (1.0 - si * si)) * (1.0 + self.tilt * si)
        return out

    def in_support(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        s = (np.mod(t - self.center + math.pi, 2 * math.pi) - math.pi) / self.halfwidth
        return np.abs(s) < 1

    def coefficient(self, n: int, tol: float = 1e-12) -> complex:
        """fhat(n) = (1/2pi) int f(t) e^{-int} dt by adaptive oscillatory quadrature.

        The relative tolerance is ``tol`` with an absolute floor of 1e-14, below
        which double precision cannot resolve the integral anyway.
        """
        w = self.halfwidth
        omega = n * w
        opts = dict(epsabs=ABS_FLOOR, epsrel=tol, limit=400)
        parts = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            if omega == 0:
                parts.append(integrate.quad(_bump_profile, -1, 1, **opts))
                parts.append((0.0, 0.0))
            else:
                # the even profile pairs with cos, the odd tilt term with sin
                parts.append(integrate.quad(_bump_profile, -1, 1, weight="cos", wvar=omega, **opts))
                if self.tilt:
                    odd = lambda s: self.tilt * s * _bump_profile(s)
                    val, err = integrate.quad(odd, -1, 1, weight="sin", wvar=omega, **opts)
                    parts.append((-val, err))
                else:
                    parts.append((0.0, 0.0))
        for val, err in parts:
            if err > max(10 * ABS_FLOOR, tol * abs(val)):
                raise ArithmeticError(f"quadrature for mode {n} did not converge (error estimate {err:.2e})")
        val = complex(parts[0][0], parts[1][0]) * w / (2 * math.pi) * self.scale
        return val * complex(math.cos(n * self.center), -math.sin(n * self.center))

    def trigpoly(self, M: int, tol: float = 1e-12) -> TrigPoly:
        return TrigPoly.from_dict({n: self.coefficient(n, tol) for n in range(-M, M + 1)}, M)


def check_disjoint(f: Bump, g: Bump, grid: int = 4096) -> None:
    t = np.linspace(0, 2 * math.pi, grid, endpoint=False)
    both = f.in_support(t) & g.in_support(t)
    if both.any():
        raise SupportOverlap(f"supports intersect near t = {float(t[np.argmax(both)]):.6f}")


# ---------------------------------------------------------------- complex vectors


_GRAMS: "weakref.WeakKeyDictionary[GradedSpace, list]" = weakref.WeakKeyDictionary()
_NUMERIC: "weakref.WeakKeyDictionary[FieldTable, dict]" = weakref.WeakKeyDictionary()


def _gram(space: GradedSpace) -> list[np.ndarray]:
    g = _GRAMS.get(space)
    if g is None:
        g = [np.array([[float(x) for x in row] for row in level], dtype=float).reshape(d, d) for level, d in zip(space.gram, space.dims)]
        _GRAMS[space] = g
    return g


@dataclass(frozen=True, eq=False)
class CVec:
    space: GradedSpace
    comps: dict = field(default_factory=dict)  # degree -> complex ndarray
    truncated: bool = False

    @classmethod
    def from_vec(cls, v: Vec) -> "CVec":
        return cls(v.space, {n: np.array([complex(float(x)) for x in c], dtype=complex) for n, c in v.comps.items()}, v.truncated)

    def __add__(self, other: "CVec") -> "CVec":
        if other.space is not self.space:
            raise SpaceMismatch("vectors live in different spaces")
        comps = dict(self.comps)
        for n, c in other.comps.items():
            comps[n] = comps[n] + c if n in comps else c
        return CVec(self.space, comps, self.truncated or other.truncated)

    def scale(self, s: complex) -> "CVec":
        return CVec(self.space, {n: c * s for n, c in self.comps.items()}, self.truncated)

    def __sub__(self, other: "CVec") -> "CVec":
        return self + other.scale(-1)

    def inner(self, other: "CVec") -> complex:
        """<self, other>, linear in the first argument."""
        g = _gram(self.space)
        total = 0j
        for n in sorted(self.comps):
            if n in other.comps:
                total += complex(self.comps[n] @ g[n] @ np.conj(other.comps[n]))
        return total

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self).real, 0.0))

    def component(self, n: int) -> np.ndarray:
        c = self.comps.get(n)
        return np.zeros(self.space.dims[n], dtype=complex) if c is None else c


def _numeric_blocks(A: FieldTable) -> dict:
    nb = _NUMERIC.get(A)
    if nb is None:
        nb = {key: np.array([[float(x) for x in row] for row in blk.to_dense()], dtype=float) for key, blk in A.blocks.items()}
        _NUMERIC[A] = nb
    return nb


def _as_cvec(u) -> CVec:
    return CVec.from_vec(u) if isinstance(u, Vec) else u


def numeric_mode(A: FieldTable, n: int, u: CVec) -> CVec:
    """Shifted mode A_n on a complex vector."""
    if A.weight is None:
        raise UndefinedWeight("shifted modes need a homogeneous field")
    D = A.space.depth
    p = n + A.weight - 1
    blocks = _numeric_blocks(A)
    comps = {}
    truncated = u.truncated
    for m, x in u.comps.items():
        if not np.any(x):
            continue
        t = m - n
        if t < 0:
            continue
        if t > D or (p, m) in A.missing:
            truncated = True
            continue
        blk = blocks.get((p, m))
        if blk is None:
            continue
        y = blk @ x
        comps[t] = comps[t] + y if t in comps else y
    return CVec(A.space, comps, truncated)


def smear_apply(A: FieldTable, f: TrigPoly, u) -> CVec:
    """Y0(A, f) u = sum_n fhat(n) A_n u, summed in ascending n."""
    if A.weight is None:
        raise UndefinedWeight("smearing is defined for homogeneous fields; split inhomogeneous states first")
    u = _as_cvec(u)
    out = CVec(A.space, {}, u.truncated)
    for n, c in f.items():
        out = out + numeric_mode(A, n, u).scale(c)
    return out


def smear_state(va, v: Vec, f: TrigPoly, u) -> CVec:
    """Y0(v, f) u for an inhomogeneous state, by linearity over its homogeneous parts."""
    u = _as_cvec(u)
    out = CVec(v.space, {}, u.truncated)
    for deg in v.degrees():
        part = Vec(v.space, {deg: v.comps[deg]})
        out = out + smear_apply(va.Y_of(part), f, u)
    return out


def apply_sl2_numeric(space: GradedSpace, k: int, u: CVec) -> CVec:
    comps = {}
    truncated = u.truncated
    for n, x in u.comps.items():
        if k == 0:
            comps[n] = x * n
        elif k == -1:
            if n == space.depth:
                truncated = True
                continue
            M = np.array(space.lminus1[n].to_dense(), dtype=float).reshape(space.dims[n + 1], space.dims[n])
            comps[n + 1] = M @ x
        elif k == 1:
            if n == 0:
                continue
            M = np.array(space.l1[n].to_dense(), dtype=float).reshape(space.dims[n - 1], space.dims[n])
            comps[n - 1] = M @ x
        else:
            raise ValueError("k must be -1, 0 or 1")
    return CVec(space, comps, truncated)


# ---------------------------------------------------------------- growth and order probes


@dataclass
class GrowthProbe:
    degree: int | None  # None: no growth signal on the window
    slope: float | None
    envelope: list  # (M, max |element| on the shell max(|m1|, ...) = M)
    ratios: list  # (M, envelope / (1 + M)^degree)


def mode_growth_probe(A: FieldTable, u: Vec, up: Vec, window: Sequence[int], k: int = 2) -> GrowthProbe:
    """Growth of the exact matrix elements <A_m1 ... A_mk u, u'> in the largest index.

    For each shell radius M >= 1 in ``window`` the envelope is the largest
    |element| over untruncated index tuples with max |m_i| = M; the degree is
    the rounded least-squares slope of log(envelope) against log(M), fitted on
    the tail shells M > max(deg u, deg u') where extra contractions with the
    modes of u and u' no longer occur.  The ratio table divides the envelope
    by (1 + M)^degree.
    """
    if k < 1:
        raise ValueError("k >= 1")
    du, dup = u.degree, up.degree
    if du is None or dup is None:
        raise ValueError("u and u' must be homogeneous")
    total = du - dup  # the indices must sum to this for a nonzero element
    envelope = []
    for M in window:
        best = 0.0
        for idx in _shell(M, k, total):
            w = u
            for m in reversed(idx):
                w = shifted_mode_apply(A, m, w)
                if w.truncated or w.is_zero():
                    break
            if w.truncated or w.is_zero():
                continue
            best = max(best, abs(float(inner(w, up))))
        envelope.append((M, best))
    start = max(du, dup)
    pts = [(math.log(M), math.log(E)) for M, E in envelope if E > 0 and M > start]
    if len(pts) < 2:
        return GrowthProbe(None, None, envelope, [])
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    slope = float(np.polyfit(x, y, 1)[0])
    degree = max(0, int(round(slope)))
    ratios = [(M, E / (1 + M) ** degree) for M, E in envelope]
    return GrowthProbe(degree, slope, envelope, ratios)


def _shell(M: int, k: int, total: int):
    """Index tuples with max |m_i| = M and sum = total."""
    if k == 1:
        if abs(total) == M:
            yield (total,)
        return

    def rec(prefix, left, need_max):
        if left == 1:
            last = total - sum(prefix)
            if abs(last) <= M and (not need_max or abs(last) == M):
                yield prefix + (last,)
            return
        for m in range(-M, M + 1):
            yield from rec(prefix + (m,), left - 1, need_max and abs(m) != M)

    yield from rec((), k, True)


@dataclass
class OrderEstimate:
    order: int | None
    tail_degree: int | None
    label: str  # "probe" or "insufficient window"
    s_squared: list  # (n, exact ||A_n u||^2 as a string)
    partial_sums: dict  # N -> [(K, partial sum)]


def _poly_degree(values: Sequence[Fraction]) -> int | None:
    """Degree of a polynomial sampled at consecutive integers, or None when the samples cannot certify it.

    A degree g is accepted only when at least two (g+1)-th differences vanish.
    """
    if not any(values):
        return -1
    diffs = list(values)
    g = 0
    while True:
        nxt = [b - a for a, b in zip(diffs, diffs[1:])]
        if len(nxt) < 2:
            return None
        if not any(nxt):
            return g
        diffs = nxt
        g += 1


def order_estimate(A: FieldTable, u: Vec, window: Sequence[int] | None = None, orders: Sequence[int] = (0, 1, 2, 3, 4)) -> OrderEstimate:
    """Empirical Sobolev order of f -> Y0(A, f) u.

    s_n^2 = ||A_n u||^2 is computed exactly.  Past the degree of u the modes
    A_n with n > 0 annihilate u and s_n^2 for n < -deg(u) is a polynomial in
    n; its degree g is read off from exact finite differences over the window,
    and the reported order is the least N with 2N > g + 1, the point where
    sum_n s_n^2 (1 + n^2)^(-N) converges.
    """
    if A.weight is None:
        raise UndefinedWeight("order estimate needs a homogeneous field")
    space = A.space
    du = u.degree if not u.is_zero() else 0
    if du is None:
        raise ValueError("u must be homogeneous")
    if window is None:
        window = range(du - space.depth, du + 1)
    table = []
    for n in window:
        w = shifted_mode_apply(A, n, u)
        if w.truncated:
            continue
        table.append((n, Fraction(str(inner(w, w)))))
    tail = [(n, s) for n, s in table if n < -du]
    tail.sort(key=lambda p: -p[0])  # n = -du-1, -du-2, ...
    g = _poly_degree([s for _, s in tail])
    sums = {}
    for N in orders:
        rows = []
        acc = 0.0
        for n, s in sorted(table, key=lambda p: (abs(p[0]), p[0])):
            acc += float(s) / (1.0 + n * n) ** N
            rows.append((n, acc))
        sums[N] = rows
    s_sq = [(n, str(s)) for n, s in table]
    if g is None:
        return OrderEstimate(None, None, "insufficient window", s_sq, sums)
    if g < 0:
        return OrderEstimate(0, None, "probe", s_sq, sums)
    N = (g + 1) // 2 + 1  # least N with 2N > g + 1
    return OrderEstimate(N, g, "probe", s_sq, sums)


# ---------------------------------------------------------------- locality decay


@dataclass
class DecayTable:
    rows: list  # (cutoff, residual)

    @property
    def residuals(self) -> list[float]:
        return [r for _, r in self.rows]

    def strictly_decreasing(self, start: int = 0) -> bool:
        r = self.residuals[start:]
        return all(b < a for a, b in zip(r, r[1:]))


class SmearedCommutator:
    """[Y0(A, f), Y0(B, g)] u through the commutator formula.

    [A_n, B_m] = sum_s binom(n + d_A - 1, s) (A_(s)B)_{n+m}, so only the
    total index p = n + m reaches u and every term stays inside the window
    whatever the cutoff.
    """

    def __init__(self, A: FieldTable, B: FieldTable):
        if A.weight is None or B.weight is None:
            raise UndefinedWeight("commutators of homogeneous fields only")
        self.A, self.B = A, B
        self.products = borcherds_products(A, B)

    def apply(self, f: TrigPoly, g: TrigPoly, u) -> CVec:
        u = _as_cvec(u)
        space = self.A.space
        dA = self.A.weight
        degs = [m for m, x in u.comps.items() if np.any(x)]
        out = CVec(space, {}, u.truncated)
        if not degs:
            return out
        fn = list(f.items())
        # P_{s,p} u vanishes unless p <= max degree of u; targets stay >= min degree - D
        pmax = max(degs)
        pmin = min(degs) - space.depth
        for p in range(pmin, pmax + 1):
            for s, P in enumerate(self.products):
                if not P.blocks:
                    continue
                coef = 0j
                for n, fc in fn:
                    gc = g.coef(p - n)
                    if gc:
                        coef += fc * gc * binom(n + dA - 1, s)
                if coef:
                    out = out + numeric_mode(P, p, u).scale(coef)
        return out


def disjoint_commutator_decay(
    A: FieldTable,
    B: FieldTable,
    f_bump: Bump,
    g_bump: Bump,
    u,
    cutoffs: Sequence[int],
    *,
    require_disjoint: bool = True,
    tol: float = 1e-12,
) -> DecayTable:
    """r_M = ||[Y0(A, f_M), Y0(B, g_M)] u|| for bumps truncated to |n| <= M."""
    if require_disjoint:
        check_disjoint(f_bump, g_bump)
    cutoffs = list(cutoffs)
    if cutoffs != sorted(cutoffs):
        raise ValueError("cutoffs must be ascending")
    Mmax = max(cutoffs)
    f_all = f_bump.trigpoly(Mmax, tol)
    g_all = g_bump.trigpoly(Mmax, tol)
    comm = SmearedCommutator(A, B)
    rows = []
    for M in cutoffs:
        r = comm.apply(f_all.truncate(M), g_all.truncate(M), u)
        rows.append((M, r.norm()))
    return DecayTable(rows)


def direct_smeared_commutator(A: FieldTable, B: FieldTable, f: TrigPoly, g: TrigPoly, u) -> CVec:
    """[Y0(A, f), Y0(B, g)] u by composing the smeared operators (truncation-limited)."""
    return smear_apply(A, f, smear_apply(B, g, u)) - smear_apply(B, g, smear_apply(A, f, u))


# ---------------------------------------------------------------- Moebius action on test functions


@dataclass(frozen=True)
class MoebiusElement:
    """z -> (a z + b) / (conj(b) z + conj(a)) with |a|^2 - |b|^2 = 1."""

    a: complex
    b: complex = 0j

    def __post_init__(self):
        if abs(abs(self.a) ** 2 - abs(self.b) ** 2 - 1) > 1e-12:
            raise ValueError("need |a|^2 - |b|^2 = 1")

    @classmethod
    def rotation(cls, theta: float) -> "MoebiusElement":
        return cls(complex(math.cos(theta / 2), math.sin(theta / 2)), 0j)

    @classmethod
    def boost(cls, s: float) -> "MoebiusElement":
        return cls(complex(math.cosh(s), 0), complex(math.sinh(s), 0))

    def __matmul__(self, other: "MoebiusElement") -> "MoebiusElement":
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        return MoebiusElement(a1 * a2 + b1 * b2.conjugate(), a1 * b2 + b1 * a2.conjugate())

    def inverse(self) -> "MoebiusElement":
        return MoebiusElement(self.a.conjugate(), -self.b)

    def __call__(self, z):
        return (self.a * z + self.b) / (self.b.conjugate() * z + self.a.conjugate())

    def x_gamma(self, z):
        """-i d/dt log gamma(e^{it}) = z gamma'(z) / gamma(z) on the circle."""
        return z / ((self.a * z + self.b) * (self.b.conjugate() * z + self.a.conjugate()))


def beta_action(gamma: MoebiusElement, d: int, f: TrigPoly, out_cutoff: int) -> TrigPoly:
    """(beta_d(gamma) f)(z) = X_gamma(gamma^-1 z)^(d-1) f(gamma^-1 z), resampled on 4*out_cutoff points."""
    if out_cutoff < f.cutoff:
        raise ValueError("out_cutoff must be >= the cutoff of f")
    N = max(4 * out_cutoff, 8)
    t = 2 * math.pi * np.arange(N) / N
    z = np.exp(1j * t)
    zi = gamma.inverse()(z)
    X = gamma.x_gamma(zi)
    if np.max(np.abs(X.imag)) > 1e-9 * np.max(np.abs(X)) or np.min(X.real) <= 0:
        raise NonPositiveXGamma("X_gamma is not positive on the sample grid")
    vals = X.real ** (d - 1) * f(np.angle(zi))
    return TrigPoly.from_samples(vals, out_cutoff)


# ---------------------------------------------------------------- infinitesimal covariance


def covariance_rhs(f: TrigPoly, d: int, k: int) -> TrigPoly:
    """(d-1) g' f - g f' for g = -i e^{ikt}: coefficient fhat(m-k) (dk - m) at e^{imt}."""
    g = TrigPoly.monomial(k, -1j)
    gp = g.derivative()
    return _product(gp, f) * (d - 1) - _product(g, f.derivative())


def _product(a: TrigPoly, b: TrigPoly) -> TrigPoly:
    out: dict = {}
    for n, x in a.items():
        for m, y in b.items():
            out[n + m] = out.get(n + m, 0j) + x * y
    return TrigPoly.from_dict(out, a.cutoff + b.cutoff)


@dataclass
class CovarianceResidual:
    residual: float
    scale: float
    truncated: bool

    @property
    def relative(self) -> float:
        return self.residual / self.scale


def infinitesimal_covariance_check(A: FieldTable, d: int, k: int, f: TrigPoly, u) -> CovarianceResidual:
    """|| [L_k, Y0(A, f)] u - Y0(A, (d-1) g' f - g f') u || with g = -i e^{ikt}."""
    if k not in (-1, 0, 1):
        raise ValueError("k must be -1, 0 or 1")
    space = A.space
    u = _as_cvec(u)
    y = smear_apply(A, f, u)
    lhs = apply_sl2_numeric(space, k, y) - smear_apply(A, f, apply_sl2_numeric(space, k, u))
    rhs = smear_apply(A, covariance_rhs(f, d, k), u)
    res = (lhs - rhs).norm()
    scale = max(1.0, lhs.norm(), rhs.norm())
    return CovarianceResidual(res, scale, lhs.truncated or rhs.truncated)


# ---------------------------------------------------------------- summability diagnostic


def _even_poly(x: int, N: int) -> int:
    x2 = x * x
    return sum(x2**i for i in range(N + 1))


def summability_term(N: int, n: int, m: int) -> Fraction:
    """(1 + ... + n^{2N})(1 + ... + m^{2N}) / sum_{k <= 2N+2} sum_{l <= k} m^{2(k-l)} n^{2l}."""
    num = _even_poly(n, N) * _even_poly(m, N)
    n2, m2 = n * n, m * m
    den = sum(m2 ** (k - l) * n2**l for k in range(2 * N + 3) for l in range(k + 1))
    return Fraction(num, den)


@dataclass
class SummabilityReport:
    N: int
    cutoff: int
    partial_sums: list  # (K, S(K))
    monotone: bool
    cauchy_difference: float  # S(2 cutoff) - S(cutoff)
    tail_bound: float  # 4 / cutoff
    comparison_bound: float  # bound from summand <= 1/(n^2 m^2) plus the axes
    inequality_violations: list
    origin_term: Fraction

    @property
    def cauchy_ok(self) -> bool:
        return 0 <= self.cauchy_difference < self.tail_bound


def _summand_grid(N: int, K: int) -> np.ndarray:
    """Float summands on the grid |n|, |m| <= K, indexed [n + K, m + K]."""
    x = np.arange(-K, K + 1, dtype=float) ** 2
    P = sum(x**i for i in range(N + 1))
    n2 = x[:, None]
    m2 = x[None, :]
    den = sum(m2 ** (k - l) * n2**l for k in range(2 * N + 3) for l in range(k + 1))
    return np.outer(P, P) / den


def sobolev_summability_diagnostic(N: int, cutoff: int) -> SummabilityReport:
    """Partial sums over |m|, |n| <= K of the summability ratio, with the tail and comparison checks.

    Sums run shell by shell (max(|n|, |m|) = K) with compensated summation;
    the inequality summand <= 1/(n^2 m^2) is checked in exact integers.
    """
    if N < 0 or cutoff < 1:
        raise ValueError("need N >= 0 and cutoff >= 1")
    K2 = 2 * cutoff
    grid = _summand_grid(N, K2)
    idx = np.arange(-K2, K2 + 1)
    radius = np.maximum(np.abs(idx)[:, None], np.abs(idx)[None, :])
    shells = [math.fsum(grid[radius == K].tolist()) for K in range(K2 + 1)]
    partial = []
    running = []
    for K, s in enumerate(shells):
        running.append(s)
        partial.append((K, math.fsum(running)))
    S = dict(partial)
    monotone = all(b >= a for (_, a), (_, b) in zip(partial, partial[1:]))
    diff = math.fsum(shells[cutoff + 1 :])
    violations = []
    for n in range(1, cutoff + 1):
        for m in range(1, cutoff + 1):
            # the summand is even in n and m
            num = _even_poly(n, N) * _even_poly(m, N) * n * n * m * m
            n2, m2 = n * n, m * m
            den = sum(m2 ** (k - l) * n2**l for k in range(2 * N + 3) for l in range(k + 1))
            if num > den:
                violations.extend([(n, m), (-n, m), (n, -m), (-n, -m)])
    # comparison bound: the nm != 0 part via 1/(n^2 m^2), plus the two axes where the summand is <= 1/n^4
    inner_tail = sum(1.0 / j**2 for j in range(cutoff + 1, K2 + 1))
    zeta2 = math.pi**2 / 6
    comparison = 2 * (2 * inner_tail) * (2 * zeta2) + 4 * sum(1.0 / j**4 for j in range(cutoff + 1, K2 + 1))
    ks = sorted({1, max(1, cutoff // 4), max(1, cutoff // 2), cutoff, K2})
    return SummabilityReport(
        N, cutoff, [(k, S[k]) for k in ks], monotone, diff, 4.0 / cutoff, comparison, violations, summability_term(N, 0, 0)
    )
