"""Independent reference computations, written without the package's own algebra code.

Everything here uses sympy with a symbolic central charge, or plain brute force,
so the package is compared against a separate implementation.
"""

from functools import lru_cache

import sympy as sp
from sympy.functions.combinatorial.numbers import partition

c_sym = sp.Symbol("c")


def partitions_brute(n, min_part=1):
    """All partitions of n into parts >= min_part, as sorted tuples, by exhaustive search."""
    out = set()

    def rec(rest, acc):
        if rest == 0:
            out.add(tuple(sorted(acc, reverse=True)))
            return
        for p in range(min_part, rest + 1):
            rec(rest - p, acc + [p])

    rec(n, [])
    return out


def vacuum_module_dims(D):
    """Verma vacuum module dimensions: p(n) - p(n-1) via sympy's partition function."""
    return [1] + [int(partition(n) - partition(n - 1)) for n in range(1, D + 1)]


# ---------------------------------------------------------------- Virasoro words


def _vir_apply(m, word, c):
    """L_m applied to L_{-w1} ... L_{-wk}|0> (w1 >= w2 >= ... >= 2); returns {word: coeff}."""
    out = {}

    def add(d, scale):
        for k, v in d.items():
            out[k] = sp.expand(out.get(k, 0) + scale * v)

    if not word:
        if m <= -2:
            add({(-m,): 1}, 1)
        return {k: v for k, v in out.items() if v != 0}
    if m < 0 and -m >= word[0]:
        return {(-m,) + word: 1}
    head, rest = word[0], word[1:]
    # L_m L_{-head} = L_{-head} L_m + (m + head) L_{m - head} + c/12 (m^3 - m) delta_{m, head}
    for w, coef in _vir_apply(m, rest, c).items():
        add(_vir_apply(-head, w, c), coef)
    if m + head:
        add(_vir_apply(m - head, rest, c), m + head)
    if m == head:
        add({rest: 1}, c * (m**3 - m) / 12)
    return {k: v for k, v in out.items() if v != 0}


def vir_pairing(lam, mu, c=c_sym):
    """<L_{-lam}|0>, L_{-mu}|0>> using L_n^dagger = L_{-n}."""
    vec = {tuple(mu): sp.Integer(1)}
    for part in lam:  # adjoint of L_{-lam1} ... L_{-lamk} is L_{lamk} ... L_{lam1}; L_{lam1} acts first
        new = {}
        for w, coef in vec.items():
            for w2, c2 in _vir_apply(part, w, c).items():
                new[w2] = sp.expand(new.get(w2, 0) + coef * c2)
        vec = {k: v for k, v in new.items() if v != 0}
    return sp.expand(vec.get((), 0))


def vir_gram(level, c=c_sym):
    basis = sorted(partitions_brute(level, 2), reverse=True)
    return sp.Matrix([[vir_pairing(p, q, c) for q in basis] for p in basis])


# ---------------------------------------------------------------- Heisenberg


def heis_pairing(lam, mu):
    """<a_{-lam}|0>, a_{-mu}|0>> by moving annihilators right with [a_m, a_n] = m delta_{m+n}."""

    @lru_cache(maxsize=None)
    def annihilate(k, word):
        # a_k a_{-w1} ... |0> for k > 0: sum over contractions
        out = {}
        for i, w in enumerate(word):
            if w == k:
                rest = word[:i] + word[i + 1 :]
                out[rest] = out.get(rest, 0) + k
        return out

    vec = {tuple(sorted(mu, reverse=True)): 1}
    for k in lam:
        new = {}
        for w, coef in vec.items():
            for w2, c2 in annihilate(k, w).items():
                new[w2] = new.get(w2, 0) + coef * c2
        vec = new
    return vec.get((), 0)


# ---------------------------------------------------------------- covariance coefficient


def covariance_coefficient():
    """Coefficient a(k, m, d) in [L_k, phi_m] = a phi_{m+k}, derived from
    [L_k, phi(z)] = (z^(k+1) d/dz + (k+1) d z^k) phi(z) with phi(z) = sum phi_m z^(-m-d)."""
    k, m, d, z = sp.symbols("k m d z")
    term = z ** (-m - d)
    rhs = z ** (k + 1) * sp.diff(term, z) + (k + 1) * d * z**k * term
    # phi_m multiplies z^(k-m-d) = z^(-(m-k)-d), i.e. it lands on the slot of phi_(m-k)
    coef = sp.simplify(rhs / z ** (k - m - d))
    # rename so the left side is phi_m: [L_k, phi_m] picks up the coefficient of phi_(m+k)
    return sp.expand(coef.subs(m, m + k)), (k, m, d)


def bump_coefficient_fft(bump, n, samples=1 << 16):
    """f_n = (1/2pi) int f(t) e^{-int} dt by the rectangle rule (spectrally accurate for smooth periodic f)."""
    import numpy as np

    t = 2 * np.pi * np.arange(samples) / samples
    vals = bump(t)
    return complex(np.mean(vals * np.exp(-1j * n * t)))


def summability_term_sympy(N, n, m):
    num = sum(sp.Integer(n) ** (2 * i) for i in range(N + 1)) * sum(sp.Integer(m) ** (2 * i) for i in range(N + 1))
    den = sum(sp.Integer(m) ** (2 * (k - l)) * sp.Integer(n) ** (2 * l) for k in range(2 * N + 3) for l in range(k + 1))
    return sp.Rational(num, den)
