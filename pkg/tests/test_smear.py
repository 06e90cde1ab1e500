import math
from fractions import Fraction

import numpy as np
import pytest

from mobius_va import Vec, heisenberg, virasoro
from mobius_va.fields import identity_field, shifted_mode_apply
from mobius_va.smear import (
    Bump,
    CVec,
    MoebiusElement,
    SmearedCommutator,
    SupportOverlap,
    TrigPoly,
    beta_action,
    check_disjoint,
    direct_smeared_commutator,
    disjoint_commutator_decay,
    infinitesimal_covariance_check,
    mode_growth_probe,
    numeric_mode,
    order_estimate,
    sobolev_norm,
    sobolev_summability_diagnostic,
    summability_term,
)

from oracles import bump_coefficient_fft, summability_term_sympy


@pytest.fixture(scope="module")
def heis8():
    return heisenberg(8)


@pytest.mark.parametrize("bump", [Bump(1.0, 0.9), Bump(-1.6, 1.2), Bump(0.3, 0.5, tilt=0.5)])
@pytest.mark.parametrize("n", [0, 1, -3, 7, 20])
def test_bump_coefficients_match_fft(bump, n):
    ref = bump_coefficient_fft(bump, n)
    assert abs(bump.coefficient(n) - ref) < 1e-12


def test_bump_validation():
    with pytest.raises(ValueError):
        Bump(0.0, 4.0)
    with pytest.raises(ValueError):
        Bump(0.0, 1.0, tilt=1.0)
    with pytest.raises(SupportOverlap):
        check_disjoint(Bump(0.0, 1.0), Bump(1.5, 0.8))
    check_disjoint(Bump(1.0, 0.9), Bump(-1.6, 1.2))


def test_trigpoly_roundtrip_and_calculus():
    f = TrigPoly.from_dict({-2: 1 - 1j, 0: 0.5, 3: 2j}, 3)
    t = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    g = TrigPoly.from_samples(f(t), 3)
    assert np.allclose(g.coeffs, f.coeffs, atol=1e-14)
    df = f.derivative()
    assert df.coef(3) == pytest.approx(3j * 2j)
    assert f.rotate(0.7).rotate(-0.7).coef(-2) == pytest.approx(f.coef(-2))
    assert f.shift(1).coef(4) == f.coef(3)
    assert f.truncate(2).coef(3) == 0
    assert sobolev_norm(TrigPoly.monomial(2), 1) == pytest.approx(math.sqrt(5))


def test_numeric_mode_matches_exact(heis8):
    space, J, _ = heis8
    for e in space.basis():
        for n in range(-3, 4):
            exact = shifted_mode_apply(J, n, e)
            num = numeric_mode(J, n, CVec.from_vec(e))
            if exact.truncated:
                assert num.truncated
                continue
            diff = num - CVec.from_vec(exact)
            assert diff.norm() < 1e-12


def test_borcherds_route_agrees_with_composition(heis8):
    space, J, _ = heis8
    f = TrigPoly.from_dict({-2: 0.3, 1: 1.0, 2: -0.5j}, 2)
    g = TrigPoly.from_dict({-1: 1.0j, 0: 0.2, 2: 0.7}, 2)
    u = Vec.basis(space, 2, 0)
    a = SmearedCommutator(J, J).apply(f, g, u)
    b = direct_smeared_commutator(J, J, f, g, u)
    assert not a.truncated and not b.truncated
    assert (a - b).norm() < 1e-12
    # [Y0(J, f), Y0(J, g)] = sum_n n f_n g_-n Id for the current
    expected = sum(n * f.coef(n) * g.coef(-n) for n in range(-2, 3))
    assert (a - CVec.from_vec(u).scale(expected)).norm() < 1e-12


def test_disjoint_decay_and_identity(heis8):
    space, J, _ = heis8
    f, g = Bump(1.0, 0.9), Bump(-1.6, 1.2)
    omega = space.vacuum()
    table = disjoint_commutator_decay(J, J, f, g, omega, [16, 32, 64])
    assert table.strictly_decreasing()
    zero = disjoint_commutator_decay(identity_field(space), identity_field(space), f, g, omega, [16, 32])
    assert zero.residuals == [0.0, 0.0]
    with pytest.raises(SupportOverlap):
        disjoint_commutator_decay(J, J, f, Bump(1.2, 0.5), omega, [16])


def test_moebius_group_law():
    a = MoebiusElement.boost(0.3) @ MoebiusElement.rotation(0.9)
    b = MoebiusElement.rotation(-0.4) @ MoebiusElement.boost(-0.2)
    z = np.exp(1j * np.linspace(0, 6, 7))
    assert np.allclose((a @ b)(z), a(b(z)), atol=1e-14)
    assert np.allclose((a @ a.inverse())(z), z, atol=1e-14)
    assert np.allclose(np.abs(a(z)), 1.0)
    with pytest.raises(ValueError):
        MoebiusElement(1.0, 1.0)


def test_beta_action(heis8):
    f = Bump(0.5, 0.6).trigpoly(48)
    g1, g2 = MoebiusElement.boost(0.2), MoebiusElement.rotation(0.8)
    for d in (1, 2):
        lhs = beta_action(g1 @ g2, d, f, 64)
        rhs = beta_action(g1, d, beta_action(g2, d, f, 64), 64)
        assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-8
    # rotations act by translation for every d
    rot = beta_action(MoebiusElement.rotation(0.8), 2, f, 48)
    assert np.max(np.abs(rot.coeffs - f.rotate(0.8).coeffs)) < 1e-12


@pytest.mark.parametrize("model,d", [(lambda: heisenberg(11), 1), (lambda: virasoro("1/2", 11, null="quotient"), 2)])
def test_infinitesimal_covariance(model, d):
    space, A, _ = model()
    for k in (-1, 0, 1):
        for n in (-4, 0, 3):
            for u in list(space.basis())[:6]:
                r = infinitesimal_covariance_check(A, d, k, TrigPoly.monomial(n), u)
                assert not r.truncated
                assert r.relative <= 1e-10
    # a misdeclared weight is caught
    u = Vec.basis(space, 2, 0)
    bad = infinitesimal_covariance_check(A, d + 1, 1, TrigPoly.monomial(-2), u)
    assert bad.relative > 0.1


def test_order_estimates():
    space, J, _ = heisenberg(12)
    for u in [space.vacuum(), Vec.basis(space, 2, 1)]:
        est = order_estimate(J, u)
        assert est.order == 2 and est.tail_degree == 1
    vs, T, _ = virasoro("1/2", 12, null="quotient")
    est = order_estimate(T, vs.vacuum())
    assert est.order == 3 and est.tail_degree == 3
    thin = order_estimate(T, vs.vacuum(), window=range(-4, 1))
    assert thin.order is None and thin.label == "insufficient window"


def test_growth_probe():
    vs, T, _ = virasoro("1/2", 12, null="quotient")
    probe = mode_growth_probe(T, vs.vacuum(), vs.vacuum(), range(2, 7))
    assert probe.degree == 3
    hs, J, _ = heisenberg(8)
    p = mode_growth_probe(J, hs.vacuum(), hs.vacuum(), range(1, 7))
    assert p.degree == 1


def test_summability_terms_exact():
    for N in (0, 1, 2):
        for n, m in [(0, 0), (1, 2), (-3, 5), (7, -1), (0, 4)]:
            assert summability_term(N, n, m) == Fraction(str(summability_term_sympy(N, n, m)))


def test_summability_diagnostic():
    for N in (0, 1):
        rep = sobolev_summability_diagnostic(N, 40)
        assert rep.inequality_violations == []
        assert rep.monotone and rep.origin_term == 1
        assert rep.cauchy_ok
    with pytest.raises(ValueError):
        sobolev_summability_diagnostic(-1, 10)

