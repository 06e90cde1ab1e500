from mobius_va import Vec, conjugate_state, hermitian_check, invariant_form_check, virasoro
from mobius_va.linalg import Q
from mobius_va.unitarity import hermitian_generating_criterion, positivity_witness, unitarity_suite


def test_heisenberg_unitary(heis4, heis4_va):
    rep = unitarity_suite(heis4_va, heis4.theta)
    assert rep.passed, [c.as_dict() for c in rep.failures()]
    assert rep.check("invariant_form").checked > 1000


def test_ising_quotient_unitary(ising, ising_va):
    assert unitarity_suite(ising_va, ising.theta).passed


def test_ising_universal_module_is_not_positive(ising_keep, ising_keep_va):
    rep = hermitian_generating_criterion(ising_keep_va, ising_keep.theta)
    assert rep.check("positivity").status == "fail"
    assert rep.check("positivity").witnesses[0]["level"] == 6


def test_negative_central_charge_witness():
    m = virasoro("-1", 4)
    w = positivity_witness(m.space)
    assert w["level"] == 2 and w["basis"] == "L(-2)|0>"
    assert w["pivot"] == Q(-1, 2) and w["norm"] == Q(-1, 2)


def test_rescaled_form_is_not_invariant(heis4, heis4_va):
    space = heis4.space
    gram = [list(map(list, g)) for g in space.gram]
    gram[2] = [[2 * x for x in row] for row in gram[2]]
    chk = invariant_form_check(heis4_va, heis4.theta, gram=gram)
    assert chk.status == "fail" and chk.witnesses


def test_hermitian_sign(heis4, ising):
    J, T = heis4.generator, ising.generator
    assert hermitian_check(J, 1).passed
    assert hermitian_check(T, 2).passed
    # Theta v = (-1)^d v ties hermiticity to the sign of Theta
    s = Vec.basis(heis4.space, 1, 0)
    assert heis4.theta(s) == s.scale(-1)


def test_conjugate_state_examples(heis4):
    space = heis4.space
    J = Vec.basis(space, 1, 0)
    assert conjugate_state(J, heis4.theta) == J  # quasi-primary of odd weight with Theta = -1
    dJ = Vec.basis(space, 2, 0)  # a(-2)|0>, L_1 a(-2)|0> = 2 a(-1)|0>
    assert conjugate_state(dJ, heis4.theta) == dJ.scale(-1) + J.scale(-2)


def test_conjugation_is_involution(heis4):
    for v in heis4.space.basis():
        assert conjugate_state(conjugate_state(v, heis4.theta), heis4.theta) == v
