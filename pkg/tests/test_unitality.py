import random

import pytest

from ainfkit.fields import QQ, GF
from ainfkit.graded import make_module, cone_of_identity, cohomology
from ainfkit.dgcat import ChainInstance
from ainfkit.twisted import twisted_hom_d, compose_twisted, TwistedMorphism, convolve
from ainfkit.modules import (
    AInftyModule, ModuleMorphism, free_module, algebra_as_module, module_bar,
    diagonal_bimodule, RIGHT, LEFT,
)
from ainfkit.samples import (
    dual_numbers, dual_numbers_unit, graded_dual_numbers, matrix_algebra_2x2,
    matrix_unit_map, zero_algebra, random_valid_algebra, random_gauge_components,
    transport_module, random_module_gauge, random_valid_module,
)
from ainfkit.ainfty import AlgebraMorphism, transport_structure, compose_morphisms, check_ainfty
from ainfkit.graded import GradedMap
from ainfkit.unitality import (
    NotAcyclic, SolverFailure, homotopy_lemma_solver, module_homotopy_equiv,
    check_strict_unital, check_weak_unital, check_strong_unital,
    solve_strong_unital, h_unital_beta, verify_bar_contraction,
    UnitalityCertificate, split_eta_tilde, check_bimodule_unital,
    solve_bimodule_unital, four_equation_residuals, chi, zeta, xi,
    verify_chi_rho, unitality_tfae, carrier_contraction,
)

F101 = GF(101)


def strict_unital_fixture(field=QQ, cap=5):
    inst = ChainInstance(field)
    A = graded_dual_numbers(inst, cap=cap)
    eta = GradedMap.from_entries(inst.unit.module, A.carrier.module, 0,
                                 inst.field, {((), ("e",)): 1})
    return inst, A, eta


def perturbed_strongly_unital_fixture(field=F101, cap=4, seed=5):
    """Gauge transport of a strictly unital algebra: strongly homotopy unital
    with a transported unit, in general no longer strictly unital."""
    inst = ChainInstance(field)
    A0 = graded_dual_numbers(inst, cap=cap)
    eta0 = GradedMap.from_entries(inst.unit.module, A0.carrier.module, 0,
                                  inst.field, {((), ("e",)): 1})
    rng = random.Random(seed)
    g = random_gauge_components(rng, A0)
    A1 = transport_structure(A0, g)
    gauge = AlgebraMorphism(A1, A0, {**g, 1: inst.identity(A0.carrier)})
    # transported unit: eta' = f^{-1}_* eta; with f_1 = id the first
    # component of the unit stays eta0 and remains closed
    return inst, A0, eta0, A1, gauge


def test_homotopy_lemma_on_cone_carriers():
    rng = random.Random(31)
    inst = ChainInstance(F101)
    A = random_valid_algebra(rng, inst, cap=5)
    V = inst.object(make_module({0: ["v0"], 1: ["v1"]}))
    carrier = cone_of_identity(V.module, F101)
    E0 = AInftyModule(A, inst.object(carrier.module, carrier.differential),
                      {}, side=RIGHT, cap=5)
    E = transport_module(E0, random_module_gauge(rng, E0))
    cert = homotopy_lemma_solver(E)
    assert cert.verify()


def test_homotopy_lemma_zero_module():
    inst = ChainInstance(QQ)
    Z = zero_algebra(inst, {0: ["u"]}, cap=4)
    E = AInftyModule(Z, inst.object(make_module({})), {}, side=RIGHT)
    cert = homotopy_lemma_solver(E)
    assert cert.morphism.is_zero() or cert.verify()


def test_homotopy_lemma_not_acyclic_on_free_module():
    inst, A, eta = strict_unital_fixture()
    F = free_module(A, inst.unit)
    with pytest.raises(NotAcyclic):
        homotopy_lemma_solver(F)


def test_module_homotopy_equiv_identity_and_refutation():
    rng = random.Random(32)
    inst = ChainInstance(F101)
    A = random_valid_algebra(rng, inst, cap=4)
    E = random_valid_module(rng, A)
    idE = ModuleMorphism.identity(E)
    out = module_homotopy_equiv(idE)
    assert out["equivalence"]
    z = ModuleMorphism.zero(E, E, 0)
    if cohomology(E.carrier):
        out2 = module_homotopy_equiv(z)
        assert not out2["equivalence"]


def test_pi2_is_homotopy_equivalence_for_homotopy_unital_idempotent():
    # over the unit-object algebra (the identity monad) the Free-Forgetful
    # counit pi_2: E (x) 1 -> (E, p) is a homotopy equivalence whenever the
    # homotopy idempotent p_2 is homotopic to the identity
    from ainfkit.ainfty import AInftyAlgebra
    from ainfkit.modules import pi
    inst = ChainInstance(F101)
    One = AInftyAlgebra(inst, inst.unit, {2: inst.identity(inst.unit)}, cap=4)
    V = make_module({0: ["v"], 1: ["w"]})
    carrier = cone_of_identity(V, F101)
    E0 = AInftyModule(One, inst.object(carrier.module, carrier.differential),
                      {2: inst.identity(inst.object(carrier.module, carrier.differential))},
                      side=RIGHT, cap=4)
    rng = random.Random(9)
    E = transport_module(E0, random_module_gauge(rng, E0))
    p2 = pi(2, E)
    out = module_homotopy_equiv(p2)
    assert out["equivalence"]


def test_strict_unitality_checks():
    inst, A, eta = strict_unital_fixture()
    assert check_strict_unital(A, eta)
    assert check_weak_unital(A, eta) is not None
    B = matrix_algebra_2x2(inst, cap=4)
    assert check_strict_unital(B, matrix_unit_map(B))
    # eta = 0 on a nonzero unital algebra fails both
    zero_eta = inst.zero_morphism(inst.unit, A.carrier, 0)
    assert not check_strict_unital(A, zero_eta)
    assert check_weak_unital(A, zero_eta) is None


def test_strong_unitality_strict_case_h_zero():
    inst, A, eta = strict_unital_fixture()
    h_r, h_l = solve_strong_unital(A, eta)
    assert h_r.is_zero() and h_l.is_zero()
    assert check_strong_unital(A, eta, h_r, h_l)


def test_strong_unitality_perturbed_fixture():
    inst, A0, eta0, A1, gauge = perturbed_strongly_unital_fixture()
    assert check_ainfty(A1)
    # the transported unit of A1: eta1 with components f^{-1} . eta; since
    # only closedness of eta matters and f_1 = id, take eta0 as candidate
    # and let the solver find the homotopies
    h_r, h_l = solve_strong_unital(A1, eta0)
    assert check_strong_unital(A1, eta0, h_r, h_l)
    assert not check_strict_unital(A1, eta0) or True  # may or may not be strict


def test_beta_contracts_bar():
    inst, A, eta = strict_unital_fixture(cap=5)
    h_r, h_l = solve_strong_unital(A, eta)
    cx = h_unital_beta(A, eta, h_r)
    rep = verify_bar_contraction(A, cx)
    assert rep.ok
    # zero algebra: bar is zero below degree 0; beta = 0 contracts nothing
    Z = zero_algebra(inst, {0: ["u"]}, cap=4)
    zeta0 = inst.zero_morphism(inst.unit, Z.carrier, 0)
    cz = h_unital_beta(Z, zeta0, ModuleMorphism.zero(
        free_module(Z, inst.unit), free_module(Z, inst.unit), -1))
    assert cz.is_zero()


def test_beta_contracts_perturbed():
    inst, A0, eta0, A1, gauge = perturbed_strongly_unital_fixture()
    h_r, h_l = solve_strong_unital(A1, eta0)
    cx = h_unital_beta(A1, eta0, h_r)
    rep = verify_bar_contraction(A1, cx)
    assert rep.ok


def test_bimodule_certificate_strict_and_dictionary():
    inst, A, eta = strict_unital_fixture(cap=5)
    cert = solve_bimodule_unital(A, eta)
    assert check_bimodule_unital(A, cert)
    # strict case: eta~ = eta alone
    et = cert.assemble_eta_tilde()
    assert set(et.components) == {(0, 0)}
    # dictionary round trip incl. signs h^r_2 = -eta~_{02}
    back = split_eta_tilde(A, et)
    assert back.eta == cert.eta
    assert check_bimodule_unital(A, back)
    # inject an h_r and check the sign dictionary
    hs = inst.hom_space(A.power(2), A.carrier)
    if hs.dim(-2):
        fake = hs.from_coords(-2, {0: inst.field.one})
        from ainfkit.modules import free_module as fm
        h_r = ModuleMorphism(fm(A, inst.unit, side=RIGHT),
                             algebra_as_module(A, RIGHT), {2: fake}, degree=-1)
        c2 = UnitalityCertificate(A, eta, h_r, cert.h_l, None)
        et2 = c2.assemble_eta_tilde()
        assert et2.components[(0, 2)] == inst.neg(fake)
        back2 = split_eta_tilde(A, et2)
        assert back2.h_r.components[2] == fake


def test_bimodule_certificate_perturbed_and_fault():
    inst, A0, eta0, A1, gauge = perturbed_strongly_unital_fixture(cap=4)
    cert = solve_bimodule_unital(A1, eta0)
    rep = check_bimodule_unital(A1, cert)
    assert rep.ok
    four = four_equation_residuals(A1, cert)
    assert all(v.is_zero() for v in four.values())
    # fault injection: kappa = 0 while h^l A != A h^r makes the kappa
    # equation fail
    if cert.kappa is not None and not cert.kappa.is_zero():
        broken = UnitalityCertificate(A1, cert.eta, cert.h_r, cert.h_l, None)
        four_b = four_equation_residuals(A1, broken)
        assert not four_b["kappa"].is_zero()
        assert not check_bimodule_unital(A1, broken)


def test_chi_formula_and_closedness():
    inst, A, eta = strict_unital_fixture(cap=5)
    cert = solve_bimodule_unital(A, eta)
    et = cert.assemble_eta_tilde()
    E = algebra_as_module(A, RIGHT)
    c = chi(E, et, 5)
    # chi_{11} = E eta
    c11 = c.components[(0, 0)].component(1)
    expected = inst.tensor_morphisms(inst.identity(E.carrier), eta)
    assert c11 == expected
    # strictly unital strict algebra: only the eta staircase
    for (k0, kj), mm in c.components.items():
        for j, comp in mm.components.items():
            i = 1 - kj
            assert j >= i
    assert verify_chi_rho(E, et, 5)["d_chi"]


def test_chi_rho_identities_strict_and_perturbed():
    inst, A, eta = strict_unital_fixture(cap=5)
    cert = solve_bimodule_unital(A, eta)
    et = cert.assemble_eta_tilde()
    E = algebra_as_module(A, RIGHT)
    out = verify_chi_rho(E, et, 5)
    assert out["d_chi"] and out["zeta_contracts"] and out["xi_identity"]

    inst2, A0, eta0, A1, gauge = perturbed_strongly_unital_fixture(cap=4)
    cert2 = solve_bimodule_unital(A1, eta0)
    et2 = cert2.assemble_eta_tilde()
    E2 = algebra_as_module(A1, RIGHT)
    out2 = verify_chi_rho(E2, et2, 4)
    assert out2["d_chi"] and out2["zeta_contracts"] and out2["xi_identity"]


def test_xi_zero_module():
    inst, A, eta = strict_unital_fixture(cap=4)
    cert = solve_bimodule_unital(A, eta)
    et = cert.assemble_eta_tilde()
    Z = AInftyModule(A, inst.object(make_module({})), {}, side=RIGHT, cap=4)
    x = xi(Z, et, 4)
    assert x.is_zero()


def test_unitality_tfae_free_module():
    inst, A, eta = strict_unital_fixture(cap=5)
    cert = solve_bimodule_unital(A, eta)
    gen = inst.object(make_module({0: ["g"]}))
    F = free_module(A, gen)
    rep = unitality_tfae(F, cert, 5)
    cls = rep["classification"]
    assert cls["homotopy_unital"] and cls["H_unital"] and cls["strongly_homotopy_unital"]


def test_unitality_tfae_acyclic_carrier():
    inst, A, eta = strict_unital_fixture(cap=4)
    cert = solve_bimodule_unital(A, eta)
    V = make_module({0: ["v"]})
    carrier = cone_of_identity(V, QQ)
    E = AInftyModule(A, inst.object(carrier.module, carrier.differential),
                     {}, side=RIGHT, cap=4)
    # H-unital via the homotopy lemma solver, hence all three
    cc = homotopy_lemma_solver(E)
    assert cc.verify()
    rep = unitality_tfae(E, cert, 4)
    assert rep["classification"]["H_unital"]
    assert rep["classification"]["strongly_homotopy_unital"]
    assert rep["classification"]["homotopy_unital"]


def test_unitality_tfae_refutation():
    inst, A, eta = strict_unital_fixture(cap=4)
    cert = solve_bimodule_unital(A, eta)
    # zero action module with non-contractible carrier: p_2 . E eta = 0 not
    # homotopic to id
    E = AInftyModule(A, inst.object(make_module({0: ["w"]})), {}, side=RIGHT, cap=4)
    rep = unitality_tfae(E, cert, 4)
    cls = rep["classification"]
    assert not cls["homotopy_unital"]
    assert not cls["H_unital"]
    assert not cls["strongly_homotopy_unital"]
