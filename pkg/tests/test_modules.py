import random

import pytest

from ainfkit.fields import QQ, GF
from ainfkit.graded import make_module
from ainfkit.dgcat import ChainInstance
from ainfkit.ainfty import check_ainfty
from ainfkit.twisted import (
    check_twisted, twisted_hom_d, compose_twisted, TwistedMorphism, totalize,
    sign_twist_iso,
)
from ainfkit.modules import (
    AInftyModule, AInftyBimodule, ModuleMorphism, ModuleOps,
    module_bar, check_module, bar_of_module_morphism,
    differential_module_morphism, compose_module_morphisms,
    check_module_morphism, free_module, algebra_as_module, pi, mu,
    bar_as_module_complex, forget_module_complex, bar_lift_morphism,
    bar_resolution, bar_resolution_morphism, rho, module_as_complex,
    f_bullet_plus_bullet, diagonal_bimodule, free_bimodule, unit_bimodule,
    bimodule_bar, check_bimodule, bimodule_as_iterated, iterated_to_bimodule,
    iterated_collapse, BimoduleMorphism, RIGHT, LEFT,
)
from ainfkit.samples import (
    dual_numbers, matrix_algebra_2x2, zero_algebra, random_valid_algebra,
    strict_module, random_valid_module, transport_module, random_module_gauge,
    random_valid_bimodule,
)

F101 = GF(101)


def test_strict_module_bar_signs():
    inst = ChainInstance(QQ)
    A = dual_numbers(inst, cap=5)
    E = algebra_as_module(A, side=RIGHT)
    bar = module_bar(E, 4)
    m2 = A.op(2)
    p2 = E.op(2)
    # EA^2 -> EA map is Em_2 - p_2A
    expected = inst.tensor_morphisms(inst.identity(E.carrier), m2).add(
        inst.tensor_morphisms(p2, inst.identity(A.carrier)).neg())
    assert bar.alpha(-2, -1) == expected
    # EA -> E is p_2
    assert bar.alpha(-1, 0) == p2
    # EA^3 -> EA^2 is EAm_2 - Em_2A + p_2A^2
    EA = inst.tensor(E.carrier, A.carrier)
    expected3 = inst.tensor_morphisms(inst.identity(EA), m2) \
        .add(inst.tensor_morphisms(
            inst.tensor_morphisms(inst.identity(E.carrier), m2),
            inst.identity(A.carrier)).neg()) \
        .add(inst.tensor_morphisms(p2, inst.identity(A.power(2))))
    assert bar.alpha(-3, -2) == expected3


def test_left_module_bar_signs():
    inst = ChainInstance(QQ)
    A = dual_numbers(inst, cap=4)
    E = algebra_as_module(A, side=LEFT)
    bar = module_bar(E, 3)
    m2 = A.op(2)
    p2 = E.op(2)
    # A^2 E ... -> AE: Am_2... for left modules d from A^2 E? window objects:
    # A^i (x) E; differential A E -> E is p_2, A^2 E -> A E is Am_2... no:
    # formula: (-1)^{(i-1)(k+1)} [ sum_{j=1}^{i-1} (-1)^{jk} id^{i-j-1} (x)
    # m_{k+1} (x) id^j + id^{i-1} (x) p_{k+1} ]
    assert bar.alpha(-1, 0) == p2
    expected = inst.tensor_morphisms(m2, inst.identity(E.carrier)).neg().add(
        inst.tensor_morphisms(inst.identity(A.carrier), p2))
    # i=2, k=1: prefactor (-1)^{1*2} = +1; j=1 term (-1)^1 m_2 (x) id_E;
    # p-term id_A (x) p_2
    assert bar.alpha(-2, -1) == expected


def test_zero_action_module_over_zero_algebra():
    inst = ChainInstance(QQ)
    Z = zero_algebra(inst, {0: ["u"]}, cap=4)
    E = AInftyModule(Z, inst.object(make_module({0: ["e"]})), {}, side=RIGHT)
    bar = module_bar(E)
    assert not bar.maps
    assert check_module(E)


def test_free_module_bar_is_generator_tensored_algebra_bar():
    rng = random.Random(5)
    inst = ChainInstance(F101)
    A = random_valid_algebra(rng, inst, cap=5)
    gen = inst.object(make_module({0: ["g"], 1: ["h"]}))
    F = free_module(A, gen, side=RIGHT)
    barF = module_bar(F, 4)
    barA = A.bar_construction(4)
    for (ki, kj), alpha in barA.maps.items():
        lifted = inst.tensor_morphisms(inst.identity(gen), alpha)
        assert barF.alpha(ki, kj) == lifted
    assert check_module(F)


def test_random_modules_pass_checks_and_morphism_calculus():
    rng = random.Random(6)
    inst = ChainInstance(F101)
    A = random_valid_algebra(rng, inst, cap=4)
    for _ in range(3):
        E = random_valid_module(rng, A, side=RIGHT)
        assert check_module(E)
        idE = ModuleMorphism.identity(E)
        assert check_module_morphism(idE)
        assert differential_module_morphism(idE).is_zero()
        assert compose_module_morphisms(idE, idE) == idE
        # d^2 = 0 on a random non-closed morphism
        g = random_module_gauge(rng, E)
        if g:
            i = min(g)
            f = ModuleMorphism(E, E, {i: g[i]}, degree=i - 1 + inst.degree(g[i]))
            df = differential_module_morphism(f)
            assert differential_module_morphism(df).is_zero()


def test_odd_degree_morphism_bar_signs():
    from ainfkit.samples import graded_dual_numbers
    inst = ChainInstance(QQ)
    A = graded_dual_numbers(inst, cap=5)
    E = algebra_as_module(A, side=RIGHT)
    # degree 1 morphism with only f_1 nonzero: bar components
    # (-1)^{j(i-1)} f_1 (x) id^{i-1} = -f_1 A, +f_1, -f_1A^3 ...
    hs = inst.hom_space(E.carrier, E.carrier)
    assert hs.dim(1)
    f1 = hs.from_coords(1, {0: QQ.one})
    f = ModuleMorphism(E, E, {1: f1}, degree=1)
    bar = bar_of_module_morphism(f, 4)
    assert bar.component(0, 0) == f1
    assert bar.component(-1, -1) == inst.tensor_morphisms(f1, inst.identity(A.carrier)).neg()
    assert bar.component(-2, -2) == inst.tensor_morphisms(f1, inst.identity(A.power(2)))


def test_left_right_duality_of_sign_conventions():
    # the left-module conventions accept the mirrored strict module
    inst = ChainInstance(QQ)
    A = matrix_algebra_2x2(inst, cap=4)
    E = algebra_as_module(A, side=LEFT)
    assert check_module(E)


def test_pi_and_mu():
    rng = random.Random(8)
    inst = ChainInstance(F101)
    A = random_valid_algebra(rng, inst, cap=5)
    E = algebra_as_module(A, RIGHT)
    # pi_1 components are p_j
    p1 = pi(1, E)
    for jj, c in p1.components.items():
        assert c == E.ops[jj]
    # mu_2 on A over strict algebra = multiplication as strict module map
    inst2 = ChainInstance(QQ)
    B = dual_numbers(inst2, cap=4)
    m = mu(2, B)
    assert m.component(1) == B.op(2)
    # d(id: (E,p) -> (E,0)) = -pi_1 . id ; d(id: (E,0) -> (E,p)) = id . pi_1
    E0 = AInftyModule(A, E.carrier, {}, side=RIGHT, cap=A.cap)
    to0 = ModuleMorphism(E, E0, {1: inst.identity(E.carrier)})
    from0 = ModuleMorphism(E0, E, {1: inst.identity(E.carrier)})
    d_to0 = differential_module_morphism(to0)
    d_from0 = differential_module_morphism(from0)
    p1c = pi(1, E)
    # compare componentwise: -pi_1 components and +pi_1 components
    for i in range(2, A.cap):
        assert d_to0.component(i) == inst.neg(p1c.component(i))
        assert d_from0.component(i) == p1c.component(i)


def test_lifted_bar_forgets_to_plain_and_checks():
    rng = random.Random(9)
    inst = ChainInstance(F101)
    A = random_valid_algebra(rng, inst, cap=4)
    E = random_valid_module(rng, A, side=RIGHT)
    lifted = bar_as_module_complex(E, 4)
    plain = module_bar(E, 4)
    assert forget_module_complex(lifted) == plain
    rep = check_twisted(lifted)
    assert rep.ok
    # lifted bar of a morphism forgets to the plain bar of the morphism
    g = random_module_gauge(rng, E)
    f = ModuleMorphism(E, E, {**g, 1: inst.identity(E.carrier)})
    lf = bar_lift_morphism(f, 4)
    pf = bar_of_module_morphism(f, 4)
    for pair, c in lf.components.items():
        c1 = c.components.get(1)
        if c1 is None:
            continue
        assert c1 == pf.component(*pair)


def test_rho_square_identity():
    rng = random.Random(10)
    inst = ChainInstance(F101)
    A = random_valid_algebra(rng, inst, cap=4)
    E = random_valid_module(rng, A, side=RIGHT)
    F = transport_module(E, random_module_gauge(rng, E))
    # take a closed degree-0 morphism: the gauge from F to E
    rng2 = random.Random(10)
    A2 = random_valid_algebra(rng2, inst, cap=4)
    E2 = random_valid_module(rng2, A2, side=RIGHT)
    g2 = random_module_gauge(rng2, E2)
    F2 = transport_module(E2, g2)
    f = ModuleMorphism(F2, E2, {**g2, 1: inst.identity(E2.carrier)})
    assert check_module_morphism(f)
    # square: d(f_{.+.}) = f . rho - rho . (-1)^{deg f} barres(f), closed f,
    # exact on the window interior (guard 1)
    from ainfkit.modules import interior_is_zero
    rE = rho(F2, 4)
    rF = rho(E2, 4)
    lhs = twisted_hom_d(f_bullet_plus_bullet(f, 4))
    fone = TwistedMorphism(module_as_complex(F2), module_as_complex(E2), 0,
                           {(0, 0): f}, lower_shift=0)
    right1 = compose_twisted(fone, rE)
    br = bar_resolution_morphism(f, 4)   # already carries the (-1)^{deg f}
    right2 = compose_twisted(rF, br)
    diff = lhs.sub(right1.sub(right2))
    assert interior_is_zero(diff)


def test_bimodule_diagonal_and_free_pass():
    rng = random.Random(11)
    inst = ChainInstance(F101)
    A = random_valid_algebra(rng, inst, cap=4)
    B = random_valid_algebra(rng, inst, cap=4)
    D = diagonal_bimodule(A)
    assert check_bimodule(D)
    gen = inst.object(make_module({0: ["w"]}))
    Fr = free_bimodule(A, B, gen)
    assert check_bimodule(Fr)
    U = unit_bimodule(A, B, cap=4)
    assert check_bimodule(U)


def test_bimodule_fault_injection_localized():
    from ainfkit.samples import graded_dual_numbers
    inst = ChainInstance(QQ)
    A = graded_dual_numbers(inst, cap=4)
    D = diagonal_bimodule(A)
    ops = dict(D.ops)
    hs = inst.hom_space(D.obj(1, 1), D.carrier)
    pert = hs.from_coords(-1, {0: QQ.one})
    ops[(1, 1)] = ops[(1, 1)].add(pert) if (1, 1) in ops else pert
    bad = AInftyBimodule(A, A, D.carrier, ops, cap=4)
    rep = check_bimodule(bad)
    assert not rep.ok
    # violations reference cells whose differentials involve p_11
    for cell_pair in rep.locations():
        (p, q), (i, j) = cell_pair
        assert (p >= 1 and q >= 1) or (p + q) >= 2


def test_bimodule_iterated_round_trip_and_totalizations():
    rng = random.Random(12)
    inst = ChainInstance(F101)
    A = random_valid_algebra(rng, inst, cap=4)
    for _ in range(3):
        M = random_valid_bimodule(rng, A)
        assert check_bimodule(M)
        for mode in ("right-of-left", "left-of-right"):
            nested = bimodule_as_iterated(M, mode)
            back = iterated_to_bimodule(nested)
            assert back == M
        # cxcol . B^A . B^B equals the stored bimodule bar exactly
        nested = bimodule_as_iterated(M, "right-of-left")
        col = iterated_collapse(nested, 4)
        bb = bimodule_bar(M, 4)
        assert col == totalize(bb, "cols")
        # the mirror nesting agrees after the (-1)^{ij+kl} sign twist
        nested2 = bimodule_as_iterated(M, "left-of-right")
        row = iterated_collapse(nested2, 4)
        assert row == totalize(bb, "rows")
        # both totalizations pass the twisted check and are intertwined by
        # the diagonal (-1)^{ij} isomorphism
        assert check_twisted(totalize(bb, "rows")).ok
        assert check_twisted(totalize(bb, "cols")).ok
        iso = sign_twist_iso(bb)
        d_iso = twisted_hom_d(iso)
        assert d_iso.restrict_trusted().is_zero()


def test_strict_bimodule_is_strict_module_of_modules():
    inst = ChainInstance(QQ)
    A = dual_numbers(inst, cap=4)
    M = diagonal_bimodule(A)
    nested = bimodule_as_iterated(M, "right-of-left")
    assert all(i == 2 for i in nested.base.ops)
    assert list(nested.outer_ops) == [2]


def test_bimodule_morphism_calculus():
    rng = random.Random(13)
    inst = ChainInstance(F101)
    A = random_valid_algebra(rng, inst, cap=4)
    M = random_valid_bimodule(rng, A)
    idm = BimoduleMorphism.identity(M)
    from ainfkit.modules import (differential_bimodule_morphism,
                                 compose_bimodule_morphisms)
    assert differential_bimodule_morphism(idm).is_zero()
    assert compose_bimodule_morphisms(idm, idm) == idm
