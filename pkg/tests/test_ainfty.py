import random

import pytest

from ainfkit.fields import QQ, GF
from ainfkit.graded import GradedMap, make_module
from ainfkit.dgcat import ChainInstance
from ainfkit.ainfty import (
    AInftyAlgebra, AlgebraMorphism, bar_of_morphism, check_ainfty,
    cross_check_bar, check_morphism, differential_morphism, compose_morphisms,
    is_quasi_iso, transport_structure, morphism_bar_sign,
)
from ainfkit.twisted import check_twisted, twisted_hom_d, compose_twisted, TwistedMorphism
from ainfkit.samples import (
    dual_numbers, matrix_algebra_2x2, zero_algebra, random_valid_algebra,
    random_gauge_components,
)

F101 = GF(101)


def two_sided(inst, algebra, left_power, op, right_power):
    """id^{left} (x) op (x) id^{right}."""
    t = op
    if left_power:
        t = inst.tensor_morphisms(inst.identity(algebra.power(left_power)), t)
    if right_power:
        t = inst.tensor_morphisms(t, inst.identity(algebra.power(right_power)))
    return t


def random_algebra_with_m3(rng, inst, cap=5):
    while True:
        a = random_valid_algebra(rng, inst, cap=cap)
        if any(i >= 3 for i in a.ops):
            return a


def test_bar_signs_match_displayed_diagrams():
    """Ground truth: one-step differentials Am_2 - m_2A, A^2m_2 - Am_2A + m_2A^2,
    A^3m_2 - A^2m_2A + Am_2A^2 - m_2A^3; two-step -Am_3 - m_3A and
    A^2m_3 + Am_3A + m_3A^2; three-step Am_4 - m_4A; and m_i on the edge."""
    rng = random.Random(42)
    inst = ChainInstance(F101)
    a = random_algebra_with_m3(rng, inst, cap=5)
    bar = a.bar_construction(5)
    m2, m3 = a.op(2), a.op(3)
    m4, m5 = a.op(4), a.op(5)
    z = lambda i: inst.zero_morphism(a.power(i), a.carrier, 2 - i)
    if m4 is None:
        m4 = z(4)
    if m5 is None:
        m5 = z(5)
    E = lambda l, op, r: two_sided(inst, a, l, op, r)
    # k = 1 row
    assert bar.alpha(-1, 0) == m2
    assert bar.alpha(-2, -1) == E(1, m2, 0).add(E(0, m2, 1).neg())
    assert bar.alpha(-3, -2) == E(2, m2, 0).add(E(1, m2, 1).neg()).add(E(0, m2, 2))
    assert bar.alpha(-4, -3) == E(3, m2, 0).add(E(2, m2, 1).neg()) \
        .add(E(1, m2, 2)).add(E(0, m2, 3).neg())
    # k = 2
    if m3 is not None:
        assert bar.alpha(-2, 0) == m3
        assert bar.alpha(-3, -1) == E(1, m3, 0).add(E(0, m3, 1)).neg()
        assert bar.alpha(-4, -2) == E(2, m3, 0).add(E(1, m3, 1)).add(E(0, m3, 2))
    # k = 3, 4
    assert bar.alpha(-3, 0) == m4
    assert bar.alpha(-4, -1) == E(1, m4, 0).add(E(0, m4, 1).neg())
    assert bar.alpha(-4, 0) == m5


def test_strict_associative_passes_and_zero_algebra():
    inst = ChainInstance(QQ)
    for a in (dual_numbers(inst, cap=6), matrix_algebra_2x2(inst, cap=4)):
        assert check_ainfty(a)
        assert cross_check_bar(a)
    z = zero_algebra(inst, {0: ["u"], 1: ["v"]}, cap=4)
    assert check_ainfty(z)
    bar = z.bar_construction()
    assert not bar.maps


def test_i3_identity_is_associativity():
    inst = ChainInstance(QQ)
    a = dual_numbers(inst, cap=3)
    m2 = a.op(2)
    # d m_3 + m_2 . (id (x) m_2) - m_2 . (m_2 (x) id) = 0 at signs (1,2,0),(0,2,1)
    lhs = a.identity_residual(3)
    manual = inst.compose(m2, two_sided(inst, a, 1, m2, 0)).sub(
        inst.compose(m2, two_sided(inst, a, 0, m2, 1)))
    assert lhs == manual.neg() or lhs == manual  # sign fixed below
    # the (j,k,l)=(1,2,0) term has sign (-1)^{1*2+0} = +, (0,2,1): (-1)^{0+1} = -
    assert lhs == inst.compose(m2, two_sided(inst, a, 1, m2, 0)).sub(
        inst.compose(m2, two_sided(inst, a, 0, m2, 1)))


def test_random_generated_algebras_pass_and_prop_equivalence():
    rng = random.Random(101)
    inst = ChainInstance(F101)
    for _ in range(5):
        a = random_valid_algebra(rng, inst, cap=5)
        assert check_ainfty(a)
        rep = cross_check_bar(a)
        assert rep.ok and not rep.untrusted


def test_fault_injection_detected_by_both_checks():
    rng = random.Random(7)
    inst = ChainInstance(F101)
    a = random_algebra_with_m3(rng, inst, cap=5)
    # perturb one entry of m_3
    m3 = a.op(3)
    hs = inst.hom_space(a.power(3), a.carrier)
    pert = hs.from_coords(-1, {0: F101.of(1)})
    ops = dict(a.ops)
    ops[3] = m3.add(pert) if m3 is not None else pert
    bad = AInftyAlgebra(inst, a.carrier, ops, cap=5)
    r1 = check_ainfty(bad)
    r2 = cross_check_bar(bad)
    assert not r1.ok and not r2.ok
    # locations consistent: every failing arity i appears among failing bar
    # cells as a source power
    bar_powers = {1 - ki for ((ki, kj), _) in r2.violations}
    for i in r1.locations():
        assert i in bar_powers


def test_fault_in_m4_breaks_exactly_higher_identities_on_zero_differential():
    rng = random.Random(13)
    inst = ChainInstance(F101)
    for _ in range(10):
        a = random_valid_algebra(rng, inst, cap=6)
        if not a.carrier.differential.is_zero():
            continue
        hs = inst.hom_space(a.power(4), a.carrier)
        if hs.dim(-2) == 0:
            continue
        pert = hs.from_coords(-2, {0: F101.of(1)})
        ops = dict(a.ops)
        ops[4] = ops[4].add(pert) if 4 in ops else pert
        bad = AInftyAlgebra(inst, a.carrier, ops, cap=6)
        locs = check_ainfty(bad).locations()
        assert locs and all(i >= 5 for i in locs)
        return
    pytest.skip("no zero-differential sample drawn")


def test_morphism_bar_sign_table():
    assert morphism_bar_sign((1, 1)) == 1
    assert morphism_bar_sign((1, 2)) == -1
    assert morphism_bar_sign((2, 1)) == 1
    assert morphism_bar_sign((1, 3)) == 1
    assert morphism_bar_sign((2, 2)) == 1
    assert morphism_bar_sign((3, 1)) == 1
    assert morphism_bar_sign((1, 1, 1)) == 1
    assert morphism_bar_sign((1, 1, 2)) == 1
    assert morphism_bar_sign((1, 2, 1)) == -1
    assert morphism_bar_sign((2, 1, 1)) == 1


def test_morphism_bar_components_match_displayed_diagram():
    rng = random.Random(21)
    inst = ChainInstance(F101)
    a = random_valid_algebra(rng, inst, cap=4)
    comps = random_gauge_components(rng, a, max_arity=4)
    f = AlgebraMorphism(a, a, {**comps, 1: inst.identity(a.carrier)})
    bar = bar_of_morphism(f)
    f1, f2 = f.component(1), f.component(2)
    f3 = f.component(3)
    T = inst.tensor_morphisms
    # A^2 -> B^2 : f_1 f_1 ; A^3 -> B^2 : -f_1f_2 + f_2f_1
    assert bar.component(-1, -1) == T(f1, f1)
    assert bar.component(-2, -1) == T(f1, f2).neg().add(T(f2, f1))
    # A^4 -> B^2 : f_1f_3 + f_2f_2 + f_3f_1
    assert bar.component(-3, -1) == T(f1, f3).add(T(f2, f2)).add(T(f3, f1))
    # diagonal: f_1^{(x) i}
    assert bar.component(-2, -2) == T(T(f1, f1), f1)
    # strict morphism: only diagonal
    g = AlgebraMorphism(a, a, {1: inst.identity(a.carrier)})
    barg = bar_of_morphism(g)
    assert set(barg.components) == {(p, p) for p in barg.source.keys}


def test_identity_morphism_closed_and_units():
    rng = random.Random(31)
    inst = ChainInstance(F101)
    a = random_valid_algebra(rng, inst, cap=4)
    ida = AlgebraMorphism.identity(a)
    assert check_morphism(ida)
    assert bar_of_morphism(ida) == TwistedMorphism.identity(a.bar_construction(4))
    assert differential_morphism(ida).is_zero()


def test_gauge_transport_yields_closed_iso_and_composition_associative():
    rng = random.Random(41)
    inst = ChainInstance(F101)
    a = random_valid_algebra(rng, inst, cap=5)
    b = transport_structure(a, random_gauge_components(rng, a))
    # the gauge is a closed morphism b -> a
    comps = {**random_gauge_components(rng, a), 1: inst.identity(a.carrier)}
    # note: transport built so that gauge: (A, m') -> (A, m) is closed; rebuild it
    gauge = AlgebraMorphism(b, a, comps)
    # closedness can fail for a *different* random gauge; use the same one
    # that produced b:
    rng2 = random.Random(41)
    a2 = random_valid_algebra(rng2, inst, cap=5)
    g2 = random_gauge_components(rng2, a2)
    b2 = transport_structure(a2, g2)
    gauge = AlgebraMorphism(b2, a2, {**g2, 1: inst.identity(a2.carrier)})
    assert check_morphism(gauge)
    # composition associativity on random closed morphisms
    h = compose_morphisms(gauge, AlgebraMorphism.identity(b2))
    assert h == gauge
    k1 = compose_morphisms(compose_morphisms(gauge, AlgebraMorphism.identity(b2)),
                           AlgebraMorphism.identity(b2))
    k2 = compose_morphisms(gauge, compose_morphisms(AlgebraMorphism.identity(b2),
                                                    AlgebraMorphism.identity(b2)))
    assert k1 == k2


def test_bar_functoriality_and_d_squared():
    rng = random.Random(51)
    inst = ChainInstance(F101)
    a = random_valid_algebra(rng, inst, cap=4)
    g = random_gauge_components(rng, a)
    b = transport_structure(a, g)
    f = AlgebraMorphism(b, a, {**g, 1: inst.identity(a.carrier)})
    ff = compose_morphisms(f, AlgebraMorphism.identity(b))
    assert bar_of_morphism(ff) == compose_twisted(bar_of_morphism(f),
                                                  bar_of_morphism(AlgebraMorphism.identity(b)))
    # d^2 = 0 through the bar calculus, on a non-closed random morphism
    comps = random_gauge_components(rng, a, max_arity=4)
    if comps:
        nc = AlgebraMorphism(a, a, comps | {})
        d1 = differential_morphism(nc)
        d2 = differential_morphism(d1)
        assert d2.is_zero()
        # check_morphism(f) ok iff differential_morphism(f) = 0
        assert (not check_morphism(nc).ok) == (not d1.is_zero())


def test_quasi_iso():
    rng = random.Random(61)
    inst = ChainInstance(F101)
    a = random_valid_algebra(rng, inst, cap=4)
    ida = AlgebraMorphism.identity(a)
    assert is_quasi_iso(ida)
    z = zero_algebra(inst, {0: ["u"]}, cap=4)
    f0 = AlgebraMorphism(z, z, {}, degree=0)
    assert not is_quasi_iso(f0)
