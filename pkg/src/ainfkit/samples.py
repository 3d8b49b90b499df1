"""Concrete sample structures used by the test-suite, the bundled fixture
corpus and the demo scripts: strict algebras from multiplication tables,
gauge-perturbed A-infinity structures, cone carriers, random generators."""

import random

from .fields import QQ
from .graded import GradedMap, ComplexObject, make_module, cone_of_identity
from .dgcat import ChainInstance
from .ainfty import AInftyAlgebra, AlgebraMorphism, transport_structure, check_ainfty


def strict_algebra(instance, module_spec, table, cap=6, name="A", field=None,
                   differential=None):
    """Strict algebra in the chain instance from a multiplication table.

    module_spec: {degree: [labels]};
    table: {(a_label, b_label): {c_label: coeff}} meaning a*b = sum c.
    """
    field = field or instance.field
    m = make_module(module_spec)
    d = differential if differential is not None else GradedMap.zero(m, m, 1, field)
    A = instance.object(m, d)
    A2 = instance.tensor(A, A)
    entries = {}
    for (a, b), out in table.items():
        for c, v in out.items():
            entries[((a, b), (c,))] = entries.get(((a, b), (c,)), 0) + v
    m2 = GradedMap.from_entries(A2.module, m, 0, field,
                                {k: field.of(v) for k, v in entries.items()})
    return AInftyAlgebra(instance, A, {2: m2}, cap=cap, name=name)


def dual_numbers(instance, cap=6):
    """k[x]/(x^2) with x in degree 0; strictly unital."""
    return strict_algebra(
        instance, {0: ["e", "x"]},
        {("e", "e"): {"e": 1}, ("e", "x"): {"x": 1},
         ("x", "e"): {"x": 1}, ("x", "x"): {}},
        cap=cap)


def dual_numbers_unit(algebra):
    inst = algebra.instance
    return GradedMap.from_entries(inst.unit.module, algebra.carrier.module, 0,
                                  inst.field, {((), ("e",)): 1})


def matrix_algebra_2x2(instance, cap=6):
    """2x2 matrices in degree 0 with basis e11, e12, e21, e22."""
    labels = ["e11", "e12", "e21", "e22"]
    table = {}
    for a in labels:
        for b in labels:
            i, j = int(a[1]), int(a[2])
            k, l = int(b[1]), int(b[2])
            table[(a, b)] = {"e%d%d" % (i, l): 1} if j == k else {}
    return strict_algebra(instance, {0: labels}, table, cap=cap)


def matrix_unit_map(algebra):
    inst = algebra.instance
    return GradedMap.from_entries(inst.unit.module, algebra.carrier.module, 0,
                                  inst.field,
                                  {((), ("e11",)): 1, ((), ("e22",)): 1})


def graded_dual_numbers(instance, cap=6):
    """k[x]/(x^2) with |x| = 1: strictly unital, with degree-shifted m_2."""
    return strict_algebra(
        instance, {0: ["e"], 1: ["x"]},
        {("e", "e"): {"e": 1}, ("e", "x"): {"x": 1},
         ("x", "e"): {"x": 1}, ("x", "x"): {}},
        cap=cap)


def upper_triangular_2(instance, cap=6):
    labels = ["e11", "e12", "e22"]
    table = {}
    for a in labels:
        for b in labels:
            i, j = int(a[1]), int(a[2])
            k, l = int(b[1]), int(b[2])
            table[(a, b)] = {"e%d%d" % (i, l): 1} if j == k and "e%d%d" % (i, l) in labels else {}
    return strict_algebra(instance, {0: labels}, table, cap=cap)


def zero_algebra(instance, module_spec, cap=6):
    m = make_module(module_spec)
    return AInftyAlgebra(instance, instance.object(m), {}, cap=cap)


def random_gauge_components(rng, algebra, max_arity=None, density=0.35, scale=None):
    """Random higher components f_i: A^i -> A of degree 1 - i for a gauge
    transform (f_1 = id added by transport_structure)."""
    inst = algebra.instance
    out = {}
    for i in range(2, (max_arity or algebra.cap) + 1):
        hs = inst.hom_space(algebra.power(i), algebra.carrier)
        q = 1 - i
        if hs.dim(q) == 0:
            continue
        coords = {}
        for j in range(hs.dim(q)):
            if rng.random() < density:
                coords[j] = inst.field.of(rng.randrange(1, scale or 101))
        if coords:
            out[i] = hs.from_coords(q, coords)
    return out


def random_valid_algebra(rng, instance, dim=3, cap=5, degrees=(0, 1)):
    """A valid A-infinity algebra over the given instance produced by gauge
    transport of a strict associative algebra on a graded carrier."""
    base = rng.choice(["dual", "upper", "trunc3"])
    if base == "dual":
        A0 = strict_algebra(
            instance, {degrees[0]: ["e"], degrees[-1]: ["x"]},
            {("e", "e"): {"e": 1}, ("e", "x"): {"x": 1},
             ("x", "e"): {"x": 1}, ("x", "x"): {}}, cap=cap)
    elif base == "upper":
        A0 = strict_algebra(
            instance, {degrees[0]: ["e11", "e22"], degrees[-1]: ["e12"]},
            {("e11", "e11"): {"e11": 1}, ("e22", "e22"): {"e22": 1},
             ("e11", "e12"): {"e12": 1}, ("e12", "e22"): {"e12": 1},
             ("e11", "e22"): {}, ("e22", "e11"): {}, ("e12", "e12"): {},
             ("e22", "e12"): {}, ("e12", "e11"): {}}, cap=cap)
    else:
        A0 = strict_algebra(
            instance, {degrees[0]: ["e"], degrees[-1]: ["x"], 2 * degrees[-1]: ["y"]},
            {("e", "e"): {"e": 1}, ("e", "x"): {"x": 1}, ("x", "e"): {"x": 1},
             ("e", "y"): {"y": 1}, ("y", "e"): {"y": 1},
             ("x", "x"): {"y": 1}, ("x", "y"): {}, ("y", "x"): {}, ("y", "y"): {}},
            cap=cap)
    gauge = random_gauge_components(rng, A0)
    out = transport_structure(A0, gauge)
    assert check_ainfty(out)
    return out


def zero_differential_ainfty_F101(rng, instance, cap=5):
    """Valid (m_2, m_3, ...) on a zero-differential graded carrier, built by
    gauge transport; on such carriers perturbing m_4 breaks exactly the
    arities >= 5."""
    return random_valid_algebra(rng, instance, cap=cap, degrees=(0, 1))


# ---------------------------------------------------------------------------
# module and bimodule samples


def strict_module(algebra, module_spec, action, side="right", cap=None, name="E"):
    """Strict module over a strict chain algebra from an action table
    {(e_label, a_label): {f_label: coeff}} (right side; (a,e) keys for left)."""
    from .modules import AInftyModule
    inst = algebra.instance
    m = make_module(module_spec)
    E = inst.object(m)
    src = inst.tensor(E, algebra.carrier) if side == "right" \
        else inst.tensor(algebra.carrier, E)
    entries = {}
    for (x, y), out in action.items():
        for c, v in out.items():
            entries[((x, y), (c,))] = inst.field.of(v)
    p2 = GradedMap.from_entries(src.module, m, 0, inst.field, entries)
    return AInftyModule(algebra, E, {2: p2}, side=side, cap=cap or algebra.cap,
                        name=name)


def random_module_gauge(rng, module, density=0.35):
    """Random higher components g_i (i >= 2) of a module gauge (g_1 = id)."""
    from .modules import ModuleOps
    inst = module.instance
    out = {}
    for i in range(2, module.cap + 1):
        hs = inst.hom_space(module.obj(i - 1), module.carrier)
        q = 1 - i
        if hs.dim(q) == 0:
            continue
        coords = {j: inst.field.of(rng.randrange(1, 101))
                  for j in range(hs.dim(q)) if rng.random() < density}
        if coords:
            out[i] = hs.from_coords(q, coords)
    return out


def transport_module(module, gauge_components):
    """Transport a module structure along a module gauge with g_1 = id:
    conjugate the module bar as in ainfty.transport_structure."""
    from .modules import (AInftyModule, ModuleMorphism, module_bar,
                          bar_of_module_morphism)
    from .ainfty import invert_unitriangular
    from .twisted import TwistedComplex, TwistedMorphism, twisted_hom_d
    inst = module.instance
    W = module.cap
    gauge = ModuleMorphism(module, module,
                           {**gauge_components, 1: inst.identity(module.carrier)})
    T = module_bar(module, W)
    T0 = TwistedComplex(inst, T.slots, {}, truncated_below=True, lower_shift=1)
    U = TwistedMorphism(T0, T, 0, bar_of_module_morphism(gauge, W).components,
                        lower_shift=0)
    V = twisted_hom_d(U)
    Uinv = invert_unitriangular(TwistedMorphism(T0, T0, 0, U.components,
                                                lower_shift=0)).components
    new_maps = {}
    for (ki, km), vc in V.components.items():
        for (km2, kj), ic in Uinv.items():
            if km2 != km:
                continue
            term = inst.compose(ic, vc)
            pair = (ki, kj)
            new_maps[pair] = inst.add(new_maps[pair], term) if pair in new_maps else term
    ops = {}
    for i in range(1, W):
        c = new_maps.get((-i, 0))
        if c is not None and not inst.is_zero(c):
            ops[i + 1] = c
    out = AInftyModule(module.algebra, module.carrier, ops, side=module.side,
                       cap=module.cap, name=module.name)
    rebuilt = module_bar(out, W)
    for pair, c in new_maps.items():
        d = rebuilt.maps.get(pair)
        if d is None:
            assert inst.is_zero(c), "module transport failed"
        else:
            assert inst.is_zero(inst.add(c, inst.neg(d))), "module transport failed"
    return out


def random_valid_module(rng, algebra, side="right", carrier_spec=None):
    """Valid module over `algebra`: a transported free/zero-action module."""
    from .modules import free_module, algebra_as_module, AInftyModule
    inst = algebra.instance
    kind = rng.choice(["free", "self", "zero"])
    if kind == "free":
        gen = inst.object(make_module(carrier_spec or {0: ["g0"], 1: ["g1"]}))
        base = free_module(algebra, gen, side=side)
    elif kind == "self":
        base = algebra_as_module(algebra, side=side)
    else:
        gen = inst.object(make_module(carrier_spec or {0: ["z0"]}))
        base = AInftyModule(algebra, gen, {}, side=side, cap=algebra.cap)
    return transport_module(base, random_module_gauge(rng, base))


def random_bimodule_gauge(rng, bimodule, density=0.3):
    inst = bimodule.instance
    out = {}
    for l in range(0, bimodule.cap):
        for m in range(0, bimodule.cap - l):
            if l + m == 0:
                continue
            hs = inst.hom_space(bimodule.obj(l, m), bimodule.carrier)
            q = -l - m
            if hs.dim(q) == 0:
                continue
            coords = {j: inst.field.of(rng.randrange(1, 101))
                      for j in range(hs.dim(q)) if rng.random() < density}
            if coords:
                out[(l, m)] = hs.from_coords(q, coords)
    return out


def transport_bimodule(bimodule, gauge_components):
    from .modules import (AInftyBimodule, BimoduleMorphism, bimodule_bar,
                          bar_of_bimodule_morphism)
    from .ainfty import invert_unitriangular
    from .twisted import TwistedComplex, TwistedMorphism, twisted_hom_d
    inst = bimodule.instance
    W = bimodule.cap
    gauge = BimoduleMorphism(bimodule, bimodule,
                             {**gauge_components,
                              (0, 0): inst.identity(bimodule.carrier)})
    T = bimodule_bar(bimodule, W).collapsed
    T0 = TwistedComplex(inst, T.slots, {}, truncated_below=True, lower_shift=1)
    U = TwistedMorphism(T0, T, 0, bar_of_bimodule_morphism(gauge, W).components,
                        lower_shift=0)
    V = twisted_hom_d(U)
    Uinv = invert_unitriangular(TwistedMorphism(T0, T0, 0, U.components,
                                                lower_shift=0)).components
    new_maps = {}
    for (ki, km), vc in V.components.items():
        for (km2, kj), ic in Uinv.items():
            if km2 != km:
                continue
            term = inst.compose(ic, vc)
            pair = (ki, kj)
            new_maps[pair] = inst.add(new_maps[pair], term) if pair in new_maps else term
    ops = {}
    for (cell, tgt), c in new_maps.items():
        if tgt == (0, 0) and not inst.is_zero(c):
            ops[cell] = c
    out = AInftyBimodule(bimodule.A, bimodule.B, bimodule.carrier, ops,
                         cap=bimodule.cap, name=bimodule.name)
    rebuilt = bimodule_bar(out, W).collapsed
    for pair, c in new_maps.items():
        d = rebuilt.maps.get(pair)
        if d is None:
            assert inst.is_zero(c), "bimodule transport failed at %s" % (pair,)
        else:
            assert inst.is_zero(inst.add(c, inst.neg(d))), \
                "bimodule transport failed at %s" % (pair,)
    return out


def random_valid_bimodule(rng, A, B=None):
    from .modules import diagonal_bimodule, free_bimodule, AInftyBimodule
    inst = A.instance
    B = B or A
    kind = rng.choice(["diag", "free", "zero"])
    if kind == "diag" and A is B:
        base = diagonal_bimodule(A)
    elif kind == "free":
        gen = inst.object(make_module({0: ["w"]}))
        base = free_bimodule(A, B, gen)
    else:
        gen = inst.object(make_module({0: ["z"]}))
        base = AInftyBimodule(A, B, gen, {}, cap=min(A.cap, B.cap))
    return transport_bimodule(base, random_bimodule_gauge(rng, base))
