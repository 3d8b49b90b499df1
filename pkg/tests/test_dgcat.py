import random

from ainfkit.fields import QQ, GF
from ainfkit.graded import GradedMap, ComplexObject, make_module, cohomology
from ainfkit.dgcat import (
    ChainInstance, EndofunctorInstance, IndexedBimodInstance, IndexedMorphism,
    build_finite_dg_category, DGFunctor, NaturalTransformation,
)

F101 = GF(101)


def random_chain_object(rng, inst, degrees, maxdim, tag):
    comps = {}
    for n in degrees:
        k = rng.randrange(0, maxdim + 1)
        if k:
            comps[n] = ["%s%d_%d" % (tag, n, i) for i in range(k)]
    m = make_module(comps)
    # possibly a nonzero differential built as a square-zero upper map
    d = GradedMap(m, m, 1, inst.field)
    if len(degrees) >= 2:
        n = degrees[0]
        for j in range(m.dim(n)):
            for i in range(m.dim(n + 1)):
                if rng.random() < 0.4:
                    d.block(n).add_to(i, j, inst.field.of(rng.randrange(1, 101)))
    d._prune()
    return ComplexObject(m, d, check=False)


def random_chain_morphism(rng, inst, x, y, degree):
    hs = inst.hom_space(x, y)
    if hs.dim(degree) == 0:
        return inst.zero_morphism(x, y, degree)
    coords = {i: inst.field.of(rng.randrange(0, 101))
              for i in range(hs.dim(degree)) if rng.random() < 0.7}
    return hs.from_coords(degree, coords)


def test_chain_leibniz_for_compose_and_tensor():
    rng = random.Random(11)
    inst = ChainInstance(F101)
    for _ in range(4):
        x = random_chain_object(rng, inst, [0, 1], 2, "x")
        y = random_chain_object(rng, inst, [0, 1], 2, "y")
        z = random_chain_object(rng, inst, [-1, 0], 2, "z")
        f = random_chain_morphism(rng, inst, x, y, rng.choice([0, 1, -1]))
        g = random_chain_morphism(rng, inst, y, z, rng.choice([0, 1, -1]))
        gf = inst.compose(g, f)
        lhs = inst.differential(gf, x, z)
        rhs = inst.add(inst.compose(inst.differential(g, y, z), f),
                       inst.scale((-1) ** (g.degree % 2), inst.compose(g, inst.differential(f, x, y))))
        assert lhs == rhs
        # d(f (x) g) = df (x) g + (-1)^{|f|} f (x) dg
        xt = inst.tensor(x, y)
        zt = inst.tensor(y, z)
        t = inst.tensor_morphisms(f, g)
        lhs = inst.differential(t, inst.tensor(x, y), inst.tensor(y, z))
        rhs = inst.add(inst.tensor_morphisms(inst.differential(f, x, y), g),
                       inst.scale((-1) ** (f.degree % 2),
                                  inst.tensor_morphisms(f, inst.differential(g, y, z))))
        assert lhs == rhs


def test_chain_whisker_unit_and_hom():
    inst = ChainInstance(QQ)
    x = inst.object(make_module({0: ["a"], 1: ["b"]}))
    f = inst.hom_space(x, x).from_coords(1, {0: QQ.one})
    assert inst.whisker_left(inst.unit, f) == f
    assert inst.whisker_right(f, inst.unit) == f
    homuu = inst.hom_space(inst.unit, inst.unit).complex()
    assert cohomology(homuu) == {0: 1}


def two_object_dg_category(field):
    """A_2 quiver: objects x, y; a single closed degree-0 arrow f: x -> y."""
    return build_finite_dg_category(
        field,
        ["x", "y"],
        {("x", "x"): {"ex": 0}, ("y", "y"): {"ey": 0}, ("x", "y"): {"f": 0}},
        {"x": "ex", "y": "ey"},
    )


def keps_category(field):
    """One object, endomorphisms k[eps]/eps^2 with |eps| = 1, d = 0."""
    return build_finite_dg_category(
        field,
        ["*"],
        {("*", "*"): {"e": 0, "eps": 1}},
        {"*": "e"},
        comp={("eps", "eps"): {}},
    )


def test_finite_dg_category_checks():
    two_object_dg_category(QQ)
    keps_category(QQ)


def test_endofunctor_instance_eps_hom_is_2dim():
    cat = keps_category(QQ)
    inst = EndofunctorInstance(cat)
    idf = inst.unit
    hs = inst.hom_space(idf, idf)
    assert hs.dim(0) == 1 and hs.dim(1) == 1
    assert sum(hs.dim(q) for q in hs.degrees()) == 2


def test_endofunctor_interchange_and_leibniz():
    cat = keps_category(QQ)
    inst = EndofunctorInstance(cat)
    idf = inst.unit
    hs = inst.hom_space(idf, idf)
    eps = hs.basis(1)[0]
    one = inst.identity(idf)
    # interchange with odd degrees: (f (x) id).(id (x) g) = (-1)^{|f||g|}(id (x) g).(f (x) id)
    lhs = inst.compose(inst.tensor_morphisms(eps, one), inst.tensor_morphisms(one, eps))
    rhs = inst.scale(-1, inst.compose(inst.tensor_morphisms(one, eps),
                                      inst.tensor_morphisms(eps, one)))
    assert lhs == rhs
    # whisker = horizontal composition against direct definition
    w = inst.whisker_left(idf, eps)
    assert w.components["*"] == eps.components["*"]


def test_indexed_unit_and_singleton_matches_chain():
    rng = random.Random(13)
    U = ["u"]
    inst = IndexedBimodInstance(U, F101)
    chain = ChainInstance(F101)
    x = random_chain_object(rng, chain, [0, 1], 3, "x")
    ix = inst.object({("u", "u"): x})
    assert inst.tensor(ix, inst.unit) == ix
    assert inst.tensor(inst.unit, ix) == ix
    # tensor through the indexed instance equals the chain tensor
    xx = inst.tensor(ix, ix)
    cc = chain.tensor(x, x)
    assert xx.cells[("u", "u")] == cc
    f = random_chain_morphism(rng, chain, x, x, 1)
    fm = IndexedMorphism(ix, ix, 1, {("u", "u"): f})
    fi = inst.tensor_morphisms(fm, fm)
    assert fi.maps[("u", "u")] == chain.tensor_morphisms(f, f)


def test_indexed_two_objects_hom_product():
    inst = IndexedBimodInstance(["u", "v"], QQ)
    chain = ChainInstance(QQ)
    a = chain.object(make_module({0: ["a"]}))
    b = chain.object(make_module({1: ["b"]}))
    x = inst.object({("u", "v"): a, ("v", "v"): b})
    hs = inst.hom_space(x, x)
    # product of componentwise hom complexes
    assert hs.dim(0) == 2  # a->a and b->b
    d = inst.differential(inst.identity(x), x, x)
    assert d.is_zero()
