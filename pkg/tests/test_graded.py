import random

import pytest

from ainfkit.fields import QQ, GF
from ainfkit.graded import (
    GradedModule, GradedMap, ComplexObject, SparseMatrix,
    UNIT_MODULE, make_module, tensor_modules, tensor_maps,
    shift_module, shift_complex, cohomology, contracting_homotopy,
    cone_of_identity, NotContractible, rank, kernel_basis, solve,
)

F101 = GF(101)


def random_map(rng, src, dst, degree, field, density=0.6):
    f = GradedMap(src, dst, degree, field)
    for n in src.degrees():
        if dst.dim(n + degree) == 0:
            continue
        blk = f.block(n)
        for j in range(src.dim(n)):
            for i in range(dst.dim(n + degree)):
                if rng.random() < density:
                    blk.add_to(i, j, field.of(rng.randrange(1, 101)))
    f._prune()
    return f


def random_module(rng, degrees, maxdim, tag):
    comps = {}
    for n in degrees:
        dim = rng.randrange(0, maxdim + 1)
        comps[n] = ["%s%d_%d" % (tag, n, i) for i in range(dim)]
    return make_module({n: ls for n, ls in comps.items() if ls})


def test_unit_tensor_unit():
    assert tensor_modules(UNIT_MODULE, UNIT_MODULE) == UNIT_MODULE


def test_shift_additivity_of_degrees():
    a = make_module({0: ["a"], -1: ["b"]})   # k (+) k[-1]
    b = make_module({-1: ["c"]})             # k[-1]
    t = tensor_modules(a, b)
    assert t.dim(-1) == 1 and t.dim(-2) == 1 and t.total_dim() == 2


def test_tensor_dims_brute_force():
    rng = random.Random(1)
    a = random_module(rng, [-1, 0, 2], 3, "a")
    b = random_module(rng, [0, 1], 4, "b")
    t = tensor_modules(a, b)
    # brute-force enumeration oracle
    for n in range(-3, 5):
        expected = sorted(x + y
                          for i in a.degrees() for x in a.labels(i)
                          for y in b.labels(n - i))
        assert list(t.labels(n)) == expected


def test_tensor_strict_associativity_and_unit():
    rng = random.Random(2)
    a = random_module(rng, [0, 1], 2, "a")
    b = random_module(rng, [-1, 0], 2, "b")
    c = random_module(rng, [0, 2], 2, "c")
    assert tensor_modules(tensor_modules(a, b), c) == tensor_modules(a, tensor_modules(b, c))
    assert tensor_modules(a, UNIT_MODULE) == a
    assert tensor_modules(UNIT_MODULE, a) == a


def test_tensor_identity_no_sign():
    rng = random.Random(3)
    a = random_module(rng, [0, 1], 3, "a")
    b = random_module(rng, [0, 1, 2], 3, "b")
    g = random_map(rng, b, b, 1, F101)
    ida = GradedMap.identity(a, F101)
    t = tensor_maps(ida, g)
    # id (x) g acts as (-1)^{|g| |x|} x (x) g(y); on degree-0 x no sign at all
    for n, sl, dl, v in t.entries():
        la, lb = sl[:1], sl[1:]
        assert dl[:1] == la
        na = next(m for m in a.degrees() if la in a.labels(m))
        nb = next(m for m in b.degrees() if lb in b.labels(m))
        gval = g.block(nb).get(b.index(nb + 1, dl[1:]), b.index(nb, lb))
        expect = F101.neg(gval) if (g.degree % 2 and na % 2) else gval
        assert v == expect
        if na == 0:
            assert v == gval


def test_koszul_sign_on_odd_block():
    # |g| = 1 and x in degree 1 gives sign -1 on that block
    a = make_module({1: ["x"]})
    b = make_module({0: ["y"]})
    f = GradedMap.identity(a, QQ)
    g = GradedMap.from_entries(b, b, 1, QQ, {})
    b2 = make_module({0: ["y"], 1: ["z"]})
    g = GradedMap.from_entries(b2, b2, 1, QQ, {(("y",), ("z",)): 1})
    t = tensor_maps(f, g)
    src = tensor_modules(a, b2)
    dst = src
    n = 1
    val = t.block(n).get(dst.index(2, ("x", "z")), src.index(1, ("x", "y")))
    assert val == -1


def test_koszul_interchange_matrix_oracle():
    # (f (x) id) . (id (x) g) = (-1)^{|f||g|} (id (x) g) . (f (x) id)
    rng = random.Random(4)
    for trial in range(6):
        a = random_module(rng, [0, 1], 2, "a")
        b = random_module(rng, [0, 1], 2, "b")
        if a.is_zero() or b.is_zero():
            continue
        df, dg = rng.choice([1, -1]), rng.choice([1, -1])
        f = random_map(rng, a, a, df, F101)
        g = random_map(rng, b, b, dg, F101)
        ida = GradedMap.identity(a, F101)
        idb = GradedMap.identity(b, F101)
        lhs = tensor_maps(f, idb).compose(tensor_maps(ida, g))
        rhs = tensor_maps(ida, g).compose(tensor_maps(f, idb))
        if (df * dg) % 2:
            rhs = rhs.neg()
        assert lhs == rhs


def test_composition_associative_and_leibniz():
    rng = random.Random(5)
    a = random_module(rng, [0, 1, 2], 3, "a")
    f = random_map(rng, a, a, 1, F101)
    g = random_map(rng, a, a, -1, F101)
    h = random_map(rng, a, a, 1, F101)
    assert f.compose(g).compose(h) == f.compose(g.compose(h))
    # d(f.g) = df.g + (-1)^{|f|} f.dg with df = d.f - (-1)^{|f|} f.d
    d = random_map(rng, a, a, 1, F101)

    def diff(x):
        out = d.compose(x)
        t = x.compose(d)
        return out.sub(t) if x.degree % 2 == 0 else out.add(t)

    fg = f.compose(g)
    lhs = diff(fg)
    rhs = diff(f).compose(g).add(f.compose(diff(g)).scale(F101.of(-1)))
    assert lhs == rhs


def test_shift_examples():
    a = make_module({0: ["u"], 1: ["v"]})
    d = GradedMap.from_entries(a, a, 1, QQ, {(("u",), ("v",)): 1})
    c = ComplexObject(a, d)
    assert shift_complex(c, 0).module == a
    assert shift_complex(shift_complex(c, 1), -1) == c
    s = shift_complex(c, 1)
    # d on a[1] equals -d on a (matrix comparison)
    assert s.differential.block(-1).get(0, 0) == -1


def test_cohomology_zero_differential():
    a = make_module({0: ["u", "w"], 3: ["v"]})
    c = ComplexObject(a, GradedMap.zero(a, a, 1, QQ))
    assert cohomology(c) == {0: 2, 3: 1}


def test_cohomology_cone_contractible():
    v = make_module({0: ["x"], 1: ["y"], 2: ["z"]})
    c = cone_of_identity(v, QQ)
    assert cohomology(c) == {}
    h = contracting_homotopy(c)
    d = c.differential
    assert d.compose(h).add(h.compose(d)) == GradedMap.identity(c.module, QQ)


def test_cohomology_rank_nullity_transpose_oracle():
    rng = random.Random(7)
    for _ in range(5):
        a = random_module(rng, [0, 1, 2], 4, "a")
        if a.is_zero():
            continue
        # build a valid differential: d = s . t through a middle space forces d^2=0
        f = random_map(rng, a, a, 1, F101, density=0.4)
        # make d^2 = 0 by zeroing: use d = f with f.f subtracted is hard; use
        # upper structure: d nonzero only from even degrees
        d = GradedMap(a, a, 1, F101)
        blk = f.blocks.get(0)
        if blk is not None:
            d.blocks[0] = blk
        c = ComplexObject(a, d)
        dims = cohomology(c)
        # oracle: recompute ranks from transposed matrices
        for n in a.degrees():
            dn = d.blocks.get(n, SparseMatrix(a.dim(n + 1), a.dim(n), F101))
            dp = d.blocks.get(n - 1, SparseMatrix(a.dim(n), a.dim(n - 1), F101))
            hn = a.dim(n) - rank(dn.transpose()) - rank(dp.transpose())
            assert dims.get(n, 0) == hn


def test_contracting_homotopy_random_acyclic_F101():
    rng = random.Random(8)
    for _ in range(5):
        v = random_module(rng, [-1, 0, 1], 4, "v")
        if v.is_zero():
            continue
        c = cone_of_identity(v, F101)
        h = contracting_homotopy(c)
        d = c.differential
        assert d.compose(h).add(h.compose(d)) == GradedMap.identity(c.module, F101)


def test_not_contractible():
    a = make_module({0: ["u"]})
    c = ComplexObject(a, GradedMap.zero(a, a, 1, QQ))
    with pytest.raises(NotContractible):
        contracting_homotopy(c)


def test_linear_algebra_basics():
    m = SparseMatrix(2, 3, QQ)
    m.set(0, 0, QQ.of(1))
    m.set(0, 1, QQ.of(2))
    m.set(1, 2, QQ.of(1))
    assert rank(m) == 2
    ker = kernel_basis(m)
    assert len(ker) == 1
    for v in ker:
        out = {}
        for j, val in v.items():
            for i, jj, w in m.entries():
                if jj == j:
                    out[i] = out.get(i, QQ.zero) + w * val
        assert all(x == 0 for x in out.values())
    x = solve(m, {0: QQ.of(4), 1: QQ.of(5)})
    assert x == {0: QQ.of(4), 2: QQ.of(5)}
