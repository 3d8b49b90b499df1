"""The monoidal DG category interface and its three concrete instances.

An *instance* is any object providing the protocol used by the twisted/bar
machinery:

    field, unit, tensor(x,y), power(x,n), identity(x), zero_morphism(x,y,q),
    add(f,g), scale(c,f), neg(f), compose(g,f), tensor_morphisms(f,g),
    differential(f,x,y), degree(f), is_zero(f),
    whisker_left(x,f), whisker_right(f,x), hom_space(x,y)

`differential` takes the endpoint objects explicitly: a bare morphism does not
know the differentials of its endpoints, while every caller (twisted
complexes, bar constructions) does.

All three instances are strict monoidal: tensor products of objects are equal
on the nose thanks to the flat sorted label scheme in `graded`.  Instances and
their values are immutable after construction; every operation is pure.
"""

from .fields import QQ
from .graded import (
    GradedModule, GradedMap, ComplexObject, SparseMatrix,
    UNIT_MODULE, tensor_modules, tensor_maps, kernel_basis, solve,
)


class ShapeMismatch(Exception):
    pass


class InstanceUnsupported(Exception):
    pass


# ---------------------------------------------------------------------------
# hom spaces: a uniform coordinate view used by every exact solver


class HomSpace:
    """Finite-dimensional hom complex of an instance, with a fixed ordered
    basis per degree and conversions between morphisms and coordinates."""

    def __init__(self, instance, x, y, basis_by_degree):
        self.instance = instance
        self.x = x
        self.y = y
        self.basis_by_degree = {q: list(bs) for q, bs in sorted(basis_by_degree.items()) if bs}

    def degrees(self):
        return list(self.basis_by_degree)

    def dim(self, q):
        return len(self.basis_by_degree.get(q, ()))

    def basis(self, q):
        return self.basis_by_degree.get(q, [])

    def from_coords(self, q, coords):
        inst = self.instance
        f = inst.zero_morphism(self.x, self.y, q)
        for i, c in coords.items():
            if not inst.field.is_zero(c):
                f = inst.add(f, inst.scale(c, self.basis_by_degree[q][i]))
        return f

    def to_coords(self, f):
        raise NotImplementedError

    def _d_matrix(self, q):
        inst = self.instance
        mat = SparseMatrix(self.dim(q + 1), self.dim(q), inst.field)
        for j, b in enumerate(self.basis(q)):
            coords = self.to_coords(inst.differential(b, self.x, self.y))
            for i, v in coords.items():
                mat.set(i, j, v)
        return mat

    def complex(self):
        """The hom complex as a ComplexObject (for cohomology ranks)."""
        comps = {q: ["h%d~%d" % (q, i) for i in range(self.dim(q))]
                 for q in self.degrees()}
        module = GradedModule(comps)
        d = GradedMap(module, module, 1, self.instance.field)
        for q in self.degrees():
            if self.dim(q + 1) == 0:
                continue
            mat = self._d_matrix(q)
            if not mat.is_zero():
                d.blocks[q] = mat
        return ComplexObject(module, d)

    def solve_boundary(self, g):
        """f with differential(f) = g, or None; canonical RREF choice."""
        inst = self.instance
        q = inst.degree(g) - 1
        mat = self._d_matrix(q)
        gco = self.to_coords(g)
        x = solve(mat, gco)
        if x is None:
            return None
        return self.from_coords(q, x)


# ---------------------------------------------------------------------------
# chain instance


class ChainHomSpace(HomSpace):
    def __init__(self, instance, x, y):
        self._pairs = {}   # degree q -> list of (src_degree, src_label, dst_label)
        xm, ym = x.module, y.module
        self._xm, self._ym = xm, ym
        for n in xm.degrees():
            for m in ym.degrees():
                for sl in xm.labels(n):
                    for dl in ym.labels(m):
                        self._pairs.setdefault(m - n, []).append((n, sl, dl))
        self._pair_index = {q: {p: i for i, p in enumerate(ps)}
                            for q, ps in self._pairs.items()}
        self._basis_memo = {}
        super().__init__(instance, x, y,
                         {q: [None] * len(ps) for q, ps in self._pairs.items()})

    def basis(self, q):
        bs = self._basis_memo.get(q)
        if bs is None:
            bs = self._basis_memo[q] = [
                GradedMap.from_entries(self._xm, self._ym, q, self.instance.field,
                                       {(sl, dl): 1})
                for (n, sl, dl) in self._pairs.get(q, [])]
        return bs

    def dim(self, q):
        return len(self._pairs.get(q, ()))

    def degrees(self):
        return sorted(self._pairs)

    def from_coords(self, q, coords):
        F = self.instance.field
        f = GradedMap(self._xm, self._ym, q, F)
        pairs = self._pairs.get(q, [])
        for i, c in coords.items():
            if F.is_zero(c):
                continue
            n, sl, dl = pairs[i]
            f.block(n).add_to(self._ym.index(n + q, dl), self._xm.index(n, sl), c)
        f._prune()
        return f

    def to_coords(self, f):
        idx = self._pair_index.get(f.degree, {})
        return {idx[(n, sl, dl)]: v for n, sl, dl, v in f.entries()}


class ChainInstance:
    """Complexes of k-modules with the tensor product; objects are
    ComplexObject values, morphisms bare GradedMaps."""

    name = "chain"

    def __init__(self, field=QQ):
        self.field = field
        self.unit = ComplexObject(UNIT_MODULE,
                                  GradedMap.zero(UNIT_MODULE, UNIT_MODULE, 1, field))
        self._power_memo = {}
        self._hom_memo = {}

    def object(self, module, differential=None):
        if differential is None:
            differential = GradedMap.zero(module, module, 1, self.field)
        return ComplexObject(module, differential)

    def tensor(self, x, y):
        m = tensor_modules(x.module, y.module)
        d = tensor_maps(x.differential, GradedMap.identity(y.module, self.field)).add(
            tensor_maps(GradedMap.identity(x.module, self.field), y.differential))
        return ComplexObject(m, d, check=False)

    def power(self, x, n):
        assert n >= 0
        key = (id(x), n)
        hit = self._power_memo.get(key)
        if hit is not None:
            return hit[1]
        out = self.unit
        for _ in range(n):
            out = self.tensor(out, x)
        self._power_memo[key] = (x, out)
        return out

    def identity(self, x):
        key = id(x)
        hit = getattr(self, "_id_memo", None)
        if hit is None:
            hit = self._id_memo = {}
        got = hit.get(key)
        if got is not None and got[0] is x:
            return got[1]
        out = GradedMap.identity(x.module, self.field)
        hit[key] = (x, out)
        return out

    def zero_morphism(self, x, y, degree):
        return GradedMap.zero(x.module, y.module, degree, self.field)

    def add(self, f, g):
        return f.add(g)

    def scale(self, c, f):
        return f.scale(self.field.of(c))

    def neg(self, f):
        return f.neg()

    def compose(self, g, f):
        if f.dst != g.src:
            raise ShapeMismatch("inner objects differ")
        return g.compose(f)

    def tensor_morphisms(self, f, g):
        return tensor_maps(f, g)

    def differential(self, f, x, y):
        out = y.differential.compose(f)
        t = f.compose(x.differential)
        return out.sub(t) if f.degree % 2 == 0 else out.add(t)

    def degree(self, f):
        return f.degree

    def is_zero(self, f):
        return f.is_zero()

    def whisker_left(self, x, f):
        return self.tensor_morphisms(self.identity(x), f)

    def whisker_right(self, f, x):
        return self.tensor_morphisms(f, self.identity(x))

    def hom_space(self, x, y):
        key = (id(x), id(y))
        hit = self._hom_memo.get(key)
        if hit is not None and hit[0] is x and hit[1] is y:
            return hit[2]
        hs = ChainHomSpace(self, x, y)
        self._hom_memo[key] = (x, y, hs)
        return hs


# ---------------------------------------------------------------------------
# finite DG categories (quivers with composition tables)


class CatElement:
    """Homogeneous element of a hom complex of a FiniteDGCategory."""

    __slots__ = ("cat", "src", "dst", "degree", "coeffs")

    def __init__(self, cat, src, dst, degree, coeffs=None):
        self.cat = cat
        self.src = src
        self.dst = dst
        self.degree = degree
        self.coeffs = {}
        if coeffs:
            F = cat.field
            for l, v in coeffs.items():
                if not F.is_zero(v):
                    self.coeffs[l] = v

    def is_zero(self):
        return not self.coeffs

    def __eq__(self, other):
        return (isinstance(other, CatElement)
                and (self.src, self.dst, self.degree) == (other.src, other.dst, other.degree)
                and self.cat.field == other.cat.field
                and not self.sub(other).coeffs)

    def __hash__(self):
        raise TypeError("unhashable")

    def add(self, other):
        assert (self.src, self.dst, self.degree) == (other.src, other.dst, other.degree)
        F = self.cat.field
        coeffs = dict(self.coeffs)
        for l, v in other.coeffs.items():
            w = F.add(coeffs.get(l, F.zero), v)
            if F.is_zero(w):
                coeffs.pop(l, None)
            else:
                coeffs[l] = w
        return CatElement(self.cat, self.src, self.dst, self.degree, coeffs)

    def scale(self, c):
        F = self.cat.field
        return CatElement(self.cat, self.src, self.dst, self.degree,
                          {l: F.mul(c, v) for l, v in self.coeffs.items()})

    def neg(self):
        return self.scale(self.cat.field.neg(self.cat.field.one))

    def sub(self, other):
        return self.add(other.neg())

    def __repr__(self):
        return "CatElement(%s->%s, deg %d, %r)" % (self.src, self.dst, self.degree, self.coeffs)


class FiniteDGCategory:
    """Finite objects, finite-dimensional hom complexes with named bases,
    explicit composition tables and identities.

    hom[(x, y)]:  GradedModule of basis labels (label -> degree via module)
    d[(x, y)]:    GradedMap of degree +1 on hom[(x,y)] (optional)
    comp[(x,y,z)][(g_label, f_label)]: {h_label: scalar}  meaning g . f
    ident[x]:     {label: scalar}
    """

    def __init__(self, field, objects, hom, d=None, comp=None, ident=None, check=True):
        self.field = field
        self.objects = list(objects)
        self.hom = dict(hom)
        for pair in list(self.hom):
            if self.hom[pair].is_zero():
                del self.hom[pair]
        self.d = dict(d or {})
        self.comp = {k: dict(v) for k, v in (comp or {}).items()}
        self.ident = {x: dict(v) for x, v in (ident or {}).items()}
        self._label_home = {}
        for (x, y), m in self.hom.items():
            for n in m.degrees():
                for l in m.labels(n):
                    assert l not in self._label_home, "morphism label reused across homs"
                    self._label_home[l] = (x, y, n)
        if check:
            self.check()

    def hom_module(self, x, y):
        return self.hom.get((x, y), GradedModule({}))

    def element(self, x, y, degree, coeffs):
        return CatElement(self, x, y, degree, coeffs)

    def basis_element(self, label):
        x, y, n = self._label_home[label]
        return CatElement(self, x, y, n, {label: self.field.one})

    def identity_element(self, x):
        return CatElement(self, x, x, 0, self.ident[x])

    def zero_element(self, x, y, degree):
        return CatElement(self, x, y, degree, {})

    def compose_elements(self, g, f):
        assert f.dst == g.src, "composition undefined"
        F = self.field
        out = {}
        table = self.comp.get((f.src, f.dst, g.dst), {})
        for gl, gv in g.coeffs.items():
            for fl, fv in f.coeffs.items():
                for hl, hv in table.get((gl, fl), {}).items():
                    w = F.add(out.get(hl, F.zero), F.mul(F.mul(gv, fv), hv))
                    if F.is_zero(w):
                        out.pop(hl, None)
                    else:
                        out[hl] = w
        return CatElement(self, f.src, g.dst, f.degree + g.degree, out)

    def d_element(self, f):
        dmap = self.d.get((f.src, f.dst))
        if dmap is None:
            return CatElement(self, f.src, f.dst, f.degree + 1, {})
        m = self.hom_module(f.src, f.dst)
        out = {}
        F = self.field
        blk = dmap.blocks.get(f.degree)
        if blk is not None:
            tl = m.labels(f.degree + 1)
            for l, v in f.coeffs.items():
                j = m.index(f.degree, l)
                col = blk.cols.get(j, {})
                for i, w in col.items():
                    lab = tl[i]
                    val = F.add(out.get(lab, F.zero), F.mul(v, w))
                    if F.is_zero(val):
                        out.pop(lab, None)
                    else:
                        out[lab] = val
        return CatElement(self, f.src, f.dst, f.degree + 1, out)

    def basis_elements(self, x, y):
        m = self.hom_module(x, y)
        return [self.basis_element(l) for n in m.degrees() for l in m.labels(n)]

    def check(self):
        """Unital associative composition; d^2 = 0; Leibniz rule."""
        F = self.field
        for (x, y), dm in self.d.items():
            assert dm.compose(dm).is_zero(), "d^2 != 0 on hom(%s,%s)" % (x, y)
        for x in self.objects:
            assert x in self.ident, "missing identity for %s" % x
        for (x, y) in self.hom:
            idy = self.identity_element(y)
            idx = self.identity_element(x)
            for f in self.basis_elements(x, y):
                assert self.compose_elements(idy, f) == f, "left unit fails"
                assert self.compose_elements(f, idx) == f, "right unit fails"
                # Leibniz against compositions is checked below
        for (x, y, z) in self.comp:
            for f in self.basis_elements(x, y):
                for g in self.basis_elements(y, z):
                    gf = self.compose_elements(g, f)
                    lhs = self.d_element(gf)
                    rhs = self.compose_elements(self.d_element(g), f)
                    t = self.compose_elements(g, self.d_element(f))
                    rhs = rhs.add(t.neg() if g.degree % 2 else t)
                    assert lhs == rhs, "Leibniz fails on (%s,%s,%s)" % (x, y, z)
        for (x, y, z) in list(self.comp):
            for w in self.objects:
                if (y, z, w) not in self.comp and (x, y, w) not in self.comp:
                    continue
                for f in self.basis_elements(x, y):
                    for g in self.basis_elements(y, z):
                        for h in self.basis_elements(z, w):
                            a = self.compose_elements(h, self.compose_elements(g, f))
                            b = self.compose_elements(self.compose_elements(h, g), f)
                            assert a == b, "associativity fails"


class DGFunctor:
    """DG endofunctor of a FiniteDGCategory: object map plus degree-0 action
    maps on the hom complexes, commuting with d, composition, identities."""

    __slots__ = ("cat", "obj_map", "action")

    def __init__(self, cat, obj_map, action, check=True):
        self.cat = cat
        self.obj_map = dict(obj_map)
        self.action = dict(action)   # (x, y) -> GradedMap hom(x,y) -> hom(Fx,Fy)
        if check:
            self.check()

    @classmethod
    def identity_functor(cls, cat):
        obj_map = {x: x for x in cat.objects}
        action = {(x, y): GradedMap.identity(m, cat.field)
                  for (x, y), m in cat.hom.items()}
        return cls(cat, obj_map, action, check=False)

    def apply_obj(self, x):
        return self.obj_map[x]

    def apply(self, f):
        """Apply to a CatElement."""
        gm = self.action.get((f.src, f.dst))
        Fx, Fy = self.obj_map[f.src], self.obj_map[f.dst]
        out = CatElement(self.cat, Fx, Fy, f.degree, {})
        if gm is None:
            return out
        m = self.cat.hom_module(f.src, f.dst)
        tm = self.cat.hom_module(Fx, Fy)
        F = self.cat.field
        blk = gm.blocks.get(f.degree)
        coeffs = {}
        if blk is not None:
            tl = tm.labels(f.degree)
            for l, v in f.coeffs.items():
                col = blk.cols.get(m.index(f.degree, l), {})
                for i, w in col.items():
                    lab = tl[i]
                    val = F.add(coeffs.get(lab, F.zero), F.mul(v, w))
                    if F.is_zero(val):
                        coeffs.pop(lab, None)
                    else:
                        coeffs[lab] = val
        return CatElement(self.cat, Fx, Fy, f.degree, coeffs)

    def compose_with(self, other):
        """self . other (apply other first)."""
        cat = self.cat
        obj_map = {x: self.obj_map[other.obj_map[x]] for x in cat.objects}
        action = {}
        for (x, y), m in cat.hom.items():
            first = other.action.get((x, y))
            if first is None:
                continue
            second = self.action.get((other.obj_map[x], other.obj_map[y]))
            if second is None:
                continue
            action[(x, y)] = second.compose(first)
        return DGFunctor(cat, obj_map, action, check=False)

    def check(self):
        cat = self.cat
        for (x, y), m in cat.hom.items():
            for f in cat.basis_elements(x, y):
                assert self.apply(cat.d_element(f)) == cat.d_element(self.apply(f))
        for x in cat.objects:
            assert self.apply(cat.identity_element(x)) == \
                cat.identity_element(self.obj_map[x])
        for (x, y, z) in cat.comp:
            for f in cat.basis_elements(x, y):
                for g in cat.basis_elements(y, z):
                    assert self.apply(cat.compose_elements(g, f)) == \
                        cat.compose_elements(self.apply(g), self.apply(f))

    def __eq__(self, other):
        if not isinstance(other, DGFunctor):
            return NotImplemented
        if self.obj_map != other.obj_map:
            return False
        for key in set(self.action) | set(other.action):
            a, b = self.action.get(key), other.action.get(key)
            if a is None:
                a = GradedMap.zero(b.src, b.dst, 0, self.cat.field)
            if b is None:
                b = GradedMap.zero(a.src, a.dst, 0, self.cat.field)
            if a != b:
                return False
        return True

    def __hash__(self):
        return hash(tuple(sorted(self.obj_map.items())))


class NaturalTransformation:
    """Degree-q DG natural transformation between endofunctors: components
    theta_x in hom(Fx, Gx)^q with theta_y . F(f) = (-1)^{q|f|} G(f) . theta_x."""

    __slots__ = ("src", "dst", "degree", "components")

    def __init__(self, src, dst, degree, components):
        self.src = src
        self.dst = dst
        self.degree = degree
        cat = src.cat
        self.components = {}
        for x in cat.objects:
            c = components.get(x)
            if c is None:
                c = cat.zero_element(src.obj_map[x], dst.obj_map[x], degree)
            assert c.src == src.obj_map[x] and c.dst == dst.obj_map[x]
            assert c.degree == degree
            self.components[x] = c

    def is_zero(self):
        return all(c.is_zero() for c in self.components.values())

    def is_natural(self):
        cat = self.src.cat
        q = self.degree
        for (x, y) in cat.hom:
            for f in cat.basis_elements(x, y):
                lhs = cat.compose_elements(self.components[y], self.src.apply(f))
                rhs = cat.compose_elements(self.dst.apply(f), self.components[x])
                if (q * f.degree) % 2:
                    rhs = rhs.neg()
                if not lhs.sub(rhs).is_zero():
                    return False
        return True

    def __eq__(self, other):
        return (isinstance(other, NaturalTransformation)
                and self.src == other.src and self.dst == other.dst
                and self.degree == other.degree
                and all(self.components[x] == other.components[x]
                        for x in self.components))

    def __hash__(self):
        raise TypeError("unhashable")

    def __repr__(self):
        return "NatTrans(deg %d)" % self.degree


class EndofunctorHomSpace(HomSpace):
    def __init__(self, instance, Fx, Gx):
        cat = instance.cat
        self._slots = {}   # degree -> list of (object, hom_degree_label)
        raw = {}
        for x in cat.objects:
            m = cat.hom_module(Fx.obj_map[x], Gx.obj_map[x])
            for n in m.degrees():
                for l in m.labels(n):
                    raw.setdefault(n, []).append((x, l))
        basis = {}
        for q, slots in raw.items():
            # impose DG naturality: solve the linear constraints exactly
            ncols = len(slots)
            crows = []
            for (x, y) in cat.hom:
                for f in cat.basis_elements(x, y):
                    m = cat.hom_module(Gx.obj_map[x], Gx.obj_map[y])
                    tgt = cat.hom_module(Fx.obj_map[x], Gx.obj_map[y])
                    row_index = {}
                    rows = {}
                    for j, (z, l) in enumerate(slots):
                        theta = cat.basis_element(l)
                        if z == y:
                            lhs = cat.compose_elements(theta, Fx.apply(f))
                        else:
                            lhs = None
                        if z == x:
                            r = cat.compose_elements(Gx.apply(f), theta)
                            if (q * f.degree) % 2:
                                r = r.neg()
                            rhs = r
                        else:
                            rhs = None
                        for elt, sgn in ((lhs, 1), (rhs, -1)):
                            if elt is None:
                                continue
                            for lab, v in elt.coeffs.items():
                                key = lab
                                if key not in row_index:
                                    row_index[key] = len(row_index)
                                    rows[row_index[key]] = {}
                                val = v if sgn > 0 else instance.field.neg(v)
                                r0 = rows[row_index[key]]
                                w = instance.field.add(r0.get(j, instance.field.zero), val)
                                if instance.field.is_zero(w):
                                    r0.pop(j, None)
                                else:
                                    r0[j] = w
                    crows.extend(rows.values())
            mat = SparseMatrix(len(crows), ncols, instance.field)
            for i, row in enumerate(crows):
                for j, v in row.items():
                    mat.set(i, j, v)
            vecs = kernel_basis(mat)
            bs = []
            for vec in vecs:
                comps = {}
                for j, v in vec.items():
                    x, l = slots[j]
                    elt = cat.basis_element(l).scale(v)
                    comps[x] = comps[x].add(elt) if x in comps else elt
                bs.append(NaturalTransformation(Fx, Gx, q, comps))
            if bs:
                basis[q] = bs
            self._slots[q] = slots
        self._vec_cache = {}
        super().__init__(instance, Fx, Gx, basis)

    def to_coords(self, f):
        # express f in the naturality-kernel basis by solving a linear system
        q = f.degree
        slots = self._slots.get(q, [])
        slot_index = {s: i for i, s in enumerate(slots)}
        F = self.instance.field

        def flat(nt):
            out = {}
            for x, elt in nt.components.items():
                for l, v in elt.coeffs.items():
                    out[slot_index[(x, l)]] = v
            return out

        basis = self.basis(q)
        mat = SparseMatrix(len(slots), len(basis), F)
        for j, b in enumerate(basis):
            for i, v in flat(b).items():
                mat.set(i, j, v)
        x = solve(mat, flat(f))
        assert x is not None, "element not in the natural-transformation space"
        return x


class EndofunctorInstance:
    """DG endofunctors of a finite DG category; tensor = composition,
    morphisms = DG natural transformations."""

    name = "endofunctor"

    def __init__(self, cat):
        self.cat = cat
        self.field = cat.field
        self.unit = DGFunctor.identity_functor(cat)
        self._power_memo = {}

    def tensor(self, x, y):
        return x.compose_with(y)

    def power(self, x, n):
        assert n >= 0
        key = (id(x), n)
        hit = self._power_memo.get(key)
        if hit is not None:
            return hit[1]
        out = self.unit
        for _ in range(n):
            out = self.tensor(out, x)
        self._power_memo[key] = (x, out)
        return out

    def identity(self, x):
        comps = {z: self.cat.identity_element(x.obj_map[z]) for z in self.cat.objects}
        return NaturalTransformation(x, x, 0, comps)

    def zero_morphism(self, x, y, degree):
        return NaturalTransformation(x, y, degree, {})

    def add(self, f, g):
        assert (f.src, f.dst, f.degree) == (g.src, g.dst, g.degree)
        return NaturalTransformation(f.src, f.dst, f.degree,
                                     {x: f.components[x].add(g.components[x])
                                      for x in f.components})

    def scale(self, c, f):
        c = self.field.of(c)
        return NaturalTransformation(f.src, f.dst, f.degree,
                                     {x: f.components[x].scale(c) for x in f.components})

    def neg(self, f):
        return self.scale(self.field.neg(self.field.one), f)

    def compose(self, g, f):
        if f.dst != g.src:
            raise ShapeMismatch("inner functors differ")
        cat = self.cat
        return NaturalTransformation(
            f.src, g.dst, f.degree + g.degree,
            {x: cat.compose_elements(g.components[x], f.components[x])
             for x in f.components})

    def tensor_morphisms(self, f, g):
        """(f (x) g)_x = f_{g.dst(x)} . F(g_x) — horizontal composition; the
        Koszul interchange law follows from DG naturality of f."""
        cat = self.cat
        src = self.tensor(f.src, g.src)
        dst = self.tensor(f.dst, g.dst)
        comps = {}
        for x in cat.objects:
            comps[x] = cat.compose_elements(f.components[g.dst.obj_map[x]],
                                            f.src.apply(g.components[x]))
        return NaturalTransformation(src, dst, f.degree + g.degree, comps)

    def differential(self, f, x=None, y=None):
        cat = self.cat
        return NaturalTransformation(f.src, f.dst, f.degree + 1,
                                     {z: cat.d_element(f.components[z])
                                      for z in f.components})

    def degree(self, f):
        return f.degree

    def is_zero(self, f):
        return f.is_zero()

    def whisker_left(self, x, f):
        return self.tensor_morphisms(self.identity(x), f)

    def whisker_right(self, f, x):
        return self.tensor_morphisms(f, self.identity(x))

    def hom_space(self, x, y):
        return EndofunctorHomSpace(self, x, y)


# ---------------------------------------------------------------------------
# indexed bimodule instance: k_U-mod-k_U


def _reindex(gmap, src, dst):
    """View a GradedMap between submodules inside larger modules that contain
    the same labels."""
    out = GradedMap(src, dst, gmap.degree, gmap.field)
    for n, sl, dl, v in gmap.entries():
        blk = out.block(n)
        blk.add_to(dst.index(n + gmap.degree, dl), src.index(n, sl), v)
    out._prune()
    return out


class IndexedObject:
    """U x U grid of chain complexes; missing cells are zero."""

    __slots__ = ("U", "cells")

    def __init__(self, U, cells):
        self.U = tuple(U)
        self.cells = {k: v for k, v in cells.items()
                      if not v.module.is_zero() or not v.differential.is_zero()}

    def cell(self, u, v, field):
        c = self.cells.get((u, v))
        if c is None:
            zm = GradedModule({})
            return ComplexObject(zm, GradedMap.zero(zm, zm, 1, field))
        return c

    def __eq__(self, other):
        return (isinstance(other, IndexedObject) and self.U == other.U
                and set(self.cells) == set(other.cells)
                and all(self.cells[k] == other.cells[k] for k in self.cells))

    def __hash__(self):
        return hash((self.U, tuple(sorted(self.cells))))

    def __repr__(self):
        return "IndexedObject(%s)" % {k: v.module.total_dim() for k, v in self.cells.items()}


class IndexedMorphism:
    __slots__ = ("src", "dst", "degree", "maps")

    def __init__(self, src, dst, degree, maps):
        self.src = src
        self.dst = dst
        self.degree = degree
        self.maps = {k: m for k, m in maps.items() if not m.is_zero()}

    def cell_map(self, key, field):
        m = self.maps.get(key)
        if m is None:
            sm = self.src.cells.get(key)
            dm = self.dst.cells.get(key)
            smod = sm.module if sm else GradedModule({})
            dmod = dm.module if dm else GradedModule({})
            return GradedMap.zero(smod, dmod, self.degree, field)
        return m

    def is_zero(self):
        return all(m.is_zero() for m in self.maps.values())

    def __eq__(self, other):
        if not isinstance(other, IndexedMorphism):
            return NotImplemented
        if (self.src, self.dst, self.degree) != (other.src, other.dst, other.degree):
            return False
        for k in set(self.maps) | set(other.maps):
            a, b = self.maps.get(k), other.maps.get(k)
            if a is None:
                if not b.is_zero():
                    return False
            elif b is None:
                if not a.is_zero():
                    return False
            elif a != b:
                return False
        return True

    def __hash__(self):
        raise TypeError("unhashable")


class IndexedHomSpace(HomSpace):
    def __init__(self, instance, x, y):
        self._chain_spaces = {}
        raw = {}
        keys = sorted(set(x.cells) | set(y.cells))
        for key in keys:
            xs = x.cell(*key, instance.field)
            ys = y.cell(*key, instance.field)
            ch = ChainHomSpace(instance._chain, xs, ys)
            self._chain_spaces[key] = ch
            for q in ch.degrees():
                for b in ch.basis(q):
                    raw.setdefault(q, []).append(
                        IndexedMorphism(x, y, q, {key: b}))
        super().__init__(instance, x, y, raw)
        # index: degree -> (key, chain_pair_index) -> position
        self._pos = {}
        for q in self.degrees():
            pos = {}
            i = 0
            for key in keys:
                ch = self._chain_spaces[key]
                for p in ch._pairs.get(q, []):
                    pos[(key, p)] = i
                    i += 1
            self._pos[q] = pos

    def to_coords(self, f):
        q = f.degree
        pos = self._pos.get(q, {})
        out = {}
        for key, gm in f.maps.items():
            for n, sl, dl, v in gm.entries():
                out[pos[(key, (n, sl, dl))]] = v
        return out


class IndexedBimodInstance:
    """Objects are U x U-indexed grids of complexes, tensor is the matrix-style
    sum over the middle index, unit is the diagonal with k at (u, u)."""

    name = "indexed"

    def __init__(self, U, field=QQ):
        self.U = tuple(U)
        self.field = field
        self._chain = ChainInstance(field)
        self.unit = IndexedObject(self.U, {(u, u): self._chain.unit for u in self.U})
        self._power_memo = {}

    def object(self, cells):
        return IndexedObject(self.U, cells)

    def tensor(self, x, y):
        cells = {}
        for u in self.U:
            for w in self.U:
                parts = []
                for v in self.U:
                    a = x.cells.get((u, v))
                    b = y.cells.get((v, w))
                    if a is None or b is None:
                        continue
                    parts.append(self._chain.tensor(a, b))
                if not parts:
                    continue
                comps = {}
                for p in parts:
                    for n, ls in p.module.components.items():
                        comps.setdefault(n, []).extend(ls)
                module = GradedModule(comps)
                d = GradedMap(module, module, 1, self.field)
                for p in parts:
                    for n, sl, dl, v in p.differential.entries():
                        d.block(n).add_to(module.index(n + 1, dl), module.index(n, sl), v)
                d._prune()
                cells[(u, w)] = ComplexObject(module, d, check=False)
        return IndexedObject(self.U, cells)

    def power(self, x, n):
        assert n >= 0
        key = (id(x), n)
        hit = self._power_memo.get(key)
        if hit is not None:
            return hit[1]
        out = self.unit
        for _ in range(n):
            out = self.tensor(out, x)
        self._power_memo[key] = (x, out)
        return out

    def identity(self, x):
        return IndexedMorphism(x, x, 0,
                               {k: GradedMap.identity(c.module, self.field)
                                for k, c in x.cells.items()})

    def zero_morphism(self, x, y, degree):
        return IndexedMorphism(x, y, degree, {})

    def add(self, f, g):
        assert (f.src, f.dst, f.degree) == (g.src, g.dst, g.degree)
        maps = dict(f.maps)
        for k, m in g.maps.items():
            maps[k] = maps[k].add(m) if k in maps else m
        return IndexedMorphism(f.src, f.dst, f.degree, maps)

    def scale(self, c, f):
        c = self.field.of(c)
        return IndexedMorphism(f.src, f.dst, f.degree,
                               {k: m.scale(c) for k, m in f.maps.items()})

    def neg(self, f):
        return self.scale(self.field.neg(self.field.one), f)

    def compose(self, g, f):
        if f.dst != g.src:
            raise ShapeMismatch("inner objects differ")
        maps = {}
        for k in set(f.maps) & set(g.maps):
            maps[k] = g.maps[k].compose(f.maps[k])
        return IndexedMorphism(f.src, g.dst, f.degree + g.degree, maps)

    def tensor_morphisms(self, f, g):
        src = self.tensor(f.src, g.src)
        dst = self.tensor(f.dst, g.dst)
        maps = {}
        for u in self.U:
            for w in self.U:
                skey, dkey = (u, w), (u, w)
                scell = src.cells.get(skey)
                dcell = dst.cells.get(dkey)
                if scell is None or dcell is None:
                    continue
                total = GradedMap(scell.module, dcell.module,
                                  f.degree + g.degree, self.field)
                for v in self.U:
                    fa = f.maps.get((u, v))
                    gb = g.maps.get((v, w))
                    if fa is None or gb is None:
                        continue
                    part = tensor_maps(fa, gb)
                    for n, sl, dl, val in part.entries():
                        total.block(n).add_to(
                            dcell.module.index(n + total.degree, dl),
                            scell.module.index(n, sl), val)
                total._prune()
                if not total.is_zero():
                    maps[(u, w)] = total
        return IndexedMorphism(src, dst, f.degree + g.degree, maps)

    def differential(self, f, x, y):
        maps = {}
        for key, fm in f.maps.items():
            xs = x.cell(*key, self.field)
            ys = y.cell(*key, self.field)
            maps[key] = self._chain.differential(fm, xs, ys)
        return IndexedMorphism(f.src, f.dst, f.degree + 1, maps)

    def degree(self, f):
        return f.degree

    def is_zero(self, f):
        return f.is_zero()

    def whisker_left(self, x, f):
        return self.tensor_morphisms(self.identity(x), f)

    def whisker_right(self, f, x):
        return self.tensor_morphisms(f, self.identity(x))

    def hom_space(self, x, y):
        return IndexedHomSpace(self, x, y)


# ---------------------------------------------------------------------------
# convenience builder for finite DG categories


def build_finite_dg_category(field, objects, homs, identities, comp=None, d=None):
    """homs: {(x,y): {label: degree}}; identities: {x: label} (labels must be
    degree-0 endomorphism basis elements acting as strict units); comp:
    {(g_label, f_label): {h_label: coeff}} for non-identity pairs; d:
    {label: {label: coeff}}.  Identity compositions are filled in
    automatically."""
    hom = {}
    home = {}
    for (x, y), spec in homs.items():
        comps = {}
        for label, degree in spec.items():
            comps.setdefault(degree, []).append(label)
            home[label] = (x, y)
        hom[(x, y)] = GradedModule(comps)
    dmaps = {}
    for label, image in (d or {}).items():
        x, y = home[label]
        m = hom[(x, y)]
        gm = dmaps.get((x, y))
        if gm is None:
            gm = dmaps[(x, y)] = GradedMap(m, m, 1, field)
        n = next(k for k in m.degrees() if (label,) in m.labels(k))
        for tlabel, c in image.items():
            gm.block(n).add_to(m.index(n + 1, (tlabel,)), m.index(n, (label,)),
                               field.of(c))
    for gm in dmaps.values():
        gm._prune()
    table = {}

    def put(xyz, gl, fl, image):
        table.setdefault(xyz, {})[((gl,), (fl,))] = {(h,): field.of(c)
                                                     for h, c in image.items()}

    for (gl, fl), image in (comp or {}).items():
        fx, fy = home[fl]
        gx, gy = home[gl]
        assert fy == gx, "composition table entry with mismatched endpoints"
        put((fx, fy, gy), gl, fl, image)
    for x, idl in identities.items():
        for (a, b), spec in homs.items():
            for label in spec:
                if b == x:
                    put((a, b, b), idl, label, {label: 1})
                if a == x:
                    if not (a == b == x and label == idl):
                        put((a, a, b), label, idl, {label: 1})
            if a == b == x:
                put((x, x, x), idl, idl, {idl: 1})
    return FiniteDGCategory(field, objects, hom,
                            d=dmaps, comp=table,
                            ident={x: {(l,): field.one} for x, l in identities.items()})
