"""A-infinity algebras and their morphisms over any instance: bar
constructions, identity checking, composition, quasi-isomorphism detection.

All bar-type differentials come out of one shared routine, `bar_cell_maps`:
from a source word of n+k factors to target words of n factors the
differential is

    (-1)^{(n-1)(k+1)} * sum_{r=0}^{n-1} (-1)^{rk}  id^{n-1-r} (x) op_{k+1} (x) id^r

where op_{k+1} is the unique operation applicable to the spanned k+1
consecutive factors (an algebra operation on a run of algebra factors, a
module operation on a run containing the module factor).  Specialised to
words A...A, EA...A, A...AE and A..A M B..B this reproduces the displayed
algebra, right/left module and bimodule bar differentials.
"""

from .graded import ComplexObject, cohomology as chain_cohomology
from .dgcat import ChainInstance, IndexedBimodInstance, InstanceUnsupported, ShapeMismatch
from .twisted import (
    TwistedComplex, TwistedMorphism, check_twisted, twisted_hom_d,
    compose_twisted, NEG_INF,
)


# ---------------------------------------------------------------------------
# the uniform bar differential


def _fold_tensor(inst, objs):
    out = inst.unit
    for o in objs:
        out = inst.tensor(out, o)
    return out


def bar_cell_maps(inst, src_factors, k, op_for_span):
    """All summands of the bar differential lowering a word of factors by k.

    src_factors: list of instance objects (the module factor included as one
    entry); op_for_span(a, b) must return the operation morphism for the span
    of source factor indices [a, b] (length k+1), or None when that operation
    is zero / absent.  Yields (r, term) with the (-1)^{rk} sign applied but
    NOT the overall (-1)^{(n-1)(k+1)} prefactor.
    """
    L = len(src_factors)
    n = L - k
    assert n >= 1
    for r in range(n):
        a = L - 1 - r - k
        b = L - 1 - r
        op = op_for_span(a, b)
        if op is None:
            continue
        term = op
        if a > 0:
            term = inst.tensor_morphisms(inst.identity(_fold_tensor(inst, src_factors[:a])), term)
        if b < L - 1:
            term = inst.tensor_morphisms(term, inst.identity(_fold_tensor(inst, src_factors[b + 1:])))
        if (r * k) % 2:
            term = inst.neg(term)
        yield r, term


def bar_prefactor_sign(n, k):
    return -1 if ((n - 1) * (k + 1)) % 2 else 1


# ---------------------------------------------------------------------------
# algebras


class AInftyAlgebra:
    """Object of a monoidal DG category with truncated operations
    m_i: A^i -> A of degree 2-i for 2 <= i <= cap."""

    def __init__(self, instance, carrier, ops, cap=6, name="A"):
        self.instance = instance
        self.carrier = carrier
        self.cap = cap
        self.name = name
        self.ops = {}
        for i, m in ops.items():
            assert 2 <= i <= cap, "operation arity out of cap"
            if not instance.is_zero(m):
                assert instance.degree(m) == 2 - i
                self.ops[i] = m
        self._powers = {}

    def power(self, i):
        p = self._powers.get(i)
        if p is None:
            p = self._powers[i] = self.instance.power(self.carrier, i)
        return p

    def op(self, i):
        m = self.ops.get(i)
        if m is None:
            return None
        return m

    def is_strict(self):
        return all(i == 2 for i in self.ops)

    # -- bar construction ---------------------------------------------------

    def bar_construction(self, window=None):
        """Twisted complex with A^{i+1} in position -i for 0 <= i < window."""
        W = window or self.cap
        inst = self.instance
        slots = {1 - s: (1 - s, self.power(s)) for s in range(1, W + 1)}
        maps = {}
        for s in range(2, W + 1):           # source power
            for t in range(1, s):           # target power
                k = s - t
                if k + 1 > self.cap or (k + 1) not in self.ops:
                    continue
                m = self.ops[k + 1]
                factors = [self.carrier] * s

                def span_op(a, b, m=m):
                    return m

                total = None
                for r, term in bar_cell_maps(inst, factors, k, span_op):
                    total = term if total is None else inst.add(total, term)
                if total is None:
                    continue
                if bar_prefactor_sign(t, k) < 0:
                    total = inst.neg(total)
                maps[(1 - s, 1 - t)] = total
        return TwistedComplex(inst, slots, maps, truncated_below=True, lower_shift=1)

    # -- defining equalities -------------------------------------------------

    def identity_residual(self, i):
        """d m_i + sum_{j+k+l=i, k>=2} (-1)^{jk+l} m_{j+1+l} . (id^j (x) m_k (x) id^l).

        Returns None (trivially zero) without materialising the i-th tensor
        power when no term can be nonzero."""
        inst = self.instance
        A = self.carrier
        mi = self.ops.get(i)
        if mi is None and not any(
                k in self.ops and (i - k + 1) in self.ops for k in range(2, i)):
            return None
        res = None
        if mi is not None:
            res = inst.differential(mi, self.power(i), A)
        for k in range(2, i):
            mk = self.ops.get(k)
            if mk is None:
                continue
            for j in range(0, i - k + 1):
                l = i - k - j
                outer = self.ops.get(j + 1 + l)
                if outer is None:
                    continue
                inner = mk
                if j > 0:
                    inner = inst.tensor_morphisms(inst.identity(self.power(j)), inner)
                if l > 0:
                    inner = inst.tensor_morphisms(inner, inst.identity(self.power(l)))
                term = inst.compose(outer, inner)
                if (j * k + l) % 2:
                    term = inst.neg(term)
                res = term if res is None else inst.add(res, term)
        if res is None:
            res = inst.zero_morphism(self.power(i), A, 3 - i)
        return res


class AInftyReport:
    def __init__(self, ok, failures, untrusted=()):
        self.ok = ok
        self.failures = failures      # list of (location, residual)
        self.untrusted = list(untrusted)

    def __bool__(self):
        return self.ok

    def locations(self):
        return [loc for loc, _ in self.failures]

    def describe(self):
        if self.ok:
            return "ok"
        return "FAILED at " + ", ".join(str(l) for l in self.locations())


def check_ainfty(algebra):
    """Verify the truncated defining equalities for 2 <= i <= cap.  By the
    comparison proposition these imply the full twisted condition."""
    failures = []
    for i in range(2, algebra.cap + 1):
        res = algebra.identity_residual(i)
        if res is not None and not algebra.instance.is_zero(res):
            failures.append((i, res))
    return AInftyReport(not failures, failures)


def cross_check_bar(algebra, window=None):
    """Independent consistency oracle: the full twisted condition on the bar."""
    return check_twisted(algebra.bar_construction(window))


# ---------------------------------------------------------------------------
# algebra morphisms


def _compositions(total, parts):
    """All tuples of `parts` positive integers summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def morphism_bar_sign(ts):
    """(-1)^{sum_{l=2}^{i} (1 - t_l) sum_{n=1}^{l} t_n}."""
    e = 0
    run = ts[0]
    for l in range(1, len(ts)):
        run += ts[l]
        e += (1 - ts[l]) * run
    return -1 if e % 2 else 1


class AlgebraMorphism:
    """Collection f_i: A^i -> B of degree deg - i + 1 (deg = 0 for plain
    morphisms; nonzero degrees arise from the bar calculus)."""

    def __init__(self, source, target, components, degree=0):
        self.source = source
        self.target = target
        self.degree = degree
        inst = source.instance
        self.instance = inst
        self.components = {}
        for i, f in components.items():
            if f is None or inst.is_zero(f):
                continue
            assert inst.degree(f) == degree + 1 - i
            self.components[i] = f

    @classmethod
    def identity(cls, algebra):
        return cls(algebra, algebra, {1: algebra.instance.identity(algebra.carrier)})

    def cap(self):
        return min(self.source.cap, self.target.cap)

    def component(self, i):
        f = self.components.get(i)
        if f is None:
            return self.instance.zero_morphism(self.source.power(i),
                                               self.target.carrier,
                                               self.degree + 1 - i)
        return f

    def is_zero(self):
        return not self.components

    def __eq__(self, other):
        if not isinstance(other, AlgebraMorphism):
            return NotImplemented
        if self.degree != other.degree:
            return False
        inst = self.instance
        for i in set(self.components) | set(other.components):
            if not inst.is_zero(inst.add(self.component(i), inst.neg(other.component(i)))):
                return False
        return True

    def __hash__(self):
        raise TypeError("unhashable")


def bar_of_morphism(f, window=None):
    """Twisted morphism between the bar constructions with components
    A^{i+k} -> B^i given by the signed sums of tensor words of f's."""
    W = window or f.cap()
    inst = f.instance
    src = f.source.bar_construction(W)
    tgt = f.target.bar_construction(W)
    comps = {}
    for s in range(1, W + 1):          # source power
        for t in range(1, s + 1):      # target power
            total = None
            for ts in _compositions(s, t):
                word = None
                ok = True
                for tl in ts:
                    c = f.components.get(tl)
                    if c is None:
                        ok = False
                        break
                    word = c if word is None else inst.tensor_morphisms(word, c)
                if not ok:
                    continue
                if morphism_bar_sign(ts) < 0:
                    word = inst.neg(word)
                total = word if total is None else inst.add(total, word)
            if total is not None:
                comps[(1 - s, 1 - t)] = total
    return TwistedMorphism(src, tgt, f.degree, comps, lower_shift=0)


def morphism_from_bar(f_source, f_target, tm):
    """Read morphism data off the A^i -> B column of a twisted morphism and
    assert the rest of the twisted morphism is its bar (the faithfulness of
    the bar construction)."""
    inst = f_source.instance
    comps = {}
    for i in range(1, min(-tm.source.lo, -tm.target.lo) + 2):
        key = (1 - i, 0)
        c = tm.components.get(key)
        if c is not None and key not in tm.untrusted:
            comps[i] = c
    out = AlgebraMorphism(f_source, f_target, comps, degree=tm.degree)
    rebuilt = bar_of_morphism(out, window=min(-tm.source.lo, -tm.target.lo) + 1)
    for pair, c in tm.components.items():
        if pair in tm.untrusted:
            continue
        d = rebuilt.components.get(pair)
        if d is None:
            assert inst.is_zero(c), "twisted morphism is not a morphism bar"
        else:
            assert inst.is_zero(inst.add(c, inst.neg(d))), \
                "twisted morphism is not a morphism bar"
    return out


def differential_morphism(f):
    """The Nod-style differential, pulled back through the faithful bar."""
    dbar = twisted_hom_d(bar_of_morphism(f))
    return morphism_from_bar(f.source, f.target, dbar)


def check_morphism_columns(f, window=None):
    """Closedness via the A^i -> B components only (which determine the rest
    by the comparison proposition), computed without materialising tensor
    powers of the target beyond those carrying target operations.

    R_i = d(f_i) + sum_t m_t . (bar f)_{A^i -> B^t}
              - sum_m f_{...} . alpha_{A^i -> A^m}."""
    inst = f.instance
    W = window or f.cap()
    src_bar = f.source.bar_construction(W)
    failures = []
    needed_t = sorted(t for t in f.target.ops if t >= 2)

    def bar_component(s, t):
        total = None
        for ts in _compositions(s, t):
            word = None
            ok = True
            for tl in ts:
                c = f.components.get(tl)
                if c is None:
                    ok = False
                    break
                word = c if word is None else inst.tensor_morphisms(word, c)
            if not ok:
                continue
            if morphism_bar_sign(ts) < 0:
                word = inst.neg(word)
            total = word if total is None else inst.add(total, word)
        return total

    for i in range(1, W + 1):
        fi = f.component(i)
        res = inst.differential(fi, f.source.power(i), f.target.carrier)
        for t in needed_t:
            if t > i:
                continue
            comp = bar_component(i, t)
            if comp is None:
                continue
            res = inst.add(res, inst.compose(f.target.ops[t], comp))
        for m in range(1, i):
            alpha = src_bar.maps.get((1 - i, 1 - m))
            fm = f.components.get(m)
            if alpha is None or fm is None:
                continue
            term = inst.compose(fm, alpha)
            if f.degree % 2 == 0:
                term = inst.neg(term)
            res = inst.add(res, term)
        if not inst.is_zero(res):
            failures.append((i, res))
    return AInftyReport(not failures, failures)


def check_morphism(f):
    """Closedness of the degree-0 morphism: residuals per arity i."""
    dbar = twisted_hom_d(bar_of_morphism(f))
    failures = []
    untrusted = []
    for (ki, kj), c in dbar.components.items():
        if (ki, kj) in dbar.untrusted:
            untrusted.append((1 - ki, 1 - kj))
            continue
        if not f.instance.is_zero(c):
            failures.append(((1 - ki, 1 - kj), c))
    return AInftyReport(not failures, failures, untrusted)


def compose_morphisms(g, f):
    if f.target is not g.source and not (f.target.carrier == g.source.carrier
                                         and f.target.ops == g.source.ops):
        raise ShapeMismatch("algebra morphisms do not compose")
    W = min(f.cap(), g.cap())
    comp = compose_twisted(bar_of_morphism(g, W), bar_of_morphism(f, W))
    return morphism_from_bar(f.source, g.target, comp)


# ---------------------------------------------------------------------------
# quasi-isomorphisms


def chain_is_quasi_iso(fmap, x, y):
    """Closed degree-0 chain map: iso on cohomology iff its cone is acyclic."""
    from .graded import GradedModule, GradedMap
    field = fmap.field
    sx = x.module
    sy = y.module
    shifted = {n - 1: [("cone",) + l for l in ls] for n, ls in sx.components.items()}
    rest = {n: [("base",) + l for l in ls] for n, ls in sy.components.items()}
    comps = {}
    for n, ls in shifted.items():
        comps.setdefault(n, []).extend(ls)
    for n, ls in rest.items():
        comps.setdefault(n, []).extend(ls)
    m = GradedModule(comps)
    d = GradedMap(m, m, 1, field)
    for n, sl, dl, v in x.differential.entries():
        d.block(n - 1).add_to(m.index(n, ("cone",) + dl), m.index(n - 1, ("cone",) + sl),
                              field.neg(v))
    for n, sl, dl, v in y.differential.entries():
        d.block(n).add_to(m.index(n + 1, ("base",) + dl), m.index(n, ("base",) + sl), v)
    for n, sl, dl, v in fmap.entries():
        d.block(n - 1).add_to(m.index(n, ("base",) + dl), m.index(n - 1, ("cone",) + sl), v)
    cone = ComplexObject(m, d)
    return not chain_cohomology(cone)


def is_quasi_iso(f):
    """Reduce to f_1 by the Homotopy Lemma: a closed degree-0 morphism is a
    homotopy equivalence iff f_1 is one."""
    inst = f.instance
    f1 = f.component(1)
    x, y = f.source.carrier, f.target.carrier
    if isinstance(inst, ChainInstance):
        return chain_is_quasi_iso(f1, x, y)
    if isinstance(inst, IndexedBimodInstance):
        for key in sorted(set(x.cells) | set(y.cells)):
            xs = x.cell(*key, inst.field)
            ys = y.cell(*key, inst.field)
            if not chain_is_quasi_iso(f1.cell_map(key, inst.field), xs, ys):
                return False
        return True
    raise InstanceUnsupported("cohomology undefined for this instance")


# ---------------------------------------------------------------------------
# gauge transport: valid random A-infinity structures from strict ones


def invert_unitriangular(tm):
    """Inverse of a twisted morphism whose diagonal components are identities
    and whose off-diagonal part strictly raises position (Neumann series,
    finite inside the window)."""
    ops = tm.ops
    src = tm.source
    N = {}
    for (ki, kj), c in tm.components.items():
        if ki == kj:
            continue
        N[(ki, kj)] = c
    inv = {(k, k): ops.identity(src.obj(k)) for k in src.keys}
    power = dict(N)
    sign = -1
    while power:
        for pair, c in power.items():
            term = ops.neg(c) if sign < 0 else c
            inv[pair] = ops.add(inv[pair], term) if pair in inv else term
        nxt = {}
        for (ki, km), c1 in power.items():
            for (km2, kj), c2 in N.items():
                if km2 != km:
                    continue
                t = ops.compose(c2, c1)
                if (ki, kj) in nxt:
                    nxt[(ki, kj)] = ops.add(nxt[(ki, kj)], t)
                else:
                    nxt[(ki, kj)] = t
        power = {p: c for p, c in nxt.items() if not ops.is_zero(c)}
        sign = -sign
    return TwistedMorphism(tm.source, tm.source, 0, inv, lower_shift=0)


def transport_structure(algebra, gauge_components):
    """Conjugate the bar differential by the bar of a gauge (f_1 = id, given
    higher components) and read off the transported operations.  Output is a
    valid algebra by construction; the rebuilt bar is asserted equal to the
    conjugated differential."""
    inst = algebra.instance
    W = algebra.cap
    gauge = AlgebraMorphism(algebra, algebra,
                            {**gauge_components, 1: inst.identity(algebra.carrier)})
    T = algebra.bar_construction(W)
    T0 = TwistedComplex(inst, T.slots, {}, truncated_below=True, lower_shift=1)
    U = TwistedMorphism(T0, T, 0, bar_of_morphism(gauge, W).components, lower_shift=0)
    V = twisted_hom_d(U)          # (-1)^j dU + alpha . U  (source has no maps)
    Uinv_comps = invert_unitriangular(
        TwistedMorphism(T0, T0, 0, U.components, lower_shift=0)).components
    new_maps = {}
    for (ki, km), vc in V.components.items():
        for (km2, kj), ic in Uinv_comps.items():
            if km2 != km:
                continue
            term = inst.compose(ic, vc)
            pair = (ki, kj)
            new_maps[pair] = inst.add(new_maps[pair], term) if pair in new_maps else term
    ops = {}
    for i in range(2, W + 1):
        c = new_maps.get((1 - i, 0))
        if c is not None and not inst.is_zero(c):
            ops[i] = c
    out = AInftyAlgebra(inst, algebra.carrier, ops, cap=algebra.cap, name=algebra.name)
    rebuilt = out.bar_construction(W)
    for pair, c in new_maps.items():
        d = rebuilt.maps.get(pair)
        if d is None:
            assert inst.is_zero(c), "transport did not yield a bar differential"
        else:
            assert inst.is_zero(inst.add(c, inst.neg(d))), \
                "transport did not yield a bar differential"
    return out
