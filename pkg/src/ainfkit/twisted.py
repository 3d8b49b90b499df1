"""Windowed twisted complexes and their morphism calculus over any instance.

A twisted complex is stored as *slots*: key -> (position, object), with maps
alpha[key_i, key_j] of in-category degree 1 + pos(i) - pos(j).  Ordinary
complexes use key = position; twisted bicomplexes use keys (i, j) sitting at
position -(i+j), several slots per position.

Windows replace unboundedness.  A complex flagged `truncated_below` is the
finite shadow of a one-sided unbounded complex: identities and operations
whose value would require data below the window floor are not errors, they
are reported as untrusted ("unverifiable at boundary").  The accounting uses
*lower shifts*: a family of maps has lower shift s if its (i, j) component
vanishes unless pos(j) >= pos(i) + s (twisted differentials of one-sided
complexes have s = +1, bar constructions of morphisms s = 0, contracting
homotopies s = -1).
"""


class WindowUnderflow(Exception):
    pass


NEG_INF = None     # unknown lower shift


def _shift_min(*shifts):
    if any(s is NEG_INF for s in shifts):
        return NEG_INF
    return min(shifts)


def _shift_add(a, b):
    if a is NEG_INF or b is NEG_INF:
        return NEG_INF
    return a + b


class TwistedComplex:
    def __init__(self, ops, slots, maps, truncated_below=True, lower_shift=1,
                 truncated_above=False):
        """slots: {key: (position, object)};
        maps: {(key_i, key_j): morphism}."""
        self.ops = ops
        self.truncated_above = truncated_above
        self.slots = dict(slots)
        self.keys = sorted(self.slots, key=lambda k: (self.slots[k][0], str(k)))
        self.maps = {}
        self.truncated_below = truncated_below
        self.lower_shift = lower_shift
        for (ki, kj), f in maps.items():
            if ops.is_zero(f):
                continue
            pi, kio = self.slots[ki]
            pj, kjo = self.slots[kj]
            assert ops.degree(f) == 1 + pi - pj, "twisted differential degree"
            if lower_shift is not NEG_INF:
                assert pj >= pi + lower_shift, "map violates declared lower shift"
            self.maps[(ki, kj)] = f
        positions = [p for p, _ in self.slots.values()]
        self.lo = min(positions) if positions else 0
        self.hi = max(positions) if positions else 0

    def position(self, key):
        return self.slots[key][0]

    def obj(self, key):
        return self.slots[key][1]

    def alpha(self, ki, kj):
        f = self.maps.get((ki, kj))
        if f is None:
            pi, oi = self.slots[ki]
            pj, oj = self.slots[kj]
            return self.ops.zero_morphism(oi, oj, 1 + pi - pj)
        return f

    def single(self, key=0):
        """Is this the one-object complex concentrated at a single slot?"""
        return len(self.slots) == 1 and key in self.slots

    def __eq__(self, other):
        if not isinstance(other, TwistedComplex):
            return NotImplemented
        if set(self.slots) != set(other.slots):
            return False
        for k in self.slots:
            if self.slots[k][0] != other.slots[k][0] or \
                    not self.slots[k][1] == other.slots[k][1]:
                return False
        for pair in set(self.maps) | set(other.maps):
            a = self.maps.get(pair)
            b = other.maps.get(pair)
            if a is None:
                if not self.ops.is_zero(b):
                    return False
            elif b is None:
                if not self.ops.is_zero(a):
                    return False
            elif not self.ops.is_zero(self.ops.add(a, self.ops.neg(b))):
                return False
        return True

    def __hash__(self):
        raise TypeError("unhashable")

    def cell_trusted(self, ki):
        """Can the twisted-complex condition at source slot ki be verified
        entirely inside the window?"""
        if not self.truncated_below or self.lower_shift is NEG_INF:
            return not self.truncated_below
        return self.position(ki) + self.lower_shift >= self.lo or \
            self.position(ki) >= self.hi  # no outgoing data needed

    def sign_twisted(self, sign_of_key):
        """Apply the automorphism multiplying alpha_{ij} by
        sign_of_key(i) * sign_of_key(j) (each +-1)."""
        ops = self.ops
        maps = {}
        for (ki, kj), f in self.maps.items():
            s = sign_of_key(ki) * sign_of_key(kj)
            maps[(ki, kj)] = f if s == 1 else ops.neg(f)
        return TwistedComplex(ops, self.slots, maps, self.truncated_below,
                              self.lower_shift, self.truncated_above)


class TwistedReport:
    def __init__(self, ok, violations, untrusted):
        self.ok = ok
        self.violations = violations          # [(cell, residual)]
        self.untrusted = untrusted            # [cell]

    def __bool__(self):
        return self.ok

    def describe(self):
        lines = []
        lines.append("ok" if self.ok else "FAILED (%d violation(s))" % len(self.violations))
        for cell, res in self.violations:
            lines.append("  violated at %s" % (cell,))
        for cell in self.untrusted:
            lines.append("  unverifiable at boundary: %s" % (cell,))
        return "\n".join(lines)


def check_twisted(t):
    """Exact verification of (-1)^{pos(j)} d(alpha_ij) + sum_k alpha_kj . alpha_ik = 0
    for every slot pair inside the window; boundary cells needing data below
    the window are reported untrusted, not checked."""
    ops = t.ops
    violations = []
    untrusted = []
    for ki in t.keys:
        trusted_i = t.cell_trusted(ki)
        for kj in t.keys:
            pi, oi = t.slots[ki]
            pj, oj = t.slots[kj]
            deg = 2 + pi - pj
            res = None
            a = t.maps.get((ki, kj))
            if a is not None:
                res = ops.differential(a, oi, oj)
                if pj % 2:
                    res = ops.neg(res)
            for km in t.keys:
                f1 = t.maps.get((ki, km))
                f2 = t.maps.get((km, kj))
                if f1 is None or f2 is None:
                    continue
                term = ops.compose(f2, f1)
                res = term if res is None else ops.add(res, term)
            if res is None or ops.is_zero(res):
                continue
            if not trusted_i:
                untrusted.append((ki, kj))
            else:
                violations.append(((ki, kj), res))
    # also record untrusted cells that happened to look fine (their vanishing
    # may be an artefact of truncation)
    for ki in t.keys:
        if not t.cell_trusted(ki):
            cell = (ki, "*")
            if cell not in untrusted:
                untrusted.append(cell)
    return TwistedReport(not violations, violations, untrusted)


class TwistedMorphism:
    def __init__(self, source, target, degree, components,
                 lower_shift=NEG_INF, untrusted=()):
        self.source = source
        self.target = target
        self.degree = degree
        self.ops = source.ops
        self.components = {}
        for (ki, kj), f in components.items():
            if self.ops.is_zero(f):
                continue
            pi = source.position(ki)
            pj = target.position(kj)
            assert self.ops.degree(f) == degree + pi - pj, \
                "component degree must be total degree + pos(src) - pos(tgt)"
            if lower_shift is not NEG_INF:
                assert pj >= pi + lower_shift
            self.components[(ki, kj)] = f
        self.lower_shift = lower_shift
        self.untrusted = set(untrusted)

    @classmethod
    def identity(cls, t):
        comps = {(k, k): t.ops.identity(t.obj(k)) for k in t.keys}
        return cls(t, t, 0, comps, lower_shift=0)

    @classmethod
    def zero(cls, source, target, degree):
        return cls(source, target, degree, {}, lower_shift=0)

    def component(self, ki, kj):
        f = self.components.get((ki, kj))
        if f is None:
            pi = self.source.position(ki)
            pj = self.target.position(kj)
            return self.ops.zero_morphism(self.source.obj(ki), self.target.obj(kj),
                                          self.degree + pi - pj)
        return f

    def is_zero(self):
        return not self.components

    def is_zero_interior(self):
        return all(pair in self.untrusted for pair in self.components)

    def __eq__(self, other):
        if not isinstance(other, TwistedMorphism):
            return NotImplemented
        if (self.degree != other.degree or self.source != other.source
                or self.target != other.target):
            return False
        for pair in set(self.components) | set(other.components):
            a, b = self.components.get(pair), other.components.get(pair)
            if a is None:
                if not self.ops.is_zero(b):
                    return False
            elif b is None:
                if not self.ops.is_zero(a):
                    return False
            elif not self.ops.is_zero(self.ops.add(a, self.ops.neg(b))):
                return False
        return True

    def __hash__(self):
        raise TypeError("unhashable")

    def add(self, other):
        assert self.degree == other.degree
        ops = self.ops
        comps = dict(self.components)
        for pair, f in other.components.items():
            comps[pair] = ops.add(comps[pair], f) if pair in comps else f
        return TwistedMorphism(self.source, self.target, self.degree, comps,
                               _shift_min(self.lower_shift, other.lower_shift),
                               self.untrusted | other.untrusted)

    def scale(self, c):
        ops = self.ops
        return TwistedMorphism(self.source, self.target, self.degree,
                               {p: ops.scale(c, f) for p, f in self.components.items()},
                               self.lower_shift, self.untrusted)

    def neg(self):
        ops = self.ops
        return TwistedMorphism(self.source, self.target, self.degree,
                               {p: ops.neg(f) for p, f in self.components.items()},
                               self.lower_shift, self.untrusted)

    def sub(self, other):
        return self.add(other.neg())

    def restrict_trusted(self):
        comps = {p: f for p, f in self.components.items() if p not in self.untrusted}
        return TwistedMorphism(self.source, self.target, self.degree, comps,
                               self.lower_shift)


def twisted_hom_d(f):
    """Differential of a twisted-complex morphism:
    (dF)_{ij} = (-1)^{pos(j)} d(f_ij) + sum_m beta_{mj} . f_{im}
                - (-1)^{deg F} sum_m f_{mj} . alpha_{im}."""
    src, tgt, ops = f.source, f.target, f.ops
    D = f.degree
    out = {}
    untrusted = set()

    def put(pair, term):
        out[pair] = ops.add(out[pair], term) if pair in out else term

    tgt_out = {}
    for (km, kj), beta in tgt.maps.items():
        tgt_out.setdefault(km, []).append((kj, beta))
    src_in = {}
    for (ki, km), alpha in src.maps.items():
        src_in.setdefault(km, []).append((ki, alpha))
    for (ki, kj), comp in f.components.items():
        d = ops.differential(comp, src.obj(ki), tgt.obj(kj))
        if tgt.position(kj) % 2:
            d = ops.neg(d)
        put((ki, kj), d)
    for (ki, km), comp in f.components.items():
        for kj, beta in tgt_out.get(km, ()):
            put((ki, kj), ops.compose(beta, comp))
    for (km, kj), comp in f.components.items():
        for ki, alpha in src_in.get(km, ()):
            term = ops.compose(comp, alpha)
            if D % 2 == 0:
                term = ops.neg(term)
            put((ki, kj), term)
    # trust accounting (soft-bottom and soft-top truncations)
    sf, ss, st = f.lower_shift, src.lower_shift, tgt.lower_shift
    for pair in out:
        ki, kj = pair
        pi = src.position(ki)
        pj = tgt.position(kj)
        ok = True
        if tgt.truncated_below:
            ok = ok and sf is not NEG_INF and pi + sf >= tgt.lo
        if src.truncated_below:
            ok = ok and ss is not NEG_INF and pi + ss >= src.lo
        if tgt.truncated_above:
            ok = ok and st is not NEG_INF and pj - st <= tgt.hi - 0
        if src.truncated_above:
            ok = ok and sf is not NEG_INF and pj - sf <= src.hi
        if not ok:
            untrusted.add(pair)
    untrusted |= {p for p in out if p in f.untrusted} | f.untrusted
    res = TwistedMorphism(src, tgt, D + 1, out,
                          _shift_add(sf, _shift_min(0, ss if src.truncated_below else 0,
                                                    st if tgt.truncated_below else 0)),
                          untrusted)
    return res


def compose_twisted(g, f):
    """(g . f)_{il} = sum_k g_{kl} . f_{ik}.  Components whose true value
    would need slots below the middle window are flagged untrusted."""
    assert f.target == g.source, "window/complex mismatch in composition"
    ops = f.ops
    mid = f.target
    out = {}
    for (ki, km), fc in f.components.items():
        for (km2, kl), gc in g.components.items():
            if km2 != km:
                continue
            term = ops.compose(gc, fc)
            pair = (ki, kl)
            out[pair] = ops.add(out[pair], term) if pair in out else term
    untrusted = set(f.untrusted) | set(g.untrusted)
    if mid.truncated_below:
        sf = f.lower_shift
        for ki in f.source.keys:
            pi = f.source.position(ki)
            if sf is NEG_INF or pi + sf < mid.lo:
                for kl in g.target.keys:
                    untrusted.add((ki, kl))
    if mid.truncated_above:
        sg = g.lower_shift
        for kl in g.target.keys:
            pl = g.target.position(kl)
            if sg is NEG_INF or pl - sg > mid.hi:
                for ki in f.source.keys:
                    untrusted.add((ki, kl))
    # propagate untrust through contributing components
    for (ki, km) in f.untrusted:
        for kl in g.target.keys:
            untrusted.add((ki, kl))
    for (km, kl) in g.untrusted:
        for ki in f.source.keys:
            untrusted.add((ki, kl))
    return TwistedMorphism(f.source, g.target, f.degree + g.degree, out,
                           _shift_add(f.lower_shift, g.lower_shift), untrusted)


# ---------------------------------------------------------------------------
# convolution (chain instance only)


def convolve(t):
    """Total complex (+) a_p[-p] with differential = (+-) internal + twisted.
    Requires the instance's objects to be chain complexes."""
    from .graded import GradedModule, GradedMap, ComplexObject, shift_module
    ops = t.ops
    if not hasattr(ops, "object") or ops.name != "chain":
        from .dgcat import InstanceUnsupported
        raise InstanceUnsupported("convolution needs the chain instance")
    field = ops.field
    tags = {key: "s%d!%s" % (i, key) for i, key in enumerate(t.keys)}
    comps = {}
    shifted = {}
    for key in t.keys:
        p, obj = t.slots[key]
        sm = shift_module(obj.module, -p)
        shifted[key] = sm
        for n, ls in sm.components.items():
            comps.setdefault(n, []).extend((tags[key],) + l for l in ls)
    module = GradedModule(comps)
    d = GradedMap(module, module, 1, field)

    def emit(key_s, key_t, gmap, extra_shift_s, extra_shift_t):
        ps = t.position(key_s)
        pt = t.position(key_t)
        for n, sl, dl, v in gmap.entries():
            # source label sl sits in degree n of the unshifted object,
            # hence degree n + ps of the summand
            d.block(n + ps).add_to(
                module.index(n + ps + 1, (tags[key_t],) + dl),
                module.index(n + ps, (tags[key_s],) + sl), v)

    for key in t.keys:
        p, obj = t.slots[key]
        dint = obj.differential if p % 2 == 0 else obj.differential.neg()
        emit(key, key, dint, 0, 0)
    for (ki, kj), alpha in t.maps.items():
        emit(ki, kj, alpha, 0, 0)
    d._prune()
    return ComplexObject(module, d, check=False)


# ---------------------------------------------------------------------------
# twisted bicomplexes


class TwistedBicomplex:
    """A twisted complex whose slots are cells (i, j) >= (0, 0) placed at
    position -(i+j); stored in the column-collapse convention (the collapse of
    a twisted complex of twisted complexes reading inner complexes as
    columns).  `one_sided` is a checked flag, not a type distinction."""

    def __init__(self, collapsed, one_sided=True):
        self.collapsed = collapsed
        self.one_sided = one_sided
        if one_sided:
            for (ki, kj) in collapsed.maps:
                assert ki != kj and collapsed.position(kj) >= collapsed.position(ki) + 1

    def cells(self):
        return self.collapsed.keys

    def check(self):
        return check_twisted(self.collapsed)


def totalize(b, mode):
    """Interpret the bicomplex as a twisted complex; the two modes differ by
    the sign-twisting automorphism (a_ij, (-1)^{ij+kl} alpha)."""
    assert mode in ("rows", "cols")
    if mode == "cols":
        return b.collapsed
    return b.collapsed.sign_twisted(lambda key: -1 if (key[0] * key[1]) % 2 else 1)


def sign_twist_iso(bic):
    """The isomorphism totalize(cols) -> totalize(rows): diagonal components
    (-1)^{ij} id."""
    cols = totalize(bic, "cols")
    rows = totalize(bic, "rows")
    ops = cols.ops
    comps = {}
    for key in cols.keys:
        ident = ops.identity(cols.obj(key))
        comps[(key, key)] = ident if (key[0] * key[1]) % 2 == 0 else ops.neg(ident)
    return TwistedMorphism(cols, rows, 0, comps, lower_shift=0)
