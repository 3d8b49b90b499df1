"""Graded vector spaces with named bases, degree-homogeneous maps, Koszul
tensor calculus, shifts, cohomology and contracting homotopies.

Conventions fixed here and relied on everywhere else:

* Basis labels are tuples of atom strings.  A primitive module wraps each user
  label into a 1-tuple; the monoidal unit has the single label `()` in degree
  0.  Tensor products concatenate label tuples and every module keeps each
  degree's labels sorted, which makes the tensor strictly associative and
  strictly unital on the nose and fixes all matrix representations bit-exactly.
* Cohomological grading: differentials have degree +1.
* The Koszul rule (f (x) g)(x (x) y) = (-1)^{|g| |x|} f(x) (x) g(y).
* Differential on hom: d(f) = d_Y . f - (-1)^{|f|} f . d_X.
"""

from .fields import QQ


class NotContractible(Exception):
    pass


# ---------------------------------------------------------------------------
# sparse matrices (column-major dict of dicts)


class SparseMatrix:
    __slots__ = ("nrows", "ncols", "field", "cols")

    def __init__(self, nrows, ncols, field, cols=None):
        self.nrows = nrows
        self.ncols = ncols
        self.field = field
        self.cols = cols if cols is not None else {}

    @classmethod
    def identity(cls, n, field):
        return cls(n, n, field, {j: {j: field.one} for j in range(n)})

    def copy(self):
        return SparseMatrix(self.nrows, self.ncols, self.field,
                            {j: dict(c) for j, c in self.cols.items()})

    def get(self, i, j):
        return self.cols.get(j, {}).get(i, self.field.zero)

    def set(self, i, j, v):
        assert 0 <= i < self.nrows and 0 <= j < self.ncols
        if self.field.is_zero(v):
            col = self.cols.get(j)
            if col is not None:
                col.pop(i, None)
                if not col:
                    del self.cols[j]
        else:
            self.cols.setdefault(j, {})[i] = v

    def add_to(self, i, j, v):
        self.set(i, j, self.field.add(self.get(i, j), v))

    def entries(self):
        for j in sorted(self.cols):
            for i in sorted(self.cols[j]):
                yield i, j, self.cols[j][i]

    def nnz(self):
        return sum(len(c) for c in self.cols.values())

    def is_zero(self):
        return all(not c for c in self.cols.values())

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            return False
        keys = set(self.cols) | set(other.cols)
        F = self.field
        for j in keys:
            a, b = self.cols.get(j, {}), other.cols.get(j, {})
            for i in set(a) | set(b):
                if not F.is_zero(F.sub(a.get(i, F.zero), b.get(i, F.zero))):
                    return False
        return True

    def __hash__(self):
        raise TypeError("unhashable")

    def add(self, other):
        assert (self.nrows, self.ncols) == (other.nrows, other.ncols)
        out = self.copy()
        for j, col in other.cols.items():
            for i, v in col.items():
                out.add_to(i, j, v)
        return out

    def scale(self, c):
        F = self.field
        if F.is_zero(c):
            return SparseMatrix(self.nrows, self.ncols, F)
        cols = {j: {i: F.mul(c, v) for i, v in col.items()}
                for j, col in self.cols.items()}
        return SparseMatrix(self.nrows, self.ncols, F, cols)

    def neg(self):
        return self.scale(self.field.neg(self.field.one))

    def mul(self, other):
        """self . other (matrix product)."""
        assert self.ncols == other.nrows, "inner dimensions differ"
        F = self.field
        out = SparseMatrix(self.nrows, other.ncols, F)
        for j, bcol in other.cols.items():
            acc = {}
            for k, bv in bcol.items():
                acol = self.cols.get(k)
                if not acol:
                    continue
                for i, av in acol.items():
                    w = F.add(acc.get(i, F.zero), F.mul(av, bv))
                    if F.is_zero(w):
                        acc.pop(i, None)
                    else:
                        acc[i] = w
            if acc:
                out.cols[j] = acc
        return out

    def transpose(self):
        out = SparseMatrix(self.ncols, self.nrows, self.field)
        for j, col in self.cols.items():
            for i, v in col.items():
                out.cols.setdefault(i, {})[j] = v
        return out

    def rows(self):
        """Row-major view: list of dicts col -> value."""
        rows = [dict() for _ in range(self.nrows)]
        for j, col in self.cols.items():
            for i, v in col.items():
                rows[i][j] = v
        return rows


# ---------------------------------------------------------------------------
# exact Gaussian elimination


def _eliminate(rows, ncols, field):
    """Row-reduce sparse rows in place; returns list of (pivot_col, row_idx)
    in increasing pivot order.  Deterministic: scans columns left to right and
    picks the lowest-index usable row."""
    pivots = []
    used = [False] * len(rows)
    for j in range(ncols):
        piv = None
        for r in range(len(rows)):
            if not used[r] and not field.is_zero(rows[r].get(j, field.zero)):
                piv = r
                break
        if piv is None:
            continue
        used[piv] = True
        inv = field.inv(rows[piv][j])
        rows[piv] = {c: field.mul(inv, v) for c, v in rows[piv].items()
                     if not field.is_zero(v)}
        prow = rows[piv]
        for r in range(len(rows)):
            if r == piv:
                continue
            f = rows[r].get(j, field.zero)
            if field.is_zero(f):
                continue
            row = rows[r]
            for c, v in prow.items():
                w = field.sub(row.get(c, field.zero), field.mul(f, v))
                if field.is_zero(w):
                    row.pop(c, None)
                else:
                    row[c] = w
        pivots.append((j, piv))
    return pivots


def rank(sm):
    rows = sm.rows()
    return len(_eliminate(rows, sm.ncols, sm.field))


def kernel_basis(sm):
    """Basis of ker(sm) as a list of column dicts, canonical under the fixed
    column order (one vector per free column, free entry 1, pivot back-fill)."""
    F = sm.field
    rows = sm.rows()
    pivots = _eliminate(rows, sm.ncols, F)
    pivcol = {j: r for j, r in pivots}
    basis = []
    for j in range(sm.ncols):
        if j in pivcol:
            continue
        vec = {j: F.one}
        for pj, pr in pivots:
            v = rows[pr].get(j, F.zero)
            if not F.is_zero(v):
                vec[pj] = F.neg(v)
        basis.append(vec)
    return basis


def solve(sm, b):
    """One solution x of sm . x = b (column dicts), or None.  Free variables
    are set to zero: the canonical minimal-support-under-basis-order choice."""
    F = sm.field
    rows = sm.rows()
    rhs = [b.get(i, F.zero) for i in range(sm.nrows)]
    aug = []
    for i, row in enumerate(rows):
        row = dict(row)
        if not F.is_zero(rhs[i]):
            row[sm.ncols] = rhs[i]
        aug.append(row)
    pivots = _eliminate(aug, sm.ncols, F)
    for row in aug:
        onlyb = not F.is_zero(row.get(sm.ncols, F.zero)) and \
            all(F.is_zero(v) for c, v in row.items() if c != sm.ncols)
        if onlyb:
            return None
    x = {}
    for j, r in pivots:
        v = aug[r].get(sm.ncols, F.zero)
        if not F.is_zero(v):
            x[j] = v
    return x


# ---------------------------------------------------------------------------
# graded modules


def _as_label(lbl):
    if isinstance(lbl, tuple):
        assert all(isinstance(a, str) for a in lbl)
        return lbl
    assert isinstance(lbl, str)
    return (lbl,)


class GradedModule:
    """Finite-support graded vector space with a named, sorted basis."""

    __slots__ = ("components", "_index", "_key")

    def __init__(self, components):
        comps = {}
        seen = set()
        for n, labels in components.items():
            labels = tuple(sorted(_as_label(l) for l in labels))
            if not labels:
                continue
            for l in labels:
                assert l not in seen, "duplicate basis label %r" % (l,)
                seen.add(l)
            comps[int(n)] = labels
        self.components = dict(sorted(comps.items()))
        self._index = {n: {l: i for i, l in enumerate(ls)}
                       for n, ls in self.components.items()}
        self._key = tuple(self.components.items())

    def degrees(self):
        return list(self.components)

    def dim(self, n):
        return len(self.components.get(n, ()))

    def total_dim(self):
        return sum(len(ls) for ls in self.components.values())

    def labels(self, n):
        return self.components.get(n, ())

    def index(self, n, label):
        return self._index[n][label]

    def is_zero(self):
        return not self.components

    def __eq__(self, other):
        return isinstance(other, GradedModule) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return "GradedModule(%s)" % {n: len(l) for n, l in self.components.items()}


ZERO_MODULE = GradedModule({})
UNIT_MODULE = GradedModule({0: [()]})


def make_module(spec):
    """spec: {degree: [label strings]}"""
    return GradedModule({n: [_as_label(l) for l in ls] for n, ls in spec.items()})


def tensor_modules(a, b):
    comps = {}
    for i, la in a.components.items():
        for j, lb in b.components.items():
            comps.setdefault(i + j, []).extend(x + y for x in la for y in lb)
    return GradedModule(comps)


def shift_module(a, n):
    """Degree-k component of a[n] is the (k+n)-component of a."""
    return GradedModule({k - n: list(ls) for k, ls in a.components.items()})


def direct_sum_module(tagged):
    """tagged: list of (atom_prefix, GradedModule); labels get the prefix
    prepended to keep them unique."""
    comps = {}
    for tag, m in tagged:
        for n, ls in m.components.items():
            comps.setdefault(n, []).extend((tag,) + l for l in ls)
    return GradedModule(comps)


# ---------------------------------------------------------------------------
# graded maps


class GradedMap:
    """Degree-homogeneous linear map stored as one sparse block per source
    degree.  Blocks outside the supports are identically zero."""

    __slots__ = ("src", "dst", "degree", "field", "blocks")

    def __init__(self, src, dst, degree, field, blocks=None):
        self.src = src
        self.dst = dst
        self.degree = degree
        self.field = field
        self.blocks = {}
        if blocks:
            for n, sm in blocks.items():
                if not sm.is_zero():
                    assert sm.ncols == src.dim(n) and sm.nrows == dst.dim(n + degree)
                    self.blocks[n] = sm

    @classmethod
    def zero(cls, src, dst, degree, field):
        return cls(src, dst, degree, field)

    @classmethod
    def identity(cls, module, field):
        blocks = {n: SparseMatrix.identity(module.dim(n), field)
                  for n in module.degrees()}
        return cls(module, module, 0, field, blocks)

    @classmethod
    def from_entries(cls, src, dst, degree, field, entries):
        """entries: {(src_label, dst_label): scalar}; degrees inferred."""
        f = cls(src, dst, degree, field)
        for (sl, dl), v in entries.items():
            sl, dl = _as_label(sl), _as_label(dl)
            n = next(n for n in src.degrees() if sl in src._index[n])
            f.block(n)
            f.blocks[n].add_to(dst.index(n + degree, dl), src.index(n, sl), field.of(v))
        f._prune()
        return f

    def _prune(self):
        for n in [n for n, sm in self.blocks.items() if sm.is_zero()]:
            del self.blocks[n]

    def block(self, n):
        sm = self.blocks.get(n)
        if sm is None:
            sm = SparseMatrix(self.dst.dim(n + self.degree), self.src.dim(n), self.field)
            if self.src.dim(n) and self.dst.dim(n + self.degree):
                self.blocks[n] = sm
        return sm

    def entries(self):
        for n in sorted(self.blocks):
            sm = self.blocks[n]
            slabels = self.src.labels(n)
            dlabels = self.dst.labels(n + self.degree)
            for i, j, v in sm.entries():
                yield n, slabels[j], dlabels[i], v

    def is_zero(self):
        return all(sm.is_zero() for sm in self.blocks.values())

    def __eq__(self, other):
        if not isinstance(other, GradedMap):
            return NotImplemented
        if (self.src, self.dst, self.degree) != (other.src, other.dst, other.degree):
            return False
        return self.sub(other).is_zero()

    def __hash__(self):
        raise TypeError("unhashable")

    def add(self, other):
        assert (self.src, self.dst, self.degree) == (other.src, other.dst, other.degree)
        blocks = dict(self.blocks)
        for n, sm in other.blocks.items():
            blocks[n] = blocks[n].add(sm) if n in blocks else sm
        out = GradedMap(self.src, self.dst, self.degree, self.field)
        out.blocks = {n: sm for n, sm in blocks.items() if not sm.is_zero()}
        return out

    def scale(self, c):
        out = GradedMap(self.src, self.dst, self.degree, self.field)
        if self.field.is_zero(c):
            return out
        out.blocks = {n: sm.scale(c) for n, sm in self.blocks.items()}
        return out

    def neg(self):
        return self.scale(self.field.neg(self.field.one))

    def sub(self, other):
        return self.add(other.neg())

    def compose(self, other):
        """self . other; defined only when inner objects are equal."""
        assert other.dst == self.src, "composition: inner objects differ"
        out = GradedMap(other.src, self.dst, other.degree + self.degree, self.field)
        for n, sm in other.blocks.items():
            top = self.blocks.get(n + other.degree)
            if top is None:
                continue
            prod = top.mul(sm)
            if not prod.is_zero():
                out.blocks[n] = prod
        return out

    def __repr__(self):
        return "GradedMap(deg=%d, nnz=%d)" % (
            self.degree, sum(sm.nnz() for sm in self.blocks.values()))


def tensor_maps(f, g):
    """Koszul rule: the block on the (n_a, n_b) source component carries the
    sign (-1)^{|g| n_a}."""
    assert f.field == g.field
    F = f.field
    src = tensor_modules(f.src, g.src)
    dst = tensor_modules(f.dst, g.dst)
    out = GradedMap(src, dst, f.degree + g.degree, F)
    sign_m1 = F.neg(F.one)
    for na, fa in f.blocks.items():
        fsl, fdl = f.src.labels(na), f.dst.labels(na + f.degree)
        for nb, gb in g.blocks.items():
            gsl, gdl = g.src.labels(nb), g.dst.labels(nb + g.degree)
            sgn = sign_m1 if (g.degree % 2) and (na % 2) else F.one
            n = na + nb
            blk = out.block(n)
            sidx = src._index[n]
            didx = dst._index[n + out.degree]
            for j2, col2 in gb.cols.items():
                for i2, v2 in col2.items():
                    for j1, col1 in fa.cols.items():
                        sj = sidx[fsl[j1] + gsl[j2]]
                        for i1, v1 in col1.items():
                            di = didx[fdl[i1] + gdl[i2]]
                            blk.add_to(di, sj, F.mul(sgn, F.mul(v1, v2)))
    out._prune()
    return out


def shift_map(f, n):
    """f viewed between shifted modules; no sign (signs live on differentials)."""
    src = shift_module(f.src, n)
    dst = shift_module(f.dst, n)
    out = GradedMap(src, dst, f.degree, f.field)
    out.blocks = {k - n: sm for k, sm in f.blocks.items()}
    return out


# ---------------------------------------------------------------------------
# complexes


class ComplexObject:
    """Graded module with a degree +1 differential squaring to zero."""

    __slots__ = ("module", "differential")

    def __init__(self, module, differential=None, check=True):
        self.module = module
        if differential is None:
            differential = GradedMap.zero(module, module, 1, QQ)
        assert differential.src == module and differential.dst == module
        assert differential.degree == 1
        if check:
            assert differential.compose(differential).is_zero(), "d^2 != 0"
        self.differential = differential

    @property
    def field(self):
        return self.differential.field

    def __eq__(self, other):
        return (isinstance(other, ComplexObject) and self.module == other.module
                and self.differential == other.differential)

    def __hash__(self):
        return hash(self.module)

    def __repr__(self):
        return "ComplexObject(%r)" % (self.module,)


def shift_complex(a, n):
    """a[n]: components reindexed, differential negated n times."""
    d = shift_map(a.differential, n)
    if n % 2:
        d = d.neg()
    return ComplexObject(shift_module(a.module, n), d, check=False)


def cone_of_identity(module, field):
    """Contractible complex V -> V (identity differential), V in degrees 0, 1
    relative to the given module's grading."""
    top = GradedModule({n + 1: [("c",) + l for l in ls]
                        for n, ls in module.components.items()})
    bot = GradedModule({n: [("b",) + l for l in ls]
                        for n, ls in module.components.items()})
    total = GradedModule({n: list(top.labels(n)) + list(bot.labels(n))
                          for n in set(top.degrees()) | set(bot.degrees())})
    d = GradedMap(total, total, 1, field)
    for n, ls in module.components.items():
        for l in ls:
            d.block(n)
            d.blocks[n].add_to(total.index(n + 1, ("c",) + l),
                               total.index(n, ("b",) + l), field.one)
    d._prune()
    return ComplexObject(total, d)


def cohomology(a, representatives=False):
    """dim H^n = dim ker(d_n) - rank(d_{n-1}) by exact elimination.

    With representatives=True also returns, per degree, kernel vectors
    spanning H^n modulo the image (a full set of coset representatives)."""
    d = a.differential
    assert d.compose(d).is_zero(), "not a complex"
    F = d.field
    m = a.module
    dims = {}
    reps = {}
    for n in m.degrees():
        dn = d.blocks.get(n, SparseMatrix(m.dim(n + 1), m.dim(n), F))
        prev = d.blocks.get(n - 1, SparseMatrix(m.dim(n), m.dim(n - 1), F))
        kdim = m.dim(n) - rank(dn)
        h = kdim - rank(prev)
        if h:
            dims[n] = h
        if representatives and h:
            ker = kernel_basis(dn)
            # reduce kernel vectors against the image, keep an independent set
            img_rows = prev.transpose().rows()
            chosen = []
            rows = list(img_rows)
            _eliminate(rows, m.dim(n), F)
            rows = [r for r in rows if r]
            for v in ker:
                cand = rows + [dict(v) for v in chosen] + [dict(v)]
                if len(_eliminate([dict(r) for r in cand], m.dim(n), F)) > \
                        len(_eliminate([dict(r) for r in cand[:-1]], m.dim(n), F)):
                    chosen.append(v)
                if len(chosen) == h:
                    break
            reps[n] = chosen
    return (dims, reps) if representatives else dims


def _pivot_columns(sm):
    rows = sm.rows()
    pivots = _eliminate(rows, sm.ncols, sm.field)
    return [j for j, _ in pivots]


def _restrict_columns(sm, cols):
    out = SparseMatrix(sm.nrows, len(cols), sm.field)
    for jj, j in enumerate(cols):
        col = sm.cols.get(j)
        if col:
            out.cols[jj] = dict(col)
    return out


def contracting_homotopy(a):
    """h of degree -1 with d h + h d = id, for an exactly acyclic complex.

    Degreewise pivot splitting: the pivot columns S_n of d_n give
    X_n = ker(d_n) (+) span(S_n); acyclicity makes ker(d_n) = im(d_{n-1}) and
    d injective on span(S_{n-1}), so h := (d|span(S_{n-1}))^{-1} on the kernel
    part and 0 on the span part satisfies d h + h d = id exactly.
    """
    d = a.differential
    F = d.field
    m = a.module
    if cohomology(a):
        raise NotContractible("complex has nonzero cohomology")
    pivots = {}
    restricted = {}
    for n in m.degrees():
        dn = d.blocks.get(n, SparseMatrix(m.dim(n + 1), m.dim(n), F))
        pivots[n] = _pivot_columns(dn)
        restricted[n] = _restrict_columns(dn, pivots[n])
    h = GradedMap(m, m, -1, F)
    for n in m.degrees():
        dimn = m.dim(n)
        if dimn == 0 or m.dim(n - 1) == 0:
            continue
        dn = d.blocks.get(n, SparseMatrix(m.dim(n + 1), dimn, F))
        Sn = restricted[n]
        Sprev = restricted.get(n - 1)
        if Sprev is None or Sprev.ncols == 0:
            continue
        pre = pivots[n - 1]
        blk = h.block(n)
        for i in range(dimn):
            # split e_i = k + s with s in span(S_n): solve d_n|S x = d_n e_i
            di = dict(dn.cols.get(i, {}))
            s = {}
            if di:
                x = solve(Sn, di)
                assert x is not None
                for jj, v in x.items():
                    s[pivots[n][jj]] = v
            k = {i: F.one}
            for j, v in s.items():
                k[j] = F.sub(k.get(j, F.zero), v)
            # h(e_i) = (d|span(S_{n-1}))^{-1}(k)
            y = solve(Sprev, k)
            if y is None:
                raise NotContractible("kernel vector not a boundary")
            for jj, v in y.items():
                blk.add_to(pre[jj], i, v)
    h._prune()
    idm = GradedMap.identity(m, F)
    assert d.compose(h).add(h.compose(d)).sub(idm).is_zero()
    return h
