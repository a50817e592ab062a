"""
Coalgebras in the category of A-bimodules, convolution rings and their
representations, the functors attached to a representation, cotensor
products and comodules.

Sweedler-type formulas are evaluated on representatives in K-tensor spaces
and then pushed to the quotient with ``factor_through``, which fails loudly
when a formula does not descend.
"""

from .algebra import AlgebraMap, _from_table, algebra_generators
from .bimod import (
    Bimodule, BimoduleMap, ConstructedBimodule, TensorSpace,
    base_algebra, free_bimodule, hom_space, kron,
    regular_bimodule, tensor_over_A, trace,
)
from .exactlin import (
    NotWellDefined, cokernel_presentation, factor_through, hstack, induced_map,
    kernel_basis, rank, solve, subquotient,
)

__all__ = [
    "Coalgebra", "Representation", "Comodule", "Bicomodule",
    "NotCoassociative", "CounitFails", "NotProjective", "NotRingHom",
    "ActionsFail", "NotInvertible", "ComoduleFails",
    "make_coalgebra", "sweedler_coalgebra", "endomorphism_coalgebra",
    "dual_basis", "dual_module", "convolution_ring", "convolve",
    "make_representation", "identity_representation", "compose_representations",
    "algebra_map_representation",
    "pullback", "pushforward", "pullback_map", "pushforward_map", "monoidal_map",
    "star_functors", "shriek_functors", "push", "pull", "push_map",
    "projection_maps", "trace_adjunction", "cotensor", "make_comodule",
    "make_bicomodule", "regular_bicomodule", "dual_comodule",
    "coalgebra_map_check", "coalgebra_iso_check", "sweedler_iso",
    "trace_adjunction_natural", "projection_maps_natural", "compose_associativity_iso", "LeftComodule", "ConvolutionRing",
]


class NotCoassociative(ValueError):
    def __init__(self, msg="coassociativity fails", witness=None):
        super().__init__(msg)
        self.witness = witness


class CounitFails(ValueError):
    def __init__(self, msg="counit law fails", witness=None):
        super().__init__(msg)
        self.witness = witness


class NotProjective(ValueError):
    pass


class NotRingHom(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class ActionsFail(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class NotInvertible(ArithmeticError):
    def __init__(self, msg, matrix=None):
        super().__init__(msg)
        self.matrix = matrix


class ComoduleFails(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


def _add(d, k, v):
    x = d.get(k)
    d[k] = v if x is None else x + v


def _mat_cols(m):
    return m.columns_sparse()


# ---------------------------------------------------------------- coalgebras

class Coalgebra:
    """(D, Delta, eps) with Delta: D -> D (x)_A D and eps: D -> A."""

    def __init__(self, carrier, dd, comult, counit):
        self.carrier = carrier
        self.dd = dd
        self.comult = comult
        self.counit = counit
        self._reps = None

    def __repr__(self):
        return f"Coalgebra(dim={self.carrier.dim}, over {self.alg.name})"

    @property
    def alg(self):
        return self.carrier.alg

    @property
    def field(self):
        return self.carrier.field

    @property
    def dim(self):
        return self.carrier.dim

    def delta_rep(self, p):
        """Representative {(q, r): c} of Delta(e_p) in D (x)_K D."""
        if self._reps is None:
            W = self.dd.sect @ self.comult
            self._reps = [{self.dd.unindex(k): v for k, v in col.items()}
                          for col in W.columns_sparse()]
        return self._reps[p]

    def delta_rep_of(self, vec):
        out = {}
        for p, c in enumerate(vec):
            if c != 0:
                for k, v in self.delta_rep(p).items():
                    _add(out, k, c * v)
        return out

    def comult_map(self):
        return BimoduleMap(self.carrier, self.dd.obj, self.comult, check=False)

    def counit_map(self):
        return BimoduleMap(self.carrier, regular_bimodule(self.alg), self.counit, check=False)


def make_coalgebra(d, comult, counit, dd=None, check=True):
    """Validate (D, Delta, eps); raises NotCoassociative or CounitFails."""
    dd = dd or TensorSpace([d, d])
    c = Coalgebra(d, dd, comult, counit)
    if check:
        validate_coalgebra(c)
    return c


def validate_coalgebra(c):
    d, f, a = c.carrier, c.field, c.alg
    if c.comult.shape != (c.dd.dim, d.dim) or c.counit.shape != (a.dim, d.dim):
        raise ValueError("comultiplication or counit has the wrong shape")
    from .bimod import NotBimoduleMap
    try:
        BimoduleMap(d, c.dd.obj, c.comult)
    except NotBimoduleMap as e:
        raise NotCoassociative("comultiplication is not a bimodule map", e.witness)
    try:
        BimoduleMap(d, regular_bimodule(a), c.counit)
    except NotBimoduleMap as e:
        raise CounitFails("counit is not a bimodule map", e.witness)
    eps = c.counit.columns_sparse()
    for p in range(d.dim):
        left = [f.zero] * d.dim
        right = [f.zero] * d.dim
        for (q, r), v in c.delta_rep(p).items():
            for k, e in eps[q].items():
                for i, x in d.left_sparse(k)[r].items():
                    left[i] += v * e * x
            for k, e in eps[r].items():
                for i, x in d.right_sparse(k)[q].items():
                    right[i] += v * e * x
        unit = [f.one if i == p else f.zero for i in range(d.dim)]
        if left != unit:
            raise CounitFails("(eps (x) 1) Delta != id", p)
        if right != unit:
            raise CounitFails("(1 (x) eps) Delta != id", p)
    t3 = TensorSpace([d, d, d])
    lhs, rhs = [], []
    for p in range(d.dim):
        l, r = {}, {}
        for (q, s), v in c.delta_rep(p).items():
            for (q1, q2), w in c.delta_rep(q).items():
                _add(l, (q1, q2, s), v * w)
            for (s1, s2), w in c.delta_rep(s).items():
                _add(r, (q, s1, s2), v * w)
        lhs.append(l)
        rhs.append(r)
    L, R = t3.from_flat(lhs), t3.from_flat(rhs)
    if not (L == R):
        bad = next(p for p in range(d.dim) if L.column(p) != R.column(p))
        raise NotCoassociative("(Delta (x) 1) Delta != (1 (x) Delta) Delta", bad)
    return c


def sweedler_coalgebra(a, check=True):
    """A (x)_K A with Delta(x (x) y) = (x (x) 1) (x) (1 (x) y) and eps = multiplication."""
    d = free_bimodule(a)
    dd = TensorSpace([d, d])
    n = a.dim
    f = a.field
    u = [(k, x) for k, x in enumerate(a.unit) if x != 0]
    flats = []
    for i in range(n):
        for j in range(n):
            v = {}
            for k1, x1 in u:
                for k2, x2 in u:
                    _add(v, (i * n + k1, k2 * n + j), x1 * x2)
            flats.append(v)
    comult = dd.from_flat(flats)
    counit = f.from_columns(n, [dict(a.table[i][j]) for i in range(n) for j in range(n)])
    c = make_coalgebra(d, comult, counit, dd, check=check)
    c.kind = "sweedler"
    return c


# ------------------------------------------------------------ modules and duals

def dual_module(p):
    """P* = Hom_A(P, A) for a right A-module P, as a left A-module.

    Returns (P*, hom) where hom is the HomSpace whose basis gives P*'s basis.
    """
    a = p.ralg
    ra = Bimodule(base_algebra(a.field), a.dim, [a.field.eye(a.dim)],
                  [a.rmat(i) for i in range(a.dim)], a)
    h = hom_space(p, ra, left=False, right=True)
    left = []
    for i in range(a.dim):
        cols = [h.coords(a.lmat(i) @ phi) for phi in h.basis]
        left.append(a.field.mat([[c[r] for c in cols] for r in range(h.dim)]) if h.dim
                    else a.field.zeros(0, 0))
    ps = Bimodule(a, h.dim, left, [a.field.eye(h.dim)], base_algebra(a.field), "P*")
    return ps, h


def dual_basis(p, ps=None, h=None):
    """Pairs (p_i, phi_i) with sum_i p_i phi_i(x) = x, or NotProjective.

    Solved linearly: find an element of P (x)_K P* mapping to id_P.
    """
    a = p.ralg
    f = a.field
    if ps is None:
        ps, h = dual_module(p)
    # ev(e_s (x) phi_t)(x) = e_s . phi_t(x), as a column of End_K(P) (row-major)
    cols = []
    for s in range(p.dim):
        es = f.column_vector([f.one if i == s else f.zero for i in range(p.dim)])
        for t in range(h.dim):
            phi = h.basis[t]
            m = f.zeros(p.dim, p.dim)
            for j in range(p.dim):
                val = phi.column(j)
                img = p.right_of(val) @ es
                for i in range(p.dim):
                    if img[i, 0] != 0:
                        m.m[i, j] = img[i, 0]
            cols.append(m)
    if not cols:
        if p.dim == 0:
            return []
        raise NotProjective("no dual basis: P* = 0")
    system = hstack([f.mat(p.dim * p.dim, 1, m.entries()) for m in cols])
    eye = f.eye(p.dim)
    x = solve(system, f.mat(p.dim * p.dim, 1, eye.entries()))
    if x is None:
        raise NotProjective("identity of P is not in the image of P (x) P*")
    pairs = []
    for s in range(p.dim):
        coeff = [x[s * h.dim + t, 0] for t in range(h.dim)]
        if any(c != 0 for c in coeff):
            vec = [f.one if i == s else f.zero for i in range(p.dim)]
            pairs.append((vec, coeff))
    return pairs


def endomorphism_coalgebra(p, check=True):
    """D = P* (x)_K P with the dual-basis comultiplication and evaluation counit."""
    a = p.ralg
    f = a.field
    ps, h = dual_module(p)
    pairs = dual_basis(p, ps, h)
    d = Bimodule(a, ps.dim * p.dim,
                 [kron(x, f.eye(p.dim)) for x in ps.left],
                 [kron(f.eye(ps.dim), y) for y in p.right], a, "P*(x)P")
    dd = TensorSpace([d, d])
    np_, ns = p.dim, ps.dim
    flats = []
    for t in range(ns):
        for s in range(np_):
            v = {}
            for vec, coeff in pairs:
                for i, x in enumerate(vec):
                    if x == 0:
                        continue
                    for u, y in enumerate(coeff):
                        if y != 0:
                            _add(v, (t * np_ + i, u * np_ + s), x * y)
            flats.append(v)
    comult = dd.from_flat(flats)
    counit_cols = []
    for t in range(ns):
        for s in range(np_):
            counit_cols.append(h.basis[t].column_dict(s))
    counit = f.from_columns(a.dim, counit_cols)
    c = make_coalgebra(d, comult, counit, dd, check=check)
    c.module, c.dual, c.dual_hom, c.pairs = p, ps, h, pairs
    return c


# ---------------------------------------------------------- convolution rings

def convolve(c, phi, psi):
    """(phi * psi)(d) = phi(d_(1)) psi(d_(2)) for bimodule maps phi, psi: D -> A."""
    a, f = c.alg, c.field
    pc, qc = phi.columns_sparse(), psi.columns_sparse()
    cols = []
    for p in range(c.dim):
        out = [f.zero] * a.dim
        for (q, r), v in c.delta_rep(p).items():
            x, y = pc[q], qc[r]
            for i, xi in x.items():
                for j, yj in y.items():
                    s = v * xi * yj
                    for k, w in a.table[i][j]:
                        out[k] += s * w
        cols.append({k: x for k, x in enumerate(out) if x != 0})
    return f.from_columns(a.dim, cols)


class ConvolutionRing:
    def __init__(self, algebra, hom, coalg, unit_coords):
        self.algebra = algebra
        self.hom = hom
        self.coalg = coalg
        self.unit_coords = unit_coords

    def functional(self, coords):
        return self.hom.element(coords)


def convolution_ring(c):
    """Hom_A(D, A)_A with convolution product and unit eps, as an Algebra."""
    a = c.alg
    h = hom_space(c.carrier, regular_bimodule(a))
    n = h.dim
    table = []
    for i in range(n):
        row = []
        for j in range(n):
            x = h.coords(convolve(c, h.basis[i], h.basis[j]))
            if x is None:
                raise NotWellDefined("convolution left the hom space", (i, j))
            row.append([(k, v) for k, v in enumerate(x) if v != 0])
        table.append(row)
    unit = h.coords(c.counit)
    alg = _from_table(a.field, n, table, unit, name=f"Conv({c.dim})")
    from .algebra import _validate
    _validate(alg)
    return ConvolutionRing(alg, h, c, unit)


def sweedler_iso(a, conv):
    """The ring map A -> Conv(A (x) A), z -> (x (x) y -> x z y), as an AlgebraMap."""
    f = a.field
    n = a.dim
    cols = []
    for z in range(n):
        phi_cols = [dict(_mul_basis3(a, i, z, j)) for i in range(n) for j in range(n)]
        phi = f.from_columns(n, phi_cols)
        x = conv.hom.coords(phi)
        cols.append({k: v for k, v in enumerate(x) if v != 0})
    return AlgebraMap(a, conv.algebra, f.from_columns(conv.algebra.dim, cols))


def _mul_basis3(a, i, j, k):
    out = {}
    for m, x in a.table[i][j]:
        for r, y in a.table[m][k]:
            _add(out, r, x * y)
    return [(r, v) for r, v in out.items() if v != 0]


# ------------------------------------------------------------ representations

class Representation:
    """B -> Hom_A(D, A)_A with the induced B-bimodule structure on D."""

    def __init__(self, ring, coalg, functionals, induced):
        self.ring = ring
        self.coalg = coalg
        self.functionals = functionals
        self.induced = induced

    def __repr__(self):
        return f"Representation({self.ring.name} over {self.coalg.alg.name}, dim D={self.coalg.dim})"

    @property
    def alg(self):
        return self.coalg.alg

    def functional_of(self, b):
        f = self.coalg.field
        out = f.zeros(self.alg.dim, self.coalg.dim)
        for i, x in enumerate(b):
            if x != 0:
                out = out + self.functionals[i].scale(x)
        return out


def _induced_actions(c, functionals):
    """b.d = d_(1) b(d_(2)) and d.b = b(d_(1)) d_(2)."""
    d, f = c.carrier, c.field
    left, right = [], []
    for phi in functionals:
        pc = phi.columns_sparse()
        lcols, rcols = [], []
        for p in range(d.dim):
            lo, ro = {}, {}
            for (q, r), v in c.delta_rep(p).items():
                for k, x in pc[r].items():
                    for i, y in d.right_sparse(k)[q].items():
                        _add(lo, i, v * x * y)
                for k, x in pc[q].items():
                    for i, y in d.left_sparse(k)[r].items():
                        _add(ro, i, v * x * y)
            lcols.append(lo)
            rcols.append(ro)
        left.append(f.from_columns(d.dim, lcols))
        right.append(f.from_columns(d.dim, rcols))
    return left, right


def make_representation(b, c, functionals, check=True):
    """Validate a ring map B -> Conv(D); raises NotRingHom or ActionsFail."""
    a, f = c.alg, c.field
    if len(functionals) != b.dim:
        raise ValueError("one functional per basis element of B is required")
    if check:
        ra = regular_bimodule(a)
        from .bimod import NotBimoduleMap
        for i, phi in enumerate(functionals):
            try:
                BimoduleMap(c.carrier, ra, phi)
            except NotBimoduleMap:
                raise NotRingHom("functional is not a bimodule map", (i,))
        rep_unit = f.zeros(a.dim, c.dim)
        for i, x in enumerate(b.unit):
            if x != 0:
                rep_unit = rep_unit + functionals[i].scale(x)
        if not (rep_unit == c.counit):
            raise NotRingHom("unit is not sent to the counit", ("unit",))
        for i in range(b.dim):
            for j in range(b.dim):
                lhs = convolve(c, functionals[i], functionals[j])
                rhs = f.zeros(a.dim, c.dim)
                for k, x in b.table[i][j]:
                    rhs = rhs + functionals[k].scale(x)
                if not (lhs == rhs):
                    raise NotRingHom("product not preserved", (i, j))
    left, right = _induced_actions(c, functionals)
    induced = Bimodule(b, c.dim, left, right, b, "D_B")
    if check:
        from .bimod import NotBimodule, validate_bimodule
        try:
            validate_bimodule(induced)
        except NotBimodule as e:
            raise ActionsFail(f"induced B-actions: {e}", e.witness)
        d = c.carrier
        for i in algebra_generators(b):
            for k in algebra_generators(a):
                for x in (left[i], right[i]):
                    if not (x @ d.left[k] == d.left[k] @ x and x @ d.right[k] == d.right[k] @ x):
                        raise ActionsFail("induced action does not commute with A", (i, k))
    return Representation(b, c, list(functionals), induced)


def identity_representation(a, coalg=None):
    """A acting on its Sweedler coalgebra by z -> (x (x) y -> x z y)."""
    c = coalg or sweedler_coalgebra(a, check=False)
    f, n = a.field, a.dim
    funcs = [f.from_columns(n, [dict(_mul_basis3(a, i, z, j)) for i in range(n) for j in range(n)])
             for z in range(n)]
    return make_representation(a, c, funcs)


def algebra_map_representation(alpha, coalg=None):
    """B acting on the Sweedler coalgebra of A through a unital algebra map alpha: B -> A."""
    a, b = alpha.target, alpha.source
    c = coalg or sweedler_coalgebra(a, check=False)
    f, n = a.field, a.dim
    funcs = []
    for k in range(b.dim):
        z = alpha.matrix.column(k)
        cols = []
        for i in range(n):
            for j in range(n):
                out = {}
                for m, x in enumerate(z):
                    if x != 0:
                        for r, v in _mul_basis3(a, i, m, j):
                            _add(out, r, x * v)
                cols.append(out)
        funcs.append(f.from_columns(n, cols))
    return make_representation(b, c, funcs)


def _balanced_relations(dx, dy, x_right, y_left, x_left, y_right, gens):
    """Relations x b (x) y - x (x) b y and b x (x) y - x (x) y b (tensor over B^e)."""
    f = x_right[0].field
    blocks = []
    for k in gens:
        blocks.append(kron(x_right[k], f.eye(dy)) - kron(f.eye(dx), y_left[k]))
        blocks.append(kron(x_left[k], f.eye(dy)) - kron(f.eye(dx), y_right[k]))
    return hstack(blocks, rows=dx * dy, field=f)


def _balanced(dx, dy, rel, out_alg, out_left, out_right, out_ralg, name, factors):
    pres = cokernel_presentation(rel)
    left = [induced_map(x, pres, pres) for x in out_left]
    right = [induced_map(y, pres, pres) for y in out_right]
    out = ConstructedBimodule(out_alg, pres.dim, left, right, pres, factors, out_ralg, name)
    out.kind = "balanced"
    return out


def compose_representations(outer, inner):
    """outer: F -> Conv(E over B), inner: B -> Conv(D over A); the composite over A
    lives on E (x)_{B^e} D."""
    e, dc = outer.coalg, inner.coalg
    b = inner.ring
    if not b.same_structure(e.alg):
        raise ValueError("shape mismatch: inner ring differs from the outer base algebra")
    E, D, Dind = e.carrier, dc.carrier, inner.induced
    f = D.field
    gens = algebra_generators(b)
    rel = _balanced_relations(E.dim, D.dim, E.right, Dind.left, E.left, Dind.right, gens)
    X = _balanced(E.dim, D.dim, rel, D.alg,
                  [kron(f.eye(E.dim), x) for x in D.left],
                  [kron(f.eye(E.dim), y) for y in D.right], D.ralg,
                  "E(x)D", [E, D])
    P = X.presentation.proj
    nE, nD = E.dim, D.dim
    a = D.alg
    # counit: e (x) d -> eps_D(eps_E(e) . d)
    epsE = e.counit.columns_sparse()
    cols = []
    for s in range(nE):
        bvec = [f.zero] * b.dim
        for k, v in epsE[s].items():
            bvec[k] = v
        act = Dind.left_of(bvec)
        m = dc.counit @ act
        for t in range(nD):
            cols.append(m.column_dict(t))
    counit = factor_through(P, f.from_columns(a.dim, cols))
    # comultiplication: (e_(1) (x) d_(1)) (x) (e_(2) (x) d_(2))
    xx = TensorSpace([X, X])
    Pc = P.columns_sparse()
    flats = []
    for s in range(nE):
        for t in range(nD):
            out = {}
            for (q, r), v in e.delta_rep(s).items():
                for (q2, r2), w in dc.delta_rep(t).items():
                    left = Pc[q * nD + q2]
                    right = Pc[r * nD + r2]
                    for i, x in left.items():
                        for j, y in right.items():
                            _add(out, (i, j), v * w * x * y)
            flats.append(out)
    comult = factor_through(P, xx.from_flat(flats))
    coalg = make_coalgebra(X, comult, counit, xx)
    # functionals: e (x) d -> psi_{phi(e)}(d)
    funcs = []
    for phi in outer.functionals:
        pc = phi.columns_sparse()
        cols = []
        for s in range(nE):
            bvec = [f.zero] * b.dim
            for k, v in pc[s].items():
                bvec[k] = v
            psi = inner.functional_of(bvec)
            for t in range(nD):
                cols.append(psi.column_dict(t))
        funcs.append(factor_through(P, f.from_columns(a.dim, cols)))
    return make_representation(outer.ring, coalg, funcs)


def compose_associativity_iso(r3, r2, r1):
    """The coalgebra iso between (E3 E2) E1 and E3 (E2 E1), induced by the identity on
    E3 (x) E2 (x) E1.  Returns (iso matrix or None, left composite, right composite)."""
    left = compose_representations(compose_representations(r3, r2), r1)
    right = compose_representations(r3, compose_representations(r2, r1))
    x, y = left.coalg.carrier, right.coalg.carrier
    x12 = x.factors[0]
    y23 = y.factors[1]
    f = x.field
    n3, n1 = r3.coalg.dim, r1.coalg.dim
    flat_l = x.presentation.proj @ kron(x12.presentation.proj, f.eye(n1))
    flat_r = y.presentation.proj @ kron(f.eye(n3), y23.presentation.proj)
    try:
        t = factor_through(flat_l, flat_r)
    except NotWellDefined:
        return None, left, right
    return (t if coalgebra_iso_check(left.coalg, right.coalg, t) else None), left, right


def coalgebra_map_check(c1, c2, m):
    """True iff the matrix m: D1 -> D2 is a bimodule map with Delta m = (m (x) m) Delta
    and eps m = eps."""
    from .bimod import NotBimoduleMap
    try:
        BimoduleMap(c1.carrier, c2.carrier, m)
    except NotBimoduleMap:
        return False
    if not (c2.counit @ m == c1.counit):
        return False
    mc = m.columns_sparse()
    flats = []
    for p in range(c1.dim):
        out = {}
        for (q, r), v in c1.delta_rep(p).items():
            for i, x in mc[q].items():
                for j, y in mc[r].items():
                    _add(out, (i, j), v * x * y)
        flats.append(out)
    return c2.dd.from_flat(flats) == c2.comult @ m


def coalgebra_iso_check(c1, c2, m):
    return m.rows == m.cols and rank(m) == m.rows and coalgebra_map_check(c1, c2, m)


# ---------------------------------------------------------- the four functors

def pullback(rep, n):
    """f*N = N (x)_{B^e} D for a B-bimodule N, an A-bimodule through D."""
    D, Dind = rep.coalg.carrier, rep.induced
    f = D.field
    rel = _balanced_relations(n.dim, D.dim, n.right, Dind.left, n.left, Dind.right,
                              algebra_generators(rep.ring))
    return _balanced(n.dim, D.dim, rel, D.alg,
                     [kron(f.eye(n.dim), x) for x in D.left],
                     [kron(f.eye(n.dim), y) for y in D.right], D.ralg, "f*N", [n, D])


def pullback_map(rep, g, src=None, tgt=None):
    D = rep.coalg.carrier
    src = src or pullback(rep, g.source)
    tgt = tgt or pullback(rep, g.target)
    mat = induced_map(kron(g.matrix, D.field.eye(D.dim)), src.presentation, tgt.presentation)
    return BimoduleMap(src, tgt, mat, check=False)


def _hom_as_bimodule(h, alg, ralg, left_pre, right_pre, name):
    """Hom space h with actions phi -> phi . left_pre[i] and phi -> phi . right_pre[i]."""
    f = h.source.field

    def act(pre):
        out = []
        for x in pre:
            cols = []
            for phi in h.basis:
                c = h.coords(phi @ x)
                if c is None:
                    raise NotWellDefined("action leaves the hom space")
                cols.append({k: v for k, v in enumerate(c) if v != 0})
            out.append(f.from_columns(h.dim, cols))
        return out

    m = Bimodule(alg, h.dim, act(left_pre), act(right_pre), ralg, name)
    m.hom = h
    return m


def pushforward(rep, m):
    """f_*M = Hom_A(D, M)_A with (b phi)(d) = phi(d b) and (phi b)(d) = phi(b d)."""
    h = hom_space(rep.coalg.carrier, m)
    Dind = rep.induced
    return _hom_as_bimodule(h, rep.ring, rep.ring, Dind.right, Dind.left, "f_*M")


def pushforward_map(rep, g, src=None, tgt=None):
    src = src or pushforward(rep, g.source)
    tgt = tgt or pushforward(rep, g.target)
    f = g.matrix.field
    cols = []
    for phi in src.hom.basis:
        c = tgt.hom.coords(g.matrix @ phi)
        cols.append({k: v for k, v in enumerate(c) if v != 0})
    return BimoduleMap(src, tgt, f.from_columns(tgt.dim, cols), check=False)


def monoidal_map(rep, m1, m2):
    """f_*M1 (x)_B f_*M2 -> f_*(M1 (x)_A M2), phi (x) psi -> (d -> phi(d_(1)) (x) psi(d_(2)))."""
    c = rep.coalg
    f = c.field
    p1, p2 = pushforward(rep, m1), pushforward(rep, m2)
    src = tensor_over_A(p1, p2)
    t12 = TensorSpace([m1, m2])
    tgt = pushforward(rep, t12.obj)
    cols = []
    for phi in p1.hom.basis:
        pc = phi.columns_sparse()
        for psi in p2.hom.basis:
            qc = psi.columns_sparse()
            flats = []
            for p in range(c.dim):
                out = {}
                for (q, r), v in c.delta_rep(p).items():
                    for i, x in pc[q].items():
                        for j, y in qc[r].items():
                            _add(out, (i, j), v * x * y)
                flats.append(out)
            mat = t12.from_flat(flats)
            x = tgt.hom.coords(mat)
            if x is None:
                raise NotWellDefined("monoidal map leaves Hom_A(D, M1 (x) M2)_A")
            cols.append({k: v for k, v in enumerate(x) if v != 0})
    amb = f.from_columns(tgt.dim, cols)
    mat = induced_map(amb, src.presentation, _whole(tgt))
    return BimoduleMap(src, tgt, mat)


def _whole(m):
    from .exactlin import whole_space
    return whole_space(m.field, m.dim)


def star_functors(rep):
    return {
        "pullback": lambda n: pullback(rep, n),
        "pushforward": lambda m: pushforward(rep, m),
        "pullback_map": lambda g: pullback_map(rep, g),
        "pushforward_map": lambda g: pushforward_map(rep, g),
        "monoidal_map": lambda m1, m2: monoidal_map(rep, m1, m2),
    }


def push(rep, fm):
    """f_!F = D (x)_{A^e} F, a B-bimodule through the induced actions on D."""
    D, Dind = rep.coalg.carrier, rep.induced
    f = D.field
    rel = _balanced_relations(D.dim, fm.dim, D.right, fm.left, D.left, fm.right,
                              algebra_generators(D.alg))
    return _balanced(D.dim, fm.dim, rel, rep.ring,
                     [kron(x, f.eye(fm.dim)) for x in Dind.left],
                     [kron(y, f.eye(fm.dim)) for y in Dind.right], rep.ring, "f_!F", [D, fm])


def push_map(rep, g, src=None, tgt=None):
    D = rep.coalg.carrier
    src = src or push(rep, g.source)
    tgt = tgt or push(rep, g.target)
    mat = induced_map(kron(D.field.eye(D.dim), g.matrix), src.presentation, tgt.presentation)
    return BimoduleMap(src, tgt, mat, check=False)


def pull(rep, g):
    """f^!G = Hom_B(D, G)_B with (a phi)(d) = phi(d a) and (phi a)(d) = phi(a d)."""
    h = hom_space(rep.induced, g)
    D = rep.coalg.carrier
    return _hom_as_bimodule(h, D.alg, D.ralg, D.right, D.left, "f^!G")


def shriek_functors(rep):
    return {
        "push": lambda fm: push(rep, fm),
        "pull": lambda g: pull(rep, g),
        "push_map": lambda g: push_map(rep, g),
    }


def _flat_of_balanced(x, inner_proj_left=None, inner_proj_right=None):
    """Projection from the flat ambient onto a balanced tensor whose factors may
    themselves be quotients (given by their flat projections)."""
    f = x.field
    l = inner_proj_left if inner_proj_left is not None else f.eye(x.factors[0].dim)
    r = inner_proj_right if inner_proj_right is not None else f.eye(x.factors[1].dim)
    return x.presentation.proj @ kron(l, r)


def projection_maps(rep, fm, g):
    """The two maps f_!F (x)_B G -> f_!(F (x)_A f*G) and G (x)_B f_!F -> f_!(f*G (x)_A F).

    Elementwise: (d (x) x) (x) g -> d_(2) (x) (x (x) (g (x) d_(1))) and
    g (x) (d (x) x) -> d_(1) (x) ((g (x) d_(2)) (x) x).
    """
    out = _projection_data(rep, fm, g)
    return out["maps"]


def _projection_data(rep, fm, g):
    c = rep.coalg
    D = c.carrier
    f = D.field
    nD, nF, nG = D.dim, fm.dim, g.dim
    pf = push(rep, fm)
    fg = pullback(rep, g)
    # first map
    s1 = tensor_over_A(pf, g)
    s1_flat = s1.presentation.proj @ kron(pf.presentation.proj, f.eye(nG))       # D F G
    inner1 = tensor_over_A(fm, fg)
    t1 = push(rep, inner1)
    inner1_flat = inner1.presentation.proj @ kron(f.eye(nF), fg.presentation.proj)  # F G D
    t1_flat = t1.presentation.proj @ kron(f.eye(nD), inner1_flat)                  # D F G D
    # second map
    s2 = tensor_over_A(g, pf)
    s2_flat = s2.presentation.proj @ kron(f.eye(nG), pf.presentation.proj)       # G D F
    inner2 = tensor_over_A(fg, fm)
    t2 = push(rep, inner2)
    inner2_flat = inner2.presentation.proj @ kron(fg.presentation.proj, f.eye(nF))  # G D F
    t2_flat = t2.presentation.proj @ kron(f.eye(nD), inner2_flat)                  # D G D F
    cols1, cols2 = [], []
    for dd in range(nD):
        rep_d = c.delta_rep(dd)
        for x in range(nF):
            for y in range(nG):
                o = {}
                for (q, r), v in rep_d.items():
                    _add(o, ((r * nF + x) * nG + y) * nD + q, v)
                cols1.append(o)
    for y in range(nG):
        for dd in range(nD):
            rep_d = c.delta_rep(dd)
            for x in range(nF):
                o = {}
                for (q, r), v in rep_d.items():
                    _add(o, ((q * nG + y) * nD + r) * nF + x, v)
                cols2.append(o)
    n4 = nD * nF * nG * nD
    m1 = factor_through(s1_flat, t1_flat @ f.from_columns(n4, cols1))
    m2 = factor_through(s2_flat, t2_flat @ f.from_columns(n4, cols2))
    return {"maps": (BimoduleMap(s1, t1, m1), BimoduleMap(s2, t2, m2)),
            "flats": (s1_flat, t1_flat, s2_flat, t2_flat)}


def projection_maps_natural(rep, h_f, h_g):
    """Both projection maps commute with h_f: F -> F' and h_g: G -> G'."""
    f = h_f.matrix.field
    nD = rep.coalg.dim
    a = _projection_data(rep, h_f.source, h_g.source)
    b = _projection_data(rep, h_f.target, h_g.target)
    s1, t1, s2, t2 = a["flats"]
    s1b, t1b, s2b, t2b = b["flats"]
    hf, hg, e = h_f.matrix, h_g.matrix, f.eye(nD)
    src1 = factor_through(s1, s1b @ kron(kron(e, hf), hg))
    tgt1 = factor_through(t1, t1b @ kron(kron(kron(e, hf), hg), e))
    src2 = factor_through(s2, s2b @ kron(kron(hg, e), hf))
    tgt2 = factor_through(t2, t2b @ kron(kron(kron(e, hg), e), hf))
    m1, m2 = a["maps"]
    n1, n2 = b["maps"]
    return (n1.matrix @ src1 == tgt1 @ m1.matrix) and (n2.matrix @ src2 == tgt2 @ m2.matrix)


class TraceAdjunction:
    def __init__(self, matrix, source_trace, target_trace, source_flat, target_flat):
        self.matrix = matrix
        self.source_trace = source_trace
        self.target_trace = target_trace
        self.source_flat = source_flat
        self.target_flat = target_flat


def _trace_adjunction_data(rep, fm, g):
    D = rep.coalg.carrier
    f = D.field
    nD, nF, nG = D.dim, fm.dim, g.dim
    fg = pullback(rep, g)
    x1 = tensor_over_A(fm, fg)
    tr1 = trace(x1)
    flat1 = tr1.proj @ x1.presentation.proj @ kron(f.eye(nF), fg.presentation.proj)  # F G D
    pf = push(rep, fm)
    y1 = tensor_over_A(pf, g)
    tr2 = trace(y1)
    flat2 = tr2.proj @ y1.presentation.proj @ kron(pf.presentation.proj, f.eye(nG))  # D F G
    from .bimod import permute_factors
    perm = permute_factors(f, [nF, nG, nD], [2, 0, 1])
    return flat1, flat2, perm, tr1, tr2


def trace_adjunction(rep, fm, g):
    """Tr_A(F (x)_A f*G) -> Tr_B(f_!F (x)_B G), x (x) (g (x) d) -> (d (x) x) (x) g.

    Raises NotInvertible when the induced map is not an isomorphism.
    """
    flat1, flat2, perm, tr1, tr2 = _trace_adjunction_data(rep, fm, g)
    t = factor_through(flat1, flat2 @ perm)
    if t.rows != t.cols or rank(t) != t.rows:
        raise NotInvertible("trace adjunction map is not invertible", t)
    return t


def trace_adjunction_natural(rep, h_f, h_g):
    """Check naturality of the trace adjunction along h_f: F -> F' and h_g: G -> G'."""
    fm, fm2 = h_f.source, h_f.target
    g, g2 = h_g.source, h_g.target
    f = fm.field
    D = rep.coalg.carrier
    t = trace_adjunction(rep, fm, g)
    t2 = trace_adjunction(rep, fm2, g2)
    flat1, flat2, _, _, _ = _trace_adjunction_data(rep, fm, g)
    flat1b, flat2b, _, _, _ = _trace_adjunction_data(rep, fm2, g2)
    src_map = factor_through(flat1, flat1b @ kron(kron(h_f.matrix, h_g.matrix), f.eye(D.dim)))
    tgt_map = factor_through(flat2, flat2b @ kron(kron(f.eye(D.dim), h_f.matrix), h_g.matrix))
    return t2 @ src_map == tgt_map @ t


# ----------------------------------------------------------------- comodules

class Comodule:
    """A right A-module (or bimodule) P with a right coaction P -> P (x)_A C."""

    def __init__(self, module, coalg, space, coaction):
        self.module = module
        self.coalg = coalg
        self.space = space
        self.coaction = coaction
        self._reps = None

    def coaction_rep(self, p):
        if self._reps is None:
            W = self.space.sect @ self.coaction
            self._reps = [{self.space.unindex(k): v for k, v in col.items()}
                          for col in W.columns_sparse()]
        return self._reps[p]


def _check_right_coaction(p, c, space, coaction, reps):
    f = c.field
    eps = c.counit.columns_sparse()
    for s in range(p.dim):
        out = [f.zero] * p.dim
        for (q, r), v in reps[s].items():
            for k, e in eps[r].items():
                for i, x in p.right_sparse(k)[q].items():
                    out[i] += v * e * x
        if out != [f.one if i == s else f.zero for i in range(p.dim)]:
            raise ComoduleFails("counit law of the coaction fails", s)
    t3 = TensorSpace([p, c.carrier, c.carrier])
    lhs, rhs = [], []
    for s in range(p.dim):
        l, r = {}, {}
        for (q, t), v in reps[s].items():
            for (q1, q2), w in reps[q].items():
                _add(l, (q1, q2, t), v * w)
            for (t1, t2), w in c.delta_rep(t).items():
                _add(r, (q, t1, t2), v * w)
        lhs.append(l)
        rhs.append(r)
    if not (t3.from_flat(lhs) == t3.from_flat(rhs)):
        raise ComoduleFails("coassociativity of the coaction fails")


def make_comodule(p, c, coaction, check=True):
    """Right C-comodule structure on p (a right A-module or an A-bimodule)."""
    space = TensorSpace([p, c.carrier])
    if coaction.shape != (space.dim, p.dim):
        raise ComoduleFails("coaction has the wrong shape")
    m = Comodule(p, c, space, coaction)
    if check:
        from .bimod import NotBimoduleMap
        try:
            BimoduleMap(p, space.obj, coaction)
        except NotBimoduleMap as e:
            raise ComoduleFails("coaction is not A-linear", e.witness)
        _check_right_coaction(p, c, space, coaction, [m.coaction_rep(s) for s in range(p.dim)])
    return m


class LeftComodule:
    """A left A-module Q with a left coaction Q -> C (x)_A Q."""

    def __init__(self, module, coalg, space, coaction):
        self.module = module
        self.coalg = coalg
        self.space = space
        self.coaction = coaction

    def coaction_rep(self, p):
        col = (self.space.sect @ self.coaction).column_dict(p)
        return {self.space.unindex(k): v for k, v in col.items()}


def _check_left_coaction(q, c, space, coaction):
    f = c.field
    W = space.sect @ coaction
    reps = [{space.unindex(k): v for k, v in col.items()} for col in W.columns_sparse()]
    eps = c.counit.columns_sparse()
    for s in range(q.dim):
        out = [f.zero] * q.dim
        for (t, r), v in reps[s].items():
            for k, e in eps[t].items():
                for i, x in q.left_sparse(k)[r].items():
                    out[i] += v * e * x
        if out != [f.one if i == s else f.zero for i in range(q.dim)]:
            raise ComoduleFails("counit law of the left coaction fails", s)
    t3 = TensorSpace([c.carrier, c.carrier, q])
    lhs, rhs = [], []
    for s in range(q.dim):
        l, r = {}, {}
        for (t, u), v in reps[s].items():
            for (t1, t2), w in c.delta_rep(t).items():
                _add(l, (t1, t2, u), v * w)
            for (u1, u2), w in reps[u].items():
                _add(r, (t, u1, u2), v * w)
        lhs.append(l)
        rhs.append(r)
    if not (t3.from_flat(lhs) == t3.from_flat(rhs)):
        raise ComoduleFails("coassociativity of the left coaction fails")
    return reps


def dual_comodule(m):
    """Left C-comodule on P* = Hom_A(P, A): phi -> sum_i phi(p_i(0)) p_i(1) (x) p*_i."""
    p, c = m.module, m.coalg
    ps, h = dual_module(p)
    pairs = dual_basis(p, ps, h)
    space = TensorSpace([c.carrier, ps])
    flats = []
    for t in range(h.dim):
        phi = h.basis[t].columns_sparse()
        out = {}
        for vec, coeff in pairs:
            for i, x in enumerate(vec):
                if x == 0:
                    continue
                for (q, r), v in m.coaction_rep(i).items():
                    # phi(p_(0)) . p_(1) in C, then (x) p*_i
                    for k, y in phi[q].items():
                        for j, z in c.carrier.left_sparse(k)[r].items():
                            for u, w in enumerate(coeff):
                                if w != 0:
                                    _add(out, (j, u), x * v * y * z * w)
        flats.append(out)
    coaction = space.from_flat(flats)
    _check_left_coaction(ps, c, space, coaction)
    out = LeftComodule(ps, c, space, coaction)
    out.hom = h
    return out


class Bicomodule:
    """An A-bimodule M with compatible left and right C-coactions."""

    def __init__(self, module, coalg, lspace, lco, rspace, rco):
        self.module = module
        self.coalg = coalg
        self.lspace, self.lco = lspace, lco
        self.rspace, self.rco = rspace, rco
        self.lreps = [{lspace.unindex(k): v for k, v in col.items()}
                      for col in (lspace.sect @ lco).columns_sparse()]
        self.rreps = [{rspace.unindex(k): v for k, v in col.items()}
                      for col in (rspace.sect @ rco).columns_sparse()]

    @property
    def dim(self):
        return self.module.dim


def make_bicomodule(m, c, lco, rco, check=True):
    lspace = TensorSpace([c.carrier, m])
    rspace = TensorSpace([m, c.carrier])
    if check:
        from .bimod import NotBimoduleMap
        try:
            BimoduleMap(m, lspace.obj, lco)
            BimoduleMap(m, rspace.obj, rco)
        except NotBimoduleMap as e:
            raise ComoduleFails("coaction is not a bimodule map", e.witness)
        _check_left_coaction(m, c, lspace, lco)
        make_comodule(m, c, rco)
        # compatibility (1 (x) rho) lambda = (lambda (x) 1) rho in C (x) M (x) C
        b = Bicomodule(m, c, lspace, lco, rspace, rco)
        t3 = TensorSpace([c.carrier, m, c.carrier])
        lhs, rhs = [], []
        for s in range(m.dim):
            l, r_ = {}, {}
            for (t, u), v in b.lreps[s].items():
                for (u1, u2), w in b.rreps[u].items():
                    _add(l, (t, u1, u2), v * w)
            for (u, t), v in b.rreps[s].items():
                for (t1, u1), w in b.lreps[u].items():
                    _add(r_, (t1, u1, t), v * w)
            lhs.append(l)
            rhs.append(r_)
        if not (t3.from_flat(lhs) == t3.from_flat(rhs)):
            raise ComoduleFails("left and right coactions are not compatible")
        return b
    return Bicomodule(m, c, lspace, lco, rspace, rco)


def regular_bicomodule(c):
    """C as a C-bicomodule through Delta on both sides."""
    return make_bicomodule(c.carrier, c, c.comult, c.comult, check=False)


def cotensor(b1, b2):
    """M1 box^C M2 = ker(M1 (x)_A M2 -> M1 (x)_A C (x)_A M2) as a Subquotient of M1 (x)_A M2.

    Returns (subquotient, tensor space of M1 (x)_A M2).
    """
    c = b1.coalg
    f = c.field
    m1, m2 = b1.module, b2.module
    t2 = TensorSpace([m1, m2])
    t3 = TensorSpace([m1, c.carrier, m2])
    flats = []
    for x in range(m1.dim):
        for y in range(m2.dim):
            o = {}
            for (q, r), v in b1.rreps[x].items():
                _add(o, (q, r, y), v)
            for (q, r), v in b2.lreps[y].items():
                _add(o, (x, q, r), -v)
            flats.append(o)
    amb = t3.from_flat(flats)
    diff = factor_through(t2.proj, amb)
    k = kernel_basis(diff)
    return subquotient(k, f.zeros(t2.dim, 0)), t2
