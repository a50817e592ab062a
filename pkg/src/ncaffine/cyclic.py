"""
Coefficient systems (M, beta), the cyclic object Tr(M (x)_A C^(x)n), its
identities, and Hochschild / cyclic / periodic cyclic homology.

Tensor products over A are handled through bimodule presentations: every
factor X_i (i >= 2) is written as a quotient of a free bimodule A (x) G_i (x) A.
A chain X_1 (x)_A ... (x)_A X_k then has coordinates

    open:    X_1 (x) G_2 (x) A (x) G_3 (x) ... (x) A (x) G_k (x) A
    closed:  X_1 (x) G_2 (x) A (x) G_3 (x) ... (x) A (x) G_k        (trace)

modulo the relations coming from non-free factors.  Elementwise formulas act
on pure-tensor representatives and the map ``phi`` sends K-tensors to these
coordinates.  For free factors no elimination is needed at all.
"""

import random
from itertools import product

from .bimod import (
    BimoduleMap, TensorSpace, hom_AA, trace as trace_space,
)
from .coalg import pullback, push, sweedler_coalgebra
from .exactlin import (
    NotWellDefined, cokernel_presentation, hstack, kernel_basis, rank, rref,
    vstack, whole_space,
)

__all__ = [
    "CoefficientSystem", "CyclicObject", "HomologyTable", "MissingCoaugmentation",
    "BoundaryFails", "InsufficientDegrees", "SquareFails",
    "make_coefficient_system", "classical_system", "trivial_system",
    "check_coefficient_system", "build_cyclic_object", "verify_cyclic_identities",
    "classical_cyclic_object", "homology", "mixed_complex_check",
    "functorial_map", "gauge_braiding", "scaled_braiding", "textbook_operators",
    "trace_faithful_on_endomorphisms", "canonical_theta", "canonical_phi",
    "induced_homology_rank", "identities_for_diagram",
]


class MissingCoaugmentation(ValueError):
    pass


class BoundaryFails(ArithmeticError):
    def __init__(self, msg, degree=None):
        super().__init__(msg)
        self.degree = degree


class InsufficientDegrees(ValueError):
    pass


class SquareFails(ArithmeticError):
    def __init__(self, msg, defect=None):
        super().__init__(msg)
        self.defect = defect


def _add(d, k, v):
    x = d.get(k)
    if x is None:
        d[k] = v
    else:
        x = x + v
        if x == 0:
            del d[k]
        else:
            d[k] = x


def _vec_dict(col):
    return {k: v for k, v in enumerate(col) if v != 0}


# --------------------------------------------------------------- presentations

class Presentation:
    """X as a quotient of the free bimodule A (x) G (x) A.

    ``sigma[k]`` lists (a, s, b, c) with e_k = sum c a g_s b; ``rel`` spans the
    kernel of the presentation map as dicts over (a, s, b).
    """

    def __init__(self, x, hint=()):
        a = x.alg
        f = x.field
        self.module = x
        da = a.dim
        gens = []
        rng = random.Random(len(hint) * 7919 + x.dim)
        rand = {k: f(rng.randint(-3, 3)) for k in range(x.dim)}
        cands = ([dict(h) for h in hint] + [{k: f.one} for k in range(x.dim)]
                 + [{k: v for k, v in rand.items() if v != 0}])
        have = 0
        while have < x.dim:
            best, best_rank = None, have
            for g in cands:
                if not g:
                    continue
                r_ = self._image(x, gens + [g]).cols
                if r_ > best_rank:
                    best, best_rank = g, r_
                    if r_ == x.dim:
                        break
            gens.append(best)
            have = best_rank
        self.gens = gens
        r = len(gens)
        self.r = r
        cols = []
        for ai in range(da):
            for s in range(r):
                gv = gens[s]
                for bi in range(da):
                    cols.append(self._agb(x, ai, gv, bi))
        P = f.from_columns(x.dim, cols)
        _, piv = rref(P)
        S = P.submatrix(cols=piv).inverse()
        sc = S.columns_sparse()
        self.sigma = []
        for k in range(x.dim):
            out = []
            for j, c in sc[k].items():
                ai, rest = divmod(piv[j], r * da)
                s, bi = divmod(rest, da)
                out.append((ai, s, bi, c))
            self.sigma.append(out)
        ker = kernel_basis(P)
        self.rel = []
        for col in ker.columns_sparse():
            d = {}
            for j, c in col.items():
                ai, rest = divmod(j, r * da)
                s, bi = divmod(rest, da)
                d[(ai, s, bi)] = c
            self.rel.append(d)
        self.free = not self.rel
        # e_a . g_s as vectors, for building representatives
        self._ag = {}

    @staticmethod
    def _agb(x, ai, g, bi):
        out = {}
        for k, v in g.items():
            for i, y in x.right_sparse(bi)[k].items():
                for j, z in x.left_sparse(ai)[i].items():
                    _add(out, j, v * y * z)
        return out

    @staticmethod
    def _image(x, gens):
        f = x.field
        a = x.alg
        cols = [Presentation._agb(x, ai, g, bi) for g in gens
                for ai in range(a.dim) for bi in range(a.dim)]
        from .exactlin import image_basis
        return image_basis(f.from_columns(x.dim, cols))

    def ag(self, ai, s):
        key = (ai, s)
        if key not in self._ag:
            out = {}
            for k, v in self.gens[s].items():
                for j, z in self.module.left_sparse(ai)[k].items():
                    _add(out, j, v * z)
            self._ag[key] = out
        return self._ag[key]

    def agb(self, ai, s, bi):
        return self._agb(self.module, ai, self.gens[s], bi)

    def expand(self, vec):
        """sigma applied to a sparse vector: dict (a, s, b) -> coeff."""
        out = {}
        for k, v in vec.items():
            for ai, s, bi, c in self.sigma[k]:
                _add(out, (ai, s, bi), v * c)
        return out


_PRES_CACHE = {}


def presentation(x, hint=()):
    key = id(x)
    got = _PRES_CACHE.get(key)
    if got is None or got[0] is not x:
        hint = tuple(hint) or tuple(getattr(x, "generator_hint", ()))
        got = (x, Presentation(x, hint))
        _PRES_CACHE[key] = got
    return got[1]


# ---------------------------------------------------------------------- chains

class Chain:
    """Coordinates for X_1 (x)_A ... (x)_A X_k, open or closed (under the trace)."""

    def __init__(self, factors, closed, pres=None):
        self.factors = list(factors)
        self.closed = closed
        self.k = len(factors)
        a = factors[0].alg
        self.alg = a
        self.field = factors[0].field
        self.unit = _vec_dict(a.unit)
        if pres is None:
            pres = [None] + [presentation(x) for x in factors[1:]]
        self.pres = pres
        k = self.k
        dims = [factors[0].dim]
        for i in range(1, k):
            dims.append(pres[i].r)
            if i < k - 1 or not closed:
                dims.append(a.dim)
        if k == 1 and closed:
            raise ValueError("single-factor traces use the generic trace")
        self.slot_dims = dims
        n = 1
        for d in dims:
            n *= d
        self.ndim = n
        self._quot = None

    def index(self, slots):
        k = 0
        for d, i in zip(self.slot_dims, slots):
            k = k * d + i
        return k

    def unindex(self, k):
        out = []
        for d in reversed(self.slot_dims):
            k, r = divmod(k, d)
            out.append(r)
        return tuple(reversed(out))

    # -- the map from K-tensors to coordinates
    def phi(self, terms):
        """terms: list of (coeff, [sparse vectors, one per factor]) -> sparse coordinates."""
        a = self.alg
        out = {}
        for coeff, vecs in terms:
            states = {}
            for x1, v in vecs[0].items():
                _add(states, (x1, (), None), coeff * v)
            for i in range(1, self.k):
                exp = self.pres[i].expand(vecs[i])
                new = {}
                for (x1, slots, pend), v in states.items():
                    for (ai, s, bi), c in exp.items():
                        w = v * c
                        if i == 1:
                            for j, y in self.factors[0].right_sparse(ai)[x1].items():
                                _add(new, (j, (s,), bi), w * y)
                        else:
                            for m, y in a.table[pend][ai]:
                                _add(new, (x1, slots + (m, s), bi), w * y)
                states = new
            for (x1, slots, pend), v in states.items():
                if self.k == 1:
                    _add(out, self.index((x1,)), v)
                elif self.closed:
                    for j, y in self.factors[0].left_sparse(pend)[x1].items():
                        _add(out, self.index((j,) + slots), v * y)
                else:
                    _add(out, self.index((x1,) + slots + (pend,)), v)
        return out

    def representative(self, idx):
        """A pure tensor whose class is the free coordinate vector e_idx."""
        slots = self.unindex(idx)
        f = self.field
        vecs = [{slots[0]: f.one}]
        for i in range(1, self.k):
            gpos = 2 * i - 1
            s = slots[gpos]
            v = dict(self.pres[i].gens[s]) if i == 1 else self.pres[i].ag(slots[gpos - 1], s)
            if i == self.k - 1 and not self.closed:
                x = self.factors[i]
                out = {}
                for k, c in v.items():
                    for j, y in x.right_sparse(slots[gpos + 1])[k].items():
                        _add(out, j, c * y)
                v = out
            vecs.append(v)
        return vecs

    # -- relations and quotient
    def relations(self):
        rels = []
        k = self.k
        dims = self.slot_dims
        for i in range(1, k):
            pr = self.pres[i]
            if pr.free:
                continue
            gpos = 1 + 2 * (i - 1)
            before = gpos - 1 if i >= 2 else None   # A-slot before G_i (i >= 2 in 0-based factor index)
            after = gpos + 1 if gpos + 1 < len(dims) else None
            fixed = {gpos}
            if i >= 2:
                fixed.add(before)
            if after is not None:
                fixed.add(after)
            free_pos = [p for p in range(len(dims)) if p not in fixed]
            for combo in product(*[range(dims[p]) for p in free_pos]):
                base = dict(zip(free_pos, combo))
                for r in pr.rel:
                    vec = {}
                    for (ai, s, bi), c in r.items():
                        slots = dict(base)
                        slots[gpos] = s
                        coeff = c
                        x1_terms = {slots[0]: self.field.one}
                        if i == 1:
                            x1_terms = dict(self.factors[0].right_sparse(ai)[slots[0]])
                        else:
                            slots[before] = ai
                        if after is not None:
                            slots[after] = bi
                            targets = [(x1, y) for x1, y in x1_terms.items()]
                        else:
                            # closed chain, last factor: b acts on X_1 from the left
                            targets = []
                            for x1, y in x1_terms.items():
                                for j, z in self.factors[0].left_sparse(bi)[x1].items():
                                    targets.append((j, y * z))
                        for x1, y in targets:
                            slots[0] = x1
                            key = self.index([slots[p] for p in range(len(dims))])
                            _add(vec, key, coeff * y)
                    if vec:
                        rels.append(vec)
        return rels

    def quotient(self):
        if self._quot is None:
            rels = self.relations()
            if not rels:
                q = whole_space(self.field, self.ndim)
            else:
                q = cokernel_presentation(self.field.from_columns(self.ndim, rels))
            self._quot = q
        return self._quot

    @property
    def dim(self):
        return self.quotient().dim

    def basis_terms(self):
        """Representatives of the quotient basis as lists of terms."""
        q = self.quotient()
        out = []
        if q.sect_cols is not None:
            for idx in q.sect_cols:
                out.append([(self.field.one, self.representative(idx))])
            return out
        for col in q.sect.columns_sparse():
            out.append([(c, self.representative(idx)) for idx, c in col.items()])
        return out

    def coords_matrix(self, term_lists):
        """Quotient coordinates of several combinations of pure tensors, as columns."""
        F = self.field.from_columns(self.ndim, [self.phi(t) for t in term_lists])
        q = self.quotient()
        if q.sect_cols is not None and len(q.sect_cols) == self.ndim:
            return F
        return q.proj @ F


class TraceLevel:
    """Tr(X) of a single bimodule via the generic commutator quotient."""

    def __init__(self, x):
        self.factors = [x]
        self.field = x.field
        self.k = 1
        self.sq = trace_space(x)
        self.ndim = x.dim

    @property
    def dim(self):
        return self.sq.dim

    def quotient(self):
        return self.sq

    def basis_terms(self):
        return [[(self.field.one, [col])] for col in self.sq.sect.columns_sparse()]

    def phi(self, terms):
        out = {}
        for c, vecs in terms:
            for k, v in vecs[0].items():
                _add(out, k, c * v)
        return out

    def coords_matrix(self, term_lists):
        F = self.field.from_columns(self.ndim, [self.phi(t) for t in term_lists])
        return self.sq.proj @ F


class OpenSingle:
    """An open chain with one factor: the bimodule itself."""

    def __init__(self, x):
        self.factors = [x]
        self.field = x.field
        self.k = 1
        self.ndim = x.dim

    @property
    def dim(self):
        return self.ndim

    def basis_terms(self):
        return [[(self.field.one, [{k: self.field.one}])] for k in range(self.ndim)]

    def phi(self, terms):
        out = {}
        for c, vecs in terms:
            for k, v in vecs[0].items():
                _add(out, k, c * v)
        return out

    def coords_matrix(self, term_lists):
        return self.field.from_columns(self.ndim, [self.phi(t) for t in term_lists])


def make_chain(factors, closed):
    if len(factors) == 1:
        return TraceLevel(factors[0]) if closed else OpenSingle(factors[0])
    return Chain(factors, closed)


# ---------------------------------------------------------- coefficient systems

class CoefficientSystem:
    """(C, M, beta: C (x)_A M -> M (x)_A C) with an optional coaugmentation delta."""

    def __init__(self, coalg, coeff, beta, delta=None, name=None):
        self.coalg = coalg
        self.coeff = coeff
        self.beta = beta
        self.delta = delta
        self.name = name
        C, M = coalg.carrier, coeff
        self.cm = TensorSpace([C, M])
        self.mc = TensorSpace([M, C])
        if beta.shape != (self.mc.dim, self.cm.dim):
            raise ValueError("braiding has the wrong shape")
        self.beta_inv = beta.inverse() if rank(beta) == beta.rows == beta.cols else None
        self._beta_amb = _amb_pairs(self.mc, beta @ self.cm.proj)
        self._beta_inv_amb = (None if self.beta_inv is None
                              else _amb_pairs(self.cm, self.beta_inv @ self.mc.proj))
        self._delta_amb = None if delta is None else _amb_pairs(self.mc, delta)
        self._eps = coalg.counit.columns_sparse()
        self._delta_c = [coalg.delta_rep(p) for p in range(coalg.dim)]

    @property
    def alg(self):
        return self.coeff.alg

    @property
    def field(self):
        return self.coeff.field

    def beta_pair(self, c, m):
        """beta(c (x) m) as a list of (coeff, m', c')."""
        return _apply_pairs(self._beta_amb, c, m, self.coeff.dim)

    def beta_inv_pair(self, m, c):
        if self._beta_inv_amb is None:
            raise NotWellDefined("braiding is not invertible")
        return _apply_pairs(self._beta_inv_amb, m, c, self.coalg.dim)

    def delta_of(self, m):
        if self._delta_amb is None:
            raise MissingCoaugmentation("no coaugmentation supplied")
        out = []
        for k, v in m.items():
            for (x, y), c in self._delta_amb[k].items():
                out.append((v * c, x, y))
        return out

    def eps(self, c):
        out = {}
        for k, v in c.items():
            for i, x in self._eps[k].items():
                _add(out, i, v * x)
        return out

    def comult(self, c):
        out = []
        for k, v in c.items():
            for (x, y), w in self._delta_c[k].items():
                out.append((v * w, x, y))
        return out


def _amb_pairs(space, mat):
    """Columns of space.sect @ mat as dicts over leaf index pairs."""
    W = space.sect @ mat
    return [{space.unindex(k): v for k, v in col.items()} for col in W.columns_sparse()]


def _apply_pairs(table, x, y, dy):
    out = {}
    for i, u in x.items():
        for j, w in y.items():
            for key, c in table[i * dy + j].items():
                _add(out, key, u * w * c)
    return [(c, k1, k2) for (k1, k2), c in out.items()]


def make_coefficient_system(coalg, coeff, beta, delta=None, check=True, name=None):
    cs = CoefficientSystem(coalg, coeff, beta, delta, name)
    if check:
        BimoduleMap(cs.cm.obj, cs.mc.obj, beta)
        if cs.beta_inv is None:
            raise ValueError("braiding is not invertible")
        if delta is not None:
            BimoduleMap(coeff, cs.mc.obj, delta)
            f = cs.field
            for k in range(coeff.dim):
                out = {}
                for c, m1, c1 in cs.delta_of({k: f.one}):
                    for a, x in cs.eps({c1: f.one}).items():
                        for j, y in coeff.right_sparse(a)[m1].items():
                            _add(out, j, c * x * y)
                if out != {k: f.one}:
                    raise ValueError("coaugmentation fails (1 (x) eps) delta = id")
    return cs


def trivial_system(coalg, name=None):
    """M = C with the identity braiding and delta = Delta."""
    C = coalg.carrier
    beta = coalg.field.eye(coalg.dd.dim)
    return make_coefficient_system(coalg, C, beta, coalg.comult, name=name or "trivial")


def classical_system(a, coalg=None):
    """The Sweedler system of A: C = M = A (x)_K A, identity braiding."""
    c = coalg or sweedler_coalgebra(a, check=a.dim < 4)
    return trivial_system(c, name=f"classical({a.name})")


def gauge_braiding(cs, gamma):
    """(gamma (x) 1) beta (1 (x) gamma^-1) for a bimodule automorphism gamma of M."""
    f = cs.field
    from .bimod import kron
    g = gamma
    gi = gamma.inverse()
    left = cs.mc.proj @ kron(g, f.eye(cs.coalg.dim)) @ cs.mc.sect
    right = cs.cm.proj @ kron(f.eye(cs.coalg.dim), gi) @ cs.cm.sect
    beta = left @ cs.beta @ right
    delta = None
    if cs.delta is not None:
        delta = left @ cs.delta @ gi
    return make_coefficient_system(cs.coalg, cs.coeff, beta, delta, name="gauge")


def scaled_braiding(cs, lam):
    lam = cs.field(lam)
    delta = cs.delta
    return make_coefficient_system(cs.coalg, cs.coeff, cs.beta.scale(lam), delta,
                                   check=False, name=f"scaled({lam})")


# ----------------------------------------------------------- element operations
#
# A term is (coeff, [v_0, ..., v_k]) with v_i sparse vectors; each factor is
# tagged by the word ("M" or "C").

def _owner(cs, vecs, i):
    return cs.coeff if vecs.kinds[i] == "M" else cs.coalg.carrier


class Word(list):
    """A list of sparse vectors tagged with factor kinds."""

    def __init__(self, vecs, kinds):
        super().__init__(vecs)
        self.kinds = tuple(kinds)

    def __add__(self, other):
        raise TypeError("use splice")


def splice(word, i, j, new_vecs, new_kinds):
    return Word(list(word[:i]) + list(new_vecs) + list(word[j:]),
                word.kinds[:i] + tuple(new_kinds) + word.kinds[j:])


def eps_at(cs, terms, i, into="left"):
    """eps on factor i (a C), absorbed into the neighbour (left: right action on i-1)."""
    out = []
    for c, w in terms:
        e = cs.eps(w[i])
        if into == "left":
            nb = i - 1
            owner = _owner(cs, w, nb)
            new = {}
            for a, x in e.items():
                for k, v in w[nb].items():
                    for j, y in owner.right_sparse(a)[k].items():
                        _add(new, j, x * v * y)
            if new:
                out.append((c, splice(w, nb, i + 1, [new], [w.kinds[nb]])))
        else:
            nb = i + 1
            owner = _owner(cs, w, nb)
            new = {}
            for a, x in e.items():
                for k, v in w[nb].items():
                    for j, y in owner.left_sparse(a)[k].items():
                        _add(new, j, x * v * y)
            if new:
                out.append((c, splice(w, i, nb + 1, [new], [w.kinds[nb]])))
    return out


def delta_at(cs, terms, i):
    f = cs.field
    out = []
    for c, w in terms:
        for v, x, y in cs.comult(w[i]):
            out.append((c * v, splice(w, i, i + 1, [{x: f.one}, {y: f.one}], ["C", "C"])))
    return out


def braid_at(cs, terms, i):
    """(C, M) at positions i, i+1 -> (M, C) via beta."""
    f = cs.field
    out = []
    for c, w in terms:
        assert w.kinds[i] == "C" and w.kinds[i + 1] == "M"
        for v, m, cc in cs.beta_pair(w[i], w[i + 1]):
            out.append((c * v, splice(w, i, i + 2, [{m: f.one}, {cc: f.one}], ["M", "C"])))
    return out


def braid_inv_at(cs, terms, i):
    """(M, C) at positions i, i+1 -> (C, M) via beta^-1."""
    f = cs.field
    out = []
    for c, w in terms:
        assert w.kinds[i] == "M" and w.kinds[i + 1] == "C"
        for v, cc, m in cs.beta_inv_pair(w[i], w[i + 1]):
            out.append((c * v, splice(w, i, i + 2, [{cc: f.one}, {m: f.one}], ["C", "M"])))
    return out


def rotate(terms, shift=1):
    """Move the last ``shift`` factors to the front (trace flip)."""
    out = []
    for c, w in terms:
        k = len(w)
        s = shift % k
        vecs = list(w[k - s:]) + list(w[:k - s])
        kinds = w.kinds[k - s:] + w.kinds[:k - s]
        out.append((c, Word(vecs, kinds)))
    return out


def _spaces_for(cs, kinds, closed, cache):
    key = (tuple(kinds), closed)
    if key not in cache:
        facs = [cs.coeff if k == "M" else cs.coalg.carrier for k in kinds]
        cache[key] = make_chain(facs, closed)
    return cache[key]


def _matrix_of(cs, src_kinds, closed, fn, tgt_kinds, cache):
    """Matrix of an elementwise map between chain quotients."""
    src = _spaces_for(cs, src_kinds, closed, cache)
    tgt = _spaces_for(cs, tgt_kinds, closed, cache)
    batches = []
    for terms in src.basis_terms():
        words = [(c, Word(v, src_kinds)) for c, v in terms]
        res = fn(words)
        for _, w in res:
            if tuple(w.kinds) != tuple(tgt_kinds):
                raise ValueError(f"operator produced {w.kinds}, expected {tgt_kinds}")
        batches.append([(c, list(w)) for c, w in res])
    return tgt.coords_matrix(batches)


# ------------------------------------------------------------------ diagrams

def _braid_M_left(cs, terms, start, count):
    """Move an M at position start+count leftwards past count C's via beta."""
    pos = start + count
    for _ in range(count):
        terms = braid_at(cs, terms, pos - 1)
        pos -= 1
    return terms


def _diagrams(cs):
    """Each diagram as (source kinds, path A, path B, target kinds)."""
    D = {}
    D["I"] = ("CCM",
              lambda t: delta_at(cs, _braid_M_left(cs, t, 0, 2), 1),
              lambda t: _braid_M_left(cs, delta_at(cs, t, 1), 0, 3),
              "MCCC")
    D["II"] = ("MC",
               lambda t: braid_at(cs, delta_at(cs, braid_inv_at(cs, delta_at(cs, t, 1), 0), 0), 1),
               lambda t: delta_at(cs, braid_at(cs, delta_at(cs, braid_inv_at(cs, t, 0), 0), 1), 2),
               "CMCC")
    D["III"] = ("CMC",
                lambda t: braid_inv_at(cs, eps_at(cs, braid_at(cs, delta_at(cs, t, 0), 1), 2), 1),
                lambda t: delta_at(cs, braid_inv_at(cs, eps_at(cs, braid_at(cs, t, 0), 1), 0), 0),
                "CCM")
    D["IV"] = ("CM",
               lambda t: braid_at(cs, t, 0),
               lambda t: eps_at(cs, _braid_M_left(cs, delta_at(cs, t, 0), 0, 2), 1),
               "MC")
    D["V"] = ("CCM",
              lambda t: eps_at(cs, braid_at(cs, eps_at(cs, t, 1), 0), 1),
              lambda t: eps_at(cs, braid_at(cs, eps_at(cs, braid_at(cs, t, 1), 2), 0), 1),
              "M")
    D["VI"] = ("CCM",
               lambda t: eps_at(cs, _braid_M_left(cs, t, 0, 2), 1),
               lambda t: braid_at(cs, eps_at(cs, t, 1), 0),
               "MC")
    return D


def _compat_squares(cs, bound):
    """Braiding-trace compatibility squares for p, q with p + q <= bound."""
    out = []
    for p in range(1, bound + 1):
        for q in range(1, bound + 1 - p):
            kinds = "C" * p + "M" + "C" * q
            out.append((f"square1(p={p},q={q})", kinds,
                        lambda t, p=p: rotate(braid_at(cs, t, p - 1), 1),
                        lambda t, p=p: braid_at(cs, rotate(t, 1), p),
                        "C" * p + "M" + "C" * q))
        kinds = "C" * p + "M"

        def right(t, p=p):
            t = rotate(t, 1)
            for j in range(p):
                t = braid_inv_at(cs, t, j)
            return t
        out.append((f"square2(p={p})", kinds,
                    lambda t, p=p: rotate(braid_at(cs, t, p - 1), 1),
                    right, kinds))
    return out


def check_coefficient_system(cs, pq_bound=2):
    """Compare both composites of Diagrams I-VI and the compatibility squares.

    Returns {name: {"pass": bool, "defect": Mat or None}}.
    """
    cache = {}
    report = {}
    for name, (src, fa, fb, tgt) in _diagrams(cs).items():
        ma = _matrix_of(cs, src, False, fa, tgt, cache)
        mb = _matrix_of(cs, src, False, fb, tgt, cache)
        ok = ma == mb
        report[name] = {"pass": ok, "defect": None if ok else ma - mb}
    for name, src, fa, fb, tgt in _compat_squares(cs, pq_bound):
        ma = _matrix_of(cs, src, True, fa, tgt, cache)
        mb = _matrix_of(cs, src, True, fb, tgt, cache)
        ok = ma == mb
        report[name] = {"pass": ok, "defect": None if ok else ma - mb}
    return report


# --------------------------------------------------------------- cyclic object

class CyclicObject:
    def __init__(self, system, max_degree, levels, faces, degens, cyc, descent):
        self.system = system
        self.max_degree = max_degree
        self.levels = levels
        self.faces = faces          # faces[n][i]: C_n -> C_{n-1}
        self.degens = degens        # degens[n][i]: C_n -> C_{n+1}
        self.cyc = cyc              # cyc[n]: C_n -> C_n
        self.descent = descent
        self.field = system.field if system is not None else None

    def dims(self):
        return [lv.dim for lv in self.levels]

    def has_s0_at_0(self):
        return self.degens[0] is not None and len(self.degens[0]) > 0


def _level_kinds(n):
    return "M" + "C" * n


def _face(cs, n, i):
    def fn(t):
        if i == 0:
            return eps_at(cs, t, 1, "left")
        if i < n:
            return eps_at(cs, t, i + 1, "left")
        # (1 (x) eps) beta(c_n, m), c_1 .. c_{n-1}
        t = rotate(t, 1)
        t = braid_at(cs, t, 0)
        return eps_at(cs, t, 1, "left")
    return fn


def _degen(cs, n, i):
    def fn(t):
        if i < n:
            return delta_at(cs, t, i + 1)
        if n == 0:
            # s_0 on C_0: t_1 applied to Tr(delta(m))
            f = cs.field
            out = []
            for c, w in t:
                for v, m, cc in cs.delta_of(w[0]):
                    out.append((c * v, Word([{m: f.one}, {cc: f.one}], "MC")))
            return _cyc(cs, 1)(out)
        # beta^-1(m, c_1) = c' (x) m'; Delta(c') ; beta(c'_(2), m')
        t = braid_inv_at(cs, t, 0)
        t = delta_at(cs, t, 0)
        t = braid_at(cs, t, 1)
        # now (c'_(1), m'', c''', c_2, ..., c_n): move c'_(1) to the back
        out = []
        for c, w in t:
            vecs = list(w[1:]) + [w[0]]
            out.append((c, Word(vecs, w.kinds[1:] + w.kinds[:1])))
        return out
    return fn


def _cyc(cs, n):
    def fn(t):
        if n == 0:
            return t
        t = rotate(t, 1)
        return braid_at(cs, t, 0)
    return fn


def build_cyclic_object(cs, N, check_system=False, descent_budget=50000, samples=300, seed=0):
    """Levels C_0..C_N with all faces, degeneracies and cyclic operators.

    Every operator is computed on representatives and checked to descend:
    exhaustively over the K-tensor basis when that basis has at most
    ``descent_budget`` elements, otherwise on ``samples`` random basis tensors.
    """
    if check_system:
        rep = check_coefficient_system(cs)
        bad = [k for k, v in rep.items() if not v["pass"]]
        if bad:
            raise NotWellDefined(f"coefficient system fails {bad}")
    cache = {}
    levels = [_spaces_for(cs, _level_kinds(n), True, cache) for n in range(N + 1)]
    faces = {n: [] for n in range(N + 1)}
    degens = {n: [] for n in range(N + 1)}
    cyc = {}
    descent = {}

    def build(src_n, tgt_n, fn, label):
        m = _matrix_of(cs, _level_kinds(src_n), True, fn, _level_kinds(tgt_n), cache)
        descent[label] = _check_descent(cs, levels[src_n], levels[tgt_n], src_n, fn, m,
                                        descent_budget, samples, seed)
        return m

    for n in range(N + 1):
        cyc[n] = build(n, n, _cyc(cs, n), f"t{n}")
        if n >= 1:
            faces[n] = [build(n, n - 1, _face(cs, n, i), f"d{i}@{n}") for i in range(n + 1)]
        if n < N:
            ds = []
            for i in range(n + 1):
                if n == 0 and cs.delta is None:
                    ds = None
                    break
                ds.append(build(n, n + 1, _degen(cs, n, i), f"s{i}@{n}"))
            degens[n] = ds
    return CyclicObject(cs, N, levels, faces, degens, cyc, descent)


def _check_descent(cs, src, tgt, n, fn, mat, budget, samples, seed):
    """Compare phi_tgt(O(t)) with mat . phi_src(t) on K-tensor basis elements t."""
    facs = src.factors
    dims = [x.dim for x in facs]
    total = 1
    for d in dims:
        total *= d
    f = cs.field
    kinds = _level_kinds(n)
    if total <= budget:
        idxs = product(*[range(d) for d in dims])
        mode = "exhaustive"
    else:
        rng = random.Random(seed + n)
        idxs = [tuple(rng.randrange(d) for d in dims) for _ in range(samples)]
        mode = f"sampled({samples})"
    idxs = list(idxs)
    words = [Word([{i: f.one} for i in idx], kinds) for idx in idxs]
    lhs = tgt.coords_matrix([[(c, list(w)) for c, w in fn([(f.one, word)])] for word in words])
    rhs = mat @ src.coords_matrix([[(f.one, list(word))] for word in words])
    if lhs != rhs:
        bad = next(j for j in range(len(idxs)) if lhs.column(j) != rhs.column(j))
        raise NotWellDefined(f"operator does not descend at level {n}", witness=idxs[bad])
    return {"mode": mode, "checked": len(idxs)}


# ---------------------------------------------------------------- identities

def verify_cyclic_identities(co):
    """Check every relation of a cyclic object on the available degrees.

    Returns {"pass": bool, "relations": {name: bool}, "skipped": [...]}.
    """
    N = co.max_degree
    d, s, t = co.faces, co.degens, co.cyc
    f = co.field
    res = {}
    skipped = []

    def has_s(n):
        return n < N and s[n] is not None and len(s[n]) == n + 1

    if not has_s(0):
        skipped.append("degree-0 degeneracy (no coaugmentation)")
    for n in range(2, N + 1):
        for j in range(n + 1):
            for i in range(j):
                res[f"d{i}d{j}@{n}"] = d[n - 1][i] @ d[n][j] == d[n - 1][j - 1] @ d[n][i]
    for n in range(0, N - 1):
        if not has_s(n) or not has_s(n + 1):
            continue
        for j in range(n + 1):
            for i in range(j + 1):
                res[f"s{i}s{j}@{n}"] = s[n + 1][i] @ s[n][j] == s[n + 1][j + 1] @ s[n][i]
    for n in range(0, N):
        if not has_s(n):
            continue
        eye = f.eye(co.levels[n].dim)
        for j in range(n + 1):
            for i in range(n + 2):
                lhs = d[n + 1][i] @ s[n][j]
                if i < j:
                    rhs = s[n - 1][j - 1] @ d[n][i] if has_s(n - 1) else None
                elif i in (j, j + 1):
                    rhs = eye
                elif i > j + 1:
                    rhs = s[n - 1][j] @ d[n][i - 1] if has_s(n - 1) else None
                if rhs is None:
                    continue
                res[f"d{i}s{j}@{n}"] = lhs == rhs
    for n in range(1, N + 1):
        for i in range(1, n + 1):
            res[f"d{i}t@{n}"] = d[n][i] @ t[n] == t[n - 1] @ d[n][i - 1]
        res[f"d0t@{n}"] = d[n][0] @ t[n] == d[n][n]
    for n in range(0, N):
        if not has_s(n):
            continue
        for i in range(1, n + 1):
            res[f"s{i}t@{n}"] = s[n][i] @ t[n] == t[n + 1] @ s[n][i - 1]
        res[f"s0t@{n}"] = s[n][0] @ t[n] == t[n + 1] @ t[n + 1] @ s[n][n]
    for n in range(0, N + 1):
        res[f"t^{n + 1}@{n}"] = t[n].power(n + 1).is_identity()
    return {"pass": all(res.values()), "relations": res, "skipped": skipped}


def identities_for_diagram(report, diagram):
    """Relations of verify_cyclic_identities that a given diagram is responsible for."""
    rel = report["relations"]
    out = {}
    for name, ok in rel.items():
        deg = int(name.split("@")[1])
        if diagram == "V" and deg >= 2:
            if name == f"d{deg - 1}d{deg}@{deg}":
                out[name] = ok
        elif diagram == "II" and name == f"s0s{deg}@{deg}":
            out[name] = ok
        elif diagram == "III" and name == f"d0s{deg}@{deg}":
            out[name] = ok
        elif diagram == "IV" and name == f"d{deg + 1}s{deg}@{deg}":
            out[name] = ok
        elif diagram == "VI" and deg >= 1 and name == f"d{deg}t@{deg}":
            out[name] = ok
        elif diagram == "I" and name == f"s0t@{deg}":
            out[name] = ok
        elif diagram == "compat" and name.startswith("t^"):
            out[name] = ok
    return out


# ---------------------------------------------------------- classical object

def textbook_operators(a, n):
    """The Hochschild/cyclic operators on A^(x)(n+1) as (faces, degens, t)."""
    f = a.field
    d = a.dim
    u = _vec_dict(a.unit)

    def idx(t):
        k = 0
        for i in t:
            k = k * d + i
        return k

    basis = list(product(range(d), repeat=n + 1))
    faces = []
    for i in range(n + 1):
        cols = []
        for b in basis:
            out = {}
            if i < n:
                for m, c in a.table[b[i]][b[i + 1]]:
                    _add(out, idx(b[:i] + (m,) + b[i + 2:]), c)
            else:
                for m, c in a.table[b[n]][b[0]]:
                    _add(out, idx((m,) + b[1:n]), c)
            cols.append(out)
        faces.append(f.from_columns(d ** n, cols) if n >= 1 else None)
    degens = []
    for i in range(n + 1):
        cols = []
        for b in basis:
            out = {}
            for k, c in u.items():
                _add(out, idx(b[:i + 1] + (k,) + b[i + 1:]), c)
            cols.append(out)
        degens.append(f.from_columns(d ** (n + 2), cols))
    cols = [{idx((b[n],) + b[:n]): f.one} for b in basis]
    t = f.from_columns(d ** (n + 1), cols)
    return faces, degens, t


def classical_iso(a, co, n):
    """C_n -> A^(x)(n+1): Tr((x0 y0), ..., (xn yn)) -> (y0 x1, ..., y_{n-1} x_n, y_n x0)."""
    f = a.field
    d = a.dim
    level = co.levels[n]
    cols = []
    for terms in level.basis_terms():
        out = {}
        for c, vecs in terms:
            # each factor is a vector over A (x) A, index x * d + y
            pairs = [[(k // d, k % d, v) for k, v in vec.items()] for vec in vecs]
            for choice in product(*pairs):
                coeff = c
                for _, _, v in choice:
                    coeff = coeff * v
                partial = {(): coeff}
                for j in range(n + 1):
                    y = choice[j][1]
                    x = choice[(j + 1) % (n + 1)][0]
                    nxt = {}
                    for key, w in partial.items():
                        for m, z in a.table[y][x]:
                            _add(nxt, key + (m,), w * z)
                    partial = nxt
                for key, w in partial.items():
                    k = 0
                    for i in key:
                        k = k * d + i
                    _add(out, k, w)
        cols.append(out)
    return f.from_columns(d ** (n + 1), cols)


def classical_cyclic_object(a, N, **kw):
    """The classical cyclic object of A with its level isomorphisms to A^(x)(n+1)."""
    cs = classical_system(a)
    co = build_cyclic_object(cs, N, **kw)
    co.iso = [classical_iso(a, co, n) for n in range(N + 1)]
    co.algebra = a
    return co


# ------------------------------------------------------------------ homology

class HomologyTable:
    def __init__(self, theory, dims, stable=None, field=None):
        self.theory = theory
        self.dims = dims
        self.stable = stable
        self.field = field

    def __repr__(self):
        return f"HomologyTable({self.theory}, {self.dims}, stable={self.stable})"

    def to_json(self):
        out = {"theory": self.theory, "dims": self.dims}
        if self.stable is not None:
            out["stable"] = self.stable
        return out


def _signed_sum(mats, signs, shape, f):
    out = f.zeros(*shape)
    for m, sg in zip(mats, signs):
        out = out + (m if sg > 0 else m.scale(f(-1)))
    return out


def hochschild_boundary(co, n):
    f = co.field
    shape = (co.levels[n - 1].dim, co.levels[n].dim)
    return _signed_sum(co.faces[n], [(-1) ** i for i in range(n + 1)], shape, f)


def bprime_boundary(co, n):
    f = co.field
    shape = (co.levels[n - 1].dim, co.levels[n].dim)
    return _signed_sum(co.faces[n][:n], [(-1) ** i for i in range(n)], shape, f)


def lambda_op(co, n):
    t = co.cyc[n]
    return t if n % 2 == 0 else t.scale(co.field(-1))


def norm_op(co, n):
    lam = lambda_op(co, n)
    f = co.field
    out = f.eye(co.levels[n].dim)
    p = f.eye(co.levels[n].dim)
    for _ in range(n):
        p = p @ lam
        out = out + p
    return out


def _homology_dims(diffs, dims, top):
    """dims of H_n for n <= top given diffs[n]: V_n -> V_{n-1} (None for n = 0)."""
    out = []
    for n in range(top + 1):
        z = dims[n] - (rank(diffs[n]) if n >= 1 and diffs[n] is not None else 0)
        bnd = rank(diffs[n + 1]) if diffs.get(n + 1) is not None else 0
        out.append(z - bnd)
    return out


def _tsygan_total(co, top):
    """Total complex of the cyclic bicomplex, degrees 0..top.

    Returns (tot_dims, diffs, blocks) where blocks[m] lists (p, n, offset).
    """
    f = co.field
    dims = co.dims()
    blocks, tot = {}, {}
    for m in range(top + 1):
        off = 0
        bl = []
        for p in range(m + 1):
            n = m - p
            bl.append((p, n, off))
            off += dims[n]
        blocks[m] = bl
        tot[m] = off
    bmat = {n: hochschild_boundary(co, n) for n in range(1, top + 1)}
    bp = {n: bprime_boundary(co, n) for n in range(1, top + 1)}
    one_minus = {n: f.eye(dims[n]) - lambda_op(co, n) for n in range(top + 1)}
    norm = {n: norm_op(co, n) for n in range(top + 1)}
    diffs = {}
    for m in range(1, top + 1):
        cols = []
        for (p, n, _) in blocks[m]:
            col = []
            for (p2, n2, _) in blocks[m - 1]:
                if p2 == p and n2 == n - 1 and n >= 1:
                    col.append(bmat[n] if p % 2 == 0 else bp[n].scale(f(-1)))
                elif p2 == p - 1 and n2 == n and p >= 1:
                    col.append(one_minus[n] if p % 2 == 1 else norm[n])
                else:
                    col.append(f.zeros(dims[n2], dims[n]))
            cols.append(vstack(col, cols=dims[n], field=f))
        diffs[m] = hstack(cols, rows=tot[m - 1], field=f)
    return tot, diffs, blocks


def _s_map(co, blocks, m, k):
    """S^k: Tot_m -> Tot_{m-2k} (drop the first 2k columns)."""
    f = co.field
    dims = co.dims()
    src = blocks[m]
    tgt = blocks[m - 2 * k]
    rows = sum(dims[n] for _, n, _ in tgt)
    cols_total = sum(dims[n] for _, n, _ in src)
    cols = [dict() for _ in range(cols_total)]
    tpos = {(p, n): off for p, n, off in tgt}
    for p, n, off in src:
        if p >= 2 * k:
            toff = tpos[(p - 2 * k, n)]
            for j in range(dims[n]):
                cols[off + j] = {toff + j: f.one}
    return f.from_columns(rows, cols)


def homology(co, theory="HH", degree_bound=None, width=1):
    """HH, HC or HP dims.  HP returns [even, odd] with a stabilization flag."""
    N = co.max_degree
    f = co.field
    dims = co.dims()
    if theory in ("HH", "HC"):
        if degree_bound is None:
            degree_bound = N - 1
        if degree_bound + 1 > N:
            raise InsufficientDegrees(f"need max_degree >= {degree_bound + 1}")
    for n in range(2, min(N, (degree_bound or N) + 1) + 1):
        b1, b2 = hochschild_boundary(co, n - 1), hochschild_boundary(co, n)
        if not (b1 @ b2).is_zero():
            raise BoundaryFails("b o b != 0", n)
    if theory == "HH":
        diffs = {n: hochschild_boundary(co, n) for n in range(1, degree_bound + 2)}
        return HomologyTable("HH", _homology_dims(diffs, dims, degree_bound), field=f)
    if theory == "HC":
        tot, diffs, _ = _tsygan_total(co, degree_bound + 1)
        return HomologyTable("HC", _homology_dims(diffs, tot, degree_bound), field=f)
    if theory in ("HP", "HP_even", "HP_odd"):
        need = 1 + 2 * (width + 2) + 1
        if need > N:
            raise InsufficientDegrees(f"HP with width {width} needs max_degree >= {need}")
        tot, diffs, blocks = _tsygan_total(co, need)
        vals, stable = [], True
        for parity in (0, 1):
            r = [_periodic_rank(co, tot, diffs, blocks, parity, k) for k in (width, width + 2)]
            vals.append(r[0])
            stable = stable and r[0] == r[1]
        return HomologyTable("HP", vals, stable=stable, field=f)
    raise ValueError(f"unknown theory {theory!r}")


def _periodic_rank(co, tot, diffs, blocks, n, k):
    """rank of S^k: HC_{n+2k} -> HC_n."""
    f = co.field
    m = n + 2 * k
    z = kernel_basis(diffs[m]) if m >= 1 else f.eye(tot[0])
    img = _s_map(co, blocks, m, k) @ z
    bnd = diffs[n + 1]
    return rank(hstack([img, bnd], rows=tot[n], field=f)) - rank(bnd)


def mixed_complex_check(co, top=None):
    """b^2 = 0, B^2 = 0, bB + Bb = 0 with B = (1 - lambda) s N, s = t_{n+1} s_n."""
    f = co.field
    N = co.max_degree
    top = N - 1 if top is None else top
    dims = co.dims()

    def B(n):   # C_n -> C_{n+1}
        s = co.cyc[n + 1] @ co.degens[n][n]
        return (f.eye(dims[n + 1]) - lambda_op(co, n + 1)) @ s @ norm_op(co, n)

    res = {}
    for n in range(2, N + 1):
        res[f"bb@{n}"] = (hochschild_boundary(co, n - 1) @ hochschild_boundary(co, n)).is_zero()
    for n in range(0, top):
        if n + 2 > N or co.degens.get(n + 1) is None or co.degens.get(n) is None:
            continue
        res[f"BB@{n}"] = (B(n + 1) @ B(n)).is_zero()
    for n in range(0, top + 1):
        if n + 1 > N or co.degens.get(n) is None:
            continue
        lhs = hochschild_boundary(co, n + 1) @ B(n)
        if n >= 1 and co.degens.get(n - 1) is not None:
            lhs = lhs + B(n - 1) @ hochschild_boundary(co, n)
        res[f"bB+Bb@{n}"] = lhs.is_zero()
    return {"pass": all(res.values()), "relations": res}


# ------------------------------------------------------------ faithfulness

def trace_faithful_on_endomorphisms(cs, n=1):
    """Whether phi -> C_n(phi) is injective on Hom_A(M, M)_A (instance-level check)."""
    M = cs.coeff
    h = hom_AA(M, M)
    cache = {}
    _spaces_for(cs, _level_kinds(n), True, cache)
    f = cs.field
    imgs = []
    for phi in h.basis:
        pc = phi.columns_sparse()

        def fn(terms, pc=pc):
            out = []
            for c, w in terms:
                new = {}
                for k, v in w[0].items():
                    for j, y in pc[k].items():
                        _add(new, j, v * y)
                out.append((c, splice(w, 0, 1, [new], ["M"])))
            return out
        m = _matrix_of(cs, _level_kinds(n), True, fn, _level_kinds(n), cache)
        imgs.append(f.mat(m.rows * m.cols, 1, m.entries()))
    if not imgs:
        return True
    return rank(hstack(imgs)) == len(imgs)


# ------------------------------------------------------------ functoriality

class CyclicMorphism:
    def __init__(self, maps, source, target, commutes):
        self.maps = maps
        self.source = source
        self.target = target
        self.commutes = commutes


def functorial_map(source_co, target_co, rep, phi, theta, check_square=True):
    """Level maps C(N)_n -> C(M)_n induced by phi: N -> f_!M.

    Tr(n0, y_1, ..., y_n) -> sum Tr(m, theta(y_1 (x) d_(1)), ..., theta(y_n (x) d_(n)))
    where phi(n0) = sum d (x) m and theta: f*C_Y -> C_X is a coalgebra map.
    """
    scs, tcs = source_co.system, target_co.system
    f = scs.field
    D = rep.coalg
    fM = phi.target
    pre = pullback(rep, scs.coalg.carrier)
    theta_cols = theta.columns_sparse()
    P = pre.presentation.proj.columns_sparse()
    phi_cols = [(fM.presentation.sect @ phi.matrix).column_dict(k) for k in range(phi.source.dim)]
    nM = tcs.coeff.dim
    if check_square:
        defect = _functorial_square(scs, tcs, rep, phi, theta)
        if defect is not None:
            raise SquareFails("compatibility square does not commute", defect)

    def iter_delta(d, n):
        """Sweedler expansion of d into n factors: {(d1, ..., dn): coeff}."""
        if n == 1:
            return {(d,): f.one}
        out = {}
        for key, c in iter_delta(d, n - 1).items():
            for (x, y), v in D.delta_rep(key[-1]).items():
                _add(out, key[:-1] + (x, y), c * v)
        return out

    def theta_of(y, d):
        out = {}
        for yi, yv in y.items():
            for k, v in P[yi * D.dim + d].items():
                for j, w in theta_cols[k].items():
                    _add(out, j, yv * v * w)
        return out

    maps = []
    for n in range(min(source_co.max_degree, target_co.max_degree) + 1):
        src = source_co.levels[n]
        tgt = target_co.levels[n]
        batches = []
        for terms in src.basis_terms():
            out_terms = []
            for c, vecs in terms:
                for k0, v0 in vecs[0].items():
                    for amb, w in phi_cols[k0].items():
                        d, m = divmod(amb, nM)
                        if n == 0:
                            e = D.counit.column_dict(d)
                            new = {}
                            for a, x in e.items():
                                for j, y in tcs.coeff.right_sparse(a)[m].items():
                                    _add(new, j, x * y)
                            out_terms.append((c * v0 * w, [new]))
                            continue
                        for key, z in iter_delta(d, n).items():
                            vv = [{m: f.one}]
                            for j in range(n):
                                vv.append(theta_of(vecs[j + 1], key[j]))
                            out_terms.append((c * v0 * w * z, vv))
            batches.append(out_terms)
        maps.append(tgt.coords_matrix(batches))
    commutes = _morphism_commutes(source_co, target_co, maps)
    return CyclicMorphism(maps, source_co, target_co, commutes)


def _morphism_commutes(sco, tco, maps):
    res = {}
    n_max = len(maps) - 1
    for n in range(n_max + 1):
        res[f"t@{n}"] = maps[n] @ sco.cyc[n] == tco.cyc[n] @ maps[n]
        if n >= 1:
            for i in range(n + 1):
                res[f"d{i}@{n}"] = maps[n - 1] @ sco.faces[n][i] == tco.faces[n][i] @ maps[n]
        if n < n_max and sco.degens[n] is not None and tco.degens[n] is not None:
            for i in range(n + 1):
                res[f"s{i}@{n}"] = maps[n + 1] @ sco.degens[n][i] == tco.degens[n][i] @ maps[n]
    return res


def _functorial_square(scs, tcs, rep, phi, theta):
    """C_Y (x) N -> f_!(M (x) C_X) both ways; returns the defect matrix or None."""
    f = scs.field
    from .bimod import kron, tensor_over_A
    CY = scs.coalg.carrier
    M, CX = tcs.coeff, tcs.coalg.carrier
    D = rep.coalg
    fM = phi.target
    pre = pullback(rep, CY)
    # ambient representatives: source C_Y (x) N
    src = scs.cm
    tgt = push(rep, tensor_over_A(M, CX))
    inner = tgt.factors[1]
    inner_flat = inner.presentation.proj            # over M (x) CX
    tgt_flat = tgt.presentation.proj @ kron(f.eye(D.dim), inner_flat)   # D M CX
    nD, nM, nCX = D.dim, M.dim, CX.dim
    pre_cols = pre.presentation.proj.columns_sparse()
    th = theta.columns_sparse()
    phi_amb = fM.presentation.sect @ phi.matrix

    def f_theta(y, d):
        out = {}
        for k, v in pre_cols[y * nD + d].items():
            for j, w in th[k].items():
                _add(out, j, v * w)
        return out

    # path 1: beta_N, then phi on N, then (d (x) m) (x) y -> d_(2) (x) (m (x) theta(y (x) d_(1)))
    # path 2: phi on N, then y (x) (d (x) m) -> d_(1) (x) (theta(y (x) d_(2)) (x) m), then f_!(beta_M)
    cols1, cols2 = [], []
    for b in range(src.dim):
        rep_flat = src.rep([f.one if i == b else f.zero for i in range(src.dim)])
        o1, o2 = {}, {}
        for (y, nn), c in rep_flat.items():
            # path 2
            for amb, w in phi_amb.column_dict(nn).items():
                d, m = divmod(amb, nM)
                for (d1, d2), v in D.delta_rep(d).items():
                    cx = f_theta(y, d2)
                    for m2c, z in _beta_vec(tcs, cx, m).items():
                        m2, c2 = m2c
                        _add(o2, (d1 * nM + m2) * nCX + c2, c * w * v * z)
            # path 1
            for (n2, y2), v in _beta_vec(scs, {y: f.one}, nn).items():
                for amb, w in phi_amb.column_dict(n2).items():
                    d, m = divmod(amb, nM)
                    for (d1, d2), u in D.delta_rep(d).items():
                        for j, z in f_theta(y2, d1).items():
                            _add(o1, (d2 * nM + m) * nCX + j, c * v * w * u * z)
        cols1.append(o1)
        cols2.append(o2)
    n3 = nD * nM * nCX
    m1 = tgt_flat @ f.from_columns(n3, cols1)
    m2 = tgt_flat @ f.from_columns(n3, cols2)
    return None if m1 == m2 else m1 - m2


def _beta_vec(cs, c, m):
    out = {}
    for v, mm, cc in cs.beta_pair(c, {m: cs.field.one}):
        _add(out, (mm, cc), v)
    return out


def canonical_theta(rep, source_cs, d_to_cx=None):
    """f*(B (x) B) -> C_X: (b1 (x) b2) (x) d -> d_to_cx(b2 . d . b1).

    Needs the source coalgebra to be the Sweedler coalgebra of B; ``d_to_cx``
    defaults to the identity (so C_X must be D itself).
    """
    from .exactlin import factor_through
    CY = source_cs.coalg.carrier
    b = rep.ring
    D = rep.coalg.carrier
    ind = rep.induced
    f = D.field
    pre = pullback(rep, CY)
    nb, nD = b.dim, D.dim
    cols = []
    for y in range(CY.dim):
        b1, b2 = divmod(y, nb)
        for d in range(nD):
            col = {}
            for i, x in ind.right_sparse(b1)[d].items():
                for j, z in ind.left_sparse(b2)[i].items():
                    _add(col, j, x * z)
            cols.append(col)
    flat = f.from_columns(nD, cols)
    t = factor_through(pre.presentation.proj, flat)
    return t if d_to_cx is None else d_to_cx @ t


def canonical_phi(rep, m):
    """M -> f_!M, m -> (1 (x) 1) (x) m, for a representation on a Sweedler coalgebra."""
    fm = push(rep, m)
    D = rep.coalg.carrier
    a = D.alg
    f = m.field
    n = a.dim
    u = [(k, x) for k, x in enumerate(a.unit) if x != 0]
    cols = []
    for k in range(m.dim):
        col = {}
        for k1, x1 in u:
            for k2, x2 in u:
                _add(col, (k1 * n + k2) * m.dim + k, x1 * x2)
        cols.append(col)
    mat = fm.presentation.proj @ f.from_columns(D.dim * m.dim, cols)
    return BimoduleMap(m, fm, mat)


def induced_homology_rank(mor, n):
    """Rank of the map HH_n(source) -> HH_n(target) induced by a cyclic morphism."""
    sco, tco = mor.source, mor.target
    f = sco.field
    z = kernel_basis(hochschild_boundary(sco, n)) if n >= 1 else f.eye(sco.levels[0].dim)
    img = mor.maps[n] @ z
    if n + 1 <= tco.max_degree:
        bnd = hochschild_boundary(tco, n + 1)
    else:
        raise InsufficientDegrees(f"target needs max_degree >= {n + 1}")
    return rank(hstack([img, bnd], rows=tco.levels[n].dim, field=f)) - rank(bnd)
