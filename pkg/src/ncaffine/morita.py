"""
Morita equivalences as convolution representations on a progenerator P_A,
with B = End(P)_A acting on D = P* (x) P, and the round-trip checks: both
composite coalgebras against the Sweedler coalgebras, and the bimodule
isomorphisms P* (x)_B P = A, P (x)_A P* = B.
"""

from .algebra import AlgebraMap, _from_table, _validate
from .bimod import Bimodule, BimoduleMap, hom_space, right_module, tensor_over_A
from .coalg import (
    NotProjective, coalgebra_iso_check, compose_representations, dual_basis, dual_module,
    endomorphism_coalgebra, make_representation, sweedler_coalgebra,
)
from .exactlin import NotWellDefined, factor_through, rank, solve

__all__ = [
    "Progenerator", "NotProgenerator", "make_progenerator", "endomorphism_algebra",
    "morita_representation", "verify_morita_equivalence", "transport_representation",
]


class NotProgenerator(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class Progenerator:
    """A right A-module with a dual basis and an expression of 1 as a trace."""

    def __init__(self, module, dual, hom, dual_basis, trace_witness):
        self.module = module
        self.dual = dual
        self.hom = hom
        self.dual_basis = dual_basis
        self.trace_witness = trace_witness

    @property
    def alg(self):
        return self.module.ralg

    def phi(self, t):
        """The t-th basis functional of P* as an (A-dim x P-dim) matrix."""
        return self.hom.basis[t]


def _eval(pg, coeffs, vec):
    """(sum_t coeffs[t] phi_t)(vec) in A."""
    f = pg.module.field
    a = pg.alg
    out = [f.zero] * a.dim
    for t, c in enumerate(coeffs):
        if c == 0:
            continue
        m = pg.phi(t)
        for j, x in enumerate(vec):
            if x != 0:
                for i in range(a.dim):
                    out[i] += c * x * m[i, j]
    return out


def make_progenerator(p, pairs=None):
    """Validate (or find) a dual basis and a trace witness for P_A.

    pairs: list of (vector in P, coefficients over the P* basis).
    """
    a = p.ralg
    f = p.field
    ps, h = dual_module(p)
    if pairs is None:
        try:
            pairs = dual_basis(p, ps, h)
        except NotProjective as e:
            raise NotProgenerator(f"not projective: {e}")
    pg = Progenerator(p, ps, h, pairs, None)
    for s in range(p.dim):
        e = [f.one if i == s else f.zero for i in range(p.dim)]
        total = [f.zero] * p.dim
        for vec, coeff in pairs:
            val = _eval(pg, coeff, e)
            img = p.right_of(val) @ f.column_vector(vec)
            for i in range(p.dim):
                total[i] += img[i, 0]
        if total != e:
            raise NotProgenerator("dual basis fails sum p_i phi_i(x) = x", witness=s)
    # generator: 1 in the span of phi_t(e_s)
    cols = [h.basis[t].column_dict(s) for t in range(h.dim) for s in range(p.dim)]
    ev = f.from_columns(a.dim, cols)
    x = solve(ev, f.column_vector(a.unit)) if cols else None
    if x is None:
        raise NotProgenerator("evaluation P* (x) P -> A misses the unit", witness=rank(ev) if cols else 0)
    witness = []
    for k in range(ev.cols):
        c = x[k, 0]
        if c != 0:
            t, s = divmod(k, p.dim)
            witness.append((t, s, c))
    pg.trace_witness = witness
    return pg


def endomorphism_algebra(p):
    """End(P)_A as an Algebra (product = composition) with its hom space."""
    h = hom_space(p, p, left=False, right=True)
    f = p.field
    n = h.dim
    table = []
    for i in range(n):
        row = []
        for j in range(n):
            x = h.coords(h.basis[i] @ h.basis[j])
            row.append([(k, v) for k, v in enumerate(x) if v != 0])
        table.append(row)
    ident = h.coords(f.eye(p.dim))
    alg = _from_table(f, n, table, ident, name=f"End({p.name})")
    _validate(alg)
    return alg, h


def morita_representation(pg):
    """B = End(P)_A acting on P* (x) P: b -> (phi (x) p -> phi(b p))."""
    p = pg.module
    f = p.field
    b, eh = endomorphism_algebra(p)
    d = endomorphism_coalgebra(p, check=False)
    a = pg.alg
    funcs = []
    for beta in eh.basis:
        cols = []
        for t in range(pg.hom.dim):
            m = pg.phi(t) @ beta
            for s in range(p.dim):
                cols.append(m.column_dict(s))
        funcs.append(f.from_columns(a.dim, cols))
    rep = make_representation(b, d, funcs)
    rep.end_hom = eh
    rep.progenerator = pg
    return rep


def transport_representation(rep, alpha):
    """Precompose a representation of A' with an algebra isomorphism alpha: A -> A'."""
    funcs = []
    for i in range(alpha.source.dim):
        funcs.append(rep.functional_of(alpha.matrix.column(i)))
    return make_representation(alpha.source, rep.coalg, funcs)


def _dual_side(pg, rep1):
    """Q = P* as a right B-module, its progenerator data and the A -> End_B(Q) iso."""
    p = pg.module
    f = p.field
    b = rep1.ring
    eh = rep1.end_hom
    h = pg.hom
    acts = []
    for beta in eh.basis:
        cols = []
        for t in range(h.dim):
            x = h.coords(pg.phi(t) @ beta)
            cols.append({k: v for k, v in enumerate(x) if v != 0})
        acts.append(f.from_columns(h.dim, cols))
    q = right_module(b, h.dim, acts, name="P*_B")
    qg = make_progenerator(q)
    rep2 = morita_representation(qg)
    a = pg.alg
    # a -> left multiplication on P*
    eh2 = rep2.end_hom
    cols = []
    for i in range(a.dim):
        x = eh2.coords(pg.dual.left[i])
        if x is None:
            raise NotWellDefined("left A-action on P* is not B-linear", witness=i)
        cols.append({k: v for k, v in enumerate(x) if v != 0})
    alpha = AlgebraMap(a, rep2.ring, f.from_columns(rep2.ring.dim, cols))
    return q, qg, rep2, alpha


def verify_morita_equivalence(pg):
    """Build both representations, compose them both ways and check the isomorphisms."""
    p = pg.module
    f = p.field
    a = pg.alg
    report = {"checks": {}, "dims": {}}
    rep1 = morita_representation(pg)
    b = rep1.ring
    eh = rep1.end_hom
    q, qg, rep2, alpha = _dual_side(pg, rep1)
    report["dims"].update({"A": a.dim, "B": b.dim, "P": p.dim, "P*": pg.hom.dim})
    ok_alpha = alpha.is_iso() if hasattr(alpha, "is_iso") else rank(alpha.matrix) == a.dim
    report["checks"]["A = End_B(P*)"] = ok_alpha
    rep2a = transport_representation(rep2, alpha)
    ns, np_ = pg.hom.dim, p.dim
    # psi_u in Hom_B(Q, B) -> p_u = sum_k psi_u(chi_k)(q_k)
    p_of = []
    for u in range(qg.hom.dim):
        vec = [f.zero] * np_
        psi = qg.phi(u)
        for t, s, c in pg.trace_witness:
            bcoords = psi.column(t)
            endo = eh.element(bcoords)
            for i in range(np_):
                vec[i] += c * endo[i, s]
        p_of.append(vec)

    def phi_on(t, vec):
        return _eval(pg, [f.one if i == t else f.zero for i in range(ns)], vec)

    # composite over A: (psi_u (x) phi_t) (x) (phi_t' (x) e_s) -> phi_t'(p_u) (x) phi_t(e_s)
    comp_a = compose_representations(rep2, rep1)
    sw_a = sweedler_coalgebra(a, check=False)
    X = comp_a.coalg.carrier
    na = a.dim
    cols = []
    for u in range(qg.hom.dim):
        for t in range(ns):
            for t2 in range(ns):
                for s in range(np_):
                    left = phi_on(t2, p_of[u])
                    e = [f.one if i == s else f.zero for i in range(np_)]
                    right = phi_on(t, e)
                    col = {}
                    for i, x in enumerate(left):
                        if x == 0:
                            continue
                        for j, y in enumerate(right):
                            if y != 0:
                                col[i * na + j] = col.get(i * na + j, f.zero) + x * y
                    cols.append(col)
    flat = f.from_columns(na * na, cols)
    try:
        T = factor_through(X.presentation.proj, flat)
        ok = coalgebra_iso_check(comp_a.coalg, sw_a, T)
    except NotWellDefined:
        T, ok = None, False
    report["checks"]["E(x)D = A(x)A as coalgebras"] = ok
    report["dims"]["composite over A"] = X.dim
    # composite over B: (phi_t (x) e_s) (x) (psi_u (x) phi_t') -> [p_u phi_t(.)] (x) [e_s phi_t'(.)]
    comp_b = compose_representations(rep1, rep2a)
    sw_b = sweedler_coalgebra(b, check=False)
    Y = comp_b.coalg.carrier
    nb = b.dim

    def endo_coords(vec, t):
        m = f.zeros(np_, np_)
        for j in range(np_):
            e = [f.one if i == j else f.zero for i in range(np_)]
            val = phi_on(t, e)
            col = p.right_of(val) @ f.column_vector(vec)
            for i in range(np_):
                m.m[i, j] = col[i, 0]
        return eh.coords(m)

    cols = []
    for t in range(ns):
        for s in range(np_):
            e = [f.one if i == s else f.zero for i in range(np_)]
            for u in range(qg.hom.dim):
                for t2 in range(ns):
                    x1 = endo_coords(p_of[u], t)
                    x2 = endo_coords(e, t2)
                    col = {}
                    for i, x in enumerate(x1):
                        if x == 0:
                            continue
                        for j, y in enumerate(x2):
                            if y != 0:
                                col[i * nb + j] = col.get(i * nb + j, f.zero) + x * y
                    cols.append(col)
    flat = f.from_columns(nb * nb, cols)
    try:
        T2 = factor_through(Y.presentation.proj, flat)
        ok2 = coalgebra_iso_check(comp_b.coalg, sw_b, T2)
    except NotWellDefined:
        T2, ok2 = None, False
    report["checks"]["D(x)E = B(x)B as coalgebras"] = ok2
    report["dims"]["composite over B"] = Y.dim
    # bimodule isomorphisms
    P_BA = Bimodule(b, np_, list(eh.basis), list(p.right), a, "P")
    Ps_AB = Bimodule(a, ns, list(pg.dual.left), list(q.right), b, "P*")
    t1 = tensor_over_A(Ps_AB, P_BA)
    cols = []
    for t in range(ns):
        for s in range(np_):
            e = [f.one if i == s else f.zero for i in range(np_)]
            cols.append({k: v for k, v in enumerate(phi_on(t, e)) if v != 0})
    from .bimod import regular_bimodule
    try:
        m1 = factor_through(t1.presentation.proj, f.from_columns(a.dim, cols))
        ok3 = BimoduleMap(t1, regular_bimodule(a), m1).is_iso()
    except (NotWellDefined, ValueError, ArithmeticError):
        ok3 = False
    report["checks"]["P*(x)_B P = A"] = ok3
    t2 = tensor_over_A(P_BA, Ps_AB)
    cols = []
    for s in range(np_):
        e = [f.one if i == s else f.zero for i in range(np_)]
        for t in range(ns):
            x = endo_coords(e, t)
            cols.append({k: v for k, v in enumerate(x) if v != 0})
    try:
        m2 = factor_through(t2.presentation.proj, f.from_columns(b.dim, cols))
        ok4 = BimoduleMap(t2, regular_bimodule(b), m2).is_iso()
    except (NotWellDefined, ValueError, ArithmeticError):
        ok4 = False
    report["checks"]["P(x)_A P* = B"] = ok4
    report["pass"] = all(report["checks"].values())
    report["representations"] = (rep1, rep2a)
    report["composites"] = (comp_a, comp_b)
    report["isos"] = (T, T2)
    return report
