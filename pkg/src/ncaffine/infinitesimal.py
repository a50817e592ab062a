"""
Infinitesimal towers: the differential filtration of a bimodule and the
I-adic tower of a module, plus Grothendieck's commutator recursion as an
independent check in the commutative case.
"""

from .algebra import algebra_generators
from .bimod import _closure, make_bimodule
from .exactlin import cokernel_presentation, hstack, image_basis, kernel_basis, rank, vstack

__all__ = [
    "Filtration", "Tower", "NotCommutative", "NotIdeal",
    "differential_filtration", "hom_bimodule", "diff_operators", "grothendieck_oracle",
    "adic_tower", "same_subspace", "compose_operators", "ideal_generated",
]


class NotCommutative(ValueError):
    pass


class NotIdeal(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class Filtration:
    def __init__(self, ambient, steps, stabilized):
        self.ambient = ambient
        self.steps = steps
        self.stabilized = stabilized

    def dims(self):
        return [s.cols for s in self.steps]

    def to_json(self):
        return {"dims": self.dims(), "stabilized": self.stabilized, "ambient_dim": self.ambient.dim}


class Tower:
    def __init__(self, base, ideal, powers, quotients, maps, stabilized):
        self.base = base
        self.ideal = ideal
        self.powers = powers        # bases of I^p G, p = 0, 1, ...
        self.quotients = quotients  # Subquotients G / I^p G, p = 1, 2, ...
        self.maps = maps            # G/I^{p+1}G -> G/I^pG
        self.stabilized = stabilized

    def dims(self):
        return [q.dim for q in self.quotients]

    @property
    def limit_dim(self):
        return self.quotients[-1].dim if self.stabilized else None

    def to_json(self):
        return {"dims": self.dims(), "stabilized": self.stabilized, "limit_dim": self.limit_dim}


def _mod(f, sub, n):
    """Projection onto ambient/span(sub)."""
    if sub.cols == 0:
        return f.eye(n)
    return cokernel_presentation(sub).proj


def differential_filtration(fb, p_max):
    """F_p = preimage of the sub-bimodule generated by the center of F/F_{p-1}."""
    f = fb.field
    n = fb.dim
    gens = algebra_generators(fb.alg)
    prev = f.zeros(n, 0)
    steps = []
    stabilized = False
    for _ in range(p_max + 1):
        q = _mod(f, prev, n)
        blocks = [q @ (fb.left[i] - fb.right[i]) for i in gens]
        z = kernel_basis(vstack(blocks, cols=n, field=f))
        cur = _closure(fb, hstack([prev, z], rows=n, field=f))
        steps.append(cur)
        if cur.cols == prev.cols:
            stabilized = True
            break
        if cur.cols == n:
            stabilized = True
            break
        prev = cur
    return Filtration(fb, steps, stabilized)


def hom_bimodule(m, n):
    """Hom_K(M, N) for left A-modules, with (a.phi.b)(x) = a phi(b x).

    phi is stored row-major: index i * dim M + j is the (i, j) matrix entry.
    """
    f = m.field
    a = m.alg
    dm, dn = m.dim, n.dim
    left = [_kron(n.left[i], f.eye(dm)) for i in range(a.dim)]
    right = [_kron(f.eye(dn), m.left[i].T) for i in range(a.dim)]
    return make_bimodule(a, dm * dn, left, right, a, name=f"Hom({m.name},{n.name})")


def _kron(x, y):
    from .exactlin import kron
    return kron(x, y)


def diff_operators(m, n, p):
    """Basis (columns, row-major matrices) of the operators M -> N of order <= p."""
    fb = hom_bimodule(m, n)
    filt = differential_filtration(fb, p)
    steps = filt.steps
    return steps[p] if p < len(steps) else steps[-1]


def grothendieck_oracle(m, n, p):
    """Order <= p operators by the commutator recursion (commutative A only)."""
    a = m.alg
    if not a.is_commutative():
        raise NotCommutative(f"{a.name} is not commutative")
    f = m.field
    dm, dn = m.dim, n.dim
    size = dm * dn
    ads = [_kron(n.left[i], f.eye(dm)) - _kron(f.eye(dn), m.left[i].T) for i in range(a.dim)]
    cur = f.zeros(size, 0)      # order <= -1
    for _ in range(p + 1):
        q = _mod(f, cur, size)
        cur = kernel_basis(vstack([q @ ad for ad in ads], cols=size, field=f))
    return cur


def same_subspace(x, y):
    if x.rows != y.rows:
        return False
    r = rank(x)
    return r == rank(y) and rank(hstack([x, y], rows=x.rows, field=x.field)) == r


def compose_operators(phi, psi, dims):
    """Row-major composition psi o phi for phi: M -> N, psi: N -> L; dims = (dm, dn, dl)."""
    dm, dn, dl = dims
    f = phi.field
    P = f.mat(dn, dm, phi.column(0))
    Q = f.mat(dl, dn, psi.column(0))
    return f.column_vector((Q @ P).entries())


def adic_tower(g, i_basis, p_max):
    """Quotients G / I^p G, p = 1 .. until I^p G = I^{p+1} G or p_max."""
    a = g.alg
    f = g.field
    if hasattr(i_basis, "cols"):
        ideal = image_basis(i_basis) if i_basis.cols else i_basis
    elif i_basis:
        ideal = image_basis(f.from_columns(a.dim, [{k: f(x) for k, x in enumerate(v) if x != 0}
                                                   for v in i_basis]))
    else:
        ideal = f.zeros(a.dim, 0)
    for j in range(ideal.cols):
        v = ideal.submatrix(cols=[j])
        for k in range(a.dim):
            for side, w in (("left", a.lmat(k) @ v), ("right", a.rmat(k) @ v)):
                if ideal.cols == 0 or rank(hstack([ideal, w])) != ideal.cols:
                    if not w.is_zero():
                        raise NotIdeal(f"I is not closed under {side} multiplication", (j, k))
    n = g.dim
    acts = []
    for j in range(ideal.cols):
        m = f.zeros(n, n)
        for k, c in ideal.column_dict(j).items():
            m = m + g.left[k].scale(c)
        acts.append(m)
    powers = [f.eye(n)]
    quotients, maps = [], []
    stabilized = False
    for _ in range(p_max):
        prev = powers[-1]
        if acts and prev.cols:
            nxt = image_basis(hstack([x @ prev for x in acts], rows=n, field=f))
        else:
            nxt = f.zeros(n, 0)
        if nxt.cols == prev.cols and len(powers) > 1:
            stabilized = True
            break
        powers.append(nxt)
        quotients.append(cokernel_presentation(nxt) if nxt.cols else _identity_quotient(f, n))
        if len(quotients) >= 2:
            maps.append(quotients[-2].proj @ quotients[-1].sect)
    return Tower(g, ideal, powers, quotients, maps, stabilized)


def _identity_quotient(f, n):
    from .exactlin import whole_space
    return whole_space(f, n)


def ideal_generated(a, gens):
    """Basis of the two-sided ideal generated by the given vectors."""
    from .bimod import regular_bimodule
    f = a.field
    cols = [{k: f(x) for k, x in enumerate(v) if x != 0} for v in gens]
    return _closure(regular_bimodule(a), f.from_columns(a.dim, cols))
