"""
Bimodules given by action matrices, bimodule maps, tensor products over the
middle algebra, Hom spaces, the trace functor and centers.

A bimodule over (A, A') stores one matrix per basis element of A acting on the
left (``left[i]``) and one per basis element of A' acting on the right
(``right[j]``, the matrix of ``m -> m e_j``).  Most bimodules here have
A = A'; right modules are bimodules over (K, A) with K the 1-dim algebra.

Tensor products M (x)_A N are quotients of the K-tensor space with basis
index ``i * dim N + j``.
"""

from .algebra import algebra_generators, make_algebra
from .exactlin import (
    NotWellDefined, cokernel_presentation, hstack, induced_map, kernel_basis,
    kron, rank, solve, subquotient, vstack, whole_space,
)

__all__ = [
    "Bimodule", "BimoduleMap", "ConstructedBimodule", "HomSpace",
    "NotBimodule", "NotBimoduleMap", "make_bimodule", "regular_bimodule",
    "free_bimodule", "outer_tensor", "tensor_over_A", "tensor_maps",
    "associator", "left_unitor", "right_unitor", "hom_space", "hom_AA",
    "trace", "trace_map", "trace_of_tensor", "flip_iso", "center_submodule",
    "bimodule_subquotient", "sub_bimodule", "quotient_bimodule", "restrict",
    "direct_sum", "base_algebra", "right_module", "left_module",
    "swap_matrix", "identity_map",
]


class NotBimodule(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class NotBimoduleMap(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


_BASE = {}


def base_algebra(field):
    """The field itself as a 1-dim algebra (cached per field)."""
    if field not in _BASE:
        _BASE[field] = make_algebra(field, 1, [[[1]]], [1], name="K")
    return _BASE[field]


def _same_alg(a, b):
    return a is b or a.same_structure(b)


class Bimodule:
    """An (alg, ralg)-bimodule.  Build through ``make_bimodule`` to validate."""

    def __init__(self, alg, dim, left, right, ralg=None, name=None):
        self.alg = alg
        self.ralg = alg if ralg is None else ralg
        self.dim = dim
        self.left = list(left)
        self.right = list(right)
        self.name = name
        self._lsp = None
        self._rsp = None

    def __repr__(self):
        return f"Bimodule({self.name or '?'}, dim={self.dim}, over {self.alg.name}|{self.ralg.name})"

    @property
    def field(self):
        return self.alg.field

    def left_of(self, x):
        out = self.field.zeros(self.dim, self.dim)
        for i, c in enumerate(x):
            if c != 0:
                out = out + self.left[i].scale(c)
        return out

    def right_of(self, x):
        out = self.field.zeros(self.dim, self.dim)
        for i, c in enumerate(x):
            if c != 0:
                out = out + self.right[i].scale(c)
        return out

    def left_sparse(self, i):
        """Columns of left[i] as sparse dicts."""
        if self._lsp is None:
            self._lsp = [m.columns_sparse() for m in self.left]
        return self._lsp[i]

    def right_sparse(self, i):
        if self._rsp is None:
            self._rsp = [m.columns_sparse() for m in self.right]
        return self._rsp[i]

    def act(self, a, v, b):
        """a . v . b for algebra vectors a, b (None means 1) and a coordinate list v."""
        col = self.field.column_vector(v)
        if a is not None:
            col = self.left_of(a) @ col
        if b is not None:
            col = self.right_of(b) @ col
        return col.column(0)

    def is_symmetric(self):
        """True when left and right actions agree (requires alg = ralg)."""
        return all(l == r for l, r in zip(self.left, self.right))


def make_bimodule(alg, dim, left, right, ralg=None, name=None, check=True):
    m = Bimodule(alg, dim, left, right, ralg, name)
    if check:
        validate_bimodule(m)
    return m


def validate_bimodule(m):
    a, b, f = m.alg, m.ralg, m.field
    if len(m.left) != a.dim or len(m.right) != b.dim:
        raise NotBimodule("wrong number of action matrices")
    for x in m.left + m.right:
        if x.field is not f:
            raise NotBimodule("field mismatch")
        if x.shape != (m.dim, m.dim):
            raise NotBimodule("action matrix has the wrong shape")
    if not m.left_of(a.unit).is_identity():
        raise NotBimodule("left unit axiom", "unit")
    if not m.right_of(b.unit).is_identity():
        raise NotBimodule("right unit axiom", "unit")
    for i in range(a.dim):
        for j in range(a.dim):
            prod = m.left_of(a.mul(a.basis_vector(i), a.basis_vector(j)))
            if not (m.left[i] @ m.left[j] == prod):
                raise NotBimodule("left action not multiplicative", (i, j))
    for i in range(b.dim):
        for j in range(b.dim):
            prod = m.right_of(b.mul(b.basis_vector(i), b.basis_vector(j)))
            if not (m.right[j] @ m.right[i] == prod):
                raise NotBimodule("right action not multiplicative", (i, j))
    for i in algebra_generators(a):
        for j in algebra_generators(b):
            if not (m.left[i] @ m.right[j] == m.right[j] @ m.left[i]):
                raise NotBimodule("left and right actions do not commute", (i, j))
    return m


class BimoduleMap:
    def __init__(self, source, target, matrix, check=True):
        self.source = source
        self.target = target
        self.matrix = matrix
        if check:
            self.validate()

    def __repr__(self):
        return f"BimoduleMap({self.source.dim} -> {self.target.dim})"

    def validate(self):
        s, t, f = self.source, self.target, self.matrix
        if f.shape != (t.dim, s.dim):
            raise NotBimoduleMap("matrix has the wrong shape")
        for i in algebra_generators(s.alg):
            if not (t.left[i] @ f == f @ s.left[i]):
                raise NotBimoduleMap("does not commute with the left action", ("left", i))
        for i in algebra_generators(s.ralg):
            if not (t.right[i] @ f == f @ s.right[i]):
                raise NotBimoduleMap("does not commute with the right action", ("right", i))

    def __matmul__(self, other):
        return BimoduleMap(other.source, self.target, self.matrix @ other.matrix, check=False)

    def __add__(self, other):
        return BimoduleMap(self.source, self.target, self.matrix + other.matrix, check=False)

    def is_iso(self):
        return self.source.dim == self.target.dim and rank(self.matrix) == self.source.dim

    def inverse(self):
        return BimoduleMap(self.target, self.source, self.matrix.inverse(), check=False)


def identity_map(m):
    return BimoduleMap(m, m, m.field.eye(m.dim), check=False)


class ConstructedBimodule(Bimodule):
    """A bimodule realized as a subquotient of an ambient K-tensor space.

    ``presentation.proj`` takes ambient coordinates to this bimodule's basis,
    ``presentation.sect`` picks ambient representatives.
    """

    def __init__(self, alg, dim, left, right, presentation, factors, ralg=None, name=None):
        super().__init__(alg, dim, left, right, ralg, name)
        self.presentation = presentation
        self.factors = factors
        self.kind = "subquotient"

    @property
    def bimodule(self):
        return self

    def from_ambient(self, vec):
        return (self.presentation.proj @ self.field.column_vector(vec)).column(0)

    def to_ambient(self, coords):
        return (self.presentation.sect @ self.field.column_vector(coords)).column(0)


def regular_bimodule(a):
    return Bimodule(a, a.dim, [a.lmat(i) for i in range(a.dim)],
                    [a.rmat(i) for i in range(a.dim)], name=f"{a.name}")


def right_module(a, dim, action, name=None, check=True):
    """A right A-module (given by the matrices of m -> m e_i) as a (K, A)-bimodule."""
    k = base_algebra(a.field)
    return make_bimodule(k, dim, [a.field.eye(dim)], action, ralg=a, name=name, check=check)


def left_module(a, dim, action, name=None, check=True):
    k = base_algebra(a.field)
    return make_bimodule(a, dim, action, [a.field.eye(dim)], ralg=k, name=name, check=check)


def outer_tensor(m, n, name=None):
    """M (x)_K N with M's left action and N's right action."""
    f = m.field
    left = [kron(x, f.eye(n.dim)) for x in m.left]
    right = [kron(f.eye(m.dim), y) for y in n.right]
    return Bimodule(m.alg, m.dim * n.dim, left, right, n.ralg,
                    name or f"{m.name}(x){n.name}")


def free_bimodule(a):
    """A (x)_K A with outer actions."""
    r = regular_bimodule(a)
    out = outer_tensor(r, r, f"{a.name}(x){a.name}")
    n = a.dim
    u = [(k, x) for k, x in enumerate(a.unit) if x != 0]
    out.generator_hint = [{k1 * n + k2: x1 * x2 for k1, x1 in u for k2, x2 in u}]
    return out


def swap_matrix(field, d1, d2):
    """Permutation matrix of x (x) y -> y (x) x from V1 (x) V2 to V2 (x) V1."""
    cols = [{j * d1 + i: field.one} for i in range(d1) for j in range(d2)]
    return field.from_columns(d1 * d2, cols)


def _tensor_relations(m, n):
    f = m.field
    blocks = [kron(m.right[k], f.eye(n.dim)) - kron(f.eye(m.dim), n.left[k])
              for k in algebra_generators(m.ralg)]
    return hstack(blocks, rows=m.dim * n.dim, field=f)


def _induce_actions(m_left, m_right, pres, check):
    if check:
        left = [induced_map(x, pres, pres) for x in m_left]
        right = [induced_map(y, pres, pres) for y in m_right]
    else:
        left = [pres.proj @ x @ pres.sect for x in m_left]
        right = [pres.proj @ y @ pres.sect for y in m_right]
    return left, right


def tensor_over_A(m, n, check=False, name=None):
    """M (x)_A N as the cokernel of the canonical pair on M (x)_K N."""
    if not _same_alg(m.ralg, n.alg):
        raise ValueError("middle algebras differ")
    if m.field is not n.field:
        raise ValueError("field mismatch")
    pres = cokernel_presentation(_tensor_relations(m, n))
    f = m.field
    amb_left = [kron(x, f.eye(n.dim)) for x in m.left]
    amb_right = [kron(f.eye(m.dim), y) for y in n.right]
    left, right = _induce_actions(amb_left, amb_right, pres, check)
    out = ConstructedBimodule(m.alg, pres.dim, left, right, pres, [m, n], n.ralg,
                              name or f"({m.name}(x)A{n.name})")
    out.kind = "tensor"
    return out


def tensor_maps(f, g, src=None, tgt=None):
    """f (x)_A g between the computed tensor products (built if not given)."""
    src = src or tensor_over_A(f.source, g.source)
    tgt = tgt or tensor_over_A(f.target, g.target)
    mat = induced_map(kron(f.matrix, g.matrix), src.presentation, tgt.presentation)
    return BimoduleMap(src, tgt, mat, check=False)


def associator(m1, m2, m3, t12=None, left=None, t23=None, right=None):
    """(M1 (x) M2) (x) M3 -> M1 (x) (M2 (x) M3) over A, verified to be well defined."""
    f = m1.field
    t12 = t12 or tensor_over_A(m1, m2)
    left = left or tensor_over_A(t12, m3)
    t23 = t23 or tensor_over_A(m2, m3)
    right = right or tensor_over_A(m1, t23)
    amb = (right.presentation.proj
           @ kron(f.eye(m1.dim), t23.presentation.proj)
           @ kron(t12.presentation.sect, f.eye(m3.dim)))
    mat = induced_map(amb, left.presentation, whole_space(f, right.dim))
    return BimoduleMap(left, right, mat, check=False)


def left_unitor(m, t=None):
    """A (x)_A M -> M, a (x) x -> a x."""
    a = m.alg
    t = t or tensor_over_A(regular_bimodule(a), m)
    amb = hstack(m.left)
    mat = induced_map(amb, t.presentation, whole_space(m.field, m.dim))
    return BimoduleMap(t, m, mat, check=False)


def right_unitor(m, t=None):
    """M (x)_A A -> M, x (x) a -> x a."""
    a = m.ralg
    t = t or tensor_over_A(m, regular_bimodule(a))
    cols = []
    rs = [x.columns_sparse() for x in m.right]
    for j in range(m.dim):
        for i in range(a.dim):
            cols.append(rs[i][j])
    amb = m.field.from_columns(m.dim, cols)
    mat = induced_map(amb, t.presentation, whole_space(m.field, m.dim))
    return BimoduleMap(t, m, mat, check=False)


class HomSpace:
    """A space of maps source -> target with an explicit basis of matrices."""

    def __init__(self, source, target, vec_basis):
        self.source = source
        self.target = target
        self.vec_basis = vec_basis
        self.dim = vec_basis.cols
        self.basis = [self.element_of(c) for c in range(self.dim)]

    def __repr__(self):
        return f"HomSpace({self.source.dim} -> {self.target.dim}, dim={self.dim})"

    def element_of(self, j):
        col = self.vec_basis.column(j)
        return self.source.field.mat(self.target.dim, self.source.dim, col)

    def element(self, coords):
        f = self.source.field
        out = f.zeros(self.target.dim, self.source.dim)
        for c, b in zip(coords, self.basis):
            if c != 0:
                out = out + b.scale(c)
        return out

    def coords(self, mat):
        """Coordinates of a matrix in this space, or None if it is not a member."""
        f = self.source.field
        v = f.mat(mat.rows * mat.cols, 1, mat.entries())
        x = solve(self.vec_basis, v)
        return None if x is None else x.column(0)


def _intertwine_rows(tmat, smat):
    """Rows of the system T X - X S = 0 in the row-major vectorization of X."""
    f = tmat.field
    return kron(tmat, f.eye(smat.rows)) - kron(f.eye(tmat.rows), smat.T)


def hom_space(source, target, left=True, right=True):
    """Maps source -> target commuting with the chosen actions."""
    f = source.field
    n = source.dim * target.dim
    blocks = []
    if left:
        if not _same_alg(source.alg, target.alg):
            raise ValueError("left algebras differ")
        blocks += [_intertwine_rows(target.left[i], source.left[i])
                   for i in algebra_generators(source.alg)]
    if right:
        if not _same_alg(source.ralg, target.ralg):
            raise ValueError("right algebras differ")
        blocks += [_intertwine_rows(target.right[i], source.right[i])
                   for i in algebra_generators(source.ralg)]
    if not blocks:
        return HomSpace(source, target, f.eye(n))
    return HomSpace(source, target, kernel_basis(vstack(blocks, cols=n, field=f)))


def hom_AA(d, m):
    """Bimodule maps d -> m."""
    return hom_space(d, m, True, True)


def _commutator_block(m):
    return [m.left[k] - m.right[k] for k in algebra_generators(m.alg)]


def trace(fm):
    """Tr(F) = F / span{a f - f a} as a Subquotient of F."""
    if not _same_alg(fm.alg, fm.ralg):
        raise ValueError("trace needs an A-bimodule")
    return cokernel_presentation(hstack(_commutator_block(fm), rows=fm.dim, field=fm.field))


def trace_map(phi, src=None, tgt=None):
    src = src or trace(phi.source)
    tgt = tgt or trace(phi.target)
    return induced_map(phi.matrix, src, tgt)


def trace_of_tensor(f1, f2):
    """Tr(F1 (x)_A F2) as a quotient of F1 (x)_K F2."""
    f = f1.field
    rel = [_tensor_relations(f1, f2)]
    rel += [kron(f1.left[k], f.eye(f2.dim)) - kron(f.eye(f1.dim), f2.right[k])
            for k in algebra_generators(f1.alg)]
    return cokernel_presentation(hstack(rel, rows=f1.dim * f2.dim, field=f))


def flip_iso(f1, f2, tr12=None, tr21=None):
    """Tr(F1 (x)_A F2) -> Tr(F2 (x)_A F1) induced by x (x) y -> y (x) x."""
    tr12 = tr12 or trace_of_tensor(f1, f2)
    tr21 = tr21 or trace_of_tensor(f2, f1)
    return induced_map(swap_matrix(f1.field, f1.dim, f2.dim), tr12, tr21)


def center_submodule(m):
    """Basis (columns) of {z : a z = z a for all a}."""
    return kernel_basis(vstack(_commutator_block(m), cols=m.dim, field=m.field))


def bimodule_subquotient(m, sub, denom, check=True, name=None):
    """The bimodule S/D for sub-bimodules D in S of m (given by spanning columns)."""
    pres = subquotient(sub, denom)
    left, right = _induce_actions(m.left, m.right, pres, check)
    return ConstructedBimodule(m.alg, pres.dim, left, right, pres, [m], m.ralg, name)


def _closure(m, vecs):
    """Sub-bimodule generated by the columns of vecs."""
    from .exactlin import image_basis
    span = image_basis(vecs) if vecs.cols else vecs
    gens_l = algebra_generators(m.alg)
    gens_r = algebra_generators(m.ralg)
    while True:
        blocks = [span] + [m.left[i] @ span for i in gens_l] + [m.right[i] @ span for i in gens_r]
        nxt = image_basis(hstack(blocks, rows=m.dim, field=m.field))
        if nxt.cols == span.cols:
            return span
        span = nxt


def sub_bimodule(m, vecs, name=None):
    """The sub-bimodule generated by the columns of vecs."""
    f = m.field
    return bimodule_subquotient(m, _closure(m, vecs), f.zeros(m.dim, 0), name=name)


def quotient_bimodule(m, vecs, name=None):
    """m modulo the sub-bimodule generated by the columns of vecs."""
    return bimodule_subquotient(m, m.field.eye(m.dim), _closure(m, vecs), name=name)


def restrict(m, fl=None, fr=None, name=None):
    """Restriction of scalars along algebra maps fl: B -> alg, fr: B' -> ralg."""
    left = m.left if fl is None else [m.left_of(fl(fl.source.basis_vector(i)))
                                      for i in range(fl.source.dim)]
    right = m.right if fr is None else [m.right_of(fr(fr.source.basis_vector(i)))
                                        for i in range(fr.source.dim)]
    return Bimodule(m.alg if fl is None else fl.source, m.dim, left, right,
                    m.ralg if fr is None else fr.source, name or m.name)


def direct_sum(m, n):
    from .exactlin import block_diag
    return Bimodule(m.alg, m.dim + n.dim,
                    [block_diag([x, y]) for x, y in zip(m.left, n.left)],
                    [block_diag([x, y]) for x, y in zip(m.right, n.right)],
                    m.ralg, f"{m.name}+{n.name}")


def check_tensor_descent(m, n, t):
    """Re-verify that the outer actions descend to t = m (x)_A n."""
    f = m.field
    for x in m.left:
        induced_map(kron(x, f.eye(n.dim)), t.presentation, t.presentation)
    for y in n.right:
        induced_map(kron(f.eye(m.dim), y), t.presentation, t.presentation)
    return True


__all__ += ["check_tensor_descent", "validate_bimodule", "NotWellDefined"]


def leaves(x):
    """The K-tensor factors of a (nested) tensor product over A."""
    if isinstance(x, ConstructedBimodule) and x.kind == "tensor":
        return leaves(x.factors[0]) + leaves(x.factors[1])
    return [x]


def flat_proj(x):
    """Projection from the K-tensor product of the leaves onto x."""
    if isinstance(x, ConstructedBimodule) and x.kind == "tensor":
        m, n = x.factors
        return x.presentation.proj @ kron(flat_proj(m), flat_proj(n))
    return x.field.eye(x.dim)


def flat_sect(x):
    """A section of flat_proj(x)."""
    if isinstance(x, ConstructedBimodule) and x.kind == "tensor":
        m, n = x.factors
        return kron(flat_sect(m), flat_sect(n)) @ x.presentation.sect
    return x.field.eye(x.dim)


def tensor_many(factors):
    """Left-associated tensor product over the middle algebras."""
    out = factors[0]
    for x in factors[1:]:
        out = tensor_over_A(out, x)
    return out


def permute_factors(field, dims, perm):
    """Matrix of V_0 (x) ... (x) V_k -> V_perm[0] (x) ... (x) V_perm[k]."""
    from itertools import product
    new_dims = [dims[p] for p in perm]
    cols = []
    for idx in product(*[range(d) for d in dims]):
        new = [idx[p] for p in perm]
        k = 0
        for d, i in zip(new_dims, new):
            k = k * d + i
        cols.append({k: field.one})
    n = 1
    for d in dims:
        n *= d
    return field.from_columns(n, cols)


__all__ += ["leaves", "flat_proj", "flat_sect", "tensor_many", "permute_factors"]


class TensorSpace:
    """F_1 (x)_A ... (x)_A F_k with the F_i treated as leaves.

    ``proj`` maps the K-tensor product of the leaves onto ``obj`` (the
    left-associated iterated tensor product); ``sect`` is a section of it.
    """

    def __init__(self, factors):
        f = factors[0].field
        self.factors = list(factors)
        self.dims = [x.dim for x in factors]
        obj = factors[0]
        P = f.eye(obj.dim)
        S = f.eye(obj.dim)
        for x in factors[1:]:
            t = tensor_over_A(obj, x)
            P = t.presentation.proj @ kron(P, f.eye(x.dim))
            S = kron(S, f.eye(x.dim)) @ t.presentation.sect
            obj = t
        self.obj = obj
        self.proj = P
        self.sect = S

    @property
    def dim(self):
        return self.obj.dim

    @property
    def flat_dim(self):
        n = 1
        for d in self.dims:
            n *= d
        return n

    def index(self, idx):
        k = 0
        for d, i in zip(self.dims, idx):
            k = k * d + i
        return k

    def unindex(self, k):
        out = []
        for d in reversed(self.dims):
            k, r = divmod(k, d)
            out.append(r)
        return tuple(reversed(out))

    def rep(self, coords):
        """Sparse ambient representative {leaf index tuple: coeff} of a coordinate vector."""
        col = self.sect @ self.obj.field.column_vector(coords)
        return {self.unindex(k): v for k, v in col.column_dict(0).items()}

    def rep_sparse(self):
        """Representatives of all basis vectors, as dicts over leaf index tuples."""
        return [{self.unindex(k): v for k, v in col.items()}
                for col in self.sect.columns_sparse()]

    def from_flat(self, vecs):
        """Project a list of sparse flat vectors {index tuple: coeff} to coordinates (as a Mat)."""
        f = self.obj.field
        m = f.from_columns(self.flat_dim, [{self.index(k): v for k, v in d.items()} for d in vecs])
        return self.proj @ m


__all__ += ["TensorSpace"]
