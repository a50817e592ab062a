"""
Finite-dimensional associative unital algebras given by structure constants.

Elements are coordinate lists in the algebra's basis.  ``e_i e_j =
sum_k sc[i][j][k] e_k``.  Tensor-type constructions use the lexicographic
basis order ``(i, j) -> i * dim(second) + j``.
"""

from itertools import product

from .exactlin import kernel_basis, rank, solve, image_basis

__all__ = [
    "Algebra", "AlgebraMap", "NotAssociative", "NotUnital", "NotAlgebraMap",
    "make_algebra", "standard_algebra", "matrix_algebra", "group_algebra",
    "function_algebra", "truncated_poly", "field_extension", "opposite",
    "enveloping", "tensor_algebra", "center_basis", "subalgebra",
    "upper_triangular", "product_algebra", "algebra_generators",
]


class NotAssociative(ValueError):
    def __init__(self, i, j, k):
        super().__init__(f"(e{i} e{j}) e{k} != e{i} (e{j} e{k})")
        self.witness = (i, j, k)


class NotUnital(ValueError):
    def __init__(self, i):
        super().__init__(f"unit fails on basis element {i}")
        self.witness = i


class NotAlgebraMap(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class Algebra:
    """Validated structure-constant algebra.  Build through ``make_algebra``."""

    def __init__(self, field, dim, table, unit, name=None):
        self.field = field
        self.dim = dim
        # table[i][j] = list of (k, c) with c != 0
        self.table = table
        self.unit = list(unit)
        self.name = name
        self._lmats = None
        self._rmats = None
        self._generators = None

    def __repr__(self):
        return f"Algebra({self.name or '?'}, dim={self.dim}, {self.field})"

    def sc(self):
        """Dense structure constants sc[i][j][k]."""
        f, d = self.field, self.dim
        out = [[[f.zero] * d for _ in range(d)] for _ in range(d)]
        for i in range(d):
            for j in range(d):
                for k, c in self.table[i][j]:
                    out[i][j][k] = c
        return out

    def basis_vector(self, i):
        v = [self.field.zero] * self.dim
        v[i] = self.field.one
        return v

    def mul(self, x, y):
        out = [self.field.zero] * self.dim
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            for j, yj in enumerate(y):
                if yj == 0:
                    continue
                s = xi * yj
                for k, c in self.table[i][j]:
                    out[k] += s * c
        return out

    def mul_basis(self, i, j):
        return self.table[i][j]

    def lmat(self, i):
        """Matrix of left multiplication by e_i."""
        if self._lmats is None:
            f, d = self.field, self.dim
            self._lmats = [
                f.from_columns(d, [dict((k, c) for k, c in self.table[a][j]) for j in range(d)])
                for a in range(d)
            ]
        return self._lmats[i]

    def rmat(self, i):
        """Matrix of right multiplication by e_i."""
        if self._rmats is None:
            f, d = self.field, self.dim
            self._rmats = [
                f.from_columns(d, [dict((k, c) for k, c in self.table[j][a]) for j in range(d)])
                for a in range(d)
            ]
        return self._rmats[i]

    def lmat_of(self, x):
        out = self.field.zeros(self.dim, self.dim)
        for i, xi in enumerate(x):
            if xi != 0:
                out = out + self.lmat(i).scale(xi)
        return out

    def rmat_of(self, x):
        out = self.field.zeros(self.dim, self.dim)
        for i, xi in enumerate(x):
            if xi != 0:
                out = out + self.rmat(i).scale(xi)
        return out

    def unit_mat(self):
        return self.field.column_vector(self.unit)

    def is_commutative(self):
        return all(sorted(self.table[i][j]) == sorted(self.table[j][i])
                   for i in range(self.dim) for j in range(i))

    def same_structure(self, other):
        return (self.field is other.field and self.dim == other.dim
                and self.unit == other.unit
                and all(sorted(self.table[i][j]) == sorted(other.table[i][j])
                        for i in range(self.dim) for j in range(self.dim)))

    def unit_index(self):
        """Index of the unit if it is a basis vector, else None."""
        nz = [i for i, u in enumerate(self.unit) if u != 0]
        if len(nz) == 1 and self.unit[nz[0]] == 1:
            return nz[0]
        return None


def _table_from_sc(field, dim, sc):
    table = []
    for i in range(dim):
        row = []
        for j in range(dim):
            entries = []
            for k in range(dim):
                c = field(sc[i][j][k])
                if c != 0:
                    entries.append((k, c))
            row.append(entries)
        table.append(row)
    return table


def make_algebra(field, dim, sc, unit, name=None):
    """Validate structure constants; raises NotAssociative / NotUnital."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if len(sc) != dim or any(len(r) != dim or any(len(c) != dim for c in r) for r in sc):
        raise ValueError("structure constants have the wrong shape")
    if len(unit) != dim:
        raise ValueError("unit has the wrong length")
    a = Algebra(field, dim, _table_from_sc(field, dim, sc), [field(u) for u in unit], name)
    _validate(a)
    return a


def _from_table(field, dim, table, unit, name=None, check=True):
    a = Algebra(field, dim, table, [field(u) for u in unit], name)
    if check:
        _validate(a)
    return a


def _validate(a):
    d = a.dim
    # associativity as multiplicativity of the left regular representation
    L = [a.lmat(i) for i in range(d)]
    for i in range(d):
        for j in range(d):
            lhs = L[i] @ L[j]
            rhs = a.field.zeros(d, d)
            for k, c in a.table[i][j]:
                rhs = rhs + L[k].scale(c)
            if not lhs == rhs:
                for k in range(d):
                    if lhs.column(k) != rhs.column(k):
                        raise NotAssociative(i, j, k)
    for i in range(d):
        e = a.basis_vector(i)
        if a.mul(a.unit, e) != e or a.mul(e, a.unit) != e:
            raise NotUnital(i)


def matrix_algebra(field, n):
    """n x n matrices; basis E_ij at index i*n + j."""
    d = n * n
    table = [[[] for _ in range(d)] for _ in range(d)]
    for i, j, k in product(range(n), repeat=3):
        table[i * n + j][j * n + k] = [(i * n + k, field.one)]
    unit = [field.one if i == j else field.zero for i in range(n) for j in range(n)]
    return _from_table(field, d, table, unit, f"M{n}")


def group_algebra(field, mult_table, name=None):
    """K[G] from a multiplication table of indices (validated as a group via axioms)."""
    n = len(mult_table)
    table = [[[(mult_table[g][h], field.one)] for h in range(n)] for g in range(n)]
    ids = [e for e in range(n) if all(mult_table[e][h] == h and mult_table[h][e] == h for h in range(n))]
    if not ids:
        raise NotUnital(0)
    unit = [field.one if i == ids[0] else field.zero for i in range(n)]
    return _from_table(field, n, table, unit, name or f"K[G{n}]")


def cyclic_group_table(n):
    return [[(g + h) % n for h in range(n)] for g in range(n)]


def function_algebra(field, n, name=None):
    """Map(X, K) for |X| = n with the indicator-function basis."""
    table = [[[(i, field.one)] if i == j else [] for j in range(n)] for i in range(n)]
    return _from_table(field, n, table, [field.one] * n, name or f"Map({n})")


def truncated_poly(field, n, name=None):
    """K[x]/(x^n) with basis 1, x, ..., x^(n-1)."""
    table = [[[(i + j, field.one)] if i + j < n else [] for j in range(n)] for i in range(n)]
    unit = [field.one] + [field.zero] * (n - 1)
    return _from_table(field, n, table, unit, name or f"K[x]/x^{n}")


def field_extension(field, minpoly, name=None):
    """K[x]/(f) for monic f given by coefficients [c0, ..., c_{n-1}, 1]."""
    coeffs = [field(c) for c in minpoly]
    n = len(coeffs) - 1
    if n < 1 or coeffs[-1] != 1:
        raise ValueError("minimal polynomial must be monic of degree >= 1")
    # powers x^0 .. x^(2n-2) reduced
    powers = []
    for e in range(2 * n - 1):
        if e < n:
            v = [field.zero] * n
            v[e] = field.one
        else:
            prev = powers[-1]
            top = prev[n - 1]
            v = [field.zero] + prev[:n - 1]
            v = [v[i] - top * coeffs[i] for i in range(n)]
        powers.append(v)
    table = [[[(k, c) for k, c in enumerate(powers[i + j]) if c != 0] for j in range(n)]
             for i in range(n)]
    unit = [field.one] + [field.zero] * (n - 1)
    return _from_table(field, n, table, unit, name or f"K[x]/({minpoly})")


def product_algebra(field, n):
    """K^n with componentwise product (same as Map(n))."""
    return function_algebra(field, n, f"K^{n}")


def standard_algebra(field, kind, *params):
    kinds = {
        "matrix": matrix_algebra,
        "group": group_algebra,
        "functions": function_algebra,
        "truncated_poly": truncated_poly,
        "field_extension": field_extension,
        "upper_triangular": upper_triangular,
    }
    if kind == "group" and isinstance(params[0], int):
        return group_algebra(field, cyclic_group_table(params[0]), f"K[Z/{params[0]}]")
    if kind not in kinds:
        raise ValueError(f"unknown algebra kind {kind!r}")
    return kinds[kind](field, *params)


def opposite(a):
    table = [[a.table[j][i] for j in range(a.dim)] for i in range(a.dim)]
    return _from_table(a.field, a.dim, table, a.unit, f"{a.name}^o", check=False)


def tensor_algebra(a, b, name=None):
    """A (x)_K B with basis (i, j) -> i * dim B + j."""
    if a.field is not b.field:
        raise ValueError("field mismatch")
    da, db = a.dim, b.dim
    d = da * db
    table = [[None] * d for _ in range(d)]
    for i1, j1, i2, j2 in product(range(da), range(db), range(da), range(db)):
        entries = {}
        for k1, c1 in a.table[i1][i2]:
            for k2, c2 in b.table[j1][j2]:
                key = k1 * db + k2
                entries[key] = entries.get(key, a.field.zero) + c1 * c2
        table[i1 * db + j1][i2 * db + j2] = [(k, c) for k, c in sorted(entries.items()) if c != 0]
    unit = [x * y for x in a.unit for y in b.unit]
    return _from_table(a.field, d, table, unit, name or f"({a.name} x {b.name})", check=False)


def enveloping(a):
    """A^o (x)_K A, basis e_i^o (x) e_j at index i * dim + j."""
    return tensor_algebra(opposite(a), a, f"{a.name}^e")


def center_basis(a):
    """Columns spanning {z : z e_i = e_i z for all i}."""
    blocks = [a.rmat(i) - a.lmat(i) for i in range(a.dim)]
    from .exactlin import vstack
    return kernel_basis(vstack(blocks))


def subalgebra(a, basis, name=None):
    """The subalgebra spanned by the columns of ``basis`` (closure is checked).

    Returns (Algebra, inclusion matrix).
    """
    basis = image_basis(basis)
    k = basis.cols
    if solve(basis, a.unit_mat()) is None:
        raise NotUnital(-1)
    cols = [basis.column(j) for j in range(k)]
    table = []
    for i in range(k):
        row = []
        for j in range(k):
            prod = a.field.column_vector(a.mul(cols[i], cols[j]))
            x = solve(basis, prod)
            if x is None:
                raise NotAlgebraMap("span is not closed under multiplication", (i, j))
            row.append([(r, x[r, 0]) for r in range(k) if x[r, 0] != 0])
        table.append(row)
    u = solve(basis, a.unit_mat())
    sub = _from_table(a.field, k, table, [u[r, 0] for r in range(k)], name, check=False)
    return sub, basis


def upper_triangular(field, n=2):
    """Upper-triangular n x n matrices, basis E_ij (i <= j) in lexicographic order."""
    full = matrix_algebra(field, n)
    idx = [i * n + j for i in range(n) for j in range(n) if i <= j]
    cols = [{k: field.one} for k in idx]
    sub, _ = subalgebra(full, field.from_columns(n * n, cols), f"T{n}")
    return sub


class AlgebraMap:
    """Validated unital algebra homomorphism given by a matrix (target x source)."""

    def __init__(self, source, target, matrix, check=True):
        self.source = source
        self.target = target
        self.matrix = matrix
        if check:
            self._validate()

    def _validate(self):
        s, t, m = self.source, self.target, self.matrix
        if m.shape != (t.dim, s.dim):
            raise ValueError("matrix has the wrong shape")
        if not (m @ s.unit_mat() == t.unit_mat()):
            raise NotAlgebraMap("unit is not preserved")
        cols = [m.column(j) for j in range(s.dim)]
        for i in range(s.dim):
            for j in range(s.dim):
                img = [t.field.zero] * t.dim
                for k, c in s.table[i][j]:
                    for r in range(t.dim):
                        img[r] += c * cols[k][r]
                if t.mul(cols[i], cols[j]) != img:
                    raise NotAlgebraMap("product not preserved", (i, j))

    def __call__(self, x):
        v = self.matrix @ self.source.field.column_vector(x)
        return v.column(0)

    def is_iso(self):
        return self.source.dim == self.target.dim and rank(self.matrix) == self.source.dim


def is_algebra_map(source, target, matrix):
    try:
        AlgebraMap(source, target, matrix)
        return True
    except NotAlgebraMap:
        return False


def algebra_generators(a):
    """Indices of basis elements that generate ``a`` as a unital algebra (greedy)."""
    if getattr(a, "_generators", None) is not None:
        return a._generators
    from .exactlin import hstack
    gens = []
    span = a.unit_mat()
    target = a.dim
    for i in range(a.dim):
        if rank(span) == target:
            break
        if rank(hstack([span, a.field.column_vector(a.basis_vector(i))])) == rank(span):
            continue
        gens.append(i)
        span = _generated(a, gens)
    a._generators = gens
    return gens


def _generated(a, gens):
    """Span of all words in the generators (including the unit)."""
    from .exactlin import hstack
    span = image_basis(a.unit_mat())
    while True:
        new = [span] + [a.lmat(g) @ span for g in gens]
        nxt = image_basis(hstack(new))
        if nxt.cols == span.cols:
            return span
        span = nxt
