"""
Exact dense linear algebra over Q and F_p.

Matrices wrap python-flint (``fmpq_mat`` / ``nmod_mat``); every matrix
carries its field, and mixing fields raises ``FieldMismatch``.  All chosen
bases follow the first-pivot convention of reduced row echelon form, so
results are reproducible.
"""

from fractions import Fraction

import flint

__all__ = [
    "Field", "QQ", "GF", "Mat", "FieldMismatch", "NotWellDefined", "NoSplit",
    "rref", "rank", "kernel_basis", "image_basis", "solve", "in_span",
    "Subquotient", "subquotient", "cokernel_presentation", "factor_through", "induced_map",
    "find_splitting", "kron", "hstack", "vstack", "block_diag",
]


class FieldMismatch(ValueError):
    pass


class NotWellDefined(ArithmeticError):
    """A map fails to descend to the requested subquotient."""

    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class NoSplit(ArithmeticError):
    """The linear system for a splitting has no solution."""

    def __init__(self, msg, system=None):
        super().__init__(msg)
        self.system = system


def _is_prime(p):
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


class Field:
    """Either the rationals (``p is None``) or the prime field F_p."""

    _cache = {}

    def __new__(cls, p=None):
        if p in cls._cache:
            return cls._cache[p]
        if p is not None and not _is_prime(p):
            raise ValueError(f"{p} is not prime")
        self = super().__new__(cls)
        self.p = p
        cls._cache[p] = self
        return self

    def __getnewargs__(self):
        return (self.p,)

    @property
    def name(self):
        return "Q" if self.p is None else f"Fp:{self.p}"

    @classmethod
    def parse(cls, spec):
        spec = spec.strip()
        if spec in ("Q", "QQ"):
            return cls(None)
        if spec.startswith("Fp:"):
            return cls(int(spec[3:]))
        raise ValueError(f"unknown field spec {spec!r}")

    def __repr__(self):
        return self.name

    @property
    def characteristic(self):
        return 0 if self.p is None else self.p

    def __call__(self, x):
        if self.p is None:
            if isinstance(x, flint.fmpq):
                return x
            if isinstance(x, str):
                x = Fraction(x)
            if isinstance(x, Fraction):
                return flint.fmpq(x.numerator, x.denominator)
            if isinstance(x, flint.nmod):
                raise FieldMismatch("F_p scalar used over Q")
            return flint.fmpq(int(x))
        if isinstance(x, flint.nmod):
            if x.modulus() != self.p:
                raise FieldMismatch("scalars from different prime fields")
            return x
        if isinstance(x, str):
            x = Fraction(x)
        if isinstance(x, (Fraction, flint.fmpq)):
            num, den = int(x.numerator), int(x.denominator)
            if den % self.p == 0:
                raise ZeroDivisionError("denominator divisible by p")
            return flint.nmod(num, self.p) / flint.nmod(den, self.p)
        return flint.nmod(int(x), self.p)

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def to_json(self, x):
        """Rationals as "a/b" strings, residues as integers."""
        if self.p is None:
            x = self(x)
            n, d = int(x.numerator), int(x.denominator)
            return str(n) if d == 1 else f"{n}/{d}"
        return int(self(x))

    def _raw(self, rows, cols, entries=None):
        if self.p is None:
            if entries is None:
                return flint.fmpq_mat(rows, cols)
            return flint.fmpq_mat(rows, cols, entries)
        if entries is None:
            return flint.nmod_mat(rows, cols, self.p)
        return flint.nmod_mat(rows, cols, [int(e) for e in entries], self.p)

    def mat(self, rows, cols=None, entries=None):
        """Build a matrix from a list of rows or from a flat row-major list."""
        if cols is None:
            data = [list(r) for r in rows]
            nr = len(data)
            nc = len(data[0]) if nr else 0
            flat = [self(x) for r in data for x in r]
            return Mat(self, self._raw(nr, nc, flat) if flat else self._raw(nr, nc))
        if entries is None:
            return Mat(self, self._raw(rows, cols))
        flat = [self(x) for x in entries]
        if len(flat) != rows * cols:
            raise ValueError("entries.length != rows*cols")
        return Mat(self, self._raw(rows, cols, flat) if flat else self._raw(rows, cols))

    def zeros(self, rows, cols):
        return Mat(self, self._raw(rows, cols))

    def eye(self, n):
        m = self._raw(n, n)
        one = self.one
        for i in range(n):
            m[i, i] = one
        return Mat(self, m)

    def from_columns(self, nrows, columns):
        """Matrix whose j-th column is the sparse dict ``columns[j]``."""
        m = self._raw(nrows, len(columns))
        for j, col in enumerate(columns):
            for i, v in col.items():
                if v != 0:
                    m[i, j] = v
        return Mat(self, m)

    def column_vector(self, values):
        values = [self(v) for v in values]
        return Mat(self, self._raw(len(values), 1, values) if values else self._raw(0, 1))


QQ = Field(None)


def GF(p):
    return Field(p)


class Mat:
    """Dense matrix over a Field.  Treat as immutable once built."""

    __slots__ = ("field", "m")

    def __init__(self, field, m):
        self.field = field
        self.m = m

    @property
    def rows(self):
        return self.m.nrows()

    @property
    def cols(self):
        return self.m.ncols()

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __repr__(self):
        return f"Mat[{self.field.name}]({self.rows}x{self.cols}, {self.tolist()})"

    def _check(self, other):
        if not isinstance(other, Mat):
            raise TypeError("expected Mat")
        if other.field is not self.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")

    def __getitem__(self, ij):
        return self.m[ij]

    def tolist(self):
        return [[self.m[i, j] for j in range(self.cols)] for i in range(self.rows)]

    def entries(self):
        return self.m.entries() if self.rows and self.cols else []

    def column(self, j):
        return [self.m[i, j] for i in range(self.rows)]

    def column_dict(self, j):
        out = {}
        for i in range(self.rows):
            v = self.m[i, j]
            if v != 0:
                out[i] = v
        return out

    def columns_sparse(self):
        """All columns as sparse dicts (one pass over the entries)."""
        cols = [dict() for _ in range(self.cols)]
        nc = self.cols
        for k, v in enumerate(self.entries()):
            if v != 0:
                cols[k % nc][k // nc] = v
        return cols

    def __matmul__(self, other):
        self._check(other)
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        if self.rows == 0 or other.cols == 0 or self.cols == 0:
            return self.field.zeros(self.rows, other.cols)
        return Mat(self.field, self.m * other.m)

    def __add__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        if 0 in self.shape:
            return self
        return Mat(self.field, self.m + other.m)

    def __sub__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        if 0 in self.shape:
            return self
        return Mat(self.field, self.m - other.m)

    def __neg__(self):
        if 0 in self.shape:
            return self
        return Mat(self.field, -self.m)

    def scale(self, c):
        if 0 in self.shape:
            return self
        return Mat(self.field, self.m * self.field(c))

    def __eq__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        if other.field is not self.field or self.shape != other.shape:
            return False
        if 0 in self.shape:
            return True
        return self.m == other.m

    __hash__ = None

    def is_zero(self):
        return all(v == 0 for v in self.entries())

    def is_identity(self):
        return self.rows == self.cols and self == self.field.eye(self.rows)

    @property
    def T(self):
        if 0 in self.shape:
            return self.field.zeros(self.cols, self.rows)
        return Mat(self.field, self.m.transpose())

    def submatrix(self, rows=None, cols=None):
        rows = range(self.rows) if rows is None else list(rows)
        cols = range(self.cols) if cols is None else list(cols)
        out = self.field._raw(len(rows), len(cols))
        for a, i in enumerate(rows):
            for b, j in enumerate(cols):
                out[a, b] = self.m[i, j]
        return Mat(self.field, out)

    def inverse(self):
        if self.rows != self.cols:
            raise ValueError("non-square")
        if self.rows == 0:
            return self
        return Mat(self.field, self.m.inv())

    def power(self, k):
        out = self.field.eye(self.rows)
        for _ in range(k):
            out = out @ self
        return out


def _fields(*mats):
    f = mats[0].field
    for m in mats[1:]:
        if m.field is not f:
            raise FieldMismatch(f"{f} vs {m.field}")
    return f


def hstack(mats, rows=None, field=None):
    mats = list(mats)
    if not mats:
        return field.zeros(rows or 0, 0)
    f = _fields(*mats)
    nr = mats[0].rows
    if any(m.rows != nr for m in mats):
        raise ValueError("row mismatch in hstack")
    out = f._raw(nr, sum(m.cols for m in mats))
    off = 0
    for m in mats:
        nc = m.cols
        for k, v in enumerate(m.entries()):
            if v != 0:
                out[k // nc, off + k % nc] = v
        off += nc
    return Mat(f, out)


def vstack(mats, cols=None, field=None):
    mats = list(mats)
    if not mats:
        return field.zeros(0, cols or 0)
    return hstack([m.T for m in mats]).T


def block_diag(mats):
    f = _fields(*mats)
    nr = sum(m.rows for m in mats)
    nc = sum(m.cols for m in mats)
    out = f._raw(nr, nc)
    r0 = c0 = 0
    for m in mats:
        w = m.cols
        for k, v in enumerate(m.entries()):
            if v != 0:
                out[r0 + k // w, c0 + k % w] = v
        r0 += m.rows
        c0 += m.cols
    return Mat(f, out)


def kron(a, b):
    f = _fields(a, b)
    out = f._raw(a.rows * b.rows, a.cols * b.cols)
    be = [(k // b.cols, k % b.cols, v) for k, v in enumerate(b.entries()) if v != 0]
    for k, x in enumerate(a.entries()):
        if x == 0:
            continue
        i, j = divmod(k, a.cols)
        for p, q, y in be:
            out[i * b.rows + p, j * b.cols + q] = x * y
    return Mat(f, out)


def rref(m):
    """Reduced row echelon form; returns (R, pivot_columns) with R cut to its rank."""
    if m.rows == 0 or m.cols == 0:
        return m.field.zeros(0, m.cols), []
    R, r = m.m.rref()
    pivots = []
    i = 0
    for j in range(m.cols):
        if i < r and R[i, j] != 0:
            pivots.append(j)
            i += 1
    out = m.field._raw(r, m.cols)
    for a in range(r):
        for j in range(m.cols):
            v = R[a, j]
            if v != 0:
                out[a, j] = v
    return Mat(m.field, out), pivots


def rank(m):
    if m.rows == 0 or m.cols == 0:
        return 0
    if m.field.p is None:
        num, _ = m.m.numer_denom()
        return num.rank()
    return m.m.rank()


def kernel_basis(m):
    """Columns form a basis of {v : m v = 0}; free-variable (first-pivot) normalized."""
    R, piv = rref(m)
    f = m.field
    pset = set(piv)
    free = [j for j in range(m.cols) if j not in pset]
    out = f._raw(m.cols, len(free))
    one = f.one
    for c, j in enumerate(free):
        out[j, c] = one
        for k, p in enumerate(piv):
            v = R[k, j]
            if v != 0:
                out[p, c] = -v
    return Mat(f, out)


def image_basis(m):
    """The pivot columns of m (a basis of its column space)."""
    _, piv = rref(m)
    return m.submatrix(cols=piv)


def solve(m, b):
    """Some X with m X = b (free variables set to zero), or None."""
    f = _fields(m, b)
    aug = hstack([m, b])
    R, piv = rref(aug)
    if any(p >= m.cols for p in piv):
        return None
    out = f._raw(m.cols, b.cols)
    for k, p in enumerate(piv):
        for j in range(b.cols):
            v = R[k, m.cols + j]
            if v != 0:
                out[p, j] = v
    return Mat(f, out)


def in_span(basis, vecs):
    """True iff every column of vecs lies in the column span of basis."""
    if vecs.cols == 0:
        return True
    if basis.cols == 0:
        return vecs.is_zero()
    return rank(hstack([basis, vecs])) == rank(basis)


class Subquotient:
    """S/D inside an ambient space, with a chosen projection and section.

    ``proj`` maps ambient coordinates (of vectors in S) to S/D coordinates;
    ``sect`` maps S/D coordinates back to ambient representatives.
    """

    __slots__ = ("ambient_dim", "sub_basis", "denom_basis", "proj", "sect", "sect_cols", "left_inv")

    def __init__(self, ambient_dim, sub_basis, denom_basis, proj, sect, left_inv=None):
        self.sect_cols = None
        self.left_inv = left_inv
        self.ambient_dim = ambient_dim
        self.sub_basis = sub_basis
        self.denom_basis = denom_basis
        self.proj = proj
        self.sect = sect

    @property
    def dim(self):
        return self.proj.rows

    @property
    def field(self):
        return self.proj.field

    def __repr__(self):
        return (f"Subquotient(ambient={self.ambient_dim}, sub={self.sub_basis.cols}, "
                f"denom={self.denom_basis.cols}, dim={self.dim})")

    def contains(self, vecs):
        if self.left_inv is None:
            return True
        return self.sub_basis @ (self.left_inv @ vecs) == vecs

    def is_zero_class(self, vecs):
        return self.contains(vecs) and (self.proj @ vecs).is_zero()


def subquotient(sub, denom, check=True, whole=False):
    """Build S/D from spanning columns of S and D (D must lie in S).

    With ``whole=True`` the sub argument is ignored and S is the ambient space.
    """
    f = _fields(sub, denom)
    n = sub.rows
    if whole:
        S = None
        s = n
        X = denom
    else:
        S = image_basis(sub) if sub.cols else sub
        s = S.cols
        # left inverse of S on its column span: invert a maximal set of independent rows
        _, prow = rref(S.T)
        if s:
            L = S.submatrix(rows=prow).inverse() @ _selector(f, prow, n)
        else:
            L = f.zeros(0, n)
        X = L @ denom
        if check and not (S @ X == denom):
            raise NotWellDefined("denominator not contained in sub", witness=denom)
    R, piv = rref(X.T)
    pset = set(piv)
    Q = [j for j in range(s) if j not in pset]
    pc = f._raw(len(Q), s)
    one = f.one
    for a, q in enumerate(Q):
        pc[a, q] = one
        for k, p in enumerate(piv):
            v = R[k, q]
            if v != 0:
                pc[a, p] = -v
    if whole:
        out = Subquotient(n, f.eye(n), R.T, Mat(f, pc), _selector(f, Q, n).T)
        out.sect_cols = Q
        return out
    sc = f._raw(s, len(Q))
    for a, q in enumerate(Q):
        sc[q, a] = one
    D = S @ R.T
    return Subquotient(n, S, D, Mat(f, pc) @ L, S @ Mat(f, sc), left_inv=L)


def _selector(f, idx, n):
    m = f._raw(len(idx), n)
    one = f.one
    for a, i in enumerate(idx):
        m[a, i] = one
    return Mat(f, m)


def cokernel_presentation(m):
    """codomain / im(m) as a Subquotient with sub = whole codomain."""
    f = m.field
    return subquotient(f.zeros(m.rows, 0), m, whole=True)


def whole_space(field, n):
    out = Subquotient(n, field.eye(n), field.zeros(n, 0), field.eye(n), field.eye(n))
    out.sect_cols = list(range(n))
    return out


def induced_map(f, dom, cod):
    """cod.proj . f . dom.sect, after checking f(S) in S' and f(D) in D'."""
    if f.rows != cod.ambient_dim or f.cols != dom.ambient_dim:
        raise ValueError("map does not match ambient dimensions")
    img_sub = f @ dom.sub_basis
    if not cod.contains(img_sub):
        raise NotWellDefined("map does not send sub into sub", witness=img_sub)
    img_den = f @ dom.denom_basis
    if not cod.is_zero_class(img_den):
        raise NotWellDefined("map does not send denominator into denominator",
                             witness=img_den)
    return cod.proj @ f @ dom.sect


def find_splitting(incl, constraints=()):
    """A retraction r with r.incl = I and r.X = Y.r for each (X, Y) in constraints.

    ``X`` acts on the big space V, ``Y`` on the subspace S.  Raises NoSplit
    when the linear system is infeasible.
    """
    f = incl.field
    n, s = incl.shape
    if rank(incl) != s:
        raise ValueError("inclusion is not injective")
    blocks = [kron(f.eye(s), incl.T)]
    rhs = [_vec(f.eye(s))]
    for X, Y in constraints:
        blocks.append(kron(f.eye(s), X.T) - kron(Y, f.eye(n)))
        rhs.append(f.zeros(s * n, 1))
    A = vstack(blocks)
    b = vstack(rhs)
    x = solve(A, b)
    if x is None:
        raise NoSplit("no equivariant retraction exists", system=(A, b))
    return f.mat(s, n, [x[i, 0] for i in range(s * n)])


def _vec(m):
    """Row-major vectorization as a column."""
    return m.field.mat(m.rows * m.cols, 1, m.entries())


def factor_through(p, f):
    """T with T p = f, for p surjective onto its codomain; raises NotWellDefined.

    This is how a map defined on ambient representatives is shown to descend
    to the quotient presented by p.
    """
    fl = _fields(p, f)
    if f.cols != p.cols:
        raise ValueError("shape mismatch")
    if p.rows == 0:
        if not f.is_zero():
            raise NotWellDefined("map does not vanish on the relations", witness=f)
        return fl.zeros(f.rows, 0)
    _, piv = rref(p)
    S = p.submatrix(cols=piv)
    # S is invertible when p has full row rank
    if len(piv) != p.rows:
        raise ValueError("p is not surjective")
    t = f.submatrix(cols=piv) @ S.inverse()
    if not (t @ p == f):
        raise NotWellDefined("map does not vanish on the relations", witness=f - t @ p)
    return t
