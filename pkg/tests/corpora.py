"""Shared generated corpora for the test-suite and the acceptance run."""

import random

from ncaffine.algebra import (
    field_extension, product_algebra, truncated_poly, upper_triangular,
)
from ncaffine.bimod import (
    BimoduleMap, direct_sum, free_bimodule, hom_AA, quotient_bimodule, regular_bimodule,
    sub_bimodule,
)
from ncaffine.exactlin import GF, QQ


def small_algebras():
    """Algebras of dimension <= 3 over Q and F_2."""
    out = []
    for f in (QQ, GF(2)):
        out += [truncated_poly(f, 1), product_algebra(f, 2), truncated_poly(f, 2),
                product_algebra(f, 3), truncated_poly(f, 3), upper_triangular(f, 2)]
    out.append(field_extension(GF(2), [1, 1, 1]))
    return out


def _small_bimodules(a, rng):
    f = a.field
    reg = regular_bimodule(a)
    mods = [reg]
    for _ in range(2):
        v = [f(rng.randint(-1, 1)) for _ in range(a.dim)]
        if any(x != 0 for x in v):
            s = sub_bimodule(reg, f.from_columns(a.dim, [dict(enumerate(v))]))
            if 0 < s.dim < a.dim:
                mods.append(s)
                mods.append(quotient_bimodule(reg, f.from_columns(a.dim, [dict(enumerate(v))])))
    mods.append(direct_sum(reg, mods[-1]))
    if a.dim <= 2:
        mods.append(free_bimodule(a))
    return mods


def purity_corpus(seed=0, per_algebra=6):
    """Bimodule maps over algebras of dim <= 3: random homs, inclusions and projections."""
    rng = random.Random(seed)
    cases = []
    for a in small_algebras():
        f = a.field
        mods = _small_bimodules(a, rng)
        # inclusions of sub-bimodules and projections onto quotients
        for m in mods:
            if hasattr(m, "presentation") and m.presentation.sub_basis.cols < m.presentation.ambient_dim:
                cases.append(BimoduleMap(m, regular_bimodule(a), m.presentation.sect))
        picked = 0
        pairs = [(x, y) for x in mods for y in mods]
        rng.shuffle(pairs)
        for m0, m1 in pairs:
            if picked >= per_algebra:
                break
            h = hom_AA(m0, m1)
            if h.dim == 0:
                continue
            coeffs = [f(rng.randint(-2, 2)) for _ in range(h.dim)]
            cases.append(BimoduleMap(m0, m1, h.element(coeffs)))
            picked += 1
        # a zero map
        cases.append(BimoduleMap(mods[0], mods[0], f.zeros(a.dim, a.dim)))
    return cases


def socle_inclusion():
    """(x) into F_2[x]/(x^2): the standard non-split, non-pure inclusion."""
    a = truncated_poly(GF(2), 2)
    reg = regular_bimodule(a)
    s = sub_bimodule(reg, GF(2).from_columns(2, [{1: 1}]))
    return BimoduleMap(s, reg, s.presentation.sect)


def algebra_maps():
    """Unital algebra maps between small algebras (source dim <= 2, target dim <= 3)."""
    from ncaffine.algebra import AlgebraMap
    out = []
    for f in (QQ, GF(2)):
        k = truncated_poly(f, 1)
        dual = truncated_poly(f, 2)
        cube = truncated_poly(f, 3)
        kk = product_algebra(f, 2)
        kkk = product_algebra(f, 3)
        t2 = upper_triangular(f, 2)

        def m(cols, rows):
            return f.from_columns(rows, [dict(enumerate(c)) for c in cols])

        out += [
            AlgebraMap(k, k, f.eye(1)),
            AlgebraMap(k, dual, m([[1, 0]], 2)),
            AlgebraMap(dual, dual, f.eye(2)),
            AlgebraMap(kk, kk, f.eye(2)),
            AlgebraMap(k, kk, m([[1, 1]], 2)),
            AlgebraMap(dual, cube, m([[1, 0, 0], [0, 0, 1]], 3)),
            AlgebraMap(dual, t2, m([[1, 0, 1], [0, 1, 0]], 3)),
            AlgebraMap(kk, t2, m([[1, 0, 0], [0, 0, 1]], 3)),
            AlgebraMap(kk, kkk, m([[1, 1, 0], [0, 0, 1]], 3)),
            AlgebraMap(k, t2, m([[1, 0, 1]], 3)),
        ]
    f2 = GF(2)
    f4 = field_extension(f2, [1, 1, 1])
    out.append(AlgebraMap(f4, f4, f2.from_columns(2, [{0: 1}, {0: 1, 1: 1}])))
    out.append(AlgebraMap(truncated_poly(f2, 1), f4, f2.from_columns(2, [{0: 1}])))
    return out


def random_rep_instances(n=20, seed=0):
    """(rep, F, G): F an A-bimodule, G a B-bimodule, from algebra-map representations."""
    from ncaffine.coalg import algebra_map_representation
    rng = random.Random(seed)
    maps = algebra_maps()
    reps = {}
    out = []
    for t in range(n):
        alpha = maps[t % len(maps)]
        key = id(alpha)
        if key not in reps:
            reps[key] = algebra_map_representation(alpha)
        rep = reps[key]
        fa = _small_bimodules(alpha.target, rng)
        gb = _small_bimodules(alpha.source, rng)
        out.append((rep, rng.choice(fa), rng.choice(gb)))
    return out


def composable_triples():
    """(r3, r2, r1) with r1: B -> A, r2: C -> B, r3: E -> C, all from algebra maps."""
    from ncaffine.algebra import AlgebraMap
    from ncaffine.coalg import algebra_map_representation as rep
    out = []
    for f in (QQ, GF(2)):
        k = truncated_poly(f, 1)
        dual = truncated_poly(f, 2)
        cube = truncated_poly(f, 3)
        kk = product_algebra(f, 2)
        kkk = product_algebra(f, 3)
        t2 = upper_triangular(f, 2)

        def m(src, tgt, cols):
            return AlgebraMap(src, tgt, f.from_columns(tgt.dim, [dict(enumerate(c)) for c in cols]))

        ident = lambda a: m(a, a, [[1 if i == j else 0 for i in range(a.dim)] for j in range(a.dim)])
        out.append((rep(m(k, k, [[1]])), rep(m(k, dual, [[1, 0]])), rep(m(dual, cube, [[1, 0, 0], [0, 0, 1]]))))
        out.append((rep(m(k, kk, [[1, 1]])), rep(m(kk, kkk, [[1, 1, 0], [0, 0, 1]])), rep(ident(kkk))))
        out.append((rep(ident(k)), rep(m(k, kk, [[1, 1]])), rep(m(kk, t2, [[1, 0, 0], [0, 0, 1]]))))
    return out
