import itertools
from functools import lru_cache

import pytest

from ncaffine.algebra import (
    field_extension, matrix_algebra, product_algebra, truncated_poly,
)
from ncaffine.bimod import left_module, regular_bimodule
from ncaffine.exactlin import GF, QQ, rank
from ncaffine.infinitesimal import (
    NotCommutative, NotIdeal, adic_tower, diff_operators, differential_filtration,
    grothendieck_oracle, ideal_generated, same_subspace,
)


def reg_left(a):
    return left_module(a, a.dim, [a.lmat(i) for i in range(a.dim)])


def enumerated_orders(a, p_max):
    """Count F_2-linear maps A -> A of order <= p by the commutator definition."""
    f = a.field
    n = a.dim
    lm = [a.lmat(i) for i in range(n)]

    def key(m):
        return tuple(int(x) for x in m.entries())

    @lru_cache(maxsize=None)
    def order_le(k, p):
        m = f.mat(n, n, list(k))
        if p < 0:
            return m.is_zero()
        return all(order_le(key(m @ x - x @ m), p - 1) for x in lm)

    maps = [key(f.mat(n, n, list(bits))) for bits in itertools.product((0, 1), repeat=n * n)]
    return [sum(order_le(k, p) for k in maps) for p in range(p_max + 1)]


@pytest.mark.parametrize("a", [truncated_poly(GF(2), 2), truncated_poly(GF(2), 3),
                               product_algebra(GF(2), 2), field_extension(GF(2), [1, 1, 1])],
                         ids=lambda a: a.name)
def test_orders_match_enumeration(a):
    m = reg_left(a)
    counts = enumerated_orders(a, 3)
    assert [2 ** diff_operators(m, m, p).cols for p in range(4)] == counts


@pytest.mark.parametrize("n", [2, 3, 4])
def test_filtration_matches_grothendieck(n):
    a = truncated_poly(QQ, n)
    m = reg_left(a)
    for p in range(4):
        assert same_subspace(diff_operators(m, m, p), grothendieck_oracle(m, m, p))


def test_dual_numbers_orders():
    m = reg_left(truncated_poly(QQ, 2))
    # A itself, then A plus the single derivation d/dx, then everything
    assert [diff_operators(m, m, p).cols for p in range(4)] == [2, 3, 4, 4]
    # in characteristic 2 every map x -> c is a derivation, so order 1 already fills up
    m2 = reg_left(truncated_poly(GF(2), 2))
    assert [diff_operators(m2, m2, p).cols for p in range(2)] == [2, 4]


def test_grothendieck_needs_commutative():
    m = reg_left(matrix_algebra(QQ, 2))
    with pytest.raises(NotCommutative):
        grothendieck_oracle(m, m, 1)


def test_noncommutative_filtration_stabilizes():
    filt = differential_filtration(regular_bimodule(matrix_algebra(QQ, 2)), 4)
    assert filt.stabilized


def test_adic_tower_truncated():
    a = truncated_poly(QQ, 4)
    tower = adic_tower(reg_left(a), ideal_generated(a, [[0, 1, 0, 0]]), 10)
    assert tower.dims() == [1, 2, 3, 4]
    assert tower.stabilized and tower.limit_dim == 4
    assert all(rank(t) == t.rows for t in tower.maps)


def test_adic_tower_idempotent_ideal():
    # I = (e) for an idempotent: I^2 = I, the tower stops at once
    a = product_algebra(QQ, 2)
    tower = adic_tower(reg_left(a), ideal_generated(a, [[1, 0]]), 5)
    assert tower.dims() == [1] and tower.stabilized


def test_not_ideal():
    a = matrix_algebra(QQ, 2)
    with pytest.raises(NotIdeal):
        adic_tower(reg_left(a), [[0, 1, 0, 0]], 3)
