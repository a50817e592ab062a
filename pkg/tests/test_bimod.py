import itertools
import random

import pytest

from corpora import _small_bimodules, small_algebras
from ncaffine.algebra import matrix_algebra, truncated_poly, upper_triangular
from ncaffine.bimod import (
    NotBimodule, associator, center_submodule, direct_sum, flip_iso, free_bimodule, hom_AA,
    left_unitor, make_bimodule, quotient_bimodule, regular_bimodule, right_module,
    right_unitor, sub_bimodule, tensor_over_A, trace, trace_of_tensor,
)
from ncaffine.exactlin import GF, QQ, rank


def enum_hom_dim(x, y):
    """log2 of the number of F_2-matrices y <- x intertwining both actions."""
    f = x.field
    count = 0
    for bits in itertools.product((0, 1), repeat=x.dim * y.dim):
        m = f.mat(y.dim, x.dim, list(bits))
        if all(m @ l1 == l2 @ m for l1, l2 in zip(x.left, y.left)) and \
           all(m @ r1 == r2 @ m for r1, r2 in zip(x.right, y.right)):
            count += 1
    return count.bit_length() - 1


def brute_commutator_rank(a):
    """dim span{xy - yx} straight from the structure constants."""
    f = a.field
    cols = []
    for i in range(a.dim):
        for j in range(a.dim):
            v = {}
            for k, c in a.table[i][j]:
                v[k] = v.get(k, f.zero) + c
            for k, c in a.table[j][i]:
                v[k] = v.get(k, f.zero) - c
            cols.append({k: c for k, c in v.items() if c != 0})
    return rank(f.from_columns(a.dim, cols))


def f2_algebras():
    return [a for a in small_algebras() if a.field.characteristic == 2]


def test_rejects_noncommuting_actions():
    a = truncated_poly(QQ, 2)
    x = a.lmat(1)
    # left action through x but right action transposed: not a bimodule
    with pytest.raises(NotBimodule):
        make_bimodule(a, 2, [QQ.eye(2), x], [QQ.eye(2), x.T], a)


@pytest.mark.parametrize("a", f2_algebras(), ids=lambda a: a.name)
def test_hom_dims_match_enumeration(a):
    rng = random.Random(3)
    mods = [m for m in _small_bimodules(a, rng) if m.dim <= 3]
    for x, y in itertools.product(mods, repeat=2):
        if x.dim * y.dim <= 9:
            assert hom_AA(x, y).dim == enum_hom_dim(x, y)


@pytest.mark.parametrize("a", small_algebras(), ids=lambda a: f"{a.name}/{a.field}")
def test_trace_of_regular(a):
    tr = trace(regular_bimodule(a))
    assert tr.dim == a.dim - brute_commutator_rank(a)
    # Hom_AA(A, A) is the center
    assert hom_AA(regular_bimodule(a), regular_bimodule(a)).dim == center_submodule(
        regular_bimodule(a)).cols


def test_known_traces():
    assert trace(regular_bimodule(matrix_algebra(QQ, 2))).dim == 1
    assert trace(regular_bimodule(upper_triangular(QQ, 2))).dim == 2
    assert trace(regular_bimodule(truncated_poly(QQ, 3))).dim == 3


@pytest.mark.parametrize("a", [truncated_poly(QQ, 2), upper_triangular(QQ, 2),
                               truncated_poly(GF(2), 3)], ids=lambda a: a.name)
def test_unitors_and_associator_are_isos(a):
    rng = random.Random(5)
    mods = _small_bimodules(a, rng)
    for m in mods:
        assert left_unitor(m).is_iso()
        assert right_unitor(m).is_iso()
    for m1, m2, m3 in list(itertools.product(mods[:3], repeat=3))[:6]:
        assoc = associator(m1, m2, m3)
        assert assoc.is_iso()


def test_matrix_tensor_dims():
    a = matrix_algebra(QQ, 2)
    cols = [QQ.from_columns(2, [{j: QQ.one} if c == i else {} for c in range(2)])
            for i in range(2) for j in range(2)]
    row = right_module(a, 2, cols)
    reg = regular_bimodule(a)
    assert tensor_over_A(reg, reg).dim == 4
    # K^2 (x)_{M2} M2 = K^2
    assert tensor_over_A(row, reg).dim == 2
    free = free_bimodule(truncated_poly(QQ, 2))
    assert free.dim == 4


def test_flip_is_involutive_iso():
    a = upper_triangular(QQ, 2)
    rng = random.Random(2)
    mods = _small_bimodules(a, rng)
    for f1, f2 in itertools.product(mods[:3], repeat=2):
        t12, t21 = trace_of_tensor(f1, f2), trace_of_tensor(f2, f1)
        fl = flip_iso(f1, f2, t12, t21)
        back = flip_iso(f2, f1, t21, t12)
        assert fl.rows == fl.cols == rank(fl)
        assert back @ fl == QQ.eye(t12.dim)


def test_sub_quotient_sum():
    a = truncated_poly(QQ, 3)
    reg = regular_bimodule(a)
    x = QQ.from_columns(3, [{1: QQ.one}])
    s = sub_bimodule(reg, x)
    q = quotient_bimodule(reg, x)
    assert (s.dim, q.dim) == (2, 1)
    assert direct_sum(s, q).dim == 3
