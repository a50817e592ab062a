import pytest

from corpora import algebra_maps, small_algebras
from ncaffine.algebra import matrix_algebra, truncated_poly, upper_triangular
from ncaffine.bimod import hom_AA, regular_bimodule
from ncaffine.coalg import (
    CounitFails, NotCoassociative, algebra_map_representation, coalgebra_iso_check,
    compose_representations, convolution_ring, cotensor, identity_representation,
    make_coalgebra, pull, pullback, push, pushforward, regular_bicomodule,
    sweedler_coalgebra, sweedler_iso, trace_adjunction,
)
from ncaffine.exactlin import QQ, rank


@pytest.mark.parametrize("a", small_algebras(), ids=lambda a: f"{a.name}/{a.field}")
def test_sweedler_shapes(a):
    c = sweedler_coalgebra(a)
    n = a.dim
    assert c.dim == n * n
    # (A (x) A) (x)_A (A (x) A) = A (x) A (x) A
    assert c.dd.dim == n ** 3


@pytest.mark.parametrize("a", small_algebras(), ids=lambda a: f"{a.name}/{a.field}")
def test_convolution_ring_recovers_algebra(a):
    conv = convolution_ring(sweedler_coalgebra(a, check=False))
    assert conv.algebra.dim == a.dim
    iso = sweedler_iso(a, conv)
    assert iso.is_iso()


def test_broken_counit_rejected():
    c = sweedler_coalgebra(truncated_poly(QQ, 2), check=False)
    with pytest.raises((CounitFails, NotCoassociative)):
        make_coalgebra(c.carrier, c.comult.scale(QQ(2)), c.counit, c.dd)
    with pytest.raises((CounitFails, NotCoassociative)):
        make_coalgebra(c.carrier, c.comult, c.counit.scale(QQ(3)), c.dd)


@pytest.mark.parametrize("a", [truncated_poly(QQ, 2), upper_triangular(QQ, 2)],
                         ids=lambda a: a.name)
def test_cotensor_with_regular(a):
    c = sweedler_coalgebra(a, check=False)
    reg = regular_bicomodule(c)
    box, _ = cotensor(reg, reg)
    assert box.dim == c.dim


@pytest.mark.parametrize("a", [truncated_poly(QQ, 2), upper_triangular(QQ, 2)],
                         ids=lambda a: a.name)
def test_identity_composite_is_sweedler(a):
    r = identity_representation(a)
    comp = compose_representations(r, r)
    sw = sweedler_coalgebra(a, check=False)
    assert comp.coalg.dim == sw.dim
    assert convolution_ring(comp.coalg).algebra.dim == a.dim


def test_identity_pullback_pushforward():
    a = upper_triangular(QQ, 2)
    r = identity_representation(a)
    reg = regular_bimodule(a)
    for functor in (pullback, pushforward, push, pull):
        assert functor(r, reg).dim == a.dim


@pytest.mark.parametrize("alpha", algebra_maps(), ids=lambda m: f"{m.source.name}->{m.target.name}")
def test_trace_adjunction_on_regulars(alpha):
    rep = algebra_map_representation(alpha)
    t = trace_adjunction(rep, regular_bimodule(alpha.target), regular_bimodule(alpha.source))
    assert t.rows == t.cols == rank(t)


def test_sweedler_self_iso():
    a = matrix_algebra(QQ, 2)
    c = sweedler_coalgebra(a, check=False)
    assert coalgebra_iso_check(c, c, QQ.eye(c.dim))
    # a non-identity scaling is not a coalgebra map
    assert not coalgebra_iso_check(c, c, QQ.eye(c.dim).scale(QQ(2)))


def test_adjunction_dims_identity():
    a = truncated_poly(QQ, 3)
    r = identity_representation(a)
    reg = regular_bimodule(a)
    assert hom_AA(pullback(r, reg), reg).dim == hom_AA(reg, pushforward(r, reg)).dim == a.dim
