import pytest

from oracles import hc_dims, hh_dims
from ncaffine.algebra import (
    group_algebra, matrix_algebra, product_algebra, truncated_poly, upper_triangular,
)
from ncaffine.bimod import BimoduleMap, base_algebra, hom_AA
from ncaffine.coalg import identity_representation, make_representation, push
from ncaffine.cyclic import (
    InsufficientDegrees, SquareFails, build_cyclic_object, canonical_phi, canonical_theta,
    check_coefficient_system, classical_cyclic_object, classical_system, functorial_map,
    gauge_braiding, homology, induced_homology_rank, mixed_complex_check, scaled_braiding,
    trace_faithful_on_endomorphisms, verify_cyclic_identities,
)
from ncaffine.exactlin import GF, QQ, rank

SMALL = [truncated_poly(QQ, 1), truncated_poly(QQ, 2), truncated_poly(QQ, 3),
         product_algebra(QQ, 2), upper_triangular(QQ, 2), group_algebra(QQ, [[0, 1], [1, 0]]),
         truncated_poly(GF(2), 2), group_algebra(GF(2), [[0, 1], [1, 0]]),
         truncated_poly(GF(3), 3)]


def _id(a):
    return f"{a.name}/{a.field}"


@pytest.mark.parametrize("a", SMALL, ids=_id)
def test_hh_matches_bar_complex(a):
    co = classical_cyclic_object(a, 4, descent_budget=0, samples=20)
    assert homology(co, "HH", 3).dims == hh_dims(a, 3)


@pytest.mark.parametrize("a", [x for x in SMALL if x.field is QQ], ids=_id)
def test_hc_matches_connes_complex(a):
    co = classical_cyclic_object(a, 4, descent_budget=0, samples=20)
    assert homology(co, "HC", 3).dims == hc_dims(a, 3)


def test_literature_values():
    # HH_n(K[x]/x^2) = K for n >= 1 in characteristic 0; HC alternates 2, 0
    co = classical_cyclic_object(truncated_poly(QQ, 2), 5)
    assert homology(co, "HH", 4).dims == [2, 1, 1, 1, 1]
    assert homology(co, "HC", 4).dims == [2, 0, 2, 0, 2]


@pytest.mark.parametrize("a", [truncated_poly(QQ, 1), truncated_poly(QQ, 2)], ids=_id)
def test_periodic_is_nilinvariant(a):
    # HP does not see the nilpotent x (Goodwillie), so both give HP(Q)
    co = classical_cyclic_object(a, 8, descent_budget=0, samples=10)
    hp = homology(co, "HP")
    assert hp.dims == [1, 0] and hp.stable


def test_insufficient_degrees():
    co = classical_cyclic_object(truncated_poly(QQ, 2), 3)
    with pytest.raises(InsufficientDegrees):
        homology(co, "HH", 3)
    with pytest.raises(InsufficientDegrees):
        homology(co, "HP")


@pytest.mark.parametrize("a", SMALL[:6], ids=_id)
def test_mixed_complex(a):
    co = classical_cyclic_object(a, 4, descent_budget=0, samples=20)
    assert mixed_complex_check(co)["pass"]


@pytest.mark.parametrize("a", [truncated_poly(QQ, 2), upper_triangular(QQ, 2),
                               truncated_poly(GF(2), 2)], ids=_id)
def test_classical_system_diagrams(a):
    report = check_coefficient_system(classical_system(a))
    assert all(v["pass"] for v in report.values())


def test_gauge_passes_and_scaling_fails():
    cs = classical_system(truncated_poly(QQ, 2))
    h = hom_AA(cs.coeff, cs.coeff)
    g = cs.coeff.field.eye(cs.coeff.dim) + h.basis[-1]
    assert rank(g) == g.rows
    gc = gauge_braiding(cs, g)
    assert all(v["pass"] for v in check_coefficient_system(gc).values())
    assert verify_cyclic_identities(build_cyclic_object(gc, 3))["pass"]
    bad = scaled_braiding(cs, 2)
    report = check_coefficient_system(bad)
    assert not all(v["pass"] for v in report.values())
    rel = verify_cyclic_identities(build_cyclic_object(bad, 3, descent_budget=0, samples=20))
    assert not rel["pass"]


def test_trace_faithful_classical():
    assert trace_faithful_on_endomorphisms(classical_system(truncated_poly(QQ, 2)))


@pytest.mark.parametrize("a", [truncated_poly(QQ, 2), upper_triangular(QQ, 2)], ids=_id)
def test_identity_functoriality(a):
    cs = classical_system(a)
    co = build_cyclic_object(cs, 3)
    rep = identity_representation(a, cs.coalg)
    th = canonical_theta(rep, cs)
    ph = canonical_phi(rep, cs.coeff)
    mor = functorial_map(co, co, rep, ph, th)
    assert all(mor.commutes.values())
    assert all(m.rows == m.cols == rank(m) for m in mor.maps)
    zero = BimoduleMap(ph.source, ph.target, ph.matrix.scale(QQ(0)))
    assert all(m.is_zero() for m in functorial_map(co, co, rep, zero, th).maps)


def test_twisted_phi_breaks_the_square():
    a = truncated_poly(QQ, 2)
    cs = classical_system(a)
    co = build_cyclic_object(cs, 2)
    rep = identity_representation(a, cs.coalg)
    th = canonical_theta(rep, cs)
    ph = canonical_phi(rep, cs.coeff)
    h = hom_AA(cs.coeff, cs.coeff)
    with pytest.raises(SquareFails):
        functorial_map(co, co, rep, BimoduleMap(ph.source, ph.target, ph.matrix @ h.basis[0]), th)


def test_unit_map_into_matrices_on_hh0():
    m2 = matrix_algebra(QQ, 2)
    k = base_algebra(QQ)
    cs_a, cs_k = classical_system(m2), classical_system(k)
    co_a, co_k = build_cyclic_object(cs_a, 2), build_cyclic_object(cs_k, 2)
    rep = make_representation(k, cs_a.coalg, [cs_a.coalg.counit])
    th = canonical_theta(rep, cs_k)
    fm = push(rep, cs_a.coeff)
    unit = [(i, x) for i, x in enumerate(m2.unit) if x != 0]
    col = {}
    for k1, x1 in unit:
        for k2, x2 in unit:
            for k3, x3 in unit:
                for k4, x4 in unit:
                    key = (k1 * 4 + k2) * 16 + (k3 * 4 + k4)
                    col[key] = col.get(key, QQ.zero) + x1 * x2 * x3 * x4
    ph = BimoduleMap(cs_k.coeff, fm, fm.presentation.proj @ QQ.from_columns(256, [col]))
    mor = functorial_map(co_k, co_a, rep, ph, th)
    assert all(mor.commutes.values())
    # HH_0(K) -> HH_0(M2) is an isomorphism of 1-dim spaces
    assert induced_homology_rank(mor, 0) == 1
