import pytest

from corpora import socle_inclusion
from ncaffine.algebra import field_extension, matrix_algebra, truncated_poly
from ncaffine.bimod import TensorSpace, right_module
from ncaffine.exactlin import GF, QQ, rank
from ncaffine.galois import (
    NotAutomorphism, classical_count, galois_check, galois_comodule_setup,
    galois_pseudo_instance, hopf_galois_builder, invariants_subring, purity_check,
    purity_oracle,
)
from ncaffine.galois import _group_coalgebra

Z2 = [[0, 1], [1, 0]]
CONDITIONS = {"regularity", "purity", "invariants_iso", "invariants_canonical",
              "faithful_flatness", "freeness", "comonad"}


def classical_canonical_map(a, action):
    """a (x) b -> sum_g a sigma_g(b) (x) delta_g, straight from structure constants."""
    f = a.field
    n, ng = a.dim, len(action)
    cols = []
    for i in range(n):
        for j in range(n):
            col = {}
            for g in range(ng):
                for k, s in enumerate(action[g].column(j)):
                    if s == 0:
                        continue
                    for m, c in a.table[i][k]:
                        col[m * ng + g] = col.get(m * ng + g, f.zero) + s * c
            cols.append({k: v for k, v in col.items() if v != 0})
    return f.from_columns(n * ng, cols)


def f4_instance():
    f2 = GF(2)
    a = field_extension(f2, [1, 1, 1])
    return a, [f2.eye(2), f2.mat([[1, 1], [0, 1]])]


def quadratic(d):
    a = field_extension(QQ, [-d, 0, 1])
    return a, [QQ.eye(2), QQ.mat([[1, 0], [0, -1]])]


@pytest.mark.parametrize("make", [f4_instance, lambda: quadratic(-1), lambda: quadratic(2)],
                         ids=["F4/F2", "Q(i)/Q", "Q(sqrt2)/Q"])
def test_quadratic_extensions_are_galois(make):
    a, action = make()
    inst = hopf_galois_builder(a, Z2, action)
    verdict = galois_check(inst)
    assert set(verdict.results) == CONDITIONS
    assert verdict.passed, verdict.failing()
    assert classical_count(inst) == (4, 4)
    # the classical map is bijective too
    assert rank(classical_canonical_map(a, action)) == 4
    assert invariants_subring(inst)["algebra"].dim == 1


def test_pseudo_instance_fails_with_witness():
    inst = galois_pseudo_instance()
    verdict = galois_check(inst)
    assert not verdict.passed
    assert "freeness" in verdict.failing()
    w = verdict.results["freeness"]["witness"]
    assert rank(w) < min(w.rows, w.cols)
    # independent: x (x) x -> x*x (x) delta_e + x*(-x) (x) delta_s = 0
    a = truncated_poly(QQ, 2)
    assert rank(classical_canonical_map(a, [QQ.eye(2), QQ.mat([[1, 0], [0, -1]])])) < 4
    out = verdict.to_json(QQ)
    assert out["pass"] is False and "witness" in out["conditions"]["freeness"]


@pytest.mark.parametrize("a,ok", [(truncated_poly(QQ, 1), True),
                                  (field_extension(QQ, [-2, 0, 1]), False),
                                  (truncated_poly(QQ, 2), False)],
                         ids=["Q", "Q(sqrt2)", "dual"])
def test_trivial_group(a, ok):
    inst = hopf_galois_builder(a, [[0]], [QQ.eye(a.dim)])
    assert galois_check(inst).passed is ok


def test_rejects_non_automorphism():
    a = matrix_algebra(QQ, 2)
    # the transpose is an anti-automorphism
    t = QQ.mat([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    with pytest.raises(NotAutomorphism):
        hopf_galois_builder(a, Z2, [QQ.eye(4), t])
    f4, act = f4_instance()
    with pytest.raises(NotAutomorphism):
        hopf_galois_builder(f4, Z2, [act[1], act[0]])


def test_comodule_setup_f4():
    f2 = GF(2)
    a, act = f4_instance()
    c = _group_coalgebra(a, Z2, act, 0)
    p = right_module(a, 2, [a.rmat(i) for i in range(2)], name="P")
    ts = TensorSpace([p, c.carrier])
    cols = []
    for k in range(2):
        col = {}
        for g in range(2):
            for x, v in enumerate(act[g].column(k)):
                if v != 0:
                    col[x * c.dim + g] = v
        cols.append(col)
    inst = galois_comodule_setup(p, c, ts.proj @ f2.from_columns(ts.flat_dim, cols))
    assert inst.rep.ring.dim == 1
    assert inst.canonical_iso
    assert purity_check(inst.amitsur)[0]
    assert galois_check(inst).passed


def test_socle_inclusion_is_not_pure():
    phi = socle_inclusion()
    assert purity_check(phi)[0] is False
    assert purity_oracle(phi)[0] is False
