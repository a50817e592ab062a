"""Acceptance run: one PASS/FAIL line per criterion, zero tolerance throughout.

Run with pytest (lines appear in the terminal summary) or directly:

    python tests/test_acceptance.py
"""

import os
import random
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from corpora import composable_triples, purity_corpus, random_rep_instances  # noqa: E402
from oracles import hc_dims, hh_dims  # noqa: E402

from ncaffine.algebra import (  # noqa: E402
    field_extension, group_algebra, matrix_algebra, product_algebra, truncated_poly,
)
from ncaffine.bimod import (  # noqa: E402
    BimoduleMap, base_algebra, direct_sum, hom_AA, left_module, regular_bimodule, right_module,
)
from ncaffine.coalg import (  # noqa: E402
    compose_associativity_iso, projection_maps, projection_maps_natural, pull, pullback,
    push, pushforward, trace_adjunction, trace_adjunction_natural,
)
from ncaffine.cyclic import (  # noqa: E402
    build_cyclic_object, check_coefficient_system, classical_cyclic_object, classical_system,
    gauge_braiding, homology, identities_for_diagram, make_coefficient_system,
    textbook_operators, trace_faithful_on_endomorphisms, verify_cyclic_identities,
)
from ncaffine.exactlin import GF, QQ, rank  # noqa: E402
from ncaffine.galois import (  # noqa: E402
    classical_count, galois_check, galois_pseudo_instance, hopf_galois_builder,
    purity_check, purity_oracle,
)
from ncaffine.infinitesimal import (  # noqa: E402
    adic_tower, diff_operators, grothendieck_oracle, ideal_generated, same_subspace,
)
from ncaffine.morita import make_progenerator, verify_morita_equivalence  # noqa: E402

DIAGRAMS = ("I", "II", "III", "IV", "V", "VI")


# ------------------------------------------------------------------ criteria

def criterion_1():
    algs = [truncated_poly(QQ, 1), truncated_poly(QQ, 2),
            group_algebra(GF(2), [[0, 1], [1, 0]]), matrix_algebra(QQ, 2)]
    t = time.time()
    bad = []
    for a in algs:
        rep = verify_cyclic_identities(classical_cyclic_object(a, 4))
        if not rep["pass"] or rep["skipped"]:
            bad.append(a.name)
        if not all(rep["relations"][f"t^{n + 1}@{n}"] for n in range(5)):
            bad.append(a.name + " (t^(n+1))")
    el = time.time() - t
    ok = not bad and el < 60
    return ok, f"{len(algs)} algebras to degree 4, {el:.1f}s" + (f", failing {bad}" if bad else "")


def criterion_2():
    a = truncated_poly(QQ, 2)
    co = classical_cyclic_object(a, 3)
    ok = True
    for n in range(4):
        faces, degens, t = textbook_operators(a, n)
        iso = co.iso
        ok &= iso[n].rows == iso[n].cols == rank(iso[n])
        ok &= iso[n] @ co.cyc[n] == t @ iso[n]
        if n >= 1:
            ok &= all(iso[n - 1] @ co.faces[n][i] == faces[i] @ iso[n] for i in range(n + 1))
        if n < 3:
            ok &= all(iso[n + 1] @ co.degens[n][i] == degens[i] @ iso[n] for i in range(n + 1))
    return ok, "faces, degeneracies and t intertwined in degrees 0..3"


def criterion_3():
    t = time.time()
    q = truncated_poly(QQ, 1)
    dual = truncated_poly(QQ, 2)
    m2 = matrix_algebra(QQ, 2)
    # the oracle ranks come first, from the bar complex alone
    oracle_dual = hh_dims(dual, 3)
    oracle_hc_q = hc_dims(q, 4)
    co_q = classical_cyclic_object(q, 6)
    hh_q = homology(co_q, "HH", 4).dims
    hc_q = homology(co_q, "HC", 4).dims
    hh_m2 = homology(classical_cyclic_object(m2, 4), "HH", 3).dims
    hh_dual = homology(classical_cyclic_object(dual, 5), "HH", 3).dims
    el = time.time() - t
    ok = (hh_q == [1, 0, 0, 0, 0] and hc_q == [1, 0, 1, 0, 1] == oracle_hc_q
          and hh_m2 == [1, 0, 0, 0] == hh_q[:4] and hh_dual == oracle_dual and el < 120)
    return ok, (f"HH(Q)={hh_q} HC(Q)={hc_q} HH(M2)={hh_m2} HH(dual)={hh_dual} "
                f"oracle={oracle_dual}, {el:.1f}s")


def _fuzz_braidings(seed=4):
    """Ten braidings on the classical (C, M) of the dual numbers: four gauge
    transforms of the canonical one and six perturbations by bimodule maps."""
    cs = classical_system(truncated_poly(QQ, 2))
    rng = random.Random(seed)
    hg = hom_AA(cs.coeff, cs.coeff)
    out = []
    while len(out) < 4:
        g = QQ.zeros(cs.coeff.dim, cs.coeff.dim)
        for b in hg.basis:
            g = g + b.scale(QQ(rng.randint(-2, 2)))
        if rank(g) == g.rows:
            out.append(("gauge", gauge_braiding(cs, g)))
    h = hom_AA(cs.cm.obj, cs.mc.obj)
    for k in (9, 15, 6, 7, 0, 1):
        beta = cs.beta + h.basis[k]
        out.append((f"perturb[{k}]", make_coefficient_system(cs.coalg, cs.coeff, beta, cs.delta,
                                                            check=False)))
    return out


def criterion_4():
    implications = 0
    converse = 0
    targeted = 0
    problems = []
    for name, cs in _fuzz_braidings():
        diag = check_coefficient_system(cs)
        failing = [k for k, v in diag.items() if not v["pass"]]
        rep = verify_cyclic_identities(build_cyclic_object(cs, 3, descent_budget=0, samples=50))
        if rep["pass"] and trace_faithful_on_endomorphisms(cs):
            converse += 1
            if failing:
                problems.append(f"{name}: identities pass but diagrams {failing} fail")
        if not failing:
            implications += 1
            if not rep["pass"]:
                problems.append(f"{name}: diagrams pass but identities fail")
            continue
        named = [d for d in DIAGRAMS if d in failing]
        if any(k.startswith("square") for k in failing):
            named.append("compat")
        if len(named) == 1:
            targeted += 1
        for d in named:
            mapped = identities_for_diagram(rep, d)
            if not mapped or all(mapped.values()):
                problems.append(f"{name}: diagram {d} fails but its identity holds")
    ok = not problems and implications >= 1 and converse >= 1 and targeted >= 1
    return ok, (f"10 braidings, {implications} fully compatible, {converse} with all identities "
                f"and a faithful trace, {targeted} single-diagram violations"
                + (f"; {problems}" if problems else ""))


def galois_instances():
    f2 = GF(2)
    f4 = field_extension(f2, [1, 1, 1])
    frob = hopf_galois_builder(f4, [[0, 1], [1, 0]], [f2.eye(2), f2.mat([[1, 1], [0, 1]])],
                               name="F4/F2")
    qi = field_extension(QQ, [1, 0, 1])
    conj = hopf_galois_builder(qi, [[0, 1], [1, 0]], [QQ.eye(2), QQ.mat([[1, 0], [0, -1]])],
                               name="Q(i)/Q")
    return frob, conj, galois_pseudo_instance()


def criterion_5():
    frob, conj, pseudo = galois_instances()
    notes = []
    ok = True
    for inst in (frob, conj):
        v = galois_check(inst)
        d, expected = classical_count(inst)
        ok &= v.passed and len(v.results) >= 6 and d == expected
        notes.append(f"{inst.name}: {'pass' if v.passed else v.failing()} count {d}={expected}")
    v = galois_check(pseudo)
    fails = v.failing()
    witnessed = [k for k in fails
                 if hasattr(v.results[k].get("witness"), "rows")
                 and rank(v.results[k]["witness"]) < min(v.results[k]["witness"].rows,
                                                         v.results[k]["witness"].cols)]
    ok &= bool(fails) and bool(witnessed)
    notes.append(f"pseudo fails {fails}, singular witness in {witnessed}")
    return ok, "; ".join(notes)


def criterion_6():
    cases = purity_corpus()
    disagree = 0
    nonpure = 0
    for phi in cases:
        a, _ = purity_check(phi)
        b, _ = purity_oracle(phi)
        disagree += a != b
        nonpure += not b
    ok = len(cases) >= 50 and disagree == 0 and nonpure >= 1
    return ok, f"{len(cases)} maps, {nonpure} non-pure, {disagree} disagreements"


def commutative_corpus():
    out = []
    for f in (QQ, GF(2)):
        out += [truncated_poly(f, 1), product_algebra(f, 2), truncated_poly(f, 2),
                product_algebra(f, 3), truncated_poly(f, 3), truncated_poly(f, 4),
                group_algebra(f, [[0, 1], [1, 0]])]
    out.append(field_extension(GF(2), [1, 1, 1]))
    out.append(field_extension(QQ, [1, 0, 1]))
    return out


def reg_left(a):
    return left_module(a, a.dim, [a.lmat(i) for i in range(a.dim)])


def criterion_7_agreement():
    bad = []
    count = 0
    for a in commutative_corpus():
        m = reg_left(a)
        for p in range(4):
            count += 1
            if not same_subspace(diff_operators(m, m, p), grothendieck_oracle(m, m, p)):
                bad.append((a.name, p))
    return bad, count


def dual_diff_dims():
    m = reg_left(truncated_poly(QQ, 2))
    return [diff_operators(m, m, p).cols for p in range(2)]


def criterion_7():
    bad, count = criterion_7_agreement()
    d0, d1 = dual_diff_dims()
    ok = not bad and d0 == 2 and d1 == 4
    return ok, (f"filtration = Grothendieck oracle on {count - len(bad)}/{count} (algebra, p); "
                f"dual numbers Diff_0={d0} (expected 2), Diff_1={d1} (expected 4)")


def criterion_8():
    a = truncated_poly(QQ, 4)
    ideal = ideal_generated(a, [[0, 1, 0, 0]])
    tower = adic_tower(reg_left(a), ideal, 8)
    surj = all(rank(m) == m.rows for m in tower.maps)
    ok = tower.dims() == [1, 2, 3, 4] and tower.stabilized and tower.limit_dim == a.dim and surj
    return ok, f"dims {tower.dims()}, stabilized={tower.stabilized}, limit {tower.limit_dim}"


def _rand_hom(x, y, rng):
    h = hom_AA(x, y)
    return BimoduleMap(x, y, h.element([x.field(rng.randint(-2, 2)) for _ in range(h.dim)]))


def criterion_9():
    rng = random.Random(1)
    inv = nat_t = nat_p = 0
    insts = random_rep_instances()
    for rep, F, G in insts:
        t = trace_adjunction(rep, F, G)
        inv += t.rows == t.cols == rank(t)
        projection_maps(rep, F, G)
        hf = _rand_hom(F, direct_sum(F, regular_bimodule(rep.alg)), rng)
        hg = _rand_hom(G, direct_sum(G, regular_bimodule(rep.ring)), rng)
        nat_t += trace_adjunction_natural(rep, hf, hg)
        nat_p += projection_maps_natural(rep, hf, hg)
    n = len(insts)
    ok = n == 20 and inv == nat_t == nat_p == n
    return ok, f"{n} instances: invertible {inv}, natural trace {nat_t}, natural projections {nat_p}"


def criterion_10():
    star = shriek = 0
    insts = random_rep_instances(seed=10)
    for rep, F, G in insts:
        star += hom_AA(pullback(rep, G), F).dim == hom_AA(G, pushforward(rep, F)).dim
        shriek += hom_AA(push(rep, F), G).dim == hom_AA(F, pull(rep, G)).dim
    triples = composable_triples()[:5]
    assoc = sum(compose_associativity_iso(*t)[0] is not None for t in triples)
    k = base_algebra(QQ)
    m2 = matrix_algebra(QQ, 2)
    cols = [QQ.from_columns(2, [{j: QQ.one} if c == i else {} for c in range(2)])
            for i in range(2) for j in range(2)]
    morita = [verify_morita_equivalence(make_progenerator(right_module(k, 2, [QQ.eye(2)])))["pass"],
              verify_morita_equivalence(make_progenerator(right_module(m2, 2, cols)))["pass"]]
    n = len(insts)
    ok = star == shriek == n == 20 and assoc == len(triples) == 5 and all(morita)
    return ok, (f"f*-|f_* {star}/{n}, f_!-|f^! {shriek}/{n}, associativity {assoc}/{len(triples)}, "
                f"Morita (Q,Q^2)={morita[0]} (M2,columns)={morita[1]}")


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 11)}


# ------------------------------------------------------------------ pytest

@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6, 8, 9, 10])
def test_criterion(n, record_criterion):
    ok, detail = CRITERIA[n]()
    record_criterion(n, ok, detail)
    assert ok, detail


def test_criterion_7(record_criterion):
    ok, detail = criterion_7()
    record_criterion(7, ok, detail)
    bad, _ = criterion_7_agreement()
    assert not bad
    assert dual_diff_dims()[0] == 2


@pytest.mark.xfail(strict=True, reason="Diff_1 of the dual numbers is 3 by both computations "
                                       "and by hand (A plus one derivation); the stated 4 is "
                                       "recorded in the decisions ledger")
def test_criterion_7_stated_diff1():
    assert dual_diff_dims()[1] == 4


if __name__ == "__main__":
    failed = 0
    for n, fn in CRITERIA.items():
        t = time.time()
        ok, detail = fn()
        failed += not ok
        print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}  [{time.time() - t:.1f}s]")
    sys.exit(1 if failed else 0)
