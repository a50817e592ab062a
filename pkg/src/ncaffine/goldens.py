"""Golden JSON tables for the acceptance suite, regenerated deterministically."""

import json
from pathlib import Path


def _hh_hc(a, theory, top):
    from .cyclic import classical_cyclic_object, homology
    co = classical_cyclic_object(a, top + 1, descent_budget=0, samples=40)
    return homology(co, theory, degree_bound=top).to_json()


def golden_tables():
    from .algebra import field_extension, matrix_algebra, truncated_poly
    from .bimod import left_module
    from .exactlin import GF, QQ
    from .galois import galois_check, hopf_galois_builder
    from .infinitesimal import adic_tower, diff_operators, ideal_generated

    q = truncated_poly(QQ, 1)
    dual = truncated_poly(QQ, 2)
    out = {
        "hh_Q": _hh_hc(q, "HH", 4),
        "hc_Q": _hh_hc(q, "HC", 4),
        "hh_M2": _hh_hc(matrix_algebra(QQ, 2), "HH", 3),
        "hh_dual": _hh_hc(dual, "HH", 3),
        "hc_dual": _hh_hc(dual, "HC", 3),
    }
    f2 = GF(2)
    f4 = field_extension(f2, [1, 1, 1])
    inst = hopf_galois_builder(f4, [[0, 1], [1, 0]], [f2.eye(2), f2.mat([[1, 1], [0, 1]])])
    out["galois_f4"] = galois_check(inst).to_json(f2)
    m = left_module(dual, 2, [dual.lmat(i) for i in range(2)], name="A")
    out["diff_dual"] = {"dims": [diff_operators(m, m, p).cols for p in range(4)]}
    x4 = truncated_poly(QQ, 4)
    g = left_module(x4, 4, [x4.lmat(i) for i in range(4)], name="A")
    out["adic_x4"] = adic_tower(g, ideal_generated(x4, [[0, 1, 0, 0]]), 8).to_json()
    return out


def emit_goldens(directory):
    """Write one file per table; returns the sorted list of names written."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    for name, table in sorted(golden_tables().items()):
        text = json.dumps({"format": 1, "name": name, "table": table}, indent=2, sort_keys=True)
        (d / f"{name}.json").write_text(text + "\n", encoding="utf-8")
        written.append(name)
    return written
