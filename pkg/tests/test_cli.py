import json
from pathlib import Path

import pytest

from ncaffine.cli import main
from ncaffine.goldens import emit_goldens

ROOT = Path(__file__).resolve().parent.parent
INST = ROOT / "instances"
GOLD = Path(__file__).resolve().parent / "goldens"


def run(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = main([*argv, "--out", str(out)])
    return code, json.loads(out.read_text())


def test_validate_ok(tmp_path):
    code, rep = run(tmp_path, "validate", str(INST / "dualnumbers.json"))
    assert code == 0
    assert rep["result"]["valid"] and rep["format"] == 1
    assert len(rep["input_sha256"]) == 64


def test_validate_nonassociative(tmp_path):
    code, rep = run(tmp_path, "validate", str(INST / "broken_assoc.json"))
    assert code == 1
    assert rep["error"]["kind"] == "NotAssociative"
    assert rep["error"]["witness"] == [1, 1, 1]


def test_classical_hh(tmp_path):
    code, rep = run(tmp_path, "classical", str(INST / "dualnumbers.json"), "D", "--degrees", "3")
    assert code == 0
    assert rep["result"]["table"] == {"theory": "HH", "dims": [2, 1, 1, 1]}


def test_hc_system(tmp_path):
    code, rep = run(tmp_path, "hc", str(INST / "dualnumbers.json"), "classical")
    assert code == 0
    assert rep["result"]["table"]["dims"] == [2, 0, 2, 0]


def test_field_override(tmp_path):
    # over F_2 the derivation x -> 1 survives in HH_1 as well, dims stay 2,2,2
    code, rep = run(tmp_path, "classical", str(INST / "dualnumbers.json"), "D",
                    "--degrees", "2", "--field", "Fp:2")
    assert code == 0
    assert rep["result"]["table"]["dims"] == [2, 2, 2]


@pytest.mark.parametrize("name,inst,code", [("f4_over_f2.json", "frobenius", 0),
                                            ("qi_over_q.json", "conjugation", 0),
                                            ("pseudo_galois.json", "sign", 2)])
def test_galois_exit_codes(tmp_path, name, inst, code):
    got, rep = run(tmp_path, "galois-check", str(INST / name), inst)
    assert got == code
    res = rep["result"]
    assert res["pass"] is (code == 0)
    if code:
        failing = [k for k, v in res["conditions"].items() if not v["pass"]]
        assert "freeness" in failing
        assert res["conditions"]["freeness"]["witness"]


def test_diff_and_adic(tmp_path):
    code, rep = run(tmp_path, "diff", str(INST / "dualnumbers.json"), "D", "A", "A",
                    "--order", "2")
    assert code == 0 and rep["result"]["dims"] == [2, 3, 4] and rep["result"]["oracle_agrees"]
    code, rep = run(tmp_path, "adic", str(INST / "truncated_x4.json"), "A", "x", "G")
    assert code == 0
    assert rep["result"] == {"dims": [1, 2, 3, 4], "stabilized": True, "limit_dim": 4}


def test_trace_adjunction(tmp_path):
    code, rep = run(tmp_path, "trace-adjunction", str(INST / "dualnumbers.json"),
                    "id", "reg", "free")
    assert code == 0 and rep["result"]["invertible"]


def test_missing_object(tmp_path):
    code, rep = run(tmp_path, "galois-check", str(INST / "f4_over_f2.json"), "nope")
    assert code == 1
    assert "error" in rep


def test_reports_are_deterministic(tmp_path):
    a = run(tmp_path, "galois-check", str(INST / "qi_over_q.json"), "conjugation")[1]
    b = run(tmp_path, "galois-check", str(INST / "qi_over_q.json"), "conjugation")[1]
    assert a == b


def test_goldens_byte_identical(tmp_path):
    names = emit_goldens(tmp_path / "one")
    emit_goldens(tmp_path / "two")
    assert sorted(names) == sorted(p.stem for p in GOLD.glob("*.json"))
    for n in (f"{x}.json" for x in names):
        fresh = (tmp_path / "one" / n).read_bytes()
        assert fresh == (tmp_path / "two" / n).read_bytes()
        assert fresh == (GOLD / n).read_bytes(), n
