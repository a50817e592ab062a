"""Command-line front end.

Instance files are JSON (UTF-8) with a top-level "format": 1.  Objects are
named and cross-referenced; rationals are strings "a/b" (or ints) and F_p
residues are ints.  Matrices are lists of rows in the documented basis order.
Reports go to stdout (or --out) as sorted, indented JSON.

Exit codes: 0 ok, 1 validation failure, 2 negative verdict, 3 NotWellDefined.
"""

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .algebra import (
    AlgebraMap, NotAlgebraMap, NotAssociative, NotUnital, make_algebra, standard_algebra,
)
from .bimod import (
    NotBimodule, NotBimoduleMap, free_bimodule, left_module, make_bimodule, regular_bimodule,
    right_module,
)
from .coalg import (
    ActionsFail, ComoduleFails, CounitFails, NotCoassociative, NotInvertible, NotProjective,
    NotRingHom, algebra_map_representation, endomorphism_coalgebra, identity_representation,
    make_representation, projection_maps, sweedler_coalgebra, trace_adjunction,
)
from .exactlin import Field, NotWellDefined

FORMAT = 1

VALIDATION_ERRORS = (
    NotAssociative, NotUnital, NotAlgebraMap, NotBimodule, NotBimoduleMap, NotCoassociative,
    CounitFails, NotProjective, NotRingHom, ActionsFail, ComoduleFails,
)


class InstanceError(ValueError):
    """Malformed or unresolvable instance file."""


class Verdict(Exception):
    """Raised to signal a negative mathematical verdict; carries the report."""

    def __init__(self, result):
        super().__init__("negative verdict")
        self.result = result


# ----------------------------------------------------------------- file format

def _matrix(field, rows):
    if not rows:
        return field.zeros(0, 0)
    return field.mat([[_scalar(field, x) for x in r] for r in rows])


def _scalar(field, x):
    if isinstance(x, str):
        if "/" in x:
            n, d = x.split("/")
            return field(int(n)) / field(int(d))
        return field(int(x))
    return field(x)


def _vector(field, v):
    return [_scalar(field, x) for x in v]


def mat_json(field, m):
    return [[field.to_json(x) for x in row] for row in m.tolist()]


class Instance:
    """All named objects of one file, built lazily and cached."""

    def __init__(self, data, field_override=None):
        if data.get("format") != FORMAT:
            raise InstanceError(f"unsupported format {data.get('format')!r}")
        self.data = data
        try:
            self.field = Field.parse(field_override or data.get("field", "Q"))
        except ValueError as e:
            raise InstanceError(str(e))
        self._cache = {}

    def _section(self, sec, name):
        try:
            return self.data[sec][name]
        except KeyError:
            raise InstanceError(f"unresolved reference {sec}/{name}")

    def _get(self, sec, name, build):
        key = (sec, name)
        if key not in self._cache:
            self._cache[key] = build(self._section(sec, name))
        return self._cache[key]

    def names(self, sec):
        return sorted(self.data.get(sec, {}))

    # algebras
    def algebra(self, name):
        return self._get("algebras", name, lambda d: self._build_algebra(d, name))

    def _build_algebra(self, d, name):
        f = self.field
        if "kind" in d:
            a = standard_algebra(f, d["kind"], *d.get("params", []))
            a.name = name
            return a
        sc = [[_vector(f, row) for row in plane] for plane in d["structure_constants"]]
        return make_algebra(f, d["dim"], sc, _vector(f, d["unit"]), name=name)

    # modules and bimodules
    def bimodule(self, name):
        return self._get("bimodules", name, lambda d: self._build_bimodule(d, name))

    def _build_bimodule(self, d, name):
        f = self.field
        if "regular" in d:
            return regular_bimodule(self.algebra(d["regular"]))
        if "free" in d:
            return free_bimodule(self.algebra(d["free"]))
        a = self.algebra(d["algebra"])
        ra = self.algebra(d.get("ralgebra", d["algebra"]))
        return make_bimodule(a, d["dim"], [_matrix(f, m) for m in d["left"]],
                             [_matrix(f, m) for m in d["right"]], ra, name=name)

    def module(self, name):
        return self._get("modules", name, lambda d: self._build_module(d, name))

    def _build_module(self, d, name):
        f = self.field
        a = self.algebra(d["algebra"])
        side = d.get("side", "left")
        if d.get("regular"):
            acts = [a.lmat(i) if side == "left" else a.rmat(i) for i in range(a.dim)]
            dim = a.dim
        else:
            acts = [_matrix(f, m) for m in d["action"]]
            dim = d["dim"]
        if side == "left":
            return left_module(a, dim, acts, name=name)
        return right_module(a, dim, acts, name=name)

    # coalgebras, representations, systems
    def coalgebra(self, name):
        return self._get("coalgebras", name, self._build_coalgebra)

    def _build_coalgebra(self, d):
        if "sweedler" in d:
            return sweedler_coalgebra(self.algebra(d["sweedler"]))
        if "endomorphism" in d:
            return endomorphism_coalgebra(self.module(d["endomorphism"]))
        raise InstanceError("coalgebra needs 'sweedler' or 'endomorphism'")

    def representation(self, name):
        return self._get("representations", name, self._build_representation)

    def _build_representation(self, d):
        f = self.field
        if "identity" in d:
            return identity_representation(self.algebra(d["identity"]))
        if "algebra_map" in d:
            m = d["algebra_map"]
            alpha = AlgebraMap(self.algebra(m["source"]), self.algebra(m["target"]),
                               _matrix(f, m["matrix"]))
            return algebra_map_representation(alpha)
        if "morita" in d:
            from .morita import make_progenerator, morita_representation
            return morita_representation(make_progenerator(self.module(d["morita"])))
        if "functionals" in d:
            return make_representation(self.algebra(d["ring"]), self.coalgebra(d["coalgebra"]),
                                       [_matrix(f, m) for m in d["functionals"]])
        raise InstanceError("unknown representation kind")

    def system(self, name):
        return self._get("systems", name, self._build_system)

    def _build_system(self, d):
        from .cyclic import classical_system, gauge_braiding, scaled_braiding, trivial_system
        if "classical" in d:
            return classical_system(self.algebra(d["classical"]))
        if "trivial" in d:
            return trivial_system(self.coalgebra(d["trivial"]))
        if "gauge" in d:
            g = d["gauge"]
            return gauge_braiding(self.system(g["system"]), _matrix(self.field, g["gamma"]))
        if "scaled" in d:
            g = d["scaled"]
            return scaled_braiding(self.system(g["system"]), _scalar(self.field, g["lambda"]))
        raise InstanceError("unknown coefficient system kind")

    def galois(self, name):
        return self._get("galois", name, self._build_galois)

    def _build_galois(self, d):
        from .galois import hopf_galois_builder
        f = self.field
        a = self.algebra(d["algebra"])
        return hopf_galois_builder(a, d["group"], [_matrix(f, m) for m in d["action"]],
                                   name=d.get("name"), base=d.get("base", "field"))

    def ideal(self, name):
        d = self._section("ideals", name)
        f = self.field
        return self.algebra(d["algebra"]), [_vector(f, v) for v in d["generators"]]


def load(path, field_override=None):
    raw = Path(path).read_bytes()
    try:
        data = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as e:
        raise InstanceError(f"not valid JSON: {e}")
    inst = Instance(data, field_override)
    inst.sha256 = hashlib.sha256(raw).hexdigest()
    return inst


# -------------------------------------------------------------------- commands

def cmd_validate(inst, args):
    built = {}
    for sec, fn in (("algebras", inst.algebra), ("modules", inst.module),
                    ("bimodules", inst.bimodule), ("coalgebras", inst.coalgebra),
                    ("representations", inst.representation), ("systems", inst.system),
                    ("galois", inst.galois)):
        for name in inst.names(sec):
            obj = fn(name)
            built.setdefault(sec, {})[name] = getattr(obj, "dim", None)
    return {"valid": True, "objects": built}


def _cyclic(inst, system, degrees, args):
    from .cyclic import build_cyclic_object
    return build_cyclic_object(inst.system(system), degrees, descent_budget=args.descent_budget,
                               seed=args.seed)


def _theory_table(co, theory, degrees, width):
    from .cyclic import homology
    if theory == "HP":
        return homology(co, "HP", width=width).to_json()
    return homology(co, theory, degree_bound=degrees).to_json()


def _max_degree(theory, degrees, width):
    return 1 + 2 * (width + 2) + 1 if theory == "HP" else degrees + 1


def cmd_homology(inst, args):
    theory = args.command.upper()
    co = _cyclic(inst, args.system, _max_degree(theory, args.degrees, args.width), args)
    return {"system": args.system, "levels": co.dims(),
            "table": _theory_table(co, theory, args.degrees, args.width)}


def cmd_classical(inst, args):
    from .cyclic import classical_cyclic_object
    theory = args.theory.upper()
    a = inst.algebra(args.algebra)
    co = classical_cyclic_object(a, _max_degree(theory, args.degrees, args.width),
                                 descent_budget=args.descent_budget, seed=args.seed)
    return {"algebra": args.algebra, "levels": co.dims(),
            "table": _theory_table(co, theory, args.degrees, args.width)}


def cmd_check_coeffs(inst, args):
    from .cyclic import check_coefficient_system
    f = inst.field
    rep = check_coefficient_system(inst.system(args.system), pq_bound=args.pq_bound)
    out = {}
    for name in sorted(rep):
        r = rep[name]
        out[name] = {"pass": r["pass"]}
        if not r["pass"]:
            out[name]["defect"] = mat_json(f, r["defect"])
    res = {"system": args.system, "diagrams": out, "pass": all(r["pass"] for r in rep.values())}
    if not res["pass"]:
        raise Verdict(res)
    return res


def cmd_galois(inst, args):
    from .galois import classical_count, galois_check
    g = inst.galois(args.instance)
    v = galois_check(g)
    res = v.to_json(inst.field)
    res["classical_count"] = list(classical_count(g))
    if not v.passed:
        raise Verdict(res)
    return res


def cmd_morita(inst, args):
    from .morita import make_progenerator, verify_morita_equivalence
    rep = verify_morita_equivalence(make_progenerator(inst.module(args.progenerator)))
    res = {"checks": rep["checks"], "dims": rep["dims"], "pass": rep["pass"]}
    if not rep["pass"]:
        raise Verdict(res)
    return res


def cmd_diff(inst, args):
    from .infinitesimal import diff_operators, grothendieck_oracle, same_subspace
    m, n = inst.module(args.M), inst.module(args.N)
    dims = [diff_operators(m, n, p).cols for p in range(args.order + 1)]
    res = {"dims": dims}
    if m.alg.is_commutative():
        res["oracle_agrees"] = all(
            same_subspace(diff_operators(m, n, p), grothendieck_oracle(m, n, p))
            for p in range(args.order + 1))
    return res


def cmd_adic(inst, args):
    from .infinitesimal import adic_tower, ideal_generated
    a, gens = inst.ideal(args.I)
    g = inst.module(args.G)
    tower = adic_tower(g, ideal_generated(a, gens), args.pmax)
    return tower.to_json()


def cmd_trace(inst, args):
    rep = inst.representation(args.rep)
    fm, g = inst.bimodule(args.F), inst.bimodule(args.G)
    f = inst.field
    try:
        t = trace_adjunction(rep, fm, g)
    except NotInvertible as e:
        raise Verdict({"invertible": False, "matrix": mat_json(f, e.matrix)})
    p1, p2 = projection_maps(rep, fm, g)
    return {"invertible": True, "matrix": mat_json(f, t),
            "projection_maps": [list(p1.matrix.shape), list(p2.matrix.shape)]}


def cmd_goldens(args):
    from .goldens import emit_goldens
    written = emit_goldens(args.dir)
    return {"written": written}


COMMANDS = {
    "validate": cmd_validate, "hh": cmd_homology, "hc": cmd_homology, "hp": cmd_homology,
    "classical": cmd_classical, "check-coeffs": cmd_check_coeffs, "galois-check": cmd_galois,
    "morita-check": cmd_morita, "diff": cmd_diff, "adic": cmd_adic,
    "trace-adjunction": cmd_trace,
}


def build_parser():
    p = argparse.ArgumentParser(prog="ncaffine", description=__doc__.split("\n")[1])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("file")
        sp.add_argument("--out")
        sp.add_argument("--field", help="override the file's field, e.g. Q or Fp:3")
        sp.add_argument("--seed", type=int, default=0)
        return sp

    common(sub.add_parser("validate", help="load and check every object"))
    for t in ("hh", "hc", "hp"):
        sp = common(sub.add_parser(t, help=f"{t.upper()} of a coefficient system"))
        sp.add_argument("system")
        sp.add_argument("--degrees", type=int, default=3)
        sp.add_argument("--width", type=int, default=1)
        sp.add_argument("--descent-budget", type=int, default=20000)
    sp = common(sub.add_parser("classical", help="homology of the classical system of an algebra"))
    sp.add_argument("algebra")
    sp.add_argument("--degrees", type=int, default=3)
    sp.add_argument("--theory", default="hh", choices=["hh", "hc", "hp"])
    sp.add_argument("--width", type=int, default=1)
    sp.add_argument("--descent-budget", type=int, default=20000)
    sp = common(sub.add_parser("check-coeffs", help="Diagrams I-VI and compatibility"))
    sp.add_argument("system")
    sp.add_argument("--pq-bound", type=int, default=2)
    sp = common(sub.add_parser("galois-check", help="the six Galois conditions"))
    sp.add_argument("instance")
    sp = common(sub.add_parser("morita-check", help="round trip through a progenerator"))
    sp.add_argument("progenerator")
    sp = common(sub.add_parser("diff", help="differential operators M -> N by order"))
    sp.add_argument("A")
    sp.add_argument("M")
    sp.add_argument("N")
    sp.add_argument("--order", type=int, default=1)
    sp = common(sub.add_parser("adic", help="the I-adic tower of G"))
    sp.add_argument("A")
    sp.add_argument("I")
    sp.add_argument("G")
    sp.add_argument("--pmax", type=int, default=6)
    sp = common(sub.add_parser("trace-adjunction", help="trace adjunction and projection maps"))
    sp.add_argument("rep")
    sp.add_argument("F")
    sp.add_argument("G")
    sp = sub.add_parser("emit-goldens", help="regenerate the golden acceptance tables")
    sp.add_argument("--dir", default="goldens")
    sp.add_argument("--out")
    return p


def _echo(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("out",)}


def _write(report, args):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv=None):
    args = build_parser().parse_args(argv)
    report = {"format": FORMAT, "version": __version__, "command": _echo(args)}
    code = 0
    try:
        if args.command == "emit-goldens":
            report["result"] = cmd_goldens(args)
        else:
            inst = load(args.file, args.field)
            report["input_sha256"] = inst.sha256
            report["result"] = COMMANDS[args.command](inst, args)
    except Verdict as v:
        report["result"] = v.result
        code = 2
    except NotWellDefined as e:
        report["error"] = {"kind": "NotWellDefined", "message": str(e)}
        code = 3
    except (InstanceError, *VALIDATION_ERRORS) as e:
        report["error"] = {"kind": type(e).__name__, "message": str(e)}
        w = getattr(e, "witness", None)
        if w is not None:
            report["error"]["witness"] = _witness_json(w)
        code = 1
    except Exception as e:
        from .galois import NotAutomorphism
        from .infinitesimal import NotCommutative, NotIdeal
        from .morita import NotProgenerator
        if isinstance(e, (NotAutomorphism, NotIdeal, NotCommutative, NotProgenerator)):
            report["error"] = {"kind": type(e).__name__, "message": str(e)}
            w = getattr(e, "witness", None)
            if w is not None:
                report["error"]["witness"] = _witness_json(w)
            code = 1
        else:
            raise
    _write(report, args)
    return code


def _witness_json(w):
    if isinstance(w, (list, tuple)):
        return [_witness_json(x) for x in w]
    if isinstance(w, (int, str, bool)) or w is None:
        return w
    return str(w)


if __name__ == "__main__":
    sys.exit(main())
