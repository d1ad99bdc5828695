"""Command-line entry point: ingestion, orchestration, emission.

Every subcommand reads one input source (system/universe JSON, a graph edge
list, or a bipartition ground set), writes a JSON artifact into the output
directory (and DOT files with --emit dot), and exits with

  0  success
  1  malformed input, with the violated axiom / parse location
  2  precondition or hypothesis failure, with a structured report
  3  theorem-violation diagnostic (for example a richness refutation)

Outputs are pure functions of the inputs; reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import dot as dotmod
from .core import SeparationSystem
from .errors import InputError, PreconditionError, TheoremViolation
from .duality import dichotomy, newduality
from .forbidden import (
    ForbiddenFamily,
    enumerate_tangles,
    enumerate_tangles_in,
    profile_family,
    robustness_family,
    standardize,
)
from .orderfn import OrderFunction, parse_threshold, refine_injective, refines
from .tst import build_thorough_tst, reduce_irreducible, validate_tst
from .tot import tree_of_tangles, tree_of_tangles_in, verify_tot
from .universe import (
    Universe,
    bipartition_universe,
    graph_universe,
    is_submodular,
    restrict_Sk,
    validate_lattice,
)

DEFAULT_BOUND = 16
OUT_ENV = "TANGLEKIT_OUT"


class RunError(Exception):
    def __init__(self, code, report):
        self.code = code
        self.report = report
        super().__init__(report.get("error", "run failed"))


def _fail(code, **report):
    raise RunError(code, report)


# -- ingestion -----------------------------------------------------------------


def load_graph_text(path):
    vertices, edges = set(), []
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#")[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) == 1:
                vertices.add(parts[0])
                continue
            if len(parts) != 2:
                _fail(1, error="malformed edge list", file=str(path),
                      line=lineno, text=raw.rstrip())
            a, b = parts
            vertices.update((a, b))
            edges.append((a, b))
    return sorted(vertices), edges


def load_inputs(args):
    """Resolve (system_or_universe, order, graph_info) from the run spec."""
    sources = [s for s in (args.input, args.bipartition) if s]
    if len(sources) != 1:
        _fail(1, error="exactly one input source required",
              given=[s for s in ("--input" if args.input else None,
                                 "--bipartition" if args.bipartition else None) if s])
    order = None
    graph = None
    if args.bipartition:
        ground = [tok for tok in args.bipartition.split(",") if tok]
        uni = bipartition_universe(ground)
    else:
        path = Path(args.input)
        if not path.exists():
            _fail(1, error="input file not found", file=str(path))
        if path.suffix == ".json":
            try:
                obj = json.loads(path.read_text())
            except json.JSONDecodeError as exc:
                _fail(1, error="invalid JSON", file=str(path),
                      line=exc.lineno, column=exc.colno)
            if "join" in obj:
                uni = Universe.from_json(obj)
            else:
                uni = SeparationSystem.from_json(obj)
        else:
            vertices, edges = load_graph_text(path)
            uni, order = graph_universe(vertices, edges)
            graph = (vertices, edges)
    if args.order:
        try:
            obj = json.loads(Path(args.order).read_text())
        except json.JSONDecodeError as exc:
            _fail(1, error="invalid JSON", file=args.order,
                  line=exc.lineno, column=exc.colno)
        order = OrderFunction.from_json(uni, obj)
    return uni, order, graph


def load_family(args, uni, system, order):
    fam = ForbiddenFamily([])
    generate = []
    if args.forbidden:
        try:
            obj = json.loads(Path(args.forbidden).read_text())
        except json.JSONDecodeError as exc:
            _fail(1, error="invalid JSON", file=args.forbidden,
                  line=exc.lineno, column=exc.colno)
        try:
            fam = ForbiddenFamily.from_json(obj)
        except (KeyError, TypeError, ValueError) as exc:
            _fail(1, error="malformed forbidden family", file=args.forbidden,
                  detail=str(exc))
        generate = obj.get("generate", [])
    for directive in generate:
        if directive == "R":
            if order is None:
                _fail(2, error="generator R needs an order function")
            fam = fam.extended(
                robustness_family(uni, order, target=system).sets, "generated:R")
        elif directive == "profiles":
            fam = fam.extended(
                profile_family(uni, target=system).sets, "generated:profile")
        elif directive == "standardize":
            fam = standardize(fam, system)
        else:
            _fail(1, error="unknown generator directive", directive=directive)
    return fam


def require_order(order):
    if order is None:
        _fail(2, error="this command needs an order function "
                       "(--order, or a graph input)")
    return order


def ensure_injective(uni, order, notes):
    if order.is_injective_on(uni):
        return order
    refined = refine_injective(uni.ground if uni.ground else uni, order)
    notes["order"] = "refined to an injective order (deterministic, default iota)"
    return refined


def check_bound(system, args):
    bound = args.bounds
    if len(system.seps()) > bound and not args.unsafe_bounds:
        _fail(2, error="separation count exceeds bound",
              seps=len(system.seps()), bound=bound,
              hint="pass --unsafe-bounds to acknowledge")
    return max(bound, len(system.seps()))


# -- emission -------------------------------------------------------------------


def write_artifact(args, name, obj):
    outdir = Path(args.out or os.environ.get(OUT_ENV, "."))
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / f"{name}.json"
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def write_dot(args, name, text):
    if args.emit != "dot":
        return None
    outdir = Path(args.out or os.environ.get(OUT_ENV, "."))
    path = outdir / f"{name}.dot"
    path.write_text(text)
    return path


def tangle_list(tangles):
    return [sorted(t) for t in sorted(tangles, key=sorted)]


# -- subcommands ------------------------------------------------------------------


def cmd_validate(args):
    uni, order, _ = load_inputs(args)
    report = {"schema": "tanglekit/report-v1", "system": {
        "oriented": len(uni.elements()), "separations": len(uni.seps())}}
    if isinstance(uni.ground, Universe):
        lat = validate_lattice(uni.ground)
        report["lattice"] = {"ok": lat.ok, "failures": [
            {"axiom": a, "witness": list(w) if w else None} for a, w in lat.failures]}
        if not lat.ok:
            write_artifact(args, "validate", report)
            _fail(1, error="lattice axioms violated", **report["lattice"]["failures"][0])
    if order is not None:
        ok, witness = (True, None)
        if isinstance(uni.ground, Universe):
            ok, witness = is_submodular(uni, order)
        report["order"] = {"submodular": ok,
                           "witness": list(witness) if witness else None}
    write_artifact(args, "validate", report)
    return report


def _restricted(args, uni, order):
    k = parse_threshold(args.k)
    if k is None:
        return uni, None
    require_order(order)
    return restrict_Sk(uni, order, k), k


def cmd_tangles(args):
    uni, order, _ = load_inputs(args)
    system, k = _restricted(args, uni, order)
    bound = check_bound(system, args)
    fam = load_family(args, uni, system, order)
    out = {"schema": "tanglekit/tangles-v1",
           "k": str(k) if k is not None else "inf",
           "tangles": tangle_list(enumerate_tangles(system, fam, bound=bound))}
    if order is not None:
        records = enumerate_tangles_in(uni, fam, order, bound=bound)
        out["tangles_in"] = [
            {"k": str(t.k), "elements": sorted(t.elements), "maximal": t.maximal}
            for t in records]
    write_artifact(args, "tangles", out)
    return out


def _build_tree(args, uni, order, notes):
    system, k = _restricted(args, uni, order)
    bound = check_bound(system, args)
    order = ensure_injective(uni, require_order(order), notes)
    fam = load_family(args, uni, system, order)
    tree = build_thorough_tst(system, order, fam, bound=bound)
    rep = validate_tst(tree, fam)
    return system, order, fam, tree, rep, bound


def cmd_tst(args):
    uni, order, _ = load_inputs(args)
    notes = {}
    system, order, fam, tree, rep, _ = _build_tree(args, uni, order, notes)
    obj = tree.to_json(rep.leaf_classes)
    obj["notes"] = notes
    obj["valid"] = rep.ok
    write_artifact(args, "tst", obj)
    write_dot(args, "tst", dotmod.tree_dot(tree, rep.leaf_classes))
    return obj


def cmd_reduce(args):
    uni, order, _ = load_inputs(args)
    notes = {}
    system, order, fam, tree, rep, _ = _build_tree(args, uni, order, notes)
    red = reduce_irreducible(tree, fam, order)
    rep2 = validate_tst(red, fam)
    obj = red.to_json(rep2.leaf_classes)
    obj["notes"] = notes
    obj["valid"] = rep2.ok
    write_artifact(args, "reduce", obj)
    write_dot(args, "reduce", dotmod.tree_dot(red, rep2.leaf_classes))
    return obj


def cmd_duality(args):
    uni, order, _ = load_inputs(args)
    notes = {}
    system, k = _restricted(args, uni, order)
    bound = check_bound(system, args)
    order = ensure_injective(uni, require_order(order), notes)
    fam = load_family(args, uni, system, order)
    res = dichotomy(system, order, fam, bound=bound,
                    check_exclusive=args.check_exclusive)
    obj = {"schema": "tanglekit/duality-v1", "kind": res.kind,
           "notes": {**notes, **res.notes}}
    if res.kind == "tangle":
        obj["tangle"] = sorted(res.tangle)
    else:
        obj["stree"] = res.stree.to_json()
        write_dot(args, "duality-stree", dotmod.stree_dot(res.stree))
    if args.check_exclusive:
        obj["exclusive"] = True
    write_artifact(args, "duality", obj)
    return obj


def cmd_newduality(args):
    uni, order, _ = load_inputs(args)
    k = parse_threshold(args.k)
    require_order(order)
    system = restrict_Sk(uni, order, k)
    bound = check_bound(system, args)
    fam = load_family(args, uni, system, order)
    res = newduality(uni, order, k, fam, bound=bound,
                     check_exclusive=args.check_exclusive)
    obj = {"schema": "tanglekit/duality-v1", "kind": res.kind, "notes": res.notes}
    if res.kind == "tangle":
        obj["tangle"] = sorted(res.tangle)
    else:
        obj["stree"] = res.stree.to_json()
        write_dot(args, "newduality-stree", dotmod.stree_dot(res.stree))
    write_artifact(args, "newduality", obj)
    return obj


def cmd_tot(args):
    uni, order, _ = load_inputs(args)
    notes = {}
    system, order, fam, tree, rep, bound = _build_tree(args, uni, order, notes)
    n = tree_of_tangles(tree, system, order, fam, bound=bound,
                        trust_rich=args.trust_rich)
    tangles = enumerate_tangles(system, fam, bound=bound)
    check = verify_tot(system, order, n, tangles)
    obj = {"schema": "tanglekit/tot-v1", "N": sorted(n),
           "verified": check.ok, "notes": notes}
    write_artifact(args, "tot", obj)
    from .tot import tangle_nodes
    write_dot(args, "tot", dotmod.tree_dot(
        tree, rep.leaf_classes, highlight_nodes=tangle_nodes(tree, fam)))
    return obj


def cmd_totins(args):
    uni, order, _ = load_inputs(args)
    notes = {}
    order = ensure_injective(uni, require_order(order), notes)
    bound = check_bound(uni, args)
    fam = load_family(args, uni, uni, order)
    res = tree_of_tangles_in(uni, order, fam, bound=bound,
                             trust_rich=args.trust_rich)
    check = verify_tot(uni, order, res.distinguishers,
                       [t.elements for t in res.maximal_tangles])
    obj = {"schema": "tanglekit/tot-v1", "N": sorted(res.distinguishers),
           "verified": check.ok, "notes": notes,
           "maximal_tangles": tangle_list(t.elements for t in res.maximal_tangles)}
    write_artifact(args, "totins", obj)
    write_dot(args, "totins", dotmod.tree_dot(
        res.tree, res.leaf_classes, highlight_nodes=res.tangle_nodes))
    return obj


def cmd_refine_order(args):
    uni, order, _ = load_inputs(args)
    require_order(order)
    if not isinstance(uni.ground, Universe):
        _fail(2, error="refine-order needs a universe (joins and meets)")
    refined = refine_injective(uni.ground, order)
    ok_sub, _ = is_submodular(uni, refined)
    obj = refined.to_json()
    obj["verified"] = {
        "injective": refined.is_injective_on(uni),
        "submodular": ok_sub,
        "refines": refines(refined, order, uni)[0],
    }
    write_artifact(args, "refine-order", obj)
    return obj


COMMANDS = {
    "validate": cmd_validate,
    "tangles": cmd_tangles,
    "tst": cmd_tst,
    "reduce": cmd_reduce,
    "duality": cmd_duality,
    "newduality": cmd_newduality,
    "tot": cmd_tot,
    "totins": cmd_totins,
    "refine-order": cmd_refine_order,
}


def build_parser():
    p = argparse.ArgumentParser(
        prog="tanglekit",
        description="Tangles of finite separation systems, with oracles.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--input", help="system/universe JSON or graph edge list")
        sp.add_argument("--bipartition", help="comma-separated ground set")
        sp.add_argument("--forbidden", help="forbidden family JSON")
        sp.add_argument("--order", help="order function JSON")
        sp.add_argument("--k", help="order threshold (int, p/q, or inf)")
        sp.add_argument("--emit", choices=["json", "dot"], default="json")
        sp.add_argument("--out", help=f"output directory (or ${OUT_ENV})")
        sp.add_argument("--bounds", type=int, default=DEFAULT_BOUND)
        sp.add_argument("--unsafe-bounds", action="store_true")
        sp.add_argument("--check-exclusive", action="store_true")
        sp.add_argument("--trust-rich", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.bounds < 1:
            _fail(1, error="bounds must be positive", bounds=args.bounds)
        result = COMMANDS[args.command](args)
    except RunError as exc:
        print(json.dumps({"ok": False, "code": exc.code, **exc.report},
                         sort_keys=True), file=sys.stderr)
        return exc.code
    except InputError as exc:
        report = {"ok": False, "error": str(exc)}
        if hasattr(exc, "axiom"):
            report["axiom"] = exc.axiom
            report["witness"] = repr(exc.witness)
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
        return 1
    except TheoremViolation as exc:
        print(json.dumps({"ok": False, "error": str(exc),
                          "kind": type(exc).__name__}, sort_keys=True),
              file=sys.stderr)
        return 3
    except PreconditionError as exc:
        print(json.dumps({"ok": False, "error": str(exc),
                          "kind": type(exc).__name__}, sort_keys=True),
              file=sys.stderr)
        return 2
    print(json.dumps({"ok": True, "command": args.command,
                      "summary": _summary(result)}, sort_keys=True))
    return 0


def _summary(result):
    if not isinstance(result, dict):
        return str(result)
    keys = ("kind", "tangles", "N", "valid", "verified")
    return {k: (len(result[k]) if isinstance(result[k], list) else result[k])
            for k in keys if k in result}


if __name__ == "__main__":
    sys.exit(main())
