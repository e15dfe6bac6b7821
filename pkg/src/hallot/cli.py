"""Command-line front end.

Every command prints one JSON run report (or a plain-text rendering with
``--pretty``) and exits 0 only when every requested expectation is met.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import resources

from . import __version__, _kernels
from .axioms import AXIOMS, canonical_axiom, check
from .characterize import characterize
from .core import HallotError, object_names
from .mechanisms import (
    COUNTEREXAMPLES,
    Hierarchy,
    MechanismTable,
    constant_mechanism,
    counterexample,
    materialize,
    sd_mechanism,
    seqd_mechanism,
)
from .search import SearchSpec, cross_validate, enumerate_mechanisms
from . import varpop

MECHANISMS = ["sd", "seqd", "constant", *COUNTEREXAMPLES]


def _agents(text):
    return tuple(int(a) - 1 for a in text.split(","))


def _objects(text, n=None):
    names = [o.strip() for o in text.split(",")]
    lookup = {name: k for k, name in enumerate(object_names(n or len(names)))}
    try:
        return tuple(lookup[o] for o in names)
    except KeyError as exc:
        raise HallotError(f"unknown object {exc.args[0]!r}") from None


def _build_mechanism(args):
    name = args.mechanism
    if name == "sd":
        pi = _agents(args.priority) if args.priority else tuple(range(args.n or 3))
        return sd_mechanism(pi)
    if name == "seqd":
        if not args.hierarchy:
            raise HallotError("--mechanism seqd needs --hierarchy FILE")
        with open(args.hierarchy) as fh:
            return seqd_mechanism(Hierarchy.from_dict(json.load(fh)))
    if name == "constant":
        x = _objects(args.allocation) if args.allocation else tuple(range(args.n or 3))
        return constant_mechanism(x)
    params = {}
    if args.priority:
        params["pi"] = _agents(args.priority)
    if args.priority2:
        params["pi_prime"] = _agents(args.priority2)
    if args.object:
        params["x"] = _objects(args.object, 3)[0]
    if args.allocation:
        params["x"] = _objects(args.allocation)
    return counterexample(name, **params)


def _load_table(args) -> MechanismTable:
    if args.table:
        return MechanismTable.load(args.table)
    if not args.mechanism:
        raise HallotError("give --table FILE or --mechanism NAME")
    m = _build_mechanism(args)
    return materialize(m, args.n or m.n)


def _add_mechanism_args(p):
    p.add_argument("--table", help="mechanism table JSON file")
    p.add_argument("--mechanism", choices=MECHANISMS)
    p.add_argument("--n", type=int)
    p.add_argument("--priority", help="comma-separated agents, 1-indexed, e.g. 2,1,3")
    p.add_argument("--priority2", help="second priority for two-branch mechanisms")
    p.add_argument("--allocation", help="objects per agent for constant mechanisms, e.g. b,a,c")
    p.add_argument("--object", help="distinguished object for ex2_bossy")
    p.add_argument("--hierarchy", help="hierarchy JSON file for seqd")


# -- commands ------------------------------------------------------------------------


def cmd_check(args):
    t = _load_table(args)
    axioms = [canonical_axiom(a) for a in args.axioms.split(",")]
    items = []
    for a in axioms:
        opts = {}
        if a == "gctb" and args.gctb_mode:
            opts["mode"] = args.gctb_mode
        if a == "lctb" and args.lctb_mode:
            opts["mode"] = args.lctb_mode
        if a == "gsp" and args.gsp_mode:
            opts["mode"] = args.gsp_mode
        report = check(t, a, full=args.full, **opts)
        d = report.to_dict()
        if "rule" in d:
            d["rule"] = d["rule"].to_dict(t)
        items.append(d)
    ok = True
    if args.expect_holds:
        ok = all(i["holds"] for i in items)
    if args.expect_fails:
        ok = ok and not any(i["holds"] for i in items)
    return items, ok


def _fixture(path=None):
    if path:
        with open(path) as fh:
            return json.load(fh)
    return json.loads(resources.files("hallot").joinpath("data/independence_v1.json").read_text())


def run_independence(fixture=None):
    fixture = fixture or _fixture()
    items = []
    for row in fixture["rows"]:
        t = materialize(counterexample(row["mechanism"], **row.get("params", {})), fixture["n"])
        for claim in row["claims"]:
            got = check(t, claim["axiom"]).holds
            items.append({
                "mechanism": row["mechanism"],
                "axiom": claim["axiom"],
                "expected": claim["holds"],
                "computed": got,
                "agrees": got == claim["holds"],
                "claim": claim["claim"],
            })
    return items


def cmd_independence(args):
    fixture = _fixture(args.fixture)
    items = run_independence(fixture)
    return items, all(i["agrees"] for i in items)


def cmd_search(args):
    spec = SearchSpec(args.n, tuple(args.axioms.split(",")), mode=args.mode, limit=args.limit,
                      ordering=args.ordering)
    result = enumerate_mechanisms(spec)
    item = result.to_dict()
    if not args.include_tables:
        del item["tables"]
    ok = True
    if args.expect_family:
        item["family"] = args.expect_family
        item["cross_validated"] = cross_validate(result, args.expect_family)
        ok = item["cross_validated"]
    if args.expect_count is not None:
        ok = ok and len(result.tables) == args.expect_count
    return [item], ok


def cmd_characterize(args):
    t = _load_table(args)
    result = characterize(t)
    ok = args.expect_family is None or result.family == args.expect_family
    return [result.to_dict(t)], ok


def cmd_materialize(args):
    t = _load_table(args)
    text = t.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        return [{"written": args.out, "n": t.n, "label": t.label}], True
    return [t.to_dict()], True


def cmd_varpop(args):
    build = varpop.VAR_MECHANISMS[args.mechanism]
    pi = _agents(args.priority) if args.priority else (0, 1, 2)
    m = build(pi)
    pot = varpop.Potentials(args.agents, args.agents)
    if args.verify == "proposition":
        result = varpop.verify_proposition(m, pot)
        item = {"mechanism": m.label, "verify": "proposition", **result.to_dict()}
        ok = result.holds
    elif args.verify == "corollary":
        holds = varpop.verify_varpop_corollary(m, pot)
        item = {"mechanism": m.label, "verify": "corollary", "holds": holds}
        ok = holds
    elif args.verify == "classify":
        classes = [varpop.classify_pair(m, i, j, pot).to_dict() for i in range(pot.agents) for j in range(i + 1, pot.agents)]
        item = {"mechanism": m.label, "verify": "classify", "pairs": classes}
        ok = True
    else:
        checker = {
            "consistency": varpop.check_pairwise_consistency,
            "neutrality": varpop.check_pairwise_neutrality,
            "sp": varpop.check_var_sp,
        }[args.verify]
        report = checker(m, pot)
        item = {"mechanism": m.label, "verify": args.verify, **report.to_dict()}
        ok = report.holds
    if args.expect is not None:
        ok = ok == (args.expect == "true")
    else:
        ok = True
    return [item], ok


# -- plumbing --------------------------------------------------------------------------


def _parser():
    parser = argparse.ArgumentParser(prog="hallot", description="House allocation axiom laboratory")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="human-readable output instead of JSON")
    common.add_argument("--no-meta", action="store_true", help="omit timing and version metadata")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="check axioms on one mechanism")
    _add_mechanism_args(p)
    p.add_argument("--axioms", required=True, help=f"comma-separated, from: {', '.join(AXIOMS)}")
    p.add_argument("--full", action="store_true", help="count every violation instead of stopping at the first")
    p.add_argument("--gctb-mode", type=int, choices=[1, 2])
    p.add_argument("--lctb-mode", type=int, choices=[3, 4])
    p.add_argument("--gsp-mode", choices=["auto", "direct", "equivalence"])
    p.add_argument("--expect-holds", action="store_true", help="fail unless every axiom holds")
    p.add_argument("--expect-fails", action="store_true", help="fail unless every axiom fails")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("independence", parents=[common], help="run the counterexample pass/fail matrix")
    p.add_argument("--fixture", help="alternative fixture file")
    p.set_defaults(func=cmd_independence)

    p = sub.add_parser("search", parents=[common], help="enumerate all tables satisfying axioms")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--axioms", required=True)
    p.add_argument("--mode", choices=["exhaustive", "propagated"], default=None)
    p.add_argument("--limit", type=int)
    p.add_argument("--ordering", choices=["seeded", "mrv", "index"], default="seeded")
    p.add_argument("--expect-family", choices=["serial", "sequential"])
    p.add_argument("--expect-count", type=int)
    p.add_argument("--include-tables", action="store_true", help="embed every solution table in the report")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("characterize", parents=[common], help="classify a table as serial/sequential/none")
    _add_mechanism_args(p)
    p.add_argument("--expect-family", choices=["serial", "sequential", "none"])
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("materialize", parents=[common], help="write a mechanism table file")
    _add_mechanism_args(p)
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_materialize)

    p = sub.add_parser("varpop", parents=[common], help="variable-population checks")
    p.add_argument("--mechanism", choices=sorted(varpop.VAR_MECHANISMS), required=True)
    p.add_argument("--priority")
    p.add_argument("--agents", type=int, default=3, help="size of the potential agent and object sets")
    p.add_argument("--verify", choices=["proposition", "corollary", "consistency", "neutrality", "sp", "classify"],
                   default="proposition")
    p.add_argument("--expect", choices=["true", "false"])
    p.set_defaults(func=cmd_varpop)
    return parser


def _render(report):
    lines = [f"# {' '.join(report['command'])}"]
    for item in report["items"]:
        if "axiom" in item and "holds" in item and "agrees" not in item:
            mark = "holds" if item["holds"] else "FAILS"
            lines.append(f"{item['axiom']:<14} {mark}")
            if item.get("witness"):
                lines.append("    witness: " + json.dumps(item["witness"]))
        elif "agrees" in item:
            mark = "ok  " if item["agrees"] else "DIFF"
            sign = lambda b: "yes" if b else "no"
            lines.append(f"{mark} {item['mechanism']:<20} {item['axiom']:<11} expected={sign(item['expected'])} "
                         f"computed={sign(item['computed'])}  ({item['claim']})")
        else:
            lines.append(json.dumps(item, indent=2))
    lines.append("ok" if report["ok"] else "NOT OK")
    return "\n".join(lines)


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _parser()
    args = parser.parse_args(argv)
    if getattr(args, "mode", "x") is None:
        args.mode = "exhaustive" if args.n <= 2 else "propagated"
    start = time.perf_counter()
    try:
        items, ok = args.func(args)
    except (HallotError, OSError) as exc:
        print(f"hallot: error: {exc}", file=sys.stderr)
        return 2
    report = {"command": argv, "items": items, "ok": ok}
    if not args.no_meta:
        report["meta"] = {
            "version": __version__,
            "backend": _kernels.backend_name(),
            "wall_time": round(time.perf_counter() - start, 4),
        }
    print(_render(report) if args.pretty else json.dumps(report))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
