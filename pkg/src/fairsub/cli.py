"""Command-line front end.

Exit codes: 0 positive verdict, 1 negative verdict, 2 inconclusive,
64 usage error (bad flags, missing file), 65 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .algorithm import Checker, NotSubtype, Subtype, Unknown, WitnessTrees, default_bound
from .controllability import ctrl_check, apply_replacement, synthesize_partner
from .corpus import DEFAULT_BUDGET, run_corpus, tree_sizes, verdict_name
from .dot import cfsm_dot, simulation_tree_dot, witness_dot
from .parser import parse
from .qm import AlphabetClashError, QueueMachineFormatError, encode_refinement, encode_subtyping, load_queue_machine
from .semantics import Compliant, NotCompliant, check_compliance
from .syntax import ParseError, SessionType, dual, pretty

EX_OK, EX_NO, EX_UNKNOWN = 0, 1, 2
EX_USAGE, EX_DATAERR = 64, 65


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: {message}", EX_USAGE)


def _location(text: str, pos: int) -> str:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return f"{line}:{col}"


def load_type(path: str) -> SessionType:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"{path}: {e.strerror or e}", EX_USAGE) from None
    try:
        return parse(text)
    except ParseError as e:
        if e.pos is None:
            raise CliError(f"{path}: {e}", EX_DATAERR) from None
        raise CliError(f"{path}:{_location(text, e.pos)}: {e.message}", EX_DATAERR) from None


def _positive(name: str):
    def conv(s: str) -> int:
        try:
            v = int(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer") from None
        if v < 1:
            raise argparse.ArgumentTypeError(f"{name} must be positive")
        return v

    return conv


def _seconds(args) -> float:
    return DEFAULT_BUDGET if args.timeout_ms is None else args.timeout_ms / 1000


# -- commands ----------------------------------------------------------------


def cmd_subtype(args) -> int:
    t, s = load_type(args.sub), load_type(args.sup)
    bound = args.bound if args.bound is not None else default_bound(s)
    t0 = time.perf_counter()
    v = Checker(bound, timeout=_seconds(args)).check(t, s)
    dt = time.perf_counter() - t0
    nodes, pruned, cands = tree_sizes(v)
    report = {"verdict": verdict_name(v), "bound": bound, "nodes": nodes, "pruned": pruned,
              "candidates": cands, "ms": round(dt * 1000, 3)}
    match v:
        case Subtype(evidence=WitnessTrees(trees)):
            report["witnesses"] = [
                {"root": w.root, "context": w.context, "J": list(w.J), "K": list(w.K),
                 "leaves": [[leaf.node, leaf.kind] for leaf in w.leaves]}
                for w in trees
            ]
        case Subtype(evidence=ev):
            report["evidence"] = type(ev).__name__
        case NotSubtype(path, reason):
            report["path"] = list(path)
            report["reason"] = reason
        case Unknown(reason):
            report["reason"] = reason
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(report["verdict"])
        for key in ("evidence", "path", "reason"):
            if key in report:
                val = report[key]
                if isinstance(val, list):
                    val = " ".join(val) or "(root)"
                print(f"  {key}: {val}")
        for w in report.get("witnesses", []):
            leaves = ", ".join(f"{n}:{k}" for n, k in w["leaves"])
            j, k = (", ".join(map(str, w[x])) for x in ("J", "K"))
            print(f"  witness at node {w['root']}: A = {w['context']}, J = {{{j}}}, K = {{{k}}}, leaves {leaves}")
        print(f"  nodes {nodes}, pruned {pruned}, candidates {cands}, bound {bound}, {dt * 1000:.1f} ms")
    if args.dot_dir and v.tree is not None:
        out = Path(args.dot_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "simulation.dot").write_text(simulation_tree_dot(v.tree), encoding="utf-8")
        if isinstance(v, Subtype) and isinstance(v.evidence, WitnessTrees):
            for i, w in enumerate(v.evidence.trees):
                (out / f"witness{i}.dot").write_text(witness_dot(v.tree, w), encoding="utf-8")
    return {Subtype: EX_OK, NotSubtype: EX_NO}.get(type(v), EX_UNKNOWN)


def cmd_controllable(args) -> int:
    t = load_type(args.type)
    ok, choice = ctrl_check(t)
    if not ok:
        print("not controllable")
        return EX_NO
    cut = apply_replacement(t, choice)
    print("controllable")
    print(f"  cut:     {pretty(cut)}")
    print(f"  partner: {pretty(dual(cut))}")
    return EX_OK


def cmd_partner(args) -> int:
    p = synthesize_partner(load_type(args.type))
    if p is None:
        print("no compliant partner exists", file=sys.stderr)
        return EX_NO
    print(pretty(p))
    return EX_OK


def cmd_compliance(args) -> int:
    t, s = load_type(args.left), load_type(args.right)
    v = check_compliance(t, s, max_states=args.max_states, max_queue=args.max_queue)
    if isinstance(v, Compliant):
        print(f"compliant ({v.states} configurations)")
        return EX_OK
    if isinstance(v, NotCompliant):
        print(f"not compliant: {v.reason}")
        if v.config is not None:
            print(f"  trace: {', '.join(v.path) or '(initial)'}")
            print(f"  stuck at: {v.config}")
        return EX_NO
    print(f"inconclusive: {v.reason} ({v.states} configurations)")
    return EX_UNKNOWN


def cmd_encode_qm(args) -> int:
    try:
        m = load_queue_machine(args.machine)
    except OSError as e:
        raise CliError(f"{args.machine}: {e.strerror or e}", EX_USAGE) from None
    except QueueMachineFormatError as e:
        raise CliError(f"{args.machine}: {e}", EX_DATAERR) from None
    try:
        if args.kind == "refinement":
            if args.target is None:
                raise CliError("encode-qm refinement needs --target", EX_USAGE)
            t, s = encode_refinement(m, args.target, args.end_label)
        else:
            t, s = encode_subtyping(m, args.end_label)
    except AlphabetClashError as e:
        raise CliError(str(e), EX_DATAERR) from None
    except ValueError as e:
        raise CliError(str(e), EX_USAGE) from None
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = Path(args.machine).stem
        (out / f"{stem}_sub.st").write_text(pretty(t) + "\n", encoding="utf-8")
        (out / f"{stem}_sup.st").write_text(pretty(s) + "\n", encoding="utf-8")
    else:
        print(pretty(t))
        print(pretty(s))
    return EX_OK


def cmd_render(args) -> int:
    t = load_type(args.type)
    if args.sup is None:
        if args.witness:
            raise CliError("--witness needs a supertype", EX_USAGE)
        sys.stdout.write(cfsm_dot(t))
        return EX_OK
    s = load_type(args.sup)
    v = Checker(args.bound, timeout=_seconds(args)).check(t, s)
    if v.tree is None:
        raise CliError("no simulation tree was built (the supertype is not controllable)", EX_NO)
    if args.witness:
        if not (isinstance(v, Subtype) and isinstance(v.evidence, WitnessTrees)):
            raise CliError(f"no witness tree: verdict is {verdict_name(v)}", EX_NO)
        sys.stdout.write("".join(witness_dot(v.tree, w, f"witness{i}")
                                 for i, w in enumerate(v.evidence.trees)))
    else:
        sys.stdout.write(simulation_tree_dot(v.tree))
    return EX_OK


def cmd_corpus(args) -> int:
    if not Path(args.dir).is_dir():
        raise CliError(f"{args.dir}: not a directory", EX_USAGE)
    report = run_corpus(args.dir, budget=_seconds(args), bound=args.bound, jobs=args.jobs)
    if args.json:
        print(report.to_json(timings=not args.no_timings))
    else:
        if report.rows:
            print(report.table(timings=not args.no_timings))
        s = report.summary()
        print(f"{len(report.rows)} pairs: " + ", ".join(f"{k} {v}" for k, v in s.items()))
    if report.over_budget:
        names = ", ".join(r.name for r in report.over_budget)
        print(f"over the {report.budget:g} s budget: {names}", file=sys.stderr)
    return EX_OK if report.ok else EX_NO


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fairsub", description="Fair asynchronous session subtyping tools.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def timeout(q):
        q.add_argument("--timeout-ms", type=_positive("--timeout-ms"), default=None,
                       help=f"time budget per check (default {DEFAULT_BUDGET * 1000:g})")

    q = sub.add_parser("subtype", help="check T <= S")
    q.add_argument("sub")
    q.add_argument("sup")
    q.add_argument("--bound", type=_positive("--bound"), help="path bound (default: twice the AST depth of S)")
    q.add_argument("--dot-dir", help="write simulation and witness trees as DOT files here")
    q.add_argument("--json", action="store_true")
    timeout(q)
    q.set_defaults(func=cmd_subtype)

    q = sub.add_parser("controllable", help="does T have a compliant partner?")
    q.add_argument("type")
    q.set_defaults(func=cmd_controllable)

    q = sub.add_parser("partner", help="print a compliant partner of T")
    q.add_argument("type")
    q.set_defaults(func=cmd_partner)

    q = sub.add_parser("compliance", help="explore the composition of T and S")
    q.add_argument("left")
    q.add_argument("right")
    q.add_argument("--max-states", type=_positive("--max-states"), default=100_000)
    q.add_argument("--max-queue", type=_positive("--max-queue"), default=16)
    q.set_defaults(func=cmd_compliance)

    q = sub.add_parser("encode-qm", help="session types from a queue machine")
    q.add_argument("kind", choices=("refinement", "subtyping"))
    q.add_argument("machine")
    q.add_argument("--target", help="target state (refinement only)")
    q.add_argument("--end-label", default="E")
    q.add_argument("--out-dir", help="write <machine>_sub.st and <machine>_sup.st here")
    q.set_defaults(func=cmd_encode_qm)

    q = sub.add_parser("render", help="DOT for a type, or for the tree of T <= S")
    q.add_argument("type")
    q.add_argument("sup", nargs="?")
    q.add_argument("--witness", action="store_true", help="render witness trees only")
    q.add_argument("--bound", type=_positive("--bound"))
    timeout(q)
    q.set_defaults(func=cmd_render)

    q = sub.add_parser("corpus", help="run every .pair file in a directory")
    q.add_argument("dir")
    q.add_argument("--bound", type=_positive("--bound"))
    q.add_argument("--jobs", type=_positive("--jobs"), default=1)
    q.add_argument("--json", action="store_true")
    q.add_argument("--no-timings", action="store_true", help="omit timings for byte-stable output")
    timeout(q)
    q.set_defaults(func=cmd_corpus)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as e:
        print(e, file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
