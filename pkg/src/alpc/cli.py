"""Command-line front end.

Exit status: 0 when the logical verdict is positive (true, valid, accepted, no
countermodel found), 1 when it is negative, 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .closure import closure, closure_stats
from .errors import AlpcError
from .model import FIXTURES, fixture_text, load_model
from .proof import load_proof, verify
from .search import SearchBounds, Sampled, find_countermodel, parse_theta
from .semantics import check_formula, explain, model_valid, truth_set
from .syntax import chains_of, ill_formed_pair, modal_depth, parse, to_text

OK, NEGATIVE, ERROR = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(args, report: dict, text: str):
    if args.json:
        print(json.dumps(report, indent=2, ensure_ascii=False))
    else:
        print(text)


def cmd_check(args):
    m = load_model(args.model)
    phi = check_formula(m, parse(args.formula))
    if args.world is None:
        worlds = truth_set(m, phi)
        report = {"command": "check", "formula": to_text(phi), "true_at": list(worlds),
                  "verdict": bool(worlds)}
        _emit(args, report, f"true at: {{{', '.join(worlds)}}}")
        return OK if worlds else NEGATIVE
    trace = explain(m, args.world, phi)
    report = {"command": "check", "formula": to_text(phi), "world": args.world,
              "verdict": trace.verdict, "trace": trace.to_dict()}
    text = "true" if trace.verdict else "false"
    if args.explain:
        text += "\n" + trace.render()
    _emit(args, report, text)
    return OK if trace.verdict else NEGATIVE


def cmd_valid(args):
    m = load_model(args.model)
    phi = parse(args.formula)
    result = model_valid(m, phi)
    report = {"command": "valid", "formula": to_text(phi), "verdict": result.valid,
              "falsifying": list(result.falsifying)}
    text = "valid" if result.valid else f"not valid; fails at {{{', '.join(result.falsifying)}}}"
    _emit(args, report, text)
    return OK if result.valid else NEGATIVE


def _csv(text):
    return tuple(x.strip() for x in text.split(",") if x.strip())


def cmd_search(args):
    phi = parse(args.formula)
    kw = {}
    if args.agents:
        kw["agents"] = _csv(args.agents)
    if args.atoms:
        kw["atoms"] = _csv(args.atoms)
    if args.theta:
        kw["theta_set"] = parse_theta(args.theta) + tuple(chains_of(phi))
    if args.sampled:
        kw["awareness_mode"] = Sampled(args.sampled, args.seed)
    if args.no_symmetry:
        kw["symmetry"] = False
    if args.ceiling:
        kw["ceiling"] = args.ceiling
    bounds = SearchBounds.for_formula(phi, args.max_worlds, **kw)
    found = find_countermodel(phi, bounds, jobs=args.jobs)
    report = {"command": "search", "formula": to_text(phi), "max_worlds": args.max_worlds,
              "verdict": found is None}
    if found is None:
        _emit(args, report, f"no countermodel up to {args.max_worlds} worlds")
        return OK
    report["countermodel"] = found.to_dict()
    if args.out:
        Path(args.out).write_text(found.to_json())
    _emit(args, report, f"countermodel found (fails at {found.world}):\n{found.to_json().rstrip()}")
    return NEGATIVE


def cmd_closure(args):
    phi = parse(args.formula)
    theta = parse_theta(args.theta) if args.theta else ()
    theta = tuple(theta) + tuple(chains_of(phi))
    if not theta:
        raise UsageError("closure needs --theta when the formula has no chains")
    result = closure(phi, theta)
    listing = result.sorted()
    stats = closure_stats(result)
    report = {"command": "closure", "formula": to_text(phi), "theta": [str(t) for t in result.theta],
              "stats": stats, "formulas": [to_text(f) for f in listing]}
    lines = [f"{modal_depth(f)}  {to_text(f)}" for f in listing]
    lines.append(f"# {stats['cardinality']} formulas, max modal depth {stats['max_modal_depth']}")
    _emit(args, report, "\n".join(lines))
    return OK


def cmd_prove(args):
    proof = load_proof(args.proof)
    verdict = verify(proof)
    report = {"command": "prove", "verdict": verdict.accepted, "lines": verdict.n_lines,
              "failed_line": verdict.line, "reason": verdict.reason,
              "theorem": to_text(proof.theorem) if proof.lines else None}
    _emit(args, report, str(verdict))
    return OK if verdict else NEGATIVE


def cmd_fmt(args):
    phi = parse(args.formula)
    bad = ill_formed_pair(phi)
    report = {"command": "fmt", "formula": to_text(phi), "verdict": bad is None}
    text = to_text(phi)
    if bad:
        report["reason"] = f"[{bad[1]}] inside the scope of [{bad[0]}]"
        text += f"\nill-formed: {report['reason']}"
    _emit(args, report, text)
    return OK if bad is None else NEGATIVE


def cmd_fixture(args):
    text = fixture_text(args.name)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return OK


def build_parser():
    p = _Parser(prog="alpc", description="Awareness logic with partitions and chains.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--json", action="store_true", help="machine-readable report")
        sp.set_defaults(func=func)
        return sp

    sp = add("check", cmd_check, "evaluate a formula in a model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--formula", required=True)
    sp.add_argument("--world", help="world to evaluate at (default: list the worlds where it holds)")
    sp.add_argument("--explain", action="store_true", help="print the evaluation trace")

    sp = add("valid", cmd_valid, "check validity in a model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--formula", required=True)

    sp = add("search", cmd_search, "bounded countermodel search")
    sp.add_argument("--formula", required=True)
    sp.add_argument("--max-worlds", type=int, default=3)
    sp.add_argument("--agents", help="comma-separated (default: agents of the formula)")
    sp.add_argument("--atoms", help="comma-separated (default: atoms of the formula)")
    sp.add_argument("--theta", help='chains, e.g. "a;b;a,b" (formula chains always included)')
    sp.add_argument("--sampled", type=int, metavar="COUNT", help="sample COUNT awareness assignments")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--no-symmetry", action="store_true")
    sp.add_argument("--ceiling", type=int)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out", help="write the countermodel file here")

    sp = add("closure", cmd_closure, "closure set of a formula")
    sp.add_argument("--formula", required=True)
    sp.add_argument("--theta", help='chains, e.g. "a;b;a,b"')

    sp = add("prove", cmd_prove, "verify a proof file")
    sp.add_argument("--proof", required=True)

    sp = add("fmt", cmd_fmt, "normalise a formula and check well-formedness")
    sp.add_argument("--formula", required=True)

    sp = add("fixture", cmd_fixture, "write a bundled file")
    sp.add_argument("name", choices=FIXTURES)
    sp.add_argument("--out")
    return p


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"alpc: usage error: {exc}", file=sys.stderr)
    except (AlpcError, OSError, KeyError, ValueError) as exc:
        print(f"alpc: error: {exc}", file=sys.stderr)
    return ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
