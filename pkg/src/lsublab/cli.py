"""``lsub-lab``: command-line front end.

Exit status is 0 on success, 1 when a property fails (or a term has no
normal form / type), 2 on usage and parse errors. Output depends only on
the arguments, so seeded runs are reproducible byte for byte.
"""

from __future__ import annotations

import argparse
import inspect
import json
import random
import sys

from . import calculi, measures, props, typesys
from .calculi import CalculusId
from .lsub import (
    NotNormalizing, Step, Verdict, explore_sn, format_step, format_trace, normalize,
    normalize_sub, redexes, step_json, sub_denotation,
)
from .syntax import ParseError, has_metavars, is_pure, parse


class UsageError(Exception):
    pass


def _emit(out, obj):
    out.write(json.dumps(obj, sort_keys=True, ensure_ascii=False) + "\n")


def _term(args):
    if args.file is not None:
        with open(args.file, encoding="utf-8") as fh:
            src = fh.read()
    elif args.term is not None:
        src = args.term
    else:
        raise UsageError("a term is required (inline or with --file)")
    return parse(src.strip(), marked=True)


# ------------------------------------------------------------ commands

def cmd_parse(args, out):
    t = _term(args)
    if args.jsonl:
        _emit(out, {"term": str(t), "fv": sorted(t.fv), "size": t.size})
    else:
        out.write(f"{t}\n")
        out.write(f"fv: {' '.join(sorted(t.fv))}\n")
        out.write(f"size: {t.size}\n")
    return 0


def cmd_reduce(args, out):
    t = _term(args)
    calc = CalculusId(args.calculus)
    if args.strategy == "exhaustive":
        calculi.check_input(calc, t)
        steps = sorted(redexes(t, calculi.RULES[calc]), key=Step.sort_key)
        for s in steps:
            out.write((step_json(s) if args.jsonl else format_step(s)) + "\n")
        return 0
    rng = random.Random(args.seed)
    red = calculi.reduce(calc, t, args.strategy, args.steps, rng)
    if red.trace:
        out.write(format_trace(red.trace, args.jsonl).rstrip("\n") + "\n")
    if args.jsonl:
        _emit(out, {"result": str(red.final), "normal": red.normal})
    else:
        status = "normal" if red.normal else "stopped"
        out.write(f"{status}: {red.final}\n")
    return 0


def cmd_normalize(args, out):
    t = _term(args)
    calc = CalculusId(args.calculus)
    calculi.check_input(calc, t)
    try:
        if calc is CalculusId.Sub:
            nf = normalize_sub(t)
        else:
            nf = normalize(t, calculi.RULES[calc], max_steps=args.steps)
    except NotNormalizing as e:
        print(f"lsub-lab: {e}", file=sys.stderr)
        return 1
    if args.jsonl:
        _emit(out, {"term": str(t), "normal_form": str(nf)})
    else:
        out.write(f"{nf}\n")
    return 0


def cmd_translate(args, out):
    t = _term(args)
    target = args.to
    if target == "les":
        r = calculi.tra(t)
    elif target == "lpar-embed":
        r = calculi.lmpar(t)
    elif target == "lsub":
        r = calculi.parlm(t)
    else:
        if has_metavars(t):
            raise UsageError("metavariables have no lambda-term image")
        r = sub_denotation(t)
    if args.jsonl:
        _emit(out, {"term": str(t), "to": target, "image": str(r)})
    else:
        out.write(f"{r}\n")
    return 0


def cmd_measure(args, out):
    t = _term(args)
    s = measures.size_s(t)
    muls = measures.mul_map(t)
    if args.jsonl:
        _emit(out, {"term": str(t), "s": s, "mul": muls})
        return 0
    out.write(f"s={s}\n")
    for x, m in muls.items():
        out.write(f"mul[{x}]={m}\n")
    return 0


def cmd_sn(args, out):
    t = _term(args)
    calc = CalculusId(args.calculus)
    calculi.check_input(calc, t)
    r = explore_sn(t, calculi.RULES[calc], state_bound=args.states)
    rec = {"verdict": str(r.verdict), "max_length": r.max_length,
           "states": r.distinct_states}
    if args.jsonl:
        _emit(out, rec)
    else:
        out.write(f"{r.verdict} max_length={r.max_length} states={r.distinct_states}\n")
    return 1 if r.verdict is Verdict.NotSN and args.strict else 0


def cmd_typecheck(args, out):
    S = typesys.System
    if args.derivation is not None:
        with open(args.derivation, encoding="utf-8") as fh:
            d = typesys.from_sexp(fh.read())
        system = S.make(args.system == "mul", args.inter, closures=True)
        err = typesys.explain(d, system)
        if args.jsonl:
            _emit(out, {"system": str(system), "valid": err is None,
                        "judgement": d.judgement(),
                        "error": None if err is None else str(err)})
        elif err is None:
            out.write(f"valid in {system}: {d.judgement()}\n")
        else:
            out.write(f"invalid in {system}: {err}\n")
        return 0 if err is None else 1
    t = _term(args)
    if args.inter:
        if not typesys.is_beta_normal(t):
            raise UsageError("intersection typing is only synthesized for beta-normal "
                             "pure terms; pass a derivation with --derivation")
        d = typesys.type_normal_form(t)
        system = S.ADDI_LAM
        if args.system == "mul":
            d, system = typesys.add_to_mul(d, inter=True), S.MULI_LAM
    else:
        system = S.make(False, False, closures=not is_pure(t))
        d = typesys.infer_simple(t, system)
        if d is not None and args.system == "mul":
            d = typesys.add_to_mul(d)
            system = S.make(True, False, system.closures)
    if d is None:
        if args.jsonl:
            _emit(out, {"term": str(t), "typable": False})
        else:
            out.write(f"untypable: {t}\n")
        return 1
    if args.jsonl:
        _emit(out, {"term": str(t), "typable": True, "system": str(system),
                    "judgement": d.judgement(), "derivation": typesys.to_sexp(d)})
    else:
        out.write(f"{d.judgement()}\n")
        if args.show:
            out.write(typesys.to_sexp(d) + "\n")
    return 0


def cmd_prop_test(args, out):
    fn = props.CAMPAIGNS[args.property]
    kw = {"seed": args.seed}
    if args.count is not None:
        kw["count"] = args.count
    if args.size is not None:
        kw["size"] = args.size
    if args.metaterms:
        kw["meta_prob"] = 0.3
    elif args.property in ("confluence", "full-composition", "measures", "diamond"):
        kw["meta_prob"] = 0.0
    accepted = inspect.signature(fn).parameters
    kw = {k: v for k, v in kw.items() if k in accepted}
    rep = fn(**kw)
    if args.jsonl:
        out.write(rep.to_json() + "\n")
    else:
        out.write(rep.summary() + "\n")
        for f in rep.failures:
            _emit(out, {"property": rep.name, "failure": f})
    return 0 if rep.ok else 1


# -------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jsonl", action="store_true",
                        help="JSON lines instead of text")
    common.add_argument("--file", help="read the term from a file")

    p = argparse.ArgumentParser(prog="lsub-lab",
                                description="Partial-substitution calculus workbench")
    sub = p.add_subparsers(dest="command", required=True)
    calcs = [c.value for c in CalculusId]

    def with_term(name, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("term", nargs="?")
        return sp

    with_term("parse", "parse and print a term").set_defaults(func=cmd_parse)

    sp = with_term("reduce", "print a reduction trace")
    sp.add_argument("--calculus", choices=calcs, default="lsub")
    sp.add_argument("--steps", type=int, default=1000)
    sp.add_argument("--strategy", choices=["leftmost", "random", "exhaustive"],
                    default="leftmost")
    sp.set_defaults(func=cmd_reduce)

    sp = with_term("normalize", "normal form as a canonical representative")
    sp.add_argument("--calculus", choices=calcs, default="sub")
    sp.add_argument("--steps", type=int, default=10_000)
    sp.set_defaults(func=cmd_normalize)

    sp = with_term("translate", "translate between calculi")
    sp.add_argument("--to", choices=["les", "lpar-embed", "lambda", "lsub"],
                    required=True)
    sp.set_defaults(func=cmd_translate)

    with_term("measure", "size and multiplicity measures").set_defaults(func=cmd_measure)

    sp = with_term("sn", "explore the reduction graph for termination")
    sp.add_argument("--calculus", choices=calcs, default="lsub")
    sp.add_argument("--states", type=int, default=5000)
    sp.add_argument("--strict", action="store_true",
                    help="exit 1 when the term is not SN")
    sp.set_defaults(func=cmd_sn)

    sp = with_term("typecheck", "infer or check a typing")
    sp.add_argument("--system", choices=["add", "mul"], default="add")
    sp.add_argument("--inter", action="store_true")
    sp.add_argument("--derivation", help="validate a derivation s-expression file")
    sp.add_argument("--show", action="store_true", help="print the derivation")
    sp.set_defaults(func=cmd_typecheck)

    sp = sub.add_parser("prop-test", parents=[common], help="run a property campaign")
    sp.add_argument("property", choices=sorted(props.CAMPAIGNS))
    sp.add_argument("--count", type=int)
    sp.add_argument("--size", type=int)
    sp.add_argument("--metaterms", action="store_true")
    sp.set_defaults(func=cmd_prop_test)
    return p


def _positive(args):
    for name in ("steps", "states", "count", "size"):
        v = getattr(args, name, None)
        if v is not None and v <= 0:
            raise UsageError(f"--{name} must be positive")


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        _positive(args)
        return args.func(args, out)
    except (ParseError, UsageError, ValueError, OSError) as e:
        print(f"lsub-lab: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
