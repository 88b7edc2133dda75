"""Command-line interface.

Exit status is 0 on success, 1 when a check fails or an engine rejects its
input, and 2 on parse or validation errors.  Results go to stdout and
diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import checks, formats
from .corpus import EXAMPLES
from .narrowing import solve
from .program import ProgramError, parse_program, parse_query, validate
from .rewrite import (
    Bounds, Trace, bot_step, eval_values, follow_first, let_step, lnf_search, lnf_trace, reachable, trs_step,
)
from .semantics import denote
from .terms import LetRwError, alpha_canonical, depth, show
from .transforms import bubble_all, eliminate_lets


def _bounds(args) -> Bounds:
    return Bounds(max_steps=args.max_steps, max_value_depth=args.max_depth,
                  max_results=args.max_solutions, extra_var_depth=args.extra_var_depth)


def load_program(path: str, prelude_choice: bool = False):
    """Read a program file; unknown paths fall back to the bundled corpus."""
    f = Path(path)
    if f.exists():
        return parse_program(f.read_text(encoding="utf-8"), prelude_choice=prelude_choice)
    name = f.name[:-3] if f.name.endswith(".fl") else f.name
    if name in EXAMPLES:
        ex = EXAMPLES[name]
        return parse_program(ex.text(), prelude_choice=prelude_choice or ex.prelude_choice)
    raise ProgramError(f"{path}: no such program file", "io-error")


def _setup(args):
    p = load_program(args.program, args.prelude_choice)
    if args.verbose:
        for d in validate(p):
            print(d, file=sys.stderr)
    return parse_query(args.expr, p, partial=getattr(args, "partial", False))


def _value_key(t):
    return depth(t), show(t)


def _emit(args, text: str, obj) -> None:
    if args.format == "structured":
        print(formats.dumps(obj))
    elif text:
        print(text)


# ---------------------------------------------------------------- commands

def cmd_eval(args) -> int:
    p, e = _setup(args)
    res = eval_values(p, e, _bounds(args), strategy=args.strategy)
    values = sorted(res.values, key=_value_key)
    text = "\n".join([show(v) for v in values] + [f"exhausted: {str(res.exhausted).lower()}"])
    _emit(args, text, {"values": [formats.expr_to_json(v) for v in values],
                       "exhausted": res.exhausted, "states": res.states})
    return 0


def cmd_narrow(args) -> int:
    p, e = _setup(args)
    sols = solve(p, e, _bounds(args), subsume=args.subsume)
    structured = []
    for a in sols:
        if args.format == "structured":
            structured.append(formats.answer_to_json(a))
        else:
            print(a, flush=True)
    if args.format == "structured":
        print(formats.dumps({"answers": structured, "exhausted": sols.exhausted}))
    else:
        print(f"exhausted: {str(sols.exhausted).lower()}")
    return 0


def cmd_denote(args) -> int:
    p, e = _setup(args)
    d = denote(p, e, _bounds(args))
    _emit(args, formats.denotation_text(d), formats.denotation_to_json(d))
    return 0


def cmd_trace(args) -> int:
    p, e = _setup(args)
    b = _bounds(args)
    if args.target is not None:
        p, t = parse_query(args.target, p)
        if args.mode == "let":
            res = lnf_search(p, e, b, target=alpha_canonical(t))
            tr = res.trace_to(alpha_canonical(t)) if alpha_canonical(t) in res.values else None
        else:
            tr = reachable(args.mode, p, e, t, b.max_steps, b.extra_var_depth)
        if tr is None:
            _emit(args, "unreachable", {"reachable": False})
            return 0
    elif args.mode == "let":
        tr = follow_first(p, e, b.max_steps, b.extra_var_depth)
    else:
        tr = _follow_first_other(args.mode, p, e, b)
    _emit(args, formats.trace_text(tr), formats.trace_to_json(tr))
    return 0


def _follow_first_other(mode, p, e, b):
    succ = {"trs": trs_step, "bot": bot_step}[mode]
    tr = Trace(e)
    cur = e
    for _ in range(b.max_steps):
        steps = [s for s in succ(p, cur, b.extra_var_depth) if s.tag != "Brw"]
        if not steps:
            break
        tr.steps.append(steps[0])
        cur = steps[0].result
    return tr


def cmd_rewrite(args) -> int:
    p, e = _setup(args)
    b = _bounds(args)
    if args.target is None:
        succ = {"let": let_step, "trs": trs_step, "bot": bot_step}[args.mode]
        steps = succ(p, e, b.extra_var_depth)
        _emit(args, "\n".join(str(s) for s in steps),
              {"steps": [formats.step_to_json(s) for s in steps]})
        return 0
    p, t = parse_query(args.target, p, partial=args.mode == "bot")
    if args.mode == "let":
        res = lnf_search(p, e, b, target=alpha_canonical(t))
        tr = res.trace_to(alpha_canonical(t)) if alpha_canonical(t) in res.values else None
    else:
        tr = reachable(args.mode, p, e, t, b.max_steps, b.extra_var_depth)
    if tr is None:
        _emit(args, "unreachable", {"reachable": False})
    else:
        _emit(args, f"reachable in {len(tr)} steps\n" + formats.trace_text(tr),
              {"reachable": True, "trace": formats.trace_to_json(tr)})
    return 0


def cmd_transform(args) -> int:
    p, e = _setup(args)
    if args.pass_ == "eliminate-lets":
        r = eliminate_lets(e)
        _emit(args, show(r), formats.expr_to_json(r))
    elif args.pass_ == "bubble":
        rs = bubble_all(p, e)
        _emit(args, "\n".join(show(r) for r in rs), [formats.expr_to_json(r) for r in rs])
    else:
        tr = lnf_trace(e)
        _emit(args, show(tr.target), formats.trace_to_json(tr))
    return 0


def cmd_check(args) -> int:
    p = load_program(args.program, args.prelude_choice)
    if args.query:
        queries = []
        for q in args.query:
            p, e = parse_query(q, p)
            queries.append(e)
    else:
        queries = checks.default_queries(p, args.seed)
    b = _bounds(args)
    suites = checks.SUITES if args.suite == "all" else (args.suite,)
    results = []
    for s in suites:
        results.extend(checks.run_suite(s, p, queries, b, args.seed))
    for r in results:
        print(r)
    bad = sum(not r.ok for r in results)
    print(f"{len(results) - bad} ok, {bad} failed")
    return 0 if bad == 0 else 1


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="letrw", description="Call-time choice rewriting, narrowing and semantics.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, expr=True):
        sp.add_argument("program", help="program file (bundled examples may be named directly, e.g. coin.fl)")
        if expr:
            sp.add_argument("expr", help="query expression")
        sp.add_argument("--max-steps", type=int, default=50,
                        help="step bound; for denote the nesting depth of rule applications (default 50)")
        sp.add_argument("--max-depth", type=int, default=2, help="value depth bound for denote (default 2)")
        sp.add_argument("--max-solutions", type=int, default=1000, help="result bound (default 1000)")
        sp.add_argument("--extra-var-depth", type=int, default=2,
                        help="depth of guessed extra-variable values (default 2)")
        sp.add_argument("--prelude-choice", action="store_true", help="add the rules of the choice operator ?")
        sp.add_argument("--format", choices=("text", "structured"), default="text")
        sp.add_argument("--verbose", action="store_true", help="print program diagnostics to stderr")

    sp = sub.add_parser("eval", help="values reachable by let-rewriting")
    common(sp)
    sp.add_argument("--strategy", choices=("lnf", "full"), default="lnf")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("narrow", help="answers computed by let-narrowing")
    common(sp)
    sp.add_argument("--subsume", action="store_true", help="drop answers that are instances of earlier ones")
    sp.set_defaults(func=cmd_narrow)

    sp = sub.add_parser("denote", help="bounded denotation")
    common(sp)
    sp.add_argument("--partial", action="store_true", help="accept _|_ in the expression")
    sp.set_defaults(func=cmd_denote)

    sp = sub.add_parser("trace", help="print a derivation")
    common(sp)
    sp.add_argument("--follow", choices=("first",), default="first")
    sp.add_argument("--target")
    sp.add_argument("--mode", choices=("let", "trs", "bot"), default="let")
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("rewrite", help="one-step successors or reachability")
    common(sp)
    sp.add_argument("--mode", choices=("let", "trs", "bot"), default="let")
    sp.add_argument("--target")
    sp.add_argument("--partial", action="store_true", help="accept _|_ in the expression")
    sp.set_defaults(func=cmd_rewrite)

    sp = sub.add_parser("transform", help="apply a whole-expression pass")
    common(sp)
    sp.add_argument("--pass", dest="pass_", choices=("eliminate-lets", "bubble", "lnf"), required=True)
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("check", help="run property suites")
    common(sp, expr=False)
    sp.add_argument("--suite", choices=checks.SUITES + ("all",), default="all")
    sp.add_argument("--query", action="append", help="query to check (repeatable); random ones otherwise")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ProgramError as exc:
        print(f"error [{exc.kind}]: {exc}", file=sys.stderr)
        return 2
    except LetRwError as exc:
        print(f"error [{exc.kind}]: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
