"""Let elimination, bubbling passes and the let-to-term-rewriting replay."""
from __future__ import annotations

from .program import Program
from .rewrite import BottomInInput, ReplayMismatch, Step, Trace, derived_step, trs_step
from .terms import (
    ConApp, Expr, FunApp, Let, alpha_canonical, apply_subst, has_bottom, rebuild,
    replace_at, show, show_position, subexpr_at,
)
from .unify import match_all

MARK = "_mark"


def eliminate_lets(e: Expr) -> Expr:
    """Substitute every definiens into its body, innermost lets first."""
    if has_bottom(e):
        raise BottomInInput(f"bottom in input {show(e)}")
    return _elim(e)


def _elim(e: Expr) -> Expr:
    match e:
        case ConApp(_, args) | FunApp(_, args):
            return rebuild(e, (_elim(a) for a in args)) if args else e
        case Let(x, d, b):
            return apply_subst(_elim(b), {x: _elim(d)})
    return e


def bubble_all(p: Program | None, e: Expr) -> list[Expr]:
    """Every single-position bubbling result of ``e``."""
    return [s.result for s in derived_step(p, e, "Bub")]


def _copies(e: Expr, prefix=()):
    """Positions of marked subterms once the marks are stripped, and the stripped term."""
    match e:
        case FunApp(name, (inner,)) if name == MARK:
            stripped, _ = _copies(inner, prefix)
            return stripped, [prefix]
        case ConApp(_, args) | FunApp(_, args):
            new, found = [], []
            for i, a in enumerate(args, 1):
                s, f = _copies(a, prefix + (i,))
                new.append(s)
                found.extend(f)
            return (rebuild(e, new) if args else e), found
    return e, []


def copy_replay(p: Program, source: Expr, step: Step, extra_var_depth: int = 2) -> Trace:
    """Term rewriting derivation from the let-free image of ``source`` to that of ``step.result``.

    Structural let steps leave the image unchanged.  An Fapp step at one
    position becomes one rewrite at each copy of the redex in the image;
    every rewrite must be among the ``trs_step`` successors of the state.
    """
    start = eliminate_lets(source)
    out = Trace(start)
    if step.tag != "Fapp":
        if eliminate_lets(step.result) != start:
            raise ReplayMismatch(f"{step.label} changed the let-free image")
        return out
    redex, _ = subexpr_at(source, step.position)
    marked = replace_at(source, step.position, FunApp(MARK, (redex,)))
    stripped, where = _copies(eliminate_lets(marked))
    if stripped != start:
        raise ReplayMismatch("marking changed the let-free image")
    rule = p.rules[step.rule]
    extra = {v: step.binding[v] for v in rule.extra_vars}
    cur = start
    for q in where:
        instance, _ = subexpr_at(cur, q)
        theta = match_all(rule.patterns, instance.args)
        if theta is None:
            raise ReplayMismatch(f"copy at {show_position(q)} does not match rule {rule.index}")
        nxt = replace_at(cur, q, apply_subst(rule.rhs, {**theta, **extra}))
        if not any(s.position == q and s.rule == rule.index and s.result == nxt
                   for s in trs_step(p, cur, extra_var_depth)):
            raise ReplayMismatch(f"no term rewriting step to {show(nxt)} at {show_position(q)}")
        out.steps.append(Step("TRS", "ProgramRule", q, nxt, {**theta, **extra}, rule.index, bool(extra)))
        cur = nxt
    if alpha_canonical(cur) != alpha_canonical(eliminate_lets(step.result)):
        raise ReplayMismatch(f"replay ended at {show(cur)}, expected {show(eliminate_lets(step.result))}")
    return out


def trs_image(p: Program, trace: Trace, extra_var_depth: int = 2) -> Trace:
    """Concatenate ``copy_replay`` over a whole let-rewriting trace."""
    states = trace.states()
    out = Trace(eliminate_lets(states[0]))
    for src, step in zip(states, trace.steps):
        part = copy_replay(p, src, step, extra_var_depth)
        out.steps.extend(part.steps)
    return out


def strip_marks(e: Expr) -> Expr:
    return _copies(e)[0]

