"""Text and JSON renderings of traces, answers and denotations."""
from __future__ import annotations

import json

from .rewrite import Bounds, Step, Trace
from .semantics import Denotation
from .terms import BOT, Bottom, ConApp, Expr, FunApp, Let, Var, show, show_position, show_subst


def expr_to_json(e: Expr):
    match e:
        case Var(name):
            return {"var": name}
        case Bottom():
            return {"bot": True}
        case ConApp(name, args):
            return {"con": name, "args": [expr_to_json(a) for a in args]}
        case FunApp(name, args):
            return {"fun": name, "args": [expr_to_json(a) for a in args]}
        case Let(x, d, b):
            return {"let": x, "definiens": expr_to_json(d), "body": expr_to_json(b)}
    raise TypeError(e)


def expr_from_json(obj) -> Expr:
    if "var" in obj:
        return Var(obj["var"])
    if "bot" in obj:
        return BOT
    if "con" in obj:
        return ConApp(obj["con"], tuple(expr_from_json(a) for a in obj["args"]))
    if "fun" in obj:
        return FunApp(obj["fun"], tuple(expr_from_json(a) for a in obj["args"]))
    if "let" in obj:
        return Let(obj["let"], expr_from_json(obj["definiens"]), expr_from_json(obj["body"]))
    raise ValueError(f"not an expression object: {obj!r}")


def subst_to_json(s: dict) -> dict:
    return {k: expr_to_json(v) for k, v in sorted(s.items())}


def position_to_json(p) -> list:
    return list(p)


def step_to_json(st: Step) -> dict:
    return {
        "relation": st.relation,
        "tag": st.tag,
        "rule": st.rule,
        "position": position_to_json(st.position),
        "binding": subst_to_json(st.binding),
        "guessed": st.guessed,
        "result": expr_to_json(st.result),
    }


def trace_to_json(t: Trace) -> dict:
    return {"source": expr_to_json(t.source), "steps": [step_to_json(s) for s in t.steps]}


def trace_text(t: Trace) -> str:
    lines = [show(t.source)] + [str(s) for s in t.steps]
    return "\n".join(lines)


def answer_to_json(a) -> dict:
    sigma, value = a.canonical()
    return {"substitution": subst_to_json(sigma), "value": expr_to_json(value),
            "trace": trace_to_json(a.trace)}


def bounds_text(b: Bounds) -> str:
    return (f"max_steps={b.max_steps} max_value_depth={b.max_value_depth} "
            f"max_results={b.max_results} extra_var_depth={b.extra_var_depth}")


def denotation_text(d: Denotation) -> str:
    lines = [f"exact: {'true' if d.exact else 'false'}", f"bounds: {bounds_text(d.bounds)}"]
    lines += [show(t) for t in d.sorted()]
    return "\n".join(lines)


def denotation_to_json(d: Denotation) -> dict:
    b = d.bounds
    return {"exact": d.exact,
            "bounds": {"max_steps": b.max_steps, "max_value_depth": b.max_value_depth,
                       "max_results": b.max_results, "extra_var_depth": b.extra_var_depth},
            "terms": [expr_to_json(t) for t in d.sorted()]}


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)

