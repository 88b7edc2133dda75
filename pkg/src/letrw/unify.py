"""Syntactic unification and one-way matching over constructor terms."""
from __future__ import annotations

from .terms import ConApp, Expr, FunApp, Var, apply_subst, free_vars, rebuild


def mgu(a: Expr, b: Expr, protected=frozenset()) -> dict | None:
    """Idempotent most general unifier of two c-terms, or None.

    When both sides of an equation are variables the variable coming from
    ``a`` is bound to the one from ``b``, unless it belongs to
    ``protected``; then the orientation flips.
    """
    theta: dict[str, Expr] = {}
    work = [(a, b)]
    while work:
        s, t = work.pop()
        s = apply_subst(s, theta)
        t = apply_subst(t, theta)
        if s == t:
            continue
        if isinstance(s, Var) and isinstance(t, Var):
            if s.name in protected and t.name not in protected:
                s, t = t, s
            _bind(theta, s.name, t)
        elif isinstance(s, Var):
            if s.name in free_vars(t):
                return None
            _bind(theta, s.name, t)
        elif isinstance(t, Var):
            if t.name in free_vars(s):
                return None
            _bind(theta, t.name, s)
        elif isinstance(s, ConApp) and isinstance(t, ConApp):
            if s.name != t.name or len(s.args) != len(t.args):
                return None
            work.extend(reversed(list(zip(s.args, t.args))))
        else:
            raise ValueError(f"mgu expects constructor terms, got {s} and {t}")
    return theta


def _bind(theta: dict, name: str, t: Expr) -> None:
    single = {name: t}
    for k, v in theta.items():
        theta[k] = apply_subst(v, single)
    theta[name] = t


def match(pattern: Expr, e: Expr, theta: dict | None = None) -> dict | None:
    """One-way matching of a linear c-term pattern against any expression.

    Constructor nodes of the pattern must meet constructor nodes of ``e``;
    pattern variables bind whatever subexpression sits at their place.
    """
    theta = {} if theta is None else theta
    match pattern:
        case Var(name):
            if name in theta and theta[name] != e:
                return None
            theta[name] = e
            return theta
        case ConApp(name, args):
            if not isinstance(e, ConApp) or e.name != name or len(e.args) != len(args):
                return None
            for p, a in zip(args, e.args):
                if match(p, a, theta) is None:
                    return None
            return theta
    raise ValueError(f"not a pattern: {pattern}")


def match_all(patterns, args) -> dict | None:
    theta: dict = {}
    for p, a in zip(patterns, args):
        if match(p, a, theta) is None:
            return None
    return theta


def instance_of(general, specific) -> dict | None:
    """Substitution ``r`` with ``general r == specific`` (tuples of c-terms)."""
    r: dict = {}
    for g, s in zip(general, specific):
        if _inst(g, s, r) is None:
            return None
    return r


def _inst(g, s, r):
    if isinstance(g, Var):
        if g.name in r:
            return r if r[g.name] == s else None
        r[g.name] = s
        return r
    if type(g) is not type(s) or not isinstance(g, (ConApp, FunApp)):
        return r if g == s else None
    if g.name != s.name or len(g.args) != len(s.args):
        return None
    for x, y in zip(g.args, s.args):
        if _inst(x, y, r) is None:
            return None
    return r


def rename_term(t: Expr, mapping: dict) -> Expr:
    """Rename variables of a let-free term."""
    match t:
        case Var(name):
            return Var(mapping.get(name, name))
        case ConApp(_, args) | FunApp(_, args):
            return rebuild(t, (rename_term(a, mapping) for a in args)) if args else t
    return t
