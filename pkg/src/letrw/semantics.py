"""Bounded denotations in the CRWL proof calculus extended with lets.

The oracle answers ``e -> t`` questions top-down.  For an expression ``e``
and a partial c-term target ``t`` it computes the minimal partial
c-substitutions ``s`` (over the free variables of ``e``, unmentioned
variables meaning bottom) such that ``e s -> t`` is provable.  Provability
is upward closed in ``s``, so minimal elements are enough.  Function calls
consume one unit of the proof-depth budget ``max_steps``; running out of
budget clears the ``exact`` flag.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from itertools import product

from .program import CHOICE, Program
from .rewrite import Bounds, cterms
from .terms import (
    BOT, Bottom, ConApp, Expr, Fresh, FunApp, Let, LetRwError, Var, all_vars, apply_subst,
    approx_le, depth, free_vars, has_let, is_cterm, lub, show,
)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


@dataclass(frozen=True)
class Denotation:
    terms: frozenset
    bounds: Bounds
    exact: bool

    def __contains__(self, t) -> bool:
        return t in self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def sorted(self) -> list:
        return sorted(self.terms, key=term_key)

    def total(self) -> set:
        from .terms import is_cterm
        return {t for t in self.terms if is_cterm(t)}


def term_key(t):
    return depth(t), show(t)


@dataclass
class ProofNode:
    expr: Expr
    value: Expr
    rule: str  # B, RR, DC, OR or Let
    premises: list = field(default_factory=list)
    parameter_passing: dict = field(default_factory=dict)
    program_rule: int | None = None

    def size(self) -> int:
        return 1 + sum(q.size() for q in self.premises)


# ------------------------------------------------------ substitution sets

def _le(a: dict, b: dict) -> bool:
    return all(approx_le(v, b.get(k, BOT)) for k, v in a.items())


def _join(a: dict, b: dict) -> dict | None:
    out = dict(a)
    for k, v in b.items():
        if k in out:
            u = lub(out[k], v)
            if u is None:
                return None
            out[k] = u
        else:
            out[k] = v
    return out


def _minimize(subs) -> list:
    uniq = []
    seen = set()
    for s in subs:
        s = {k: v for k, v in s.items() if not isinstance(v, Bottom)}
        key = tuple(sorted(s.items(), key=lambda kv: kv[0]))
        if key not in seen:
            seen.add(key)
            uniq.append(s)
    return [s for s in uniq if not any(o is not s and _le(o, s) for o in uniq)]


def _combine(groups) -> list:
    acc = [{}]
    for g in groups:
        nxt = []
        for a in acc:
            for b in g:
                j = _join(a, b)
                if j is not None:
                    nxt.append(j)
        acc = _minimize(nxt)
        if not acc:
            return []
    return acc


def _below_identity(s: dict) -> bool:
    return all(isinstance(v, Bottom) or v == Var(k) for k, v in s.items())


# -------------------------------------------------------------- the oracle

class Oracle:
    """Memoized minimal-substitution search for one program and bounds."""

    def __init__(self, p: Program, b: Bounds = Bounds(), allow_let: bool = True):
        self.program = p
        self.bounds = b
        self.allow_let = allow_let
        self.memo: dict = {}
        self.cut = False
        self._domain = None
        if not allow_let and any(has_let(r.rhs) for r in p.rules):
            raise LetRwError("program has lets but the Let rule is disabled", "let-in-input")

    def need(self, e: Expr, t: Expr, budget: int | None = None) -> list:
        """Minimal partial c-substitutions ``s`` with ``e s -> t`` provable."""
        if budget is None:
            budget = self.bounds.max_steps
        if isinstance(t, Bottom):
            return [{}]
        match e:
            case Var(name):
                return [{name: t}]
            case Bottom():
                return []
            case ConApp(name, args):
                if not isinstance(t, ConApp) or t.name != name or len(t.args) != len(args):
                    return []
                return _combine(self.need(a, ti, budget) for a, ti in zip(args, t.args))
            case FunApp():
                return self._need_call(e, t, budget)
            case Let(x, d, b):
                if not self.allow_let:
                    raise LetRwError("the Let rule is disabled", "let-in-input")
                if x in all_vars(t):
                    y = Fresh("L", all_vars(e) | all_vars(t)).name()
                    b = apply_subst(b, {x: Var(y)})
                    x = y
                out = []
                for s2 in self.need(b, t, budget):
                    t1 = s2.get(x, BOT)
                    rest = {k: v for k, v in s2.items() if k != x}
                    out.extend(_combine([[rest], self.need(d, t1, budget)]))
                return _minimize(out)
        raise TypeError(e)

    def _need_call(self, e: FunApp, t: Expr, budget: int) -> list:
        if budget <= 0:
            self.cut = True
            return []
        key_e, key_t, back = _canonical_pair(e, t)
        key = (key_e, key_t, budget)
        if key not in self.memo:
            outer, self.cut = self.cut, False
            sols = self._compute_call(key_e, key_t, budget)
            # remember whether the answer was cut, so later hits stay inexact
            self.memo[key] = (sols, self.cut)
            self.cut = outer
        sols, was_cut = self.memo[key]
        self.cut = self.cut or was_cut
        if not back:
            return sols
        ren = {k: Var(v) for k, v in back.items()}
        return [{back.get(k, k): apply_subst(v, ren) for k, v in s.items()} for s in sols]

    def _compute_call(self, e: FunApp, t: Expr, budget: int) -> list:
        out = []
        avoid = all_vars(e) | all_vars(t)
        fv = free_vars(e)
        for rule in self.program.rules_for(e.name):
            fresh = Fresh("R", avoid)
            ren = {v: Var(fresh.name()) for v in sorted(rule.variables)}
            patterns = [apply_subst(pt, ren) for pt in rule.patterns]
            extra = {ren[v].name for v in rule.extra_vars}
            # arguments that already are partial c-terms are matched directly
            known, pending = {}, []
            for a, pt in zip(e.args, patterns):
                m = _prematch(pt, a)
                if m is None:
                    break
                if m is _PENDING:
                    pending.append((a, pt))
                else:
                    known.update(m)
            else:
                rhs = apply_subst(apply_subst(rule.rhs, ren), known)
                for guess in self._guesses(sorted(extra)):
                    for sr in self.need(apply_subst(rhs, guess), t, budget - 1):
                        full = {v.name: sr.get(v.name, BOT) for v in ren.values()
                                if v.name not in known}
                        groups = [[{x: v for x, v in sr.items() if x in fv}]]
                        groups += [self.need(a, apply_subst(pt, full), budget - 1) for a, pt in pending]
                        out.extend(_combine(groups))
        return _minimize(out)

    def _guesses(self, names):
        """All assignments of partial c-terms of bounded depth to extra variables."""
        if not names:
            yield {}
            return
        if self._domain is None:
            self._domain = cterms(self.program.constructors, self.bounds.extra_var_depth, partial=True)
        for values in product(self._domain, repeat=len(names)):
            yield dict(zip(names, values))

    def derives(self, e: Expr, t: Expr) -> bool:
        return any(_below_identity(s) for s in self.need(e, t))

    def prove(self, e: Expr, t: Expr, budget: int | None = None) -> ProofNode | None:
        """A witness proof of ``e -> t``, or None."""
        if budget is None:
            budget = self.bounds.max_steps
        if isinstance(t, Bottom):
            return ProofNode(e, t, "B")
        match e:
            case Var(name):
                return ProofNode(e, t, "RR") if t == e else None
            case ConApp(name, args):
                if not isinstance(t, ConApp) or t.name != name or len(t.args) != len(args):
                    return None
                subs = []
                for a, ti in zip(args, t.args):
                    q = self.prove(a, ti, budget)
                    if q is None:
                        return None
                    subs.append(q)
                return ProofNode(e, t, "DC", subs)
            case FunApp():
                if budget <= 0:
                    return None
                avoid = all_vars(e) | all_vars(t)
                for rule in self.program.rules_for(e.name):
                    fresh = Fresh("R", avoid)
                    ren = {v: Var(fresh.name()) for v in sorted(rule.variables)}
                    patterns = [apply_subst(pt, ren) for pt in rule.patterns]
                    rhs = apply_subst(rule.rhs, ren)
                    extra = {ren[v].name for v in rule.extra_vars}
                    for sr in self.need(rhs, t, budget - 1):
                        if any(depth(sr.get(v, BOT)) > self.bounds.extra_var_depth for v in extra):
                            continue
                        full = {v.name: sr.get(v.name, BOT) for v in ren.values()}
                        prems = []
                        for a, pt in zip(e.args, patterns):
                            q = self.prove(a, apply_subst(pt, full), budget - 1)
                            if q is None:
                                break
                            prems.append(q)
                        else:
                            body = self.prove(apply_subst(rhs, full), t, budget - 1)
                            if body is None:
                                continue
                            passing = {orig: full[v.name] for orig, v in ren.items()}
                            return ProofNode(e, t, "OR", prems + [body], passing, rule.index)
                return None
            case Let(x, d, b):
                if x in all_vars(t):
                    y = Fresh("L", all_vars(e) | all_vars(t)).name()
                    b = apply_subst(b, {x: Var(y)})
                    x = y
                for s2 in self.need(b, t, budget):
                    if not _below_identity({k: v for k, v in s2.items() if k != x}):
                        continue
                    t1 = s2.get(x, BOT)
                    q1 = self.prove(d, t1, budget)
                    if q1 is None:
                        continue
                    q2 = self.prove(apply_subst(b, {x: t1}), t, budget)
                    if q2 is not None:
                        return ProofNode(e, t, "Let", [q1, q2])
                return None
        return None


_PENDING = object()


def _prematch(pattern: Expr, arg: Expr):
    """Match a pattern against an argument that is already a partial c-term.

    Returns the bindings, None when no instance of the pattern is below the
    argument, or ``_PENDING`` when the argument must be solved for.
    """
    out = {}

    def go(pt, a):
        match pt:
            case Var(name):
                if not is_cterm(a, partial=True):
                    return _PENDING
                out[name] = a
                return True
            case ConApp(name, args):
                match a:
                    case Bottom():
                        return None
                    case ConApp(n2, a2):
                        if n2 != name or len(a2) != len(args):
                            return None
                        for x, y in zip(args, a2):
                            r = go(x, y)
                            if r is not True:
                                return r
                        return True
                return _PENDING
        return _PENDING

    r = go(pattern, arg)
    return out if r is True else r


def _canonical_pair(e, t):
    """Rename the free variables of (e, t) to ``_c0, _c1, ...``."""
    order: list[str] = []

    def visit(x, bound):
        match x:
            case Var(name):
                if name not in bound and name not in order:
                    order.append(name)
            case ConApp(_, args) | FunApp(_, args):
                for a in args:
                    visit(a, bound)
            case Let(v, d, b):
                visit(d, bound)
                visit(b, bound | {v})

    visit(e, frozenset())
    visit(t, frozenset())
    fwd = {n: f"_c{i}" for i, n in enumerate(order)}
    if all(k == v for k, v in fwd.items()):
        return e, t, {}
    ren = {k: Var(v) for k, v in fwd.items()}
    back = {v: k for k, v in fwd.items()}
    return apply_subst(e, ren), apply_subst(t, ren), back


def check_proof(p: Program, node: ProofNode) -> bool:
    """Local validity of every node of a proof tree."""
    e, t = node.expr, node.value
    match node.rule:
        case "B":
            ok = isinstance(t, Bottom)
        case "RR":
            ok = isinstance(e, Var) and e == t
        case "DC":
            ok = (isinstance(e, ConApp) and isinstance(t, ConApp) and e.name == t.name
                  and len(node.premises) == len(e.args)
                  and all(q.expr == a and q.value == ti
                          for q, a, ti in zip(node.premises, e.args, t.args)))
        case "OR":
            r = p.rules[node.program_rule]
            th = node.parameter_passing
            ok = (isinstance(e, FunApp) and r.head == e.name
                  and set(th) == set(r.variables)
                  and len(node.premises) == len(e.args) + 1
                  and all(q.expr == a and q.value == apply_subst(pt, th)
                          for q, a, pt in zip(node.premises, e.args, r.patterns))
                  and node.premises[-1].expr == apply_subst(r.rhs, th)
                  and node.premises[-1].value == t)
        case "Let":
            ok = (isinstance(e, Let) and len(node.premises) == 2
                  and node.premises[0].expr == e.definiens
                  and node.premises[1].expr == apply_subst(e.body, {e.var: node.premises[0].value})
                  and node.premises[1].value == t)
        case _:
            ok = False
    return ok and all(check_proof(p, q) for q in node.premises)


# -------------------------------------------------------------- operations

def value_universe(p: Program, variables, max_depth: int) -> list:
    return cterms(p.constructors, max_depth, partial=True, variables=sorted(variables))


def denote(p: Program, e: Expr, b: Bounds = Bounds(), allow_let: bool = True,
           oracle: Oracle | None = None) -> Denotation:
    """All partial c-terms of depth at most ``max_value_depth`` derivable for ``e``."""
    if not allow_let and has_let(e):
        raise LetRwError("the Let rule is disabled", "let-in-input")
    orc = oracle or Oracle(p, b, allow_let)
    orc.cut = False
    fv = sorted(free_vars(e))
    found = {BOT}
    frontier = [BOT]
    tried = {BOT}
    leaves = [ConApp(s.name, (BOT,) * s.arity) for s in p.constructors] + [Var(v) for v in fv]
    while frontier:
        nxt = []
        for t in frontier:
            for r in _refinements(t, leaves):
                if r in tried or depth(r) > b.max_value_depth:
                    continue
                tried.add(r)
                if orc.derives(e, r):
                    found.add(r)
                    nxt.append(r)
        frontier = nxt
    return Denotation(frozenset(found), b, not orc.cut)


def _refinements(t, leaves):
    """Terms obtained by replacing one bottom leaf of ``t`` by a leaf pattern."""
    match t:
        case Bottom():
            yield from leaves
        case ConApp(name, args):
            for i, a in enumerate(args):
                for r in _refinements(a, leaves):
                    yield ConApp(name, args[:i] + (r,) + args[i + 1:])


def downward_closure(d: Denotation) -> Denotation:
    out = set()
    for t in d.terms:
        out |= set(_down(t))
    return Denotation(frozenset(out), d.bounds, d.exact)


def _down(t):
    match t:
        case ConApp(name, args):
            yield BOT
            from itertools import product
            for combo in product(*[list(_down(a)) for a in args]):
                yield ConApp(name, tuple(combo))
        case Var():
            yield BOT
            yield t
        case _:
            yield BOT


def ground_closure(terms) -> set:
    out = set()
    for t in terms:
        out |= set(_down(t))
    return out


def denote_subst(p: Program, s: dict, b: Bounds = Bounds()) -> list[dict]:
    """Partial c-substitutions pointwise below the denotations of ``s``."""
    out = [{}]
    for x in sorted(s):
        den = denote(p, s[x], b).sorted()
        out = [{**o, x: t} for o in out for t in den]
    return out


@dataclass
class DirectedReport:
    expr: Expr
    directed: bool
    witness: tuple | None
    exact: bool

    def __str__(self) -> str:
        qual = "" if self.exact else " (within bounds)"
        if self.directed:
            return f"{show(self.expr)}: directed{qual}"
        a, c = self.witness
        return f"{show(self.expr)}: not directed, witness ({show(a)}, {show(c)}){qual}"


def is_directed(p: Program, exprs, b: Bounds = Bounds()) -> list[DirectedReport]:
    out = []
    for e in exprs:
        if has_let(e):
            raise LetRwError("is_directed expects let-free expressions", "let-in-input")
        den = denote(p, e, b)
        ts = den.sorted()
        witness = None
        for i, t1 in enumerate(ts):
            for t2 in ts[i + 1:]:
                u = lub(t1, t2)
                if u is None or u not in den.terms:
                    witness = (t1, t2)
                    break
            if witness:
                break
        out.append(DirectedReport(e, witness is None, witness, den.exact))
    return out


def hyperdenote_sample(p: Program, e: Expr, thetas, b: Bounds = Bounds()) -> dict:
    """Map each supplied substitution (as a sorted item tuple) to a denotation."""
    out = {}
    for th in thetas:
        key = tuple(sorted(th.items(), key=lambda kv: kv[0]))
        out[key] = denote(p, apply_subst(e, th), b)
    return out


def choice(e1: Expr, e2: Expr) -> FunApp:
    return FunApp(CHOICE, (e1, e2))
