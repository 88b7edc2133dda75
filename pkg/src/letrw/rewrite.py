"""One-step relations and bounded searches.

Three relations are implemented over the same position machinery:
ordinary term rewriting, the bottom-based relation for call-time choice
over let-free terms, and let-rewriting.  Derived rules (context let
introduction, let distribution, bubbling) are offered separately.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from itertools import product

from .program import CHOICE, Program
from .terms import (
    BODY, BOT, DEF, Bottom, ConApp, Expr, Fresh, FunApp, Let, LetRwError, Var,
    alpha_canonical, alpha_eq, all_vars, apply_subst, approx_le, lub, shell, free_vars, has_bottom, has_let,
    is_cterm, position_key, positions, rebuild, replace_at, restrict, show, show_position,
    show_subst, subexpr_at, vran,
)
from .unify import match_all


class LetInInput(LetRwError):
    kind = "let-in-input"


class BottomInInput(LetRwError):
    kind = "bottom-in-input"


class ReplayMismatch(LetRwError):
    kind = "replay-mismatch"


@dataclass(frozen=True)
class Bounds:
    max_steps: int = 50
    max_value_depth: int = 2
    max_results: int = 1000
    extra_var_depth: int = 2

    def __post_init__(self):
        for name in ("max_steps", "max_value_depth", "max_results", "extra_var_depth"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class Step:
    relation: str  # "TRS", "Bot", "Let" or "Narrow"
    tag: str
    position: tuple
    result: Expr
    binding: dict = field(default_factory=dict, compare=False)
    rule: int | None = None
    guessed: bool = False
    unifier: dict = field(default_factory=dict, compare=False)

    @property
    def label(self) -> str:
        return self.tag if self.rule is None else f"{self.tag}({self.rule})"

    def __str__(self) -> str:
        return f"{self.label} @ {show_position(self.position)} {show_subst(self.binding)} => {show(self.result)}"


@dataclass
class Trace:
    source: Expr
    steps: list = field(default_factory=list)

    def states(self) -> list:
        return [self.source] + [s.result for s in self.steps]

    @property
    def target(self) -> Expr:
        return self.steps[-1].result if self.steps else self.source

    def __len__(self) -> int:
        return len(self.steps)


TAG_RANK = {"LetIn": 0, "Fapp": 1, "Narr": 1, "Bind": 2, "Elim": 3, "Flat": 4,
            "CLetIn": 5, "Dist": 6, "Bub": 7, "ProgramRule": 1, "ORrw": 1, "Brw": 2}


def step_key(step: Step):
    """Deterministic order: outer positions first, body before definiens."""
    return (position_key(step.position), TAG_RANK.get(step.tag, 9),
            -1 if step.rule is None else step.rule, show(step.result))


# -------------------------------------------------------------- generators

def cterms(constructors, max_depth: int, partial: bool = False, variables=()) -> list:
    """All c-terms of depth at most ``max_depth`` over the given symbols."""
    levels = [[BOT] if partial else []]
    levels[0] = levels[0] + [Var(v) for v in variables]
    for d in range(1, max_depth + 1):
        below = [t for lvl in levels for t in lvl]
        new = []
        for sym in constructors:
            if sym.arity == 0:
                if d == 1:
                    new.append(ConApp(sym.name))
                continue
            for args in product(below, repeat=sym.arity):
                t = ConApp(sym.name, tuple(args))
                if max(_cdepth(a) for a in args) == d - 1:
                    new.append(t)
        levels.append(new)
    return [t for lvl in levels for t in lvl]


def _cdepth(t):
    if isinstance(t, ConApp):
        return 1 + max((_cdepth(a) for a in t.args), default=0)
    return 0


class _Guesses:
    """Memoized extra-variable instantiation domains for one program."""

    def __init__(self, program: Program, depth: int):
        self.program = program
        self.depth = depth
        self._cache = {}

    def get(self, partial: bool) -> list:
        if partial not in self._cache:
            self._cache[partial] = cterms(self.program.constructors, self.depth, partial)
        return self._cache[partial]


def _extra_assignments(rule, guesses, partial):
    extra = sorted(rule.extra_vars)
    if not extra:
        yield {}
        return
    domain = guesses.get(partial)
    for values in product(domain, repeat=len(extra)):
        yield dict(zip(extra, values))


# --------------------------------------------------------- term rewriting

def trs_step(p: Program, e: Expr, extra_var_depth: int = 2) -> list[Step]:
    """All one-step ordinary rewrites of a let-free total expression."""
    if has_let(e):
        raise LetInInput(f"let in input {show(e)}")
    if has_bottom(e):
        raise BottomInInput(f"bottom in input {show(e)}")
    guesses = _Guesses(p, extra_var_depth)
    out = []
    for pos, sub, _ in positions(e):
        if not isinstance(sub, FunApp):
            continue
        for rule in p.rules_for(sub.name):
            theta = match_all(rule.patterns, sub.args)
            if theta is None:
                continue
            if has_let(rule.rhs):
                raise LetInInput(f"rule {rule} has a let in its right-hand side")
            for extra in _extra_assignments(rule, guesses, False):
                binding = {**theta, **extra}
                result = replace_at(e, pos, apply_subst(rule.rhs, binding))
                out.append(Step("TRS", "ProgramRule", pos, result, binding, rule.index, bool(extra)))
    return sorted(out, key=step_key)


# --------------------------------------------------- bottom-based relation

def bot_step(p: Program, e: Expr, extra_var_depth: int = 2, calls_only: bool = False) -> list[Step]:
    """(B^rw) and (OR^rw) steps of a let-free expression.

    With ``calls_only`` the (B^rw) steps are restricted to function calls.
    """
    if has_let(e):
        raise LetInInput(f"let in input {show(e)}")
    guesses = _Guesses(p, extra_var_depth)
    out = []
    for pos, sub, _ in positions(e):
        if isinstance(sub, Bottom):
            continue
        if not calls_only or isinstance(sub, FunApp):
            out.append(Step("Bot", "Brw", pos, replace_at(e, pos, BOT)))
        if not isinstance(sub, FunApp) or not all(is_cterm(a, partial=True) for a in sub.args):
            continue
        for rule in p.rules_for(sub.name):
            theta = match_all(rule.patterns, sub.args)
            if theta is None:
                continue
            if has_let(rule.rhs):
                raise LetInInput(f"rule {rule} has a let in its right-hand side")
            for extra in _extra_assignments(rule, guesses, True):
                binding = {**theta, **extra}
                result = replace_at(e, pos, apply_subst(rule.rhs, binding))
                out.append(Step("Bot", "ORrw", pos, result, binding, rule.index, bool(extra)))
    return sorted(out, key=step_key)


# ---------------------------------------------------------- let-rewriting

STRUCTURAL = ("LetIn", "Bind", "Elim", "Flat")


def _structural_candidates(e: Expr):
    """(tag, position) pairs for every applicable non-Fapp rule."""
    for pos, sub, _ in positions(e):
        match sub:
            case ConApp(_, args) | FunApp(_, args):
                for i, a in enumerate(args, 1):
                    if isinstance(a, (FunApp, Let)):
                        yield "LetIn", pos + (i,)
            case Let(x, d, b):
                if is_cterm(d):
                    yield "Bind", pos
                fb = free_vars(b)
                if x not in fb:
                    yield "Elim", pos
                if isinstance(d, Let) and d.var not in fb:
                    yield "Flat", pos


def apply_rule(p: Program | None, e: Expr, tag: str, pos: tuple,
               rule: int | None = None, binding: dict | None = None) -> Expr:
    """Apply one let-rewriting rule at ``pos``, checking every side condition.

    For Fapp the parameter passing is recomputed by matching and must agree
    with ``binding`` on pattern variables; extra variables are taken from
    ``binding``.  The result is not canonicalized.  For LetIn ``pos``
    addresses the extracted argument.
    """
    try:
        sub, bound = subexpr_at(e, pos)
    except LetRwError as exc:
        raise ReplayMismatch(str(exc)) from exc
    match tag:
        case "Fapp":
            if not isinstance(sub, FunApp) or not all(is_cterm(a) for a in sub.args):
                raise ReplayMismatch(f"Fapp at {show_position(pos)}: {show(sub)} is not f(t1..tn)")
            r = p.rules[rule]
            if r.head != sub.name:
                raise ReplayMismatch(f"rule {rule} does not define {sub.name}")
            theta = match_all(r.patterns, sub.args)
            if theta is None:
                raise ReplayMismatch(f"rule {rule} does not match {show(sub)}")
            binding = binding or {}
            for v, t in theta.items():
                if v in binding and not alpha_eq(binding[v], t):
                    raise ReplayMismatch(f"pattern variable {v} bound to {show(t)}, expected {show(binding[v])}")
            extra = {}
            for v in r.extra_vars:
                if v not in binding:
                    raise ReplayMismatch(f"no value for extra variable {v}")
                if not is_cterm(binding[v]):
                    raise ReplayMismatch(f"extra variable {v} bound to non c-term {show(binding[v])}")
                extra[v] = binding[v]
            if vran(extra) & bound:
                raise ReplayMismatch(f"extra variables capture bound variables at {show_position(pos)}")
            return replace_at(e, pos, apply_subst(r.rhs, {**theta, **extra}))
        case "LetIn":
            if not pos:
                raise ReplayMismatch("LetIn needs an argument position")
            parent, _ = subexpr_at(e, pos[:-1])
            if not isinstance(parent, (ConApp, FunApp)) or not isinstance(sub, (FunApp, Let)):
                raise ReplayMismatch(f"LetIn not applicable at {show_position(pos)}")
            x = Fresh("N", all_vars(e)).name()
            args = list(parent.args)
            args[pos[-1] - 1] = Var(x)
            return replace_at(e, pos[:-1], Let(x, sub, rebuild(parent, args)))
        case "Bind":
            if not isinstance(sub, Let) or not is_cterm(sub.definiens):
                raise ReplayMismatch(f"Bind not applicable at {show_position(pos)}")
            return replace_at(e, pos, apply_subst(sub.body, {sub.var: sub.definiens}))
        case "Elim":
            if not isinstance(sub, Let) or sub.var in free_vars(sub.body):
                raise ReplayMismatch(f"Elim not applicable at {show_position(pos)}")
            return replace_at(e, pos, sub.body)
        case "Flat":
            if (not isinstance(sub, Let) or not isinstance(sub.definiens, Let)
                    or sub.definiens.var in free_vars(sub.body)):
                raise ReplayMismatch(f"Flat not applicable at {show_position(pos)}")
            inner = sub.definiens
            return replace_at(e, pos, Let(inner.var, inner.definiens, Let(sub.var, inner.body, sub.body)))
    raise ReplayMismatch(f"unknown rule tag {tag}")


def _fapp_candidates(p: Program, e: Expr, guesses):
    for pos, sub, bound in positions(e):
        if not isinstance(sub, FunApp) or not all(is_cterm(a) for a in sub.args):
            continue
        for rule in p.rules_for(sub.name):
            theta = match_all(rule.patterns, sub.args)
            if theta is None:
                continue
            for extra in _extra_assignments(rule, guesses, False):
                if vran(extra) & bound:
                    continue
                binding = {**theta, **extra}
                yield pos, rule, binding, bool(extra)


def let_step(p: Program, e: Expr, extra_var_depth: int = 2, fapp: bool = True) -> list[Step]:
    """All let-rewriting successors, canonicalized and deterministically ordered."""
    if has_bottom(e):
        raise BottomInInput(f"bottom in input {show(e)}")
    out = []
    if fapp:
        guesses = _Guesses(p, extra_var_depth)
        for pos, rule, binding, guessed in _fapp_candidates(p, e, guesses):
            result = replace_at(e, pos, apply_subst(rule.rhs, binding))
            out.append(Step("Let", "Fapp", pos, alpha_canonical(result), binding, rule.index, guessed))
    for tag, pos in _structural_candidates(e):
        out.append(Step("Let", tag, pos, alpha_canonical(apply_rule(p, e, tag, pos))))
    return sorted(out, key=step_key)


# ------------------------------------------------------------------- lnf

def lnf_measure(e: Expr) -> tuple:
    """Lexicographic termination measure of the non-Fapp rules.

    k1 weighs each function application or let sitting directly under an
    application by 2 ** (number of application ancestors); k2 counts lets;
    k3 sums, over lets, the number of enclosing definientia.
    """
    k1 = k2 = k3 = 0
    stack = [(e, False, 0, 0)]
    while stack:
        node, under_app, apps, defs = stack.pop()
        match node:
            case ConApp(_, args) | FunApp(_, args):
                if under_app and isinstance(node, FunApp):
                    k1 += 2 ** apps
                for a in args:
                    stack.append((a, True, apps + 1, defs))
            case Let(_, d, b):
                if under_app:
                    k1 += 2 ** apps
                k2 += 1
                k3 += defs
                stack.append((d, False, apps, defs + 1))
                stack.append((b, False, apps, defs))
    return k1, k2, k3


def lnf_trace(e: Expr) -> Trace:
    trace = Trace(alpha_canonical(e))
    cur = trace.source
    measure = lnf_measure(cur)
    while True:
        steps = let_step(None, cur, fapp=False)
        if not steps:
            return trace
        step = steps[0]
        new_measure = lnf_measure(step.result)
        assert new_measure < measure, (show(cur), step.tag, measure, new_measure)
        trace.steps.append(step)
        cur, measure = step.result, new_measure


def lnf(e: Expr) -> Expr:
    """Normal form under every let-rewriting rule except Fapp."""
    return lnf_trace(e).target


def is_peeled(e: Expr) -> bool:
    """Shape ``let X1 = f1(ts) in ... in body`` with body a variable or h(ts)."""
    while isinstance(e, Let):
        d = e.definiens
        if not isinstance(d, FunApp) or not all(is_cterm(a) for a in d.args):
            return False
        e = e.body
    if isinstance(e, Var):
        return True
    return isinstance(e, (ConApp, FunApp)) and all(is_cterm(a) for a in e.args)


# ----------------------------------------------------------- derived rules

def derived_step(p: Program | None, e: Expr, which: str) -> list[Step]:
    """CLetIn, Dist or Bub steps; none of them is part of let_step."""
    if has_bottom(e):
        raise BottomInInput(f"bottom in input {show(e)}")
    out = []
    for pos, sub, bound in positions(e):
        if not pos:
            continue
        match which:
            case "CLetIn":
                if isinstance(sub, Var) or free_vars(sub) & bound:
                    continue
                x = Fresh("N", all_vars(e)).name()
                result = Let(x, sub, replace_at(e, pos, Var(x)))
            case "Dist":
                if not isinstance(sub, Let) or free_vars(sub.definiens) & bound:
                    continue
                if sub.var in free_vars(replace_at(e, pos, BOT)):
                    continue
                result = Let(sub.var, sub.definiens, replace_at(e, pos, sub.body))
            case "Bub":
                if not (isinstance(sub, FunApp) and sub.name == CHOICE and len(sub.args) == 2):
                    continue
                left, right = sub.args
                result = FunApp(CHOICE, (replace_at(e, pos, left), replace_at(e, pos, right)))
            case _:
                raise ValueError(f"unknown derived rule {which}")
        out.append(Step("Let", which, pos, alpha_canonical(result)))
    return sorted(out, key=step_key)


# ------------------------------------------------------------------ replay

def replay(p: Program, trace: Trace, theta: dict) -> Trace:
    """Instantiate every state of a let-rewriting trace and re-derive it."""
    if not all(is_cterm(v) for v in theta.values()):
        raise ValueError("replay needs a total c-substitution")
    cur = apply_subst(trace.source, theta)
    out = Trace(cur)
    for step in trace.steps:
        binding = {k: apply_subst(v, theta) for k, v in step.binding.items()}
        result = apply_rule(p, cur, step.tag, step.position, step.rule, binding)
        expected = apply_subst(step.result, theta)
        if not alpha_eq(result, expected):
            raise ReplayMismatch(
                f"{step.label} at {show_position(step.position)} gave {show(result)}, expected {show(expected)}")
        out.steps.append(Step(step.relation, step.tag, step.position, expected,
                              binding, step.rule, step.guessed))
        cur = expected
    return out


# ---------------------------------------------------------------- searches

@dataclass
class SearchResult:
    values: set
    exhausted: bool
    states: int
    parents: dict = field(default_factory=dict, repr=False)

    def trace_to(self, target: Expr) -> Trace:
        chunks = []
        cur = target
        while self.parents.get(cur) is not None:
            prev, steps = self.parents[cur]
            chunks.append(steps)
            cur = prev
        return Trace(cur, [s for chunk in reversed(chunks) for s in chunk])


def successors_for(mode: str, p: Program, extra_var_depth: int):
    if mode == "let":
        return lambda e: let_step(p, e, extra_var_depth)
    if mode == "trs":
        return lambda e: trs_step(p, e, extra_var_depth)
    if mode == "bot":
        return lambda e: bot_step(p, e, extra_var_depth)
    raise ValueError(f"unknown relation {mode}")


def explore(succ, e: Expr, max_steps: int, is_value=None, max_results: int | None = None,
            target: Expr | None = None, order=None) -> SearchResult:
    """Breadth-first search up to ``max_steps`` levels with a visited set.

    ``order`` may reorder the successor list of each state.
    """
    start = alpha_canonical(e)
    parents = {start: None}
    frontier = [start]
    values = set()
    if is_value is not None and is_value(start):
        values.add(start)
    for _ in range(max_steps):
        if not frontier:
            break
        if target is not None and target in parents:
            break
        if max_results is not None and len(values) >= max_results:
            break
        nxt = []
        for state in frontier:
            steps = succ(state)
            if order is not None:
                steps = order(state, steps)
            for step in steps:
                r = step.result
                if r in parents:
                    continue
                parents[r] = (state, [step])
                nxt.append(r)
                if is_value is not None and is_value(r):
                    values.add(r)
        frontier = nxt
    exhausted = not frontier or all(
        all(s.result in parents for s in succ(state)) for state in frontier)
    return SearchResult(values, exhausted, len(parents), parents)


def lnf_search(p: Program, e: Expr, b: Bounds, is_value=is_cterm, target: Expr | None = None,
               order=None) -> SearchResult:
    """Uniform-cost search over lnf normal forms.

    Every edge is one Fapp step followed by the deterministic lnf
    normalization; its cost is the number of let-rewriting steps it spans,
    and paths are bounded by ``max_steps`` in total.
    """
    first = lnf_trace(e)
    start = first.target
    parents = {start: (alpha_canonical(e), first.steps) if first.steps else None}
    if not first.steps:
        parents[start] = None
    best = {start: len(first.steps)}
    heap = [(len(first.steps), 0, start)]
    seq = 1
    values = set()
    cut = best[start] > b.max_steps
    if cut:
        heap = []
    while heap:
        cost, _, state = heapq.heappop(heap)
        if cost > best[state]:
            continue
        if is_value(state):
            values.add(state)
            if target is not None and state == target:
                break
            if len(values) >= b.max_results:
                break
        steps = [s for s in let_step(p, state, b.extra_var_depth) if s.tag == "Fapp"]
        if order is not None:
            steps = order(state, steps)
        for step in steps:
            tail = lnf_trace(step.result)
            new = tail.target
            c = cost + 1 + len(tail.steps)
            if c > b.max_steps:
                cut = True
                continue
            if new in best and best[new] <= c:
                continue
            best[new] = c
            parents[new] = (state, [step] + tail.steps)
            heapq.heappush(heap, (c, seq, new))
            seq += 1
    exhausted = not cut and not heap
    return SearchResult(values, exhausted, len(best), parents)


def eval_values(p: Program, e: Expr, b: Bounds = Bounds(), order=None,
                strategy: str = "lnf") -> SearchResult:
    """Total c-term values reachable by let-rewriting within the bounds.

    ``strategy="lnf"`` searches lnf normal forms (see ``lnf_search``);
    ``strategy="full"`` is plain breadth-first search over ``let_step``.
    """
    if has_bottom(e):
        raise BottomInInput(f"bottom in input {show(e)}")
    if strategy == "full":
        return explore(successors_for("let", p, b.extra_var_depth), e, b.max_steps,
                       is_value=is_cterm, max_results=b.max_results, order=order)
    return lnf_search(p, e, b, order=order)


def reachable(mode: str, p: Program, e: Expr, target: Expr, max_steps: int,
              extra_var_depth: int = 2) -> Trace | None:
    """Shortest derivation to ``target`` (up to alpha) within ``max_steps``."""
    target = alpha_canonical(target)
    res = explore(successors_for(mode, p, extra_var_depth), e, max_steps, target=target)
    if target not in res.parents:
        return None
    return res.trace_to(target)


def bot_values(p: Program, e: Expr, max_steps: int, extra_var_depth: int = 2) -> SearchResult:
    """Partial c-terms reachable by the bottom-based relation, up to ``approx_le``.

    Only function calls are replaced by bottom, so every reachable partial
    c-term is below some returned value; the reachable set itself is the
    downward closure of ``values``.
    """
    return explore(lambda x: bot_step(p, x, extra_var_depth, calls_only=True), e, max_steps,
                   is_value=lambda x: is_cterm(x, partial=True))


def bot_reach(p: Program, e: Expr, target: Expr, max_steps: int, extra_var_depth: int = 2) -> Trace | None:
    """A bottom-relation derivation of exactly ``target``, or None.

    States whose shell is inconsistent with the target are pruned; a
    value above the target is cut down by explicit (B^rw) steps.
    """
    def succ(x):
        return [s for s in bot_step(p, x, extra_var_depth, calls_only=True)
                if lub(shell(s.result), target) is not None]

    reached = None
    start = alpha_canonical(e)
    parents = {start: None}
    frontier = [start]
    for _ in range(max_steps + 1):
        reached = next((x for x in frontier if is_cterm(x, partial=True) and approx_le(target, x)), None)
        if reached is not None or not frontier:
            break
        nxt = []
        for state in frontier:
            for step in succ(state):
                if step.result not in parents:
                    parents[step.result] = (state, [step])
                    nxt.append(step.result)
        frontier = nxt
    if reached is None:
        return None
    trace = SearchResult(set(), False, len(parents), parents).trace_to(reached)
    cur = reached
    for pos in _cut_positions(cur, target):
        cur = replace_at(cur, pos, BOT)
        trace.steps.append(Step("Bot", "Brw", pos, cur))
    return trace if len(trace.steps) <= max_steps else None


def _cut_positions(big: Expr, small: Expr, prefix=()):
    """Outermost positions where ``small`` has bottom and ``big`` has not."""
    if isinstance(small, Bottom):
        return [] if isinstance(big, Bottom) else [prefix]
    if isinstance(small, ConApp):
        return [q for i, (a, b) in enumerate(zip(big.args, small.args), 1)
                for q in _cut_positions(a, b, prefix + (i,))]
    return []


def follow_first(p: Program, e: Expr, max_steps: int = 100, extra_var_depth: int = 2) -> Trace:
    """Always take the least successor in the deterministic step order."""
    trace = Trace(alpha_canonical(e))
    cur = trace.source
    for _ in range(max_steps):
        steps = let_step(p, cur, extra_var_depth)
        if not steps:
            break
        trace.steps.append(steps[0])
        cur = steps[0].result
    return trace
