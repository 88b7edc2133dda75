"""Let-narrowing: one-step relation, goal solving and soundness replay."""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .program import Program
from .rewrite import (
    Bounds, BottomInInput, ReplayMismatch, Step, Trace, apply_rule, let_step, lnf_trace, step_key,
)
from .terms import (
    ConApp, Expr, FunApp, Let, Var, alpha_canonical, alpha_eq, apply_subst, compose, free_vars,
    has_bottom, is_cterm, positions, replace_at, restrict, show, vran,
)
from .unify import instance_of, mgu, rename_term


def fresh_variant(rule, counter: int):
    """Rename the variables of a rule to ``_V<n>`` names from ``counter`` on."""
    mapping = {}
    for v in sorted(rule.variables):
        mapping[v] = f"_V{counter}"
        counter += 1
    patterns = tuple(rename_term(pt, mapping) for pt in rule.patterns)
    rhs = apply_subst(rule.rhs, {k: Var(v) for k, v in mapping.items()})
    return patterns, rhs, mapping, counter


@dataclass(frozen=True)
class NarrowStep:
    theta: dict
    step: Step
    counter: int


def narrow_step(p: Program, e: Expr, counter: int = 0) -> list[NarrowStep]:
    """All let-narrowing successors of ``e``.

    Structural rules are lifted with the empty substitution.  A narrowing
    step unifies ``f(t1..tn)`` with a fresh variant of each rule for ``f``;
    candidate unifiers that bind a let-bound variable visible at the redex,
    or that carry one into the range outside the pattern variables, are
    discarded.  ``theta`` is the unifier restricted to the free variables
    of ``e``; the step binding maps the original rule variables.
    """
    if has_bottom(e):
        raise BottomInInput(f"bottom in input {show(e)}")
    out = []
    fe = free_vars(e)
    for pos, sub, bound in positions(e):
        if not isinstance(sub, FunApp) or not all(is_cterm(a) for a in sub.args):
            continue
        for rule in p.rules_for(sub.name):
            patterns, rhs, mapping, nxt = fresh_variant(rule, counter)
            theta = mgu(ConApp("_args", sub.args), ConApp("_args", patterns), protected=bound)
            if theta is None or set(theta) & bound:
                continue
            pattern_vars = {mapping[v] for v in rule.pattern_vars}
            outside = {k: v for k, v in theta.items() if k not in pattern_vars}
            if vran(outside) & bound:
                continue
            replaced = replace_at(e, pos, apply_subst(rhs, theta))
            visible = restrict(theta, fe)
            result = alpha_canonical(apply_subst(replaced, visible))
            binding = {v: theta.get(mapping[v], Var(mapping[v])) for v in sorted(rule.variables)}
            step = Step("Narrow", "Narr", pos, result, binding, rule.index, unifier=visible)
            out.append(NarrowStep(visible, step, nxt))
    for step in let_step(p, e, fapp=False):
        out.append(NarrowStep({}, step, counter))
    return sorted(out, key=lambda n: step_key(n.step))


@dataclass
class Answer:
    substitution: dict
    value: Expr
    trace: Trace = field(repr=False, compare=False)
    query: Expr = field(repr=False, compare=False, default=None)

    def canonical(self):
        """Rename non-query variables to ``_0, _1, ...`` by first occurrence."""
        return canonical_answer(self.query, self.substitution, self.value)

    def __str__(self) -> str:
        sigma, value = self.canonical()
        inner = ", ".join(f"{k} -> {show(v)}" for k, v in sorted(sigma.items()))
        return "{" + inner + "} value: " + show(value)


def canonical_answer(query, sigma, value):
    keep = free_vars(query) if query is not None else frozenset()
    mapping: dict[str, str] = {}

    def visit(t):
        match t:
            case Var(name):
                if name not in keep and name not in mapping:
                    mapping[name] = f"_{len(mapping)}"
            case ConApp(_, args) | FunApp(_, args):
                for a in args:
                    visit(a)

    for k in sorted(sigma):
        visit(sigma[k])
    visit(value)
    ren = {k: Var(v) for k, v in mapping.items()}
    return ({k: apply_subst(v, ren) for k, v in sigma.items()}, apply_subst(value, ren))


def _state_key(query_vars, expr, sigma):
    """Identify states up to renaming of non-query free variables."""
    mapping: dict[str, Var] = {}

    def visit(t, bound):
        match t:
            case Var(name):
                if name not in bound and name not in query_vars and name not in mapping:
                    mapping[name] = Var(f"_F{len(mapping)}")
            case ConApp(_, args) | FunApp(_, args):
                for a in args:
                    visit(a, bound)
            case Let(x, d, b):
                visit(d, bound)
                visit(b, bound | {x})

    visit(expr, frozenset())
    for k in sorted(sigma):
        visit(sigma[k], frozenset())
    return (apply_subst(expr, mapping),
            tuple(sorted((k, apply_subst(v, mapping)) for k, v in sigma.items())))


class Solutions:
    """Lazy stream of answers; ``exhausted`` is set once iteration ends."""

    def __init__(self, p: Program, e: Expr, b: Bounds, subsume: bool = False):
        if has_bottom(e):
            raise BottomInInput(f"bottom in input {show(e)}")
        self.program = p
        self.query = e
        self.bounds = b
        self.subsume = subsume
        self.exhausted = False
        self.answers: list[Answer] = []

    def __iter__(self):
        p, b, e = self.program, self.bounds, self.query
        qvars = free_vars(e)
        first = lnf_trace(e)
        start = first.target
        steps0 = [s for s in first.steps]
        heap = [(len(steps0), 0, start, {}, 0, steps0)]
        best = {_state_key(qvars, start, {}): len(steps0)}
        seen_answers = set()
        seq = 1
        cut = len(steps0) > b.max_steps
        if cut:
            heap = []
        while heap:
            cost, _, state, sigma, counter, steps = heapq.heappop(heap)
            if best.get(_state_key(qvars, state, sigma), cost) < cost:
                continue
            if is_cterm(state):
                ans = Answer(restrict(sigma, qvars), state, Trace(alpha_canonical(e), steps), e)
                key = _answer_key(ans)
                if key in seen_answers:
                    continue
                seen_answers.add(key)
                if self.subsume and any(_subsumes(old, ans) for old in self.answers):
                    continue
                self.answers.append(ans)
                yield ans
                if len(self.answers) >= b.max_results:
                    self.exhausted = False
                    return
                continue
            for ns in narrow_step(p, state, counter):
                tail = lnf_trace(ns.step.result)
                new = tail.target
                c = cost + 1 + len(tail.steps)
                if c > b.max_steps:
                    cut = True
                    continue
                new_sigma = {k: apply_subst(v, ns.theta) for k, v in sigma.items()}
                for k, v in ns.theta.items():
                    if k in qvars and k not in new_sigma:
                        new_sigma[k] = v
                key = _state_key(qvars, new, new_sigma)
                if key in best and best[key] <= c:
                    continue
                best[key] = c
                heapq.heappush(heap, (c, seq, new, new_sigma, ns.counter, steps + [ns.step] + tail.steps))
                seq += 1
        self.exhausted = not cut


def _answer_key(a: Answer):
    sigma, value = a.canonical()
    return tuple(sorted(sigma.items(), key=lambda kv: kv[0])), value


def _subsumes(general: Answer, specific: Answer) -> bool:
    names = sorted(set(general.substitution) | set(specific.substitution))
    g = [general.substitution.get(n, Var(n)) for n in names] + [general.value]
    s = [specific.substitution.get(n, Var(n)) for n in names] + [specific.value]
    return instance_of(g, s) is not None


def solve(p: Program, e: Expr, b: Bounds = Bounds(), subsume: bool = False) -> Solutions:
    return Solutions(p, e, b, subsume)


def verify_soundness(p: Program, a: Answer, e: Expr) -> bool:
    """Rebuild the let-rewriting derivation of ``a.value`` from ``e`` instantiated.

    Every state of the narrowing trace is instantiated by the composition
    of all later unifiers; narrowing steps become Fapp steps with the
    instantiated parameter passing and the structural steps are re-applied
    unchanged.  Raises ``ReplayMismatch`` on any discrepancy.
    """
    steps = a.trace.steps
    states = a.trace.states()
    if not alpha_eq(states[0], e):
        raise ReplayMismatch("trace does not start at the query")
    # suffix[i] is the composition of the unifiers of steps i+1..n
    suffix = [dict() for _ in range(len(steps) + 1)]
    for i in range(len(steps) - 1, -1, -1):
        st = steps[i]
        if st.tag == "Narr":
            suffix[i] = compose(st.unifier, suffix[i + 1])
        else:
            suffix[i] = suffix[i + 1]
    start = apply_subst(e, restrict(suffix[0], free_vars(e)))
    if not alpha_eq(start, apply_subst(e, a.substitution)):
        raise ReplayMismatch("answer substitution disagrees with the composed unifiers")
    cur = start
    for i, st in enumerate(steps):
        rho = suffix[i + 1]
        expected = apply_subst(states[i + 1], restrict(rho, free_vars(states[i + 1])))
        if st.tag == "Narr":
            binding = {v: apply_subst(t, rho) for v, t in st.binding.items()}
            result = apply_rule(p, cur, "Fapp", st.position, st.rule, binding)
        else:
            result = apply_rule(p, cur, st.tag, st.position)
        if not alpha_eq(result, expected):
            raise ReplayMismatch(f"step {i + 1} ({st.label}) gave {show(result)}, expected {show(expected)}")
        cur = alpha_canonical(expected)
    if not alpha_eq(cur, a.value):
        raise ReplayMismatch("replay does not end at the answer value")
    return True
