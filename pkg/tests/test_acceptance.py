"""End-to-end acceptance checks, one per criterion.

Each check returns ``(passed, detail)``; the test prints a single
``PASS``/``FAIL`` line for it.  Running this file directly prints the
same lines without pytest.
"""
import random
import sys
import time
from itertools import product
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import brute_mgu_check, chain_terms, peeled_shape  # noqa: E402
from letrw.checks import (  # noqa: E402
    check_lnf_shells, check_peeling, check_shell_growth, denotation_preserved, narrowing_covers,
    narrowing_sound, random_let_trace, runtime_bubbling_counterexample, truncate,
)
from letrw.corpus import EXAMPLES  # noqa: E402
from letrw.generators import random_csubst, random_expr, random_program  # noqa: E402
from letrw.narrowing import solve  # noqa: E402
from letrw.program import parse_program, parse_query  # noqa: E402
from letrw.rewrite import (  # noqa: E402
    Bounds, bot_reach, bot_values, cterms, derived_step, eval_values, lnf, reachable,
)
from letrw.semantics import Oracle, denote, is_directed  # noqa: E402
from letrw.terms import (  # noqa: E402
    ConApp, Var, alpha_eq, apply_subst, depth, free_vars, show,
)
from letrw.transforms import bubble_all, eliminate_lets, trs_image  # noqa: E402
from letrw.unify import mgu  # noqa: E402

COIN = EXAMPLES["coin"].program()


def q(text, p=COIN):
    return parse_query(text, p)[1]


def shown(terms):
    return {show(t) for t in terms}


# ---------------------------------------------------------------- criteria

def call_time_values():
    res = eval_values(COIN, q("heads(repeat(coin))"), Bounds(max_steps=50))
    got = shown(res.values)
    return got == {"pair(0,0)", "pair(1,1)"}, f"values {sorted(got)}"


def runtime_separation():
    tr = reachable("trs", COIN, q("heads(repeat(coin))"), q("pair(0,1)"), 6)
    return tr is not None, f"reached in {len(tr)} steps" if tr is not None else "not reached"


def denotation_table():
    d = denote(COIN, q("heads(repeat(coin))"), Bounds(max_value_depth=2))
    expected = {"_|_", "pair(_|_,_|_)", "pair(0,_|_)", "pair(_|_,0)", "pair(1,_|_)", "pair(_|_,1)",
                "pair(0,0)", "pair(1,1)"}
    return shown(d.terms) == expected and d.exact, f"{len(d.terms)} terms, exact={d.exact}"


def call_time_separation():
    p = parse_program("f(X) -> c(X,X). coin -> 0. coin -> 1.")
    p, e = parse_query("f(coin)", p)
    d = shown(denote(p, e).terms)
    excluded = "c(0,1)" not in d and "c(1,0)" not in d
    trs = reachable("trs", p, e, q("c(0,1)", p), 6) is not None
    return excluded and trs, f"excluded={excluded} trs_reaches={trs}"


def bot_equivalence():
    rng = random.Random(5)
    b = Bounds(max_steps=12, max_value_depth=2, extra_var_depth=1)
    checked = 0
    while checked < 30:
        p = random_program(rng, functions=3)
        e = random_expr(rng, p, 3, allow_let=False)
        den = denote(p, e, b)
        if not den.exact:
            continue
        t = rng.choice(den.sorted())
        if bot_reach(p, e, t, 12, b.extra_var_depth) is None:
            return False, f"{show(e)}: {show(t)} denoted but not reached"
        for v in bot_values(p, e, 12, b.extra_var_depth).values:
            if truncate(v, b.max_value_depth) not in den.terms:
                return False, f"{show(e)}: {show(v)} reached but not denoted"
        checked += 1
    return True, f"{checked} triples"


def peeling():
    rng = random.Random(6)
    for i in range(500):
        p = random_program(rng, functions=3)
        e = random_expr(rng, p, 4, variables=("X",), allow_let=True)
        err = check_peeling(e)
        if err is None and not peeled_shape(lnf(e)):
            err = f"{show(lnf(e))} fails the reference shape check"
        if err:
            return False, f"expression {i}: {err}"
    return True, "500 expressions"


def shell_monotonicity():
    rng = random.Random(7)
    for i in range(200):
        p = random_program(rng, functions=3)
        e = random_expr(rng, p, 4, allow_let=True, min_size=4)
        err = check_shell_growth(p, random_let_trace(p, e, rng, 20)) or check_lnf_shells(e)
        if err:
            return False, f"trace {i}: {err}"
    return True, "200 traces"


def total_value_equivalence():
    b = Bounds(max_steps=30)
    programs = sorted(EXAMPLES)
    exhausted = skipped = 0
    for name in programs:
        for p, e in EXAMPLES[name].exprs():
            res = eval_values(p, e, b)
            if not res.exhausted:
                skipped += 1
                continue
            exhausted += 1
            den = denote(p, e, b)
            for t in cterms(p.constructors, 2):
                if (t in res.values) != (t in den.terms):
                    return False, f"{name}: {show(e)} disagrees on {show(t)}"
    return exhausted > 0, f"{len(programs)} programs, {exhausted} exhausted, {skipped} cut"


def narrowing_answers():
    even = EXAMPLES["even"].program()
    got_even = [str(a) for a in solve(*parse_query("even(coin)", even))]
    leq = EXAMPLES["leq"].program()
    got_leq = sorted(str(a) for a in solve(*parse_query("leq(X, f(Y))", leq)))
    expected = sorted(["{X -> 0} value: true", "{X -> 0, Y -> 0} value: true",
                       "{X -> s(_0), Y -> 0} value: false"])
    ok = got_even == ["{} value: true"] and got_leq == expected
    return ok, f"even {got_even}, leq {got_leq}"


def narrowing_soundness():
    total = 0
    for name in sorted(EXAMPLES):
        ex = EXAMPLES[name]
        for p, e in ex.exprs() + ex.goal_exprs():
            ok, detail, n = narrowing_sound(p, e, Bounds(max_steps=30, max_results=50))
            total += n
            if not ok:
                return False, detail
    return total > 0, f"{total} answers verified"


def narrowing_completeness():
    rng = random.Random(11)
    b = Bounds(max_steps=20)
    checked = 0
    while checked < 30:
        p = random_program(rng, functions=3)
        e = random_expr(rng, p, 3, variables=("X", "Y"), allow_let=True)
        if not free_vars(e):
            continue
        theta = random_csubst(rng, p, sorted(free_vars(e)), 2)
        res = eval_values(p, apply_subst(e, theta), b)
        if not res.values:
            continue
        t = rng.choice(sorted(res.values, key=show))
        if not narrowing_covers(p, e, theta, t, b):
            return False, f"{show(e)} {theta} {show(t)} has no generalizing answer"
        checked += 1
    return True, f"{checked} samples"


def bubbling():
    p = EXAMPLES["bub"].program()
    e = q("let X = true ? false in c(not(X), not(X))", p)
    steps = bubble_all(p, e)
    for r in steps:
        ok, detail = denotation_preserved(p, e, r, Bounds())
        if not ok:
            return False, detail
    before, after = runtime_bubbling_counterexample(p, q("pair(0 ? 1)", p), q("c(0,1)", p))
    ok = bool(steps) and before and bool(after) and not any(r for _, r in after)
    return ok, f"{len(steps)} bubbling steps; c(0,1) before={before} after={[r for _, r in after]}"


def derived_rules():
    rng = random.Random(13)
    b = Bounds(max_steps=12, max_value_depth=2, extra_var_depth=1)
    checked = 0
    counts = {"CLetIn": 0, "Dist": 0}
    while checked < 100:
        p = random_program(rng, functions=3)
        e = random_expr(rng, p, 3, allow_let=True, min_size=3)
        oracle = Oracle(p, b)
        for which in ("CLetIn", "Dist"):
            steps = derived_step(p, e, which)
            if not steps:
                continue
            st = rng.choice(steps)
            ok, detail = denotation_preserved(p, e, st.result, b, oracle)
            if not ok:
                return False, f"{which}: {detail}"
            counts[which] += 1
            checked += 1
    return True, f"{counts['CLetIn']} CLetIn, {counts['Dist']} Dist"


def determinism():
    det = EXAMPLES["det"].program()
    (f_report,) = is_directed(det, [q("f", det)], Bounds())
    (coin_report,) = is_directed(COIN, [q("coin")], Bounds())
    witness = tuple(map(show, coin_report.witness or ()))
    ok = f_report.directed and not coin_report.directed and witness == ("0", "1")
    return ok, f"f directed={f_report.directed}; coin directed={coin_report.directed} witness={witness}"


def trs_soundness():
    rng = random.Random(15)
    for i in range(100):
        p = random_program(rng, functions=4)
        e = random_expr(rng, p, 4, allow_let=True, min_size=6)
        tr = random_let_trace(p, e, rng, 8, extra_var_depth=1)
        image = trs_image(p, tr, extra_var_depth=1)
        if not alpha_eq(image.target, eliminate_lets(tr.target)):
            return False, f"trace {i}: image ends at {show(image.target)}"
    return True, "100 traces"


def mgu_oracle():
    z, x, y = ConApp("z"), Var("X"), Var("Y")
    terms = [t for t in chain_terms([z, x, y], 2) if depth(t) <= 2]
    universe = chain_terms([z, x, y, Var("W")], 3)
    for a, b in product(terms, repeat=2):
        err = brute_mgu_check(a, b, mgu(a, b), ["X", "Y"], universe)
        if err:
            return False, f"{show(a)} =?= {show(b)}: {err}"
    return True, f"{len(terms) ** 2} pairs"


CRITERIA = [
    (1, "call-time value set", call_time_values),
    (2, "run-time separation", runtime_separation),
    (3, "denotation table", denotation_table),
    (4, "call-time versus run-time separation", call_time_separation),
    (5, "bottom relation equivalence", bot_equivalence),
    (6, "peeling and termination", peeling),
    (7, "shell monotonicity", shell_monotonicity),
    (8, "equivalence for total values", total_value_equivalence),
    (9, "narrowing answers", narrowing_answers),
    (10, "narrowing soundness", narrowing_soundness),
    (11, "narrowing completeness", narrowing_completeness),
    (12, "bubbling", bubbling),
    (13, "derived rules", derived_rules),
    (14, "determinism", determinism),
    (15, "term rewriting soundness", trs_soundness),
    (16, "mgu oracle equivalence", mgu_oracle),
]


def report(number, name, check):
    start = time.perf_counter()
    ok, detail = check()
    elapsed = time.perf_counter() - start
    line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({name}): {detail} [{elapsed:.1f}s]"
    return ok, elapsed, line


@pytest.mark.parametrize("number, name, check", CRITERIA, ids=[str(c[0]) for c in CRITERIA])
def test_criterion(number, name, check, capsys):
    ok, elapsed, line = report(number, name, check)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line
    assert elapsed < 60, line


if __name__ == "__main__":
    results = [report(*c) for c in CRITERIA]
    for _, _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _, _ in results) else 1)
