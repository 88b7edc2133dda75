import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from letrw.checks import narrowing_covers
from letrw.corpus import EXAMPLES
from letrw.generators import random_csubst, random_expr, random_program
from letrw.narrowing import narrow_step, solve, verify_soundness
from letrw.program import parse_query
from letrw.rewrite import Bounds, BottomInInput, eval_values
from letrw.terms import alpha_eq, apply_subst, free_vars, show, subexpr_at

EVEN = EXAMPLES["even"].program()
LEQ = EXAMPLES["leq"].program()


def q(text, p, partial=False):
    return parse_query(text, p, partial=partial)


def test_narrow_step_on_plus():
    p, e = q("let U = plus(Y,Y) in let V = eq(U,0) in if(V,true)", EVEN)
    steps = narrow_step(p, e)
    first = [n for n in steps if n.theta == {"Y": parse_query("0", p)[1]}]
    assert len(first) == 1
    assert first[0].step.tag == "Narr" and first[0].step.position == ("d",)
    assert alpha_eq(first[0].step.result, q("let U = 0 in let V = eq(U,0) in if(V,true)", p)[1])


def test_narrow_step_never_binds_let_bound_variables():
    p, e = q("let U = plus(Y,Y) in let V = eq(U,0) in if(V,true)", EVEN)
    for n in narrow_step(p, e):
        _, bound = subexpr_at(e, n.step.position)
        assert not (set(n.theta) & bound)
        assert "V" not in n.theta and "U" not in n.theta
    assert all(n.step.position != ("b", "b") for n in narrow_step(p, e))


def test_narrow_step_even_coin_starts_with_letin():
    p, e = q("even(coin)", EVEN)
    steps = narrow_step(p, e)
    letin = [n for n in steps if n.step.tag == "LetIn"]
    assert len(letin) == 1 and letin[0].theta == {}
    assert alpha_eq(letin[0].step.result, q("let X = coin in even(X)", p)[1])


def test_narrow_step_rejects_bottom():
    p, e = q("even(_|_)", EVEN, partial=True)
    with pytest.raises(BottomInInput):
        narrow_step(p, e)


def test_solve_even_coin():
    p, e = q("even(coin)", EVEN)
    answers = list(solve(p, e))
    assert [str(a) for a in answers] == ["{} value: true"]
    assert verify_soundness(p, answers[0], e)


def test_solve_leq_three_answers():
    p, e = q("leq(X, f(Y))", LEQ)
    sols = solve(p, e)
    got = [str(a) for a in sols]
    assert sorted(got) == sorted(["{X -> 0} value: true", "{X -> 0, Y -> 0} value: true",
                                  "{X -> s(_0), Y -> 0} value: false"])
    assert sols.exhausted
    assert all(verify_soundness(p, a, e) for a in solve(p, e))


def test_solve_subsumption_flag():
    p, e = q("leq(X, f(Y))", LEQ)
    got = sorted(str(a) for a in solve(p, e, subsume=True))
    assert got == ["{X -> 0} value: true", "{X -> s(_0), Y -> 0} value: false"]


def test_solve_constant():
    p, e = q("0", LEQ)
    sols = solve(p, e)
    assert [str(a) for a in sols] == ["{} value: 0"]
    assert sols.exhausted


def test_solve_respects_max_results():
    p, e = q("leq(X, f(Y))", LEQ)
    assert len(list(solve(p, e, Bounds(max_results=1)))) == 1


def test_answers_are_restricted_to_query_variables():
    p, e = q("leq(X, f(Y))", LEQ)
    for a in solve(p, e):
        assert set(a.substitution) <= {"X", "Y"}


@pytest.mark.parametrize("name", sorted(EXAMPLES))
def test_soundness_on_corpus(name):
    ex = EXAMPLES[name]
    for p, e in ex.exprs() + ex.goal_exprs():
        for a in solve(p, e, Bounds(max_steps=30, max_results=50)):
            assert verify_soundness(p, a, e)


def _sample(seed):
    rng = random.Random(seed)
    p = random_program(rng, functions=3)
    e = random_expr(rng, p, 3, variables=("X", "Y"), allow_let=True)
    while not free_vars(e):
        e = random_expr(rng, p, 3, variables=("X", "Y"), allow_let=True)
    theta = random_csubst(rng, p, sorted(free_vars(e)), 2)
    return p, e, theta


@settings(max_examples=40)
@given(st.integers(0, 10**9))
def test_completeness_samples(seed):
    p, e, theta = _sample(seed)
    b = Bounds(max_steps=20)
    res = eval_values(p, apply_subst(e, theta), b)
    for t in sorted(res.values, key=show)[:3]:
        assert narrowing_covers(p, e, theta, t, b), f"{show(e)} {theta} {show(t)}"


@settings(max_examples=40)
@given(st.integers(0, 10**9))
def test_emitted_answers_are_sound_and_projected(seed):
    p, e, _ = _sample(seed)
    b = Bounds(max_steps=15, max_results=20)
    for a in solve(p, e, b):
        assert verify_soundness(p, a, e)
        assert set(a.substitution) <= free_vars(e)
