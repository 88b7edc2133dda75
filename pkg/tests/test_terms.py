from itertools import product

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import cterms, exprs
from oracles import bound_vars_ref, free_vars_ref
from letrw.program import parse_program, parse_query
from letrw.rewrite import cterms as enumerate_cterms
from letrw.terms import (
    BOT, ConApp, FunApp, InvalidPosition, Let, Symbol, Var, alpha_canonical, alpha_eq, apply_subst,
    approx_le, bound_vars, free_vars, is_cterm, lub, parse_position, replace_at, shell, show,
    show_position, subexpr_at, vran,
)

SIG = parse_program("""
coin -> 0. coin -> 1.
f(X) -> X. g(X) -> X. h(X) -> X. loop -> loop.
""")


def q(text, partial=False):
    return parse_query(text, SIG, partial=partial)[1]


def v(name):
    return Var(name)


# ------------------------------------------------------------- free / bound

@pytest.mark.parametrize("text, expected", [
    ("X", {"X"}),
    ("let X = f(X) in g(X)", {"X"}),
    ("let X = coin in pair(X,X)", set()),
])
def test_free_vars_examples(text, expected):
    assert free_vars(q(text)) == expected


@pytest.mark.parametrize("text, expected", [
    ("c(X,Y)", set()),
    ("let X = coin in pair(X,X)", {"X"}),
    ("let X = (let Y = a in Y) in X", {"X", "Y"}),
])
def test_bound_vars_examples(text, expected):
    assert bound_vars(q(text)) == expected


@given(exprs())
def test_variable_sets_match_reference(e):
    assert free_vars(e) == free_vars_ref(e)
    assert bound_vars(e) == bound_vars_ref(e)


# ------------------------------------------------------------ substitution

def test_apply_subst_renames_binders():
    e = q("let X = c(X) in let Y = z in d(X,Y)")
    got = apply_subst(e, {"X": ConApp("c", (v("Y"),))})
    assert alpha_eq(got, q("let U = c(c(Y)) in let V = z in d(U,V)"))


def test_apply_subst_on_variable():
    assert apply_subst(v("X"), {"X": ConApp("0")}) == ConApp("0")


@given(exprs(), st.dictionaries(st.sampled_from(("X", "Y", "Z")), cterms(), max_size=3))
def test_apply_subst_never_captures(e, sigma):
    r = apply_subst(e, sigma)
    expected = set()
    for x in free_vars(e):
        expected |= free_vars(sigma[x]) if x in sigma else {x}
    assert free_vars(r) == expected
    c = alpha_canonical(r)
    assert not (free_vars(c) & bound_vars(c))


@given(exprs(variables=("X", "Y", "Z")), exprs(lets=False, variables=("Y", "Z")),
       st.dictionaries(st.sampled_from(("Y", "Z")), cterms(variables=("Y", "Z")), max_size=2))
def test_substitution_lemma(e, e2, theta):
    assume("X" not in theta and "X" not in vran(theta))
    lhs = apply_subst(apply_subst(e, {"X": e2}), theta)
    rhs = apply_subst(apply_subst(e, theta), {"X": apply_subst(e2, theta)})
    assert alpha_eq(lhs, rhs)


# ------------------------------------------------------------------ shells

@pytest.mark.parametrize("text, expected", [
    ("c(let X = 2 in s(X))", "c(s(2))"),
    ("f(0)", "_|_"),
    ("let X = coin in pair(X,0)", "pair(_|_,0)"),
])
def test_shell_examples(text, expected):
    assert show(shell(q(text))) == expected


@given(cterms(partial=True))
def test_shell_of_partial_cterm_is_itself(t):
    assert shell(t) == t


@given(exprs())
def test_shell_is_partial_cterm_with_fewer_variables(e):
    s = shell(e)
    assert is_cterm(s, partial=True)
    assert free_vars(s) <= free_vars(e)


# ------------------------------------------------------------------ orders

@pytest.mark.parametrize("a, b, expected", [
    ("_|_", "pair(0,1)", True),
    ("pair(_|_,0)", "pair(1,0)", True),
    ("pair(0,_|_)", "pair(1,_|_)", False),
])
def test_approx_le_examples(a, b, expected):
    assert approx_le(q(a, True), q(b, True)) is expected


def _universe(constructors, d):
    return enumerate_cterms([Symbol(n, "constructor", a) for n, a in constructors], d, partial=True)


def test_approx_le_is_a_partial_order_depth3():
    # constant leaves count as depth 1: bottom plus s^k applied to z, o or bottom
    terms = _universe((("z", 0), ("o", 0), ("s", 1)), 3)
    assert len(terms) == 10
    for a in terms:
        assert approx_le(a, a)
    for a, b in product(terms, repeat=2):
        if approx_le(a, b) and approx_le(b, a):
            assert alpha_canonical(a) == alpha_canonical(b)
    for a, b, c in product(terms, repeat=3):
        if approx_le(a, b) and approx_le(b, c):
            assert approx_le(a, c)


def test_approx_le_is_a_partial_order_binary_depth3():
    terms = _universe((("z", 0), ("s", 1), ("c", 2)), 3)
    # 1 + 3 + 18 + 486 terms in the four depth levels
    assert len(terms) == 508
    up = {a: [b for b in terms if approx_le(a, b)] for a in terms}
    for a in terms:
        assert a in up[a]
        for b in up[a]:
            if a in up[b]:
                assert a == b
            for c in up[b]:
                assert c in up[a]


def test_approx_le_on_lets_is_up_to_alpha():
    assert approx_le(q("let X = _|_ in c(X)", True), q("let Y = 0 in c(Y)"))
    assert not approx_le(q("let X = 1 in c(X)"), q("let Y = 0 in c(Y)"))


def test_lub():
    assert lub(q("pair(_|_,0)", True), q("pair(1,_|_)", True)) == q("pair(1,0)")
    assert lub(q("0"), q("1")) is None


# -------------------------------------------------------- canonicalization

def test_alpha_canonical_examples():
    assert alpha_canonical(q("let A = coin in A")) == alpha_canonical(q("let B = coin in B"))
    assert alpha_canonical(q("c(X)")) == q("c(X)")
    c = alpha_canonical(q("let X = (let X = a in X) in X"))
    assert c.var != c.definiens.var


@given(exprs())
def test_alpha_canonical_is_idempotent_and_keeps_free_vars(e):
    c = alpha_canonical(e)
    assert alpha_canonical(c) == c
    assert free_vars(c) == free_vars(e)


# -------------------------------------------------------------- positions

def test_subexpr_at_examples():
    e = q("let X = a in f(X)")
    assert subexpr_at(e, ("b", 1)) == (v("X"), {"X"})
    assert subexpr_at(e, ("d",)) == (ConApp("a"), set())
    assert subexpr_at(e, ()) == (e, set())


def test_replace_at_examples():
    assert replace_at(q("f(coin)"), (1,), ConApp("0")) == q("f(0)")
    assert replace_at(q("let X = coin in X"), ("d",), ConApp("0")) == q("let X = 0 in X")
    assert replace_at(q("f(coin)"), (), ConApp("0")) == ConApp("0")


def test_invalid_positions():
    with pytest.raises(InvalidPosition):
        subexpr_at(q("f(coin)"), (2,))
    with pytest.raises(InvalidPosition):
        replace_at(q("f(coin)"), ("b",), ConApp("0"))


def test_position_text_round_trip():
    for p in [(), (1,), ("b", "d", 2)]:
        assert parse_position(show_position(p)) == p
    assert show_position(()) == "root"


def test_binders_and_printing():
    e = Let("X", FunApp("coin"), ConApp("pair", (v("X"), BOT)))
    assert show(e) == "let X = coin in pair(X,_|_)"
