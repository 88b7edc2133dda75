"""Bundled example programs with their reference queries."""
from __future__ import annotations

from dataclasses import dataclass
from importlib.resources import files

from ..program import Program, parse_program, parse_query


@dataclass(frozen=True)
class Example:
    name: str
    prelude_choice: bool
    queries: tuple   # ground queries for evaluation and denotation
    goals: tuple = ()  # queries with free variables for narrowing

    def text(self) -> str:
        return files(__name__).joinpath(f"{self.name}.fl").read_text(encoding="utf-8")

    def program(self) -> Program:
        return parse_program(self.text(), prelude_choice=self.prelude_choice)

    def exprs(self) -> list:
        """(program, query) pairs; queries may mention new constructors."""
        p = self.program()
        return [parse_query(q, p) for q in self.queries]

    def goal_exprs(self) -> list:
        p = self.program()
        return [parse_query(q, p) for q in self.goals]


EXAMPLES = {
    e.name: e for e in [
        Example("coin", False, ("coin", "heads(repeat(coin))", "heads(cons(coin, cons(coin, repeat(0))))"),
                ("heads(cons(X, cons(Y, Z)))",)),
        Example("double", False, ("f(coin)", "coin", "let X = coin in c(X, X)"), ("f(X)",)),
        Example("lazy", False, ("f(loop)", "f(0)"), ("f(X)",)),
        Example("peel", False, ("g(s(loop))", "g(s(s(loop)))"), ("g(X)",)),
        Example("nonconf", False, ("c(f, g)",)),
        Example("letf", False, ("let X = 0 in f(X)", "f(0)", "let X = 1 in f(X)"), ("f(X)",)),
        Example("even", False, ("even(coin)", "even(s(0))", "eq(plus(coin, coin), s(0))"),
                ("even(coin)", "plus(X, s(0))")),
        Example("leq", False, ("leq(0, f(0))", "leq(s(0), f(0))"), ("leq(X, f(Y))", "leq(X, s(0))")),
        Example("leqs", False, ("leq(0, f(0))", "leq(s(0), f(0))"), ("leq(X, f(Y))",)),
        Example("det", False, ("f", "loop"), ()),
        Example("bub", True, ("let X = true ? false in c(not(X), not(X))", "pair(0 ? 1)", "pair(coin)"),
                ("pair(X ? Y)",)),
        Example("replace", False, ("h(f(a))", "h(c(g))"), ("h(X)",)),
        Example("extra", False, ("let X = loop in f",), ()),
    ]
}


def load(name: str) -> Example:
    return EXAMPLES[name]
