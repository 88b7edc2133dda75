"""Seeded random programs, expressions and substitutions for property checks.

Random programs are stratified: a function only calls functions defined
before it, so every let-free expression has finitely many rewrites.
"""
from __future__ import annotations

import random

from .program import Program, parse_program, pretty_print
from .rewrite import cterms
from .terms import BOT, ConApp, Expr, FunApp, Let, Var, size

CONSTRUCTORS = (("z", 0), ("s", 1), ("c", 2))
VARIABLES = ("X", "Y", "Z")


def random_cterm(rng: random.Random, depth: int, variables=(), partial=False,
                 constructors=CONSTRUCTORS) -> Expr:
    leaves = [n for n, a in constructors if a == 0]
    if depth <= 0 or rng.random() < 0.3:
        pool = [ConApp(n) for n in leaves] + [Var(v) for v in variables]
        if partial:
            pool.append(BOT)
        return rng.choice(pool)
    name, arity = rng.choice(constructors)
    return ConApp(name, tuple(random_cterm(rng, depth - 1, variables, partial, constructors)
                              for _ in range(arity)))


def _linear_pattern(rng, depth, fresh):
    if depth <= 0 or rng.random() < 0.5:
        if rng.random() < 0.7:
            return Var(fresh.pop(0))
        return ConApp("z")
    name, arity = rng.choice(CONSTRUCTORS[1:])
    return ConApp(name, tuple(_linear_pattern(rng, depth - 1, fresh) for _ in range(arity)))


def _rhs(rng, depth, variables, callable_funs, allow_let):
    r = rng.random()
    if depth <= 0 or r < 0.25:
        pool = [ConApp("z")] + [Var(v) for v in variables]
        return rng.choice(pool)
    if callable_funs and r < 0.55:
        name, arity = rng.choice(callable_funs)
        return FunApp(name, tuple(_rhs(rng, depth - 1, variables, callable_funs, allow_let)
                                  for _ in range(arity)))
    if allow_let and r < 0.65:
        x = f"L{rng.randrange(3)}"
        return Let(x, _rhs(rng, depth - 1, variables, callable_funs, allow_let),
                   _rhs(rng, depth - 1, tuple(variables) + (x,), callable_funs, allow_let))
    name, arity = rng.choice(CONSTRUCTORS[1:])
    return ConApp(name, tuple(_rhs(rng, depth - 1, variables, callable_funs, allow_let)
                              for _ in range(arity)))


def random_program(rng: random.Random, functions: int = 3, allow_let: bool = False) -> Program:
    """A stratified left-linear program over ``z/0, s/1, c/2``.

    The first function is a binary choice between constants, so the
    programs are usually non-deterministic.
    """
    lines = ["f0 -> z.", "f0 -> s(z)."]
    defined = [("f0", 0)]
    for i in range(1, functions):
        name, arity = f"f{i}", rng.randrange(0, 3)
        for _ in range(rng.randrange(1, 3)):
            fresh = [f"P{k}" for k in range(8)]
            pats = [_linear_pattern(rng, 1, fresh) for _ in range(arity)]
            used = [v for v in (f"P{k}" for k in range(8)) if v not in fresh]
            rhs = _rhs(rng, 2, used, defined, allow_let)
            head = name if not arity else f"{name}({','.join(map(str, pats))})"
            lines.append(f"{head} -> {rhs}.")
        defined.append((name, arity))
    # every constructor must occur so that the signature is fixed
    lines.append("sig -> c(z, s(z)).")
    return parse_program("\n".join(lines))


def random_expr(rng: random.Random, p: Program, depth: int, variables=(), allow_let: bool = True,
                let_vars=("U", "V", "W"), min_size: int = 1) -> Expr:
    """A random total expression over the signature of ``p``.

    Draws are repeated until the expression has at least ``min_size`` nodes.
    """
    ctrs = [(s.name, s.arity) for s in p.constructors]
    funs = [(s.name, s.arity) for s in p.functions]

    def go(d, scope):
        r = rng.random()
        if d <= 0 or r < 0.2:
            pool = [ConApp(n) for n, a in ctrs if a == 0] + [FunApp(n) for n, a in funs if a == 0]
            pool += [Var(v) for v in scope]
            return rng.choice(pool)
        if allow_let and r < 0.35:
            x = rng.choice(let_vars)
            return Let(x, go(d - 1, scope), go(d - 1, scope + (x,)))
        if funs and (r < 0.7 or not ctrs):
            name, arity = rng.choice(funs)
            return FunApp(name, tuple(go(d - 1, scope) for _ in range(arity)))
        name, arity = rng.choice(ctrs)
        return ConApp(name, tuple(go(d - 1, scope) for _ in range(arity)))

    e = go(depth, tuple(variables))
    while size(e) < min_size:
        e = go(depth, tuple(variables))
    return e


def random_csubst(rng: random.Random, p: Program, names, depth: int = 2, partial: bool = False) -> dict:
    pool = cterms(p.constructors, depth, partial)
    return {n: rng.choice(pool) for n in sorted(names)}


def program_text(p: Program) -> str:
    return pretty_print(p)
