"""Expressions with let-bindings, substitution and the approximation order.

Expressions are immutable trees.  Variables start with an uppercase letter,
symbols with a lowercase letter or a digit.  Names starting with ``_`` are
reserved for machine-generated variables.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

RESERVED = "_"
BODY = "b"
DEF = "d"


class LetRwError(Exception):
    """Base class of all errors raised by the engines."""

    kind = "error"

    def __init__(self, message: str, kind: str | None = None):
        super().__init__(message)
        if kind is not None:
            self.kind = kind


class InvalidPosition(LetRwError):
    kind = "invalid-position"


class Expr:
    __slots__ = ()

    def __str__(self) -> str:
        return show(self)

    def __repr__(self) -> str:
        return f"<{show(self)}>"


@dataclass(frozen=True, slots=True, repr=False)
class Var(Expr):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True, repr=False)
class Bottom(Expr):
    def __str__(self) -> str:
        return "_|_"


BOT = Bottom()


@dataclass(frozen=True, slots=True, repr=False)
class ConApp(Expr):
    name: str
    args: tuple = ()

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True, slots=True, repr=False)
class FunApp(Expr):
    name: str
    args: tuple = ()

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True, slots=True, repr=False)
class Let(Expr):
    var: str
    definiens: Expr
    body: Expr

    def __str__(self) -> str:
        return show(self)


App = (ConApp, FunApp)


@dataclass(frozen=True, slots=True)
class Symbol:
    name: str
    kind: str  # "constructor" or "function"
    arity: int


def con(name: str, *args: Expr) -> ConApp:
    return ConApp(name, tuple(args))


def fun(name: str, *args: Expr) -> FunApp:
    return FunApp(name, tuple(args))


def rebuild(e: Expr, args) -> Expr:
    return type(e)(e.name, tuple(args))


def show(e: Expr) -> str:
    match e:
        case Var(name):
            return name
        case Bottom():
            return "_|_"
        case ConApp(name, args) | FunApp(name, args):
            if not args:
                return name
            return name + "(" + ",".join(show(a) for a in args) + ")"
        case Let(x, d, b):
            return f"let {x} = {show(d)} in {show(b)}"
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------- variables

def free_vars(e: Expr) -> frozenset:
    match e:
        case Var(name):
            return frozenset((name,))
        case Bottom():
            return frozenset()
        case ConApp(_, args) | FunApp(_, args):
            out = frozenset()
            for a in args:
                out |= free_vars(a)
            return out
        case Let(x, d, b):
            return free_vars(d) | (free_vars(b) - {x})
    raise TypeError(e)


def bound_vars(e: Expr) -> frozenset:
    match e:
        case Var() | Bottom():
            return frozenset()
        case ConApp(_, args) | FunApp(_, args):
            out = frozenset()
            for a in args:
                out |= bound_vars(a)
            return out
        case Let(x, d, b):
            return bound_vars(d) | bound_vars(b) | {x}
    raise TypeError(e)


def all_vars(e: Expr) -> frozenset:
    return free_vars(e) | bound_vars(e)


def has_let(e: Expr) -> bool:
    match e:
        case Let():
            return True
        case ConApp(_, args) | FunApp(_, args):
            return any(has_let(a) for a in args)
    return False


def has_bottom(e: Expr) -> bool:
    match e:
        case Bottom():
            return True
        case ConApp(_, args) | FunApp(_, args):
            return any(has_bottom(a) for a in args)
        case Let(_, d, b):
            return has_bottom(d) or has_bottom(b)
    return False


def is_cterm(e: Expr, partial: bool = False) -> bool:
    """Constructor term; ``partial`` admits bottom leaves."""
    match e:
        case Var():
            return True
        case Bottom():
            return partial
        case ConApp(_, args):
            return all(is_cterm(a, partial) for a in args)
    return False


def depth(t: Expr) -> int:
    """Longest constructor path.  Bottom and variables have depth 0."""
    match t:
        case ConApp(_, args):
            return 1 + max((depth(a) for a in args), default=0)
        case FunApp(_, args):
            return max((depth(a) for a in args), default=0)
        case Let(_, d, b):
            return max(depth(d), depth(b))
    return 0


def size(e: Expr) -> int:
    match e:
        case ConApp(_, args) | FunApp(_, args):
            return 1 + sum(size(a) for a in args)
        case Let(_, d, b):
            return 1 + size(d) + size(b)
    return 1


# ------------------------------------------------------------ fresh names

class Fresh:
    """Counter-based generator of reserved names that avoid a given set."""

    def __init__(self, prefix: str = "T", avoid=(), start: int = 0):
        self.prefix = RESERVED + prefix
        self.avoid = set(avoid)
        self.counter = start

    def name(self) -> str:
        while True:
            n = f"{self.prefix}{self.counter}"
            self.counter += 1
            if n not in self.avoid:
                self.avoid.add(n)
                return n


# ----------------------------------------------------------- substitution

Subst = Mapping[str, Expr]


def vran(s: Subst) -> frozenset:
    out = frozenset()
    for v in s.values():
        out |= free_vars(v)
    return out


def normalize(s: Subst) -> dict:
    """Drop identity bindings."""
    return {k: v for k, v in s.items() if v != Var(k)}


def apply_subst(e: Expr, s: Subst) -> Expr:
    """Capture-avoiding simultaneous substitution.

    Binders of ``e`` that clash with the domain or the variable range of
    ``s`` are renamed to fresh reserved names before substituting.
    """
    s = normalize(s)
    if not s:
        return e
    danger = set(s) | vran(s)
    fresh = Fresh("T", danger | all_vars(e))
    return _subst(e, s, danger, fresh)


def _subst(e, s, danger, fresh):
    match e:
        case Var(name):
            return s.get(name, e)
        case Bottom():
            return e
        case ConApp(_, args) | FunApp(_, args):
            if not args:
                return e
            return rebuild(e, (_subst(a, s, danger, fresh) for a in args))
        case Let(x, d, b):
            d2 = _subst(d, s, danger, fresh)
            if x in danger:
                y = fresh.name()
                inner = dict(s)
                inner[x] = Var(y)
                b2 = _subst(b, inner, danger | {y}, fresh)
                return Let(y, d2, b2)
            return Let(x, d2, _subst(b, s, danger, fresh))
    raise TypeError(e)


def compose(s1: Subst, s2: Subst) -> dict:
    """The substitution ``s1 s2``: apply ``s1`` first, then ``s2``."""
    out = {k: apply_subst(v, s2) for k, v in s1.items()}
    for k, v in s2.items():
        if k not in out:
            out[k] = v
    return normalize(out)


def restrict(s: Subst, names) -> dict:
    return {k: v for k, v in s.items() if k in names}


def is_csubst(s: Subst, partial: bool = False) -> bool:
    return all(is_cterm(v, partial) and (partial or not has_bottom(v)) for v in s.values())


def show_subst(s: Subst) -> str:
    return "[" + ", ".join(f"{k}/{show(v)}" for k, v in sorted(s.items())) + "]"


# ------------------------------------------------------------------- shell

def shell(e: Expr) -> Expr:
    match e:
        case Var() | Bottom():
            return e
        case ConApp(_, args):
            return rebuild(e, (shell(a) for a in args)) if args else e
        case FunApp():
            return BOT
        case Let(x, d, b):
            return apply_subst(shell(b), {x: shell(d)})
    raise TypeError(e)


# ----------------------------------------------------- approximation order

def approx_le(a: Expr, b: Expr) -> bool:
    """``a`` is below ``b`` in the approximation order, binders up to alpha."""
    return _le(a, b, {}, {})


def _le(a, b, left, right):
    match a:
        case Bottom():
            return True
        case Var(x):
            if not isinstance(b, Var):
                return False
            if x in left:
                return left[x] == b.name
            return b.name not in right and x == b.name
        case ConApp(name, args) | FunApp(name, args):
            return (type(b) is type(a) and b.name == name and len(b.args) == len(args)
                    and all(_le(s, t, left, right) for s, t in zip(args, b.args)))
        case Let(x, d, body):
            if not isinstance(b, Let) or not _le(d, b.definiens, left, right):
                return False
            return _le(body, b.body, {**left, x: b.var}, {**right, b.var: x})
    raise TypeError(a)


def lub(a: Expr, b: Expr) -> Expr | None:
    """Least upper bound of two partial c-terms, or None if incompatible."""
    if isinstance(a, Bottom):
        return b
    if isinstance(b, Bottom):
        return a
    if isinstance(a, Var) or isinstance(b, Var):
        return a if a == b else None
    if a.name != b.name or len(a.args) != len(b.args):
        return None
    args = []
    for s, t in zip(a.args, b.args):
        u = lub(s, t)
        if u is None:
            return None
        args.append(u)
    return rebuild(a, args)


# ------------------------------------------------------ alpha equivalence

def canonical_binder(i: int) -> str:
    return f"{RESERVED}{i}"


def alpha_canonical(e: Expr) -> Expr:
    """Rename binders to ``_0, _1, ...`` in left-to-right preorder."""
    counter = [0]

    def go(e, env):
        match e:
            case Var(name):
                return Var(env[name]) if name in env else e
            case Bottom():
                return e
            case ConApp(_, args) | FunApp(_, args):
                return rebuild(e, (go(a, env) for a in args)) if args else e
            case Let(x, d, b):
                n = canonical_binder(counter[0])
                counter[0] += 1
                return Let(n, go(d, env), go(b, {**env, x: n}))
        raise TypeError(e)

    if not has_let(e):
        return e
    return go(e, {})


def alpha_eq(a: Expr, b: Expr) -> bool:
    return alpha_canonical(a) == alpha_canonical(b)


# --------------------------------------------------------------- positions

def subexpr_at(e: Expr, p) -> tuple[Expr, frozenset]:
    """Subexpression at ``p`` and the binders visible from that hole."""
    bound = set()
    for step in p:
        match e, step:
            case Let(x, _, b), "b":
                bound.add(x)
                e = b
            case Let(_, d, _), "d":
                e = d
            case (ConApp(_, args) | FunApp(_, args)), int() if 1 <= step <= len(args):
                e = args[step - 1]
            case _:
                raise InvalidPosition(f"position {show_position(p)} does not exist")
    return e, frozenset(bound)


def replace_at(e: Expr, p, r: Expr) -> Expr:
    if not p:
        return r
    step, rest = p[0], p[1:]
    match e, step:
        case Let(x, d, b), "b":
            return Let(x, d, replace_at(b, rest, r))
        case Let(x, d, b), "d":
            return Let(x, replace_at(d, rest, r), b)
        case (ConApp(_, args) | FunApp(_, args)), int() if 1 <= step <= len(args):
            new = list(args)
            new[step - 1] = replace_at(args[step - 1], rest, r)
            return rebuild(e, new)
    raise InvalidPosition(f"position {show_position(p)} does not exist")


def positions(e: Expr, prefix=(), bound=frozenset()) -> Iterator[tuple[tuple, Expr, frozenset]]:
    """All (position, subexpression, visible binders) triples in preorder."""
    yield prefix, e, bound
    match e:
        case ConApp(_, args) | FunApp(_, args):
            for i, a in enumerate(args, 1):
                yield from positions(a, prefix + (i,), bound)
        case Let(x, d, b):
            yield from positions(d, prefix + (DEF,), bound)
            yield from positions(b, prefix + (BODY,), bound | {x})


def position_key(p) -> tuple:
    """Total order on positions: prefixes first, body before definiens."""
    return tuple((0, 0) if s == BODY else (1, 0) if s == DEF else (2, s) for s in p)


def show_position(p) -> str:
    return ".".join(str(s) for s in p) if p else "root"


def parse_position(text: str) -> tuple:
    if text in ("", "root"):
        return ()
    out = []
    for part in text.split("."):
        out.append(part if part in (BODY, DEF) else int(part))
    return tuple(out)
