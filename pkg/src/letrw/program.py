"""Program text format: parsing, pretty printing and validation.

A program is a sequence of rules ``head -> rhs.``.  A symbol is a function
iff it is the root of some rule head, otherwise it is a constructor.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .terms import (
    BOT, ConApp, Expr, FunApp, LetRwError, Let, Symbol, Var, free_vars, has_bottom,
    is_cterm, show,
)
from .unify import mgu, rename_term

CHOICE = "?"
PRELUDE = "?(X,Y) -> X.\n?(X,Y) -> Y.\n"


class ProgramError(LetRwError):
    kind = "syntax-error"

    def __init__(self, message, kind=None, line=None, col=None):
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message, kind)
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Rule:
    head: str
    patterns: tuple
    rhs: Expr
    index: int = 0

    @property
    def lhs(self) -> FunApp:
        return FunApp(self.head, self.patterns)

    @property
    def pattern_vars(self) -> frozenset:
        out = frozenset()
        for p in self.patterns:
            out |= free_vars(p)
        return out

    @property
    def extra_vars(self) -> frozenset:
        return free_vars(self.rhs) - self.pattern_vars

    @property
    def variables(self) -> frozenset:
        return free_vars(self.rhs) | self.pattern_vars

    def __str__(self) -> str:
        return f"{show(self.lhs)} -> {show(self.rhs)}."


@dataclass
class Program:
    signature: dict = field(default_factory=dict)
    rules: tuple = ()
    prelude_choice: bool = field(default=False, compare=False)

    def __post_init__(self):
        by_fun: dict[str, list] = {}
        for r in self.rules:
            by_fun.setdefault(r.head, []).append(r)
        self.by_fun = {k: tuple(v) for k, v in by_fun.items()}

    def rules_for(self, name: str) -> tuple:
        return self.by_fun.get(name, ())

    @property
    def constructors(self) -> list:
        return sorted((s for s in self.signature.values() if s.kind == "constructor"),
                      key=lambda s: (s.arity, s.name))

    @property
    def functions(self) -> list:
        return sorted((s for s in self.signature.values() if s.kind == "function"),
                      key=lambda s: s.name)

    def with_constructors(self, extra) -> "Program":
        sig = dict(self.signature)
        for s in extra:
            sig.setdefault(s.name, s)
        return Program(sig, self.rules, self.prelude_choice)


# ------------------------------------------------------------------ lexer

TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<arrow>->)
  | (?P<bot>_\|_)
  | (?P<var>[A-Z][A-Za-z0-9_']*)
  | (?P<sym>[a-z0-9][A-Za-z0-9_']*)
  | (?P<punct>[(),.=?])
""", re.VERBOSE)

KEYWORDS = {"let", "in"}


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Tok]:
    out = []
    pos, line, start = 0, 1, 0
    while pos < len(text):
        m = TOKEN.match(text, pos)
        if m is None:
            col = pos - start + 1
            ch = text[pos]
            if ch == "_":
                raise ProgramError("names starting with '_' are reserved", line=line, col=col)
            raise ProgramError(f"unexpected character {ch!r}", line=line, col=col)
        kind = m.lastgroup
        tok = m.group()
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            if kind == "sym" and tok in KEYWORDS:
                kind = tok
            elif kind == "punct":
                kind = tok
            out.append(Tok(kind, tok, line, pos - start + 1))
        pos = m.end()
    out.append(Tok("eof", "", line, pos - start + 1))
    return out


# ----------------------------------------------------------------- parser

# Raw trees before symbol kinds are known:
#   ("var", name, tok) | ("bot", tok) | ("app", name, args, tok) | ("let", name, d, b, tok)

class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ProgramError(message, line=tok.line, col=tok.col)

    def expect(self, kind):
        tok = self.tok
        if tok.kind != kind:
            found = tok.text or "end of input"
            raise self.error(f"expected {kind!r}, found {found!r}")
        self.i += 1
        return tok

    def program(self):
        rules = []
        while self.tok.kind != "eof":
            head = self.head()
            self.expect("arrow")
            rhs = self.expr()
            self.expect(".")
            rules.append((head, rhs))
        return rules

    def head(self):
        tok = self.tok
        if tok.kind == "?":
            self.i += 1
            return ("app", CHOICE, self.args(required=True), tok)
        if tok.kind != "sym":
            raise self.error("a rule must start with a function symbol")
        self.i += 1
        return ("app", tok.text, self.args(), tok)

    def args(self, required=False):
        if self.tok.kind != "(":
            if required:
                raise self.error("expected '('")
            return []
        self.i += 1
        out = [self.expr()]
        while self.tok.kind == ",":
            self.i += 1
            out.append(self.expr())
        self.expect(")")
        return out

    def expr(self):
        tok = self.tok
        if tok.kind == "let":
            self.i += 1
            var = self.expect("var")
            self.expect("=")
            d = self.expr()
            self.expect("in")
            b = self.expr()
            return ("let", var.text, d, b, tok)
        left = self.atom()
        if self.tok.kind == "?":
            op = self.tok
            self.i += 1
            right = self.expr()
            return ("app", CHOICE, [left, right], op)
        return left

    def atom(self):
        tok = self.tok
        match tok.kind:
            case "var":
                self.i += 1
                return ("var", tok.text, tok)
            case "bot":
                self.i += 1
                return ("bot", tok)
            case "sym":
                self.i += 1
                return ("app", tok.text, self.args(), tok)
            case "?":
                self.i += 1
                return ("app", CHOICE, self.args(required=True), tok)
            case "(":
                self.i += 1
                inner = self.expr()
                self.expect(")")
                return inner
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}")


def _uses(raw, acc):
    match raw:
        case ("app", name, args, tok):
            acc.append((name, len(args), tok))
            for a in args:
                _uses(a, acc)
        case ("let", _, d, b, _):
            _uses(d, acc)
            _uses(b, acc)


def _build(raw, kinds, partial, where):
    match raw:
        case ("var", name, _):
            return Var(name)
        case ("bot", tok):
            if not partial:
                kind = "bottom-in-program" if where == "program" else "syntax-error"
                raise ProgramError("_|_ is only allowed in partial mode", kind, tok.line, tok.col)
            return BOT
        case ("app", name, args, tok):
            if name not in kinds:
                raise ProgramError(f"unknown symbol {name!r}", "unknown-symbol", tok.line, tok.col)
            sym = kinds[name]
            if sym.arity != len(args):
                raise ProgramError(f"{name} expects {sym.arity} argument(s), got {len(args)}",
                                   "arity-conflict", tok.line, tok.col)
            cls = FunApp if sym.kind == "function" else ConApp
            return cls(name, tuple(_build(a, kinds, partial, where) for a in args))
        case ("let", x, d, b, _):
            return Let(x, _build(d, kinds, partial, where), _build(b, kinds, partial, where))
    raise TypeError(raw)


def parse_program(text: str, prelude_choice: bool = False) -> Program:
    """Parse, infer symbol kinds, and validate a program."""
    if prelude_choice:
        text = PRELUDE + text
    raw_rules = _Parser(text).program()
    functions = {head[1] for head, _ in raw_rules}
    sig: dict[str, Symbol] = {}
    for head, rhs in raw_rules:
        uses = []
        _uses(head, uses)
        _uses(rhs, uses)
        for name, arity, tok in uses:
            kind = "function" if name in functions else "constructor"
            old = sig.get(name)
            if old is None:
                sig[name] = Symbol(name, kind, arity)
            elif old.arity != arity:
                raise ProgramError(f"symbol {name} used with arities {old.arity} and {arity}",
                                   "arity-conflict", tok.line, tok.col)
    rules = []
    for idx, (head, rhs) in enumerate(raw_rules):
        _, name, args, tok = head
        for a in args:
            _check_pattern(a, functions)
        patterns = tuple(_build(a, sig, False, "program") for a in args)
        _check_linear(patterns, tok)
        rules.append(Rule(name, patterns, _build(rhs, sig, False, "program"), idx))
    program = Program(sig, tuple(rules), prelude_choice)
    for d in validate(program):
        if d.severity == "error":
            raise ProgramError(d.message, d.code)
    return program


def _check_pattern(raw, functions):
    match raw:
        case ("app", name, args, tok):
            if name in functions:
                raise ProgramError(f"function symbol {name} inside a pattern",
                                   "function-symbol-in-pattern", tok.line, tok.col)
            for a in args:
                _check_pattern(a, functions)
        case ("let", _, _, _, tok):
            raise ProgramError("let is not allowed inside a pattern",
                               "function-symbol-in-pattern", tok.line, tok.col)
        case ("bot", tok):
            raise ProgramError("_|_ is not allowed in programs",
                               "bottom-in-program", tok.line, tok.col)


def _check_linear(patterns, tok):
    seen = set()
    for p in patterns:
        for v in _pattern_var_list(p):
            if v in seen:
                raise ProgramError(f"variable {v} occurs twice in the left-hand side",
                                   "nonlinear-pattern", tok.line, tok.col)
            seen.add(v)


def _pattern_var_list(p):
    match p:
        case Var(name):
            return [name]
        case ConApp(_, args) | FunApp(_, args):
            return [v for a in args for v in _pattern_var_list(a)]
    return []


def parse_expr(text: str, sig, partial: bool = False) -> Expr:
    """Parse a query over the symbols of a program (or a signature dict)."""
    if isinstance(sig, Program):
        sig = sig.signature
    p = _Parser(text)
    raw = p.expr()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after expression")
    return _build(raw, sig, partial, "query")


def parse_query(text: str, program: Program, partial: bool = False) -> tuple[Program, Expr]:
    """Parse a query whose unknown symbols are new constructors.

    Returns the program with its signature extended by those constructors.
    """
    p = _Parser(text)
    raw = p.expr()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after expression")
    uses = []
    _uses(raw, uses)
    sig = dict(program.signature)
    for name, arity, tok in uses:
        if name not in sig:
            if name == CHOICE:
                raise ProgramError("? needs the choice prelude", "unknown-symbol", tok.line, tok.col)
            sig[name] = Symbol(name, "constructor", arity)
    if len(sig) > len(program.signature):
        program = program.with_constructors(s for n, s in sig.items() if n not in program.signature)
    return program, _build(raw, sig, partial, "query")


# ---------------------------------------------------------- pretty printer

def pretty_print(program: Program) -> str:
    return "".join(str(r) + "\n" for r in program.rules)


# -------------------------------------------------------------- validation

@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "info"
    code: str
    message: str
    rule: int | None = None

    def __str__(self) -> str:
        where = f" (rule {self.rule})" if self.rule is not None else ""
        return f"{self.severity}: {self.code}{where}: {self.message}"


def validate(program: Program) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    sig = program.signature
    heads = {r.head for r in program.rules}

    def check_symbols(e, idx):
        match e:
            case ConApp(name, args) | FunApp(name, args):
                sym = sig.get(name)
                if sym is None:
                    out.append(Diagnostic("error", "unknown-symbol", f"symbol {name} not in signature", idx))
                elif sym.arity != len(args):
                    out.append(Diagnostic("error", "arity-conflict",
                                          f"{name} used with {len(args)} argument(s), declared {sym.arity}", idx))
                elif (sym.kind == "function") != isinstance(e, FunApp):
                    out.append(Diagnostic("error", "kind-conflict", f"{name} used with the wrong kind", idx))
                for a in args:
                    check_symbols(a, idx)
            case Let(_, d, b):
                check_symbols(d, idx)
                check_symbols(b, idx)

    for r in program.rules:
        idx = r.index
        sym = sig.get(r.head)
        if sym is None or sym.kind != "function":
            out.append(Diagnostic("error", "constructor-at-head", f"{r.head} roots a rule head but is not a function", idx))
        seen: set = set()
        for p in r.patterns:
            if _contains_function(p, heads, sig):
                out.append(Diagnostic("error", "function-symbol-in-pattern", f"function symbol inside pattern {show(p)}", idx))
            elif has_bottom(p):
                out.append(Diagnostic("error", "bottom-in-program", "_|_ inside a pattern", idx))
            elif not is_cterm(p):
                out.append(Diagnostic("error", "function-symbol-in-pattern", f"pattern {show(p)} is not a c-term", idx))
            for v in _pattern_var_list(p):
                if v in seen:
                    out.append(Diagnostic("error", "nonlinear-pattern", f"variable {v} occurs twice", idx))
                seen.add(v)
        if has_bottom(r.rhs):
            out.append(Diagnostic("error", "bottom-in-program", "_|_ in a right-hand side", idx))
        check_symbols(r.lhs, idx)
        check_symbols(r.rhs, idx)
    if any(d.severity == "error" for d in out):
        return out
    for r in program.rules:
        if r.extra_vars:
            names = ", ".join(sorted(r.extra_vars))
            out.append(Diagnostic("info", "extra-vars", f"rule {r} has extra variables {names}", r.index))
    for name, rules in program.by_fun.items():
        overlaps = []
        for i, r1 in enumerate(rules):
            for r2 in rules[i + 1:]:
                if _overlap(r1, r2):
                    overlaps.append((r1.index, r2.index))
        if overlaps:
            pairs = ", ".join(f"{a}/{b}" for a, b in overlaps)
            out.append(Diagnostic("info", "overlap", f"function {name} has overlapping rules {pairs}"))
    return out


def _contains_function(p, heads, sig):
    match p:
        case FunApp():
            return True
        case ConApp(name, args):
            s = sig.get(name)
            if name in heads or (s is not None and s.kind == "function"):
                return True
            return any(_contains_function(a, heads, sig) for a in args)
    return False


def _overlap(r1: Rule, r2: Rule) -> bool:
    left = ConApp("_lhs", r1.patterns)
    right = rename_term(ConApp("_lhs", r2.patterns), {v: v + "'" for v in r2.pattern_vars})
    return mgu(left, right) is not None
