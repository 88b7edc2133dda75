"""Call-time choice for constructor-based programs: let-rewriting, let-narrowing
and a bounded denotational oracle.
"""
from .terms import (
    BOT, Bottom, ConApp, Expr, FunApp, Let, LetRwError, Var, alpha_canonical, alpha_eq, apply_subst,
    approx_le, bound_vars, free_vars, lub, replace_at, shell, show, subexpr_at,
)
from .program import Program, ProgramError, Rule, parse_expr, parse_program, parse_query, pretty_print, validate
from .unify import mgu
from .rewrite import (
    Bounds, Step, Trace, bot_step, derived_step, eval_values, let_step, lnf, replay, trs_step,
)
from .narrowing import Answer, narrow_step, solve, verify_soundness
from .semantics import (
    Denotation, ProofNode, denote, denote_subst, downward_closure, hyperdenote_sample, is_directed,
)
from .transforms import bubble_all, eliminate_lets

__all__ = [
    "BOT", "Bottom", "ConApp", "Expr", "FunApp", "Let", "LetRwError", "Var", "alpha_canonical", "alpha_eq",
    "apply_subst", "approx_le", "bound_vars", "free_vars", "lub", "replace_at", "shell", "show", "subexpr_at",
    "Program", "ProgramError", "Rule", "parse_expr", "parse_program", "parse_query", "pretty_print", "validate",
    "mgu", "Bounds", "Step", "Trace", "bot_step", "derived_step", "eval_values", "let_step", "lnf", "replay",
    "trs_step", "Answer", "narrow_step", "solve", "verify_soundness", "Denotation", "ProofNode", "denote",
    "denote_subst", "downward_closure", "hyperdenote_sample", "is_directed", "bubble_all", "eliminate_lets",
]
