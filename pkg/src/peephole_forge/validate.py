"""Semantic checks applied to every parsed pattern."""
from __future__ import annotations

from .errors import PatternError
from .syntax import (
    Bin,
    BinOp,
    BoolLit,
    Call,
    Cmp,
    Lit,
    Logic,
    Not,
    Pattern,
    Var,
    is_int_valued,
    subexprs,
    variables,
)

# Precondition arithmetic is interpreted over unbounded integers, which
# only the ring operations survive unchanged.
PRECOND_ARITH = frozenset({BinOp.ADD, BinOp.SUB, BinOp.MUL})


def check_pattern(p: Pattern) -> list[PatternError]:
    """Return every rule violation in ``p`` (empty when valid)."""
    problems: list[PatternError] = []

    def bad(msg, pos=None):
        problems.append(PatternError(msg, pos if pos is not None else p.pos, p.name))

    names = set()
    for prm in p.params:
        if prm.name in names:
            bad(f"duplicate parameter name {prm.name!r}", prm.pos)
        names.add(prm.name)
    widths = {prm.width for prm in p.params}
    if len(widths) > 1:
        bad("mixed int/long parameters in one pattern")
    width = p.width

    for e in (p.before, p.after):
        for sub in subexprs(e):
            if isinstance(sub, Var) and sub.name not in names:
                bad(f"undeclared variable {sub.name!r}", sub.pos)
            elif isinstance(sub, Lit) and not width.contains(sub.value):
                bad(f"literal {sub.value} out of range for {width.java_type}", sub.pos)
            elif not is_int_valued(sub):
                bad("before/after expressions must be integer-valued", sub.pos)

    before_vars = set(variables(p.before))
    for v in variables(p.after):
        if v in names and v not in before_vars:
            bad(f"after uses {v!r}, which before does not bind")

    for cond in p.preconds:
        _check_precondition(p, cond, names, bad)
    return problems


def _check_precondition(p, cond, names, bad):
    if is_int_valued(cond):
        bad("precondition must be a boolean expression", cond.pos)
        return
    for sub in subexprs(cond):
        match sub:
            case Call(fname):
                bad(f"precondition contains a call to {fname}()", sub.pos)
            case Var(v) if v not in names:
                bad(f"undeclared variable {v!r}", sub.pos)
            case Var(v) if not p.param(v).is_constant:
                bad("precondition over free variables unsupported", sub.pos)
            case Lit(v) if not p.width.contains(v):
                bad(f"literal {v} out of range for {p.width.java_type}", sub.pos)
            case Bin(op) if op not in PRECOND_ARITH:
                bad(f"operator {op.symbol!r} is not supported in preconditions", sub.pos)
            case Cmp(_, l, r) if not (is_int_valued(l) and is_int_valued(r)):
                bad("comparison operands must be integer-valued", sub.pos)
            case Logic(_, l, r) if is_int_valued(l) or is_int_valued(r):
                bad("logical operands must be boolean", sub.pos)
            case Not(x) if is_int_valued(x):
                bad("'!' operand must be boolean", sub.pos)
            case Bin(_, l, r) if not (is_int_valued(l) and is_int_valued(r)):
                bad("arithmetic operands must be integer-valued", sub.pos)
            case BoolLit() | Var() | Lit() | Bin() | Cmp() | Logic() | Not():
                pass


def validate_pattern(p: Pattern) -> None:
    """Raise the first :class:`PatternError` found in ``p``."""
    problems = check_pattern(p)
    if problems:
        raise problems[0]
