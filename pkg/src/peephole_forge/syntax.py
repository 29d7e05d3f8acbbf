"""Pattern data model and pretty printer."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field


class IntWidth(enum.Enum):
    I32 = 32
    I64 = 64

    @property
    def bits(self) -> int:
        return self.value

    @property
    def java_type(self) -> str:
        return "int" if self is IntWidth.I32 else "long"

    @property
    def suffix(self) -> str:
        """Opcode suffix used by the Ideal-graph node names (AddI / AddL)."""
        return "I" if self is IntWidth.I32 else "L"

    @property
    def min(self) -> int:
        return -(1 << (self.bits - 1))

    @property
    def max(self) -> int:
        return (1 << (self.bits - 1)) - 1

    def wrap(self, value: int) -> int:
        mask = (1 << self.bits) - 1
        value &= mask
        if value > self.max:
            value -= 1 << self.bits
        return value

    def contains(self, value: int) -> bool:
        return self.min <= value <= self.max

    @classmethod
    def from_java(cls, name: str) -> IntWidth:
        return {"int": cls.I32, "long": cls.I64}[name]


class BinOp(enum.Enum):
    ADD = "+"
    SUB = "-"
    MUL = "*"
    AND = "&"
    OR = "|"
    XOR = "^"
    SHL = "<<"
    SHR = ">>"
    USHR = ">>>"

    @property
    def symbol(self) -> str:
        return self.value

    @property
    def node_name(self) -> str:
        return _NODE_NAMES[self]

    def opcode(self, width: IntWidth) -> str:
        """Ideal-graph opcode name, e.g. ``SubL`` or ``URShiftI``."""
        return self.node_name + width.suffix

    @property
    def ir_token(self) -> str:
        return _IR_TOKENS[self]

    @classmethod
    def from_symbol(cls, symbol: str) -> BinOp:
        return _BY_SYMBOL[symbol]


_NODE_NAMES = {
    BinOp.ADD: "Add",
    BinOp.SUB: "Sub",
    BinOp.MUL: "Mul",
    BinOp.AND: "And",
    BinOp.OR: "Or",
    BinOp.XOR: "Xor",
    BinOp.SHL: "LShift",
    BinOp.SHR: "RShift",
    BinOp.USHR: "URShift",
}

_IR_TOKENS = {
    BinOp.ADD: "ADD",
    BinOp.SUB: "SUB",
    BinOp.MUL: "MUL",
    BinOp.AND: "AND",
    BinOp.OR: "OR",
    BinOp.XOR: "XOR",
    BinOp.SHL: "LSHIFT",
    BinOp.SHR: "RSHIFT",
    BinOp.USHR: "URSHIFT",
}

_BY_SYMBOL = {op.symbol: op for op in BinOp}

# Operators legal inside precondition expressions only.
COMPARISONS = ("==", "!=", "<", "<=", ">", ">=")
LOGICALS = ("&&", "||")


class ParamKind(enum.Enum):
    FREE = "free"
    CONSTANT = "constant"


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Param:
    name: str
    width: IntWidth
    kind: ParamKind = ParamKind.FREE
    pos: Pos | None = field(default=None, compare=False, repr=False)

    @property
    def is_constant(self) -> bool:
        return self.kind is ParamKind.CONSTANT


class Expr:
    """Base class of pattern expressions (integer- or boolean-valued)."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(Expr):
    name: str
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Lit(Expr):
    value: int
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Bin(Expr):
    op: BinOp
    lhs: Expr
    rhs: Expr
    pos: Pos | None = field(default=None, compare=False, repr=False)


# Boolean-valued nodes; only preconditions may contain them.


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Cmp(Expr):
    op: str
    lhs: Expr
    rhs: Expr
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Logic(Expr):
    op: str
    lhs: Expr
    rhs: Expr
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Call(Expr):
    """A method call; parsed so it can be reported, never accepted."""

    name: str
    args: tuple[Expr, ...]
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Pattern:
    name: str
    params: tuple[Param, ...]
    before: Expr
    after: Expr
    preconds: tuple[Expr, ...] = ()
    pos: Pos | None = field(default=None, compare=False, repr=False)

    @property
    def width(self) -> IntWidth:
        return self.params[0].width if self.params else IntWidth.I32

    def param(self, name: str) -> Param:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)

    @property
    def free_params(self) -> tuple[Param, ...]:
        return tuple(p for p in self.params if not p.is_constant)

    @property
    def constant_params(self) -> tuple[Param, ...]:
        return tuple(p for p in self.params if p.is_constant)

    @property
    def constant_names(self) -> frozenset[str]:
        return frozenset(p.name for p in self.params if p.is_constant)


def variables(e: Expr) -> list[str]:
    """Variable names in ``e`` in left-to-right order of first occurrence."""
    seen: dict[str, None] = {}

    def walk(n: Expr) -> None:
        match n:
            case Var(name):
                seen.setdefault(name)
            case Bin(_, l, r) | Cmp(_, l, r) | Logic(_, l, r):
                walk(l)
                walk(r)
            case Not(x):
                walk(x)
            case Call(_, args):
                for a in args:
                    walk(a)

    walk(e)
    return list(seen)


def subexprs(e: Expr):
    """Yield ``e`` and every nested expression, preorder."""
    yield e
    match e:
        case Bin(_, l, r) | Cmp(_, l, r) | Logic(_, l, r):
            yield from subexprs(l)
            yield from subexprs(r)
        case Not(x):
            yield from subexprs(x)
        case Call(_, args):
            for a in args:
                yield from subexprs(a)


def is_int_valued(e: Expr) -> bool:
    return isinstance(e, (Var, Lit, Bin))


def format_expr(e: Expr, name=None, lit=None) -> str:
    """Render ``e`` with every nested binary operand parenthesized.

    ``name`` and ``lit`` optionally remap variable names and literal text,
    which the code emitters use to retarget the same printer.
    """
    name = name or (lambda s: s)
    lit = lit or str

    def atom(n: Expr) -> str:
        s = fmt(n)
        return f"({s})" if isinstance(n, (Bin, Cmp, Logic)) else s

    def fmt(n: Expr) -> str:
        match n:
            case Var(v):
                return name(v)
            case Lit(v):
                return lit(v)
            case BoolLit(v):
                return "true" if v else "false"
            case Bin(op, l, r):
                return f"{atom(l)} {op.symbol} {atom(r)}"
            case Cmp(op, l, r) | Logic(op, l, r):
                return f"{atom(l)} {op} {atom(r)}"
            case Not(x):
                return f"!{atom(x)}"
            case Call(f, args):
                return f"{f}({', '.join(fmt(a) for a in args)})"
        raise TypeError(f"not an expression: {n!r}")

    return fmt(e)


def format_pattern(p: Pattern) -> str:
    """Render a pattern in the pattern-file format; reparses to ``p``."""
    params = []
    for prm in p.params:
        marker = "@Constant " if prm.is_constant else ""
        params.append(f"{marker}{prm.width.java_type} {prm.name}")
    lines = [
        "@Pattern",
        f"public void {p.name}({', '.join(params)}) {{",
        f"  before({format_expr(p.before)});",
    ]
    # One nested if per precondition so the list reparses element-wise.
    indent = "  "
    for c in p.preconds:
        lines.append(f"{indent}if ({format_expr(c)}) {{")
        indent += "  "
    lines.append(f"{indent}after({format_expr(p.after)});")
    for _ in p.preconds:
        indent = indent[:-2]
        lines.append(f"{indent}}}")
    lines.append("}")
    return "\n".join(lines) + "\n"
