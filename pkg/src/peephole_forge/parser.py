"""Lexer and recursive-descent parser for pattern files.

A pattern file holds one or more ``@Pattern`` method declarations::

    @Pattern
    public void pAdd6(long a, long b, long c) {
      before((a - b) + (c - a));
      after(c - b);
    }

Binary expressions are parsed by precedence climbing over Java's operator
table.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import PatternError, PatternSyntaxError
from .syntax import (
    COMPARISONS,
    Bin,
    BinOp,
    BoolLit,
    Call,
    Cmp,
    Expr,
    IntWidth,
    Lit,
    Logic,
    Not,
    Param,
    ParamKind,
    Pattern,
    Pos,
    Var,
    is_int_valued,
    subexprs,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<annot>@[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<number>0[xX][0-9a-fA-F_]+[lL]?|[0-9][0-9_]*[lL]?)
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<op>>>>|<<|>>|<=|>=|==|!=|&&|\|\||[-+*/%&|^~!<>=(){},;.])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: Pos


def tokenize(source: str) -> list[Token]:
    tokens = []
    line, line_start = 1, 0
    i = 0
    while i < len(source):
        m = _TOKEN_RE.match(source, i)
        if m is None:
            raise PatternSyntaxError(
                f"unexpected character {source[i]!r}", Pos(line, i - line_start + 1)
            )
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, Pos(line, i - line_start + 1)))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = i + text.rindex("\n") + 1
        i = m.end()
    tokens.append(Token("eof", "", Pos(line, i - line_start + 1)))
    return tokens


# Binding power, loosest first; every binary operator is left-associative.
_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "|": 3,
    "^": 4,
    "&": 5,
    "==": 6,
    "!=": 6,
    "<": 7,
    "<=": 7,
    ">": 7,
    ">=": 7,
    "<<": 8,
    ">>": 8,
    ">>>": 8,
    "+": 9,
    "-": 9,
    "*": 10,
}

_MODIFIERS = {"public", "private", "protected", "static", "final", "abstract", "synchronized"}


def _parse_int(text: str) -> int:
    body = text.rstrip("lL").replace("_", "")
    return int(body, 16) if body[:2] in ("0x", "0X") else int(body, 10)


# Statement tree produced before the before/after pairing rules run.
@dataclass
class _Stmt:
    kind: str  # "before" | "after" | "if" | "block"
    pos: Pos
    expr: Expr | None = None
    body: list[_Stmt] | None = None


class _Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "ident")

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}, found {self.describe(self.tok)}")
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            raise self.error(f"expected {what}, found {self.describe(self.tok)}")
        return self.advance()

    @staticmethod
    def describe(t: Token) -> str:
        return "end of input" if t.kind == "eof" else repr(t.text)

    def error(self, message: str, pos: Pos | None = None) -> PatternSyntaxError:
        return PatternSyntaxError(message, pos or self.tok.pos)

    # -- declarations -----------------------------------------------------

    def file(self) -> list[Pattern]:
        patterns = []
        while self.tok.kind != "eof":
            patterns.append(self.pattern())
        return patterns

    def pattern(self) -> Pattern:
        start = self.tok.pos
        annotations = []
        while self.tok.kind == "annot":
            annotations.append(self.advance())
        if not any(a.text == "@Pattern" for a in annotations):
            raise self.error("expected a method annotated with @Pattern", start)
        for a in annotations:
            if a.text != "@Pattern":
                raise self.error(f"unsupported method annotation {a.text}", a.pos)
        while self.tok.kind == "ident" and self.tok.text in _MODIFIERS:
            self.advance()
        self.expect("void")
        name = self.expect_ident("pattern name").text
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.param())
            while self.at(","):
                self.advance()
                params.append(self.param())
        self.expect(")")
        body = self.block()
        return _assemble(name, tuple(params), body, start)

    def param(self) -> Param:
        pos = self.tok.pos
        kind = ParamKind.FREE
        if self.tok.kind == "annot":
            a = self.advance()
            if a.text != "@Constant":
                raise self.error(f"unsupported parameter annotation {a.text}", a.pos)
            kind = ParamKind.CONSTANT
        type_tok = self.expect_ident("parameter type")
        if type_tok.text not in ("int", "long"):
            raise self.error(
                f"unsupported parameter type {type_tok.text!r} (expected int or long)",
                type_tok.pos,
            )
        name = self.expect_ident("parameter name")
        return Param(name.text, IntWidth.from_java(type_tok.text), kind, pos)

    # -- statements -------------------------------------------------------

    def block(self) -> list[_Stmt]:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated block, expected '}'")
            stmts.append(self.statement())
        self.expect("}")
        return stmts

    def statement(self) -> _Stmt:
        t = self.tok
        if self.at("{"):
            return _Stmt("block", t.pos, body=self.block())
        if t.kind == "ident" and t.text in ("before", "after") and self.peek().text == "(":
            self.advance()
            self.expect("(")
            e = self.expr()
            self.expect(")")
            self.expect(";")
            return _Stmt(t.text, t.pos, expr=e)
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.statement()
            if self.at("else"):
                raise self.error("unsupported construct: else branch")
            body = then.body if then.kind == "block" else [then]
            return _Stmt("if", t.pos, expr=cond, body=body)
        if t.kind == "ident" and (
            self.peek().text == "=" or (t.text in ("int", "long") and self.peek(2).text == "=")
        ):
            raise self.error("unsupported construct: assignment statement")
        raise self.error(f"unexpected {self.describe(t)}, expected a statement")

    # -- expressions ------------------------------------------------------

    def expr(self, min_prec: int = 1) -> Expr:
        lhs = self.unary()
        while True:
            t = self.tok
            prec = _PRECEDENCE.get(t.text) if t.kind == "op" else None
            if t.kind == "op" and t.text in ("/", "%"):
                raise self.error(f"unsupported operator {t.text!r}")
            if prec is None or prec < min_prec:
                return lhs
            self.advance()
            rhs = self.expr(prec + 1)
            if t.text in COMPARISONS:
                lhs = Cmp(t.text, lhs, rhs, t.pos)
            elif t.text in ("&&", "||"):
                lhs = Logic(t.text, lhs, rhs, t.pos)
            else:
                lhs = Bin(BinOp.from_symbol(t.text), lhs, rhs, t.pos)

    def unary(self) -> Expr:
        t = self.tok
        if self.at("-"):
            if self.peek().kind == "number":
                self.advance()
                return Lit(-_parse_int(self.advance().text), t.pos)
            raise self.error(
                "unsupported construct: unary minus (write '0 - e' instead)"
            )
        if self.at("!"):
            self.advance()
            return Not(self.unary(), t.pos)
        if t.kind == "op" and t.text in ("~", "+"):
            raise self.error(f"unsupported construct: unary operator {t.text!r}")
        return self.primary()

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Lit(_parse_int(t.text), t.pos)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.advance()
            if t.text in ("true", "false"):
                return BoolLit(t.text == "true", t.pos)
            name = t.text
            while self.at("."):
                self.advance()
                name += "." + self.expect_ident().text
            if self.at("("):
                self.advance()
                args = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.at(","):
                        self.advance()
                        args.append(self.expr())
                self.expect(")")
                return Call(name, tuple(args), t.pos)
            if "." in name:
                raise self.error(f"unsupported construct: field access {name!r}", t.pos)
            return Var(name, t.pos)
        raise self.error(f"unexpected {self.describe(t)}, expected an expression")


def _locate(stmts, kind, trail=()):
    """Yield (trail, stmt) for every statement of ``kind``; trail is the
    list of (block, index, enclosing-if) steps from the method body."""
    for idx, s in enumerate(stmts):
        here = trail + ((id(stmts), idx, s),)
        if s.kind == kind:
            yield here, s
        if s.body is not None:
            yield from _locate(s.body, kind, here)


def _assemble(name, params, body, pos) -> Pattern:
    for s in _walk(body):
        if s.kind == "if" and not any(c.kind in ("before", "after") for c in _walk(s.body)):
            raise PatternError("if statement without before/after", s.pos, name)
    befores = list(_locate(body, "before"))
    afters = list(_locate(body, "after"))
    if not befores:
        raise PatternError("missing BeforeStmt", pos, name)
    if not afters:
        raise PatternError("missing AfterStmt", pos, name)
    if len(befores) > 1:
        raise PatternError(
            "multiple BeforeStmt (one before/after pair per pattern is supported)",
            befores[1][1].pos,
            name,
        )
    if len(afters) > 1:
        raise PatternError(
            "multiple AfterStmt (one before/after pair per pattern is supported)",
            afters[1][1].pos,
            name,
        )
    (btrail, before), (atrail, after) = befores[0], afters[0]
    # after must sit in the same block as before, later in order, possibly nested.
    depth = len(btrail) - 1
    ok = (
        len(atrail) > depth
        and atrail[:depth] == btrail[:depth]
        and atrail[depth][0] == btrail[depth][0]
        and atrail[depth][1] > btrail[depth][1]
    )
    if not ok:
        raise PatternError(
            "AfterStmt must follow BeforeStmt as a later sibling or inside one",
            after.pos,
            name,
        )
    preconds = tuple(step[2].expr for step in atrail if step[2].kind == "if")
    for e in (before.expr, after.expr):
        for sub in subexprs(e):
            if isinstance(sub, Call):
                raise PatternError(
                    f"unsupported construct: method call {sub.name}()", sub.pos, name
                )
        if not is_int_valued(e) or any(not is_int_valued(s) for s in subexprs(e)):
            raise PatternError(
                "before/after expressions must be integer-valued", e.pos, name
            )
    return Pattern(name, params, before.expr, after.expr, preconds, pos)


def _walk(stmts):
    for s in stmts:
        yield s
        if s.body is not None:
            yield from _walk(s.body)


def parse_patterns(source: str) -> list[Pattern]:
    """Parse without semantic validation."""
    return _Parser(source).file()


def parse_pattern_file(source: str) -> list[Pattern]:
    """Parse and validate every pattern in ``source``, in file order."""
    from .validate import validate_pattern

    patterns = parse_patterns(source)
    seen = set()
    for p in patterns:
        if p.name in seen:
            raise PatternError(f"duplicate pattern name {p.name!r}", p.pos)
        seen.add(p.name)
        validate_pattern(p)
    return patterns


def parse_pattern(source: str) -> Pattern:
    patterns = parse_pattern_file(source)
    if len(patterns) != 1:
        raise PatternError(f"expected exactly one pattern, found {len(patterns)}")
    return patterns[0]
