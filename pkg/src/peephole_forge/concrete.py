"""Concrete expression graphs: the programs patterns are applied to.

Nodes are hash-consed into a :class:`Graph`, so structurally identical
expressions share one id, mirroring a value-numbered compiler IR. Node
tuples are ``("atom", name)``, ``("lit", value)`` or ``(BinOp, left, right)``.
"""
from __future__ import annotations

from .errors import PatternSyntaxError
from .syntax import Bin, BinOp, Expr, IntWidth, Lit, Var, format_expr


class Graph:
    def __init__(self, width: IntWidth = IntWidth.I32):
        self.width = width
        self.nodes: list[tuple] = []
        self.memo: dict[tuple, int] = {}

    def __len__(self) -> int:
        return len(self.nodes)

    def _intern(self, key: tuple) -> int:
        nid = self.memo.get(key)
        if nid is None:
            nid = len(self.nodes)
            self.nodes.append(key)
            self.memo[key] = nid
        return nid

    def atom(self, name: str) -> int:
        return self._intern(("atom", name))

    def lit(self, value: int) -> int:
        if not self.width.contains(value):
            raise ValueError(f"literal {value} does not fit {self.width.java_type}")
        return self._intern(("lit", value))

    def op(self, op: BinOp, left: int, right: int) -> int:
        assert left < len(self.nodes) and right < len(self.nodes)
        return self._intern((op, left, right))

    def node(self, nid: int) -> tuple:
        return self.nodes[nid]

    def is_lit(self, nid: int) -> bool:
        return self.nodes[nid][0] == "lit"

    def is_op(self, nid: int) -> bool:
        return isinstance(self.nodes[nid][0], BinOp)

    def mark(self) -> int:
        return len(self.nodes)

    def rollback(self, mark: int) -> None:
        """Forget every node created after ``mark``."""
        while len(self.nodes) > mark:
            del self.memo[self.nodes.pop()]

    def depth(self, nid: int) -> int:
        n = self.nodes[nid]
        if isinstance(n[0], BinOp):
            return 1 + max(self.depth(n[1]), self.depth(n[2]))
        return 0

    def atoms(self, nid: int) -> set[str]:
        out: set[str] = set()
        stack = [nid]
        while stack:
            n = self.nodes[stack.pop()]
            if n[0] == "atom":
                out.add(n[1])
            elif isinstance(n[0], BinOp):
                stack.extend(n[1:])
        return out

    def to_expr(self, nid: int) -> Expr:
        n = self.nodes[nid]
        if n[0] == "atom":
            return Var(n[1])
        if n[0] == "lit":
            return Lit(n[1])
        return Bin(n[0], self.to_expr(n[1]), self.to_expr(n[2]))

    def format(self, nid: int) -> str:
        return format_expr(self.to_expr(nid))

    def add_expr(self, e: Expr) -> int:
        """Intern an expression whose variables are read as atoms."""
        match e:
            case Var(name):
                return self.atom(name)
            case Lit(value):
                return self.lit(value)
            case Bin(op, l, r):
                return self.op(op, self.add_expr(l), self.add_expr(r))
        raise TypeError(f"not a concrete expression: {e!r}")


def parse_concrete(text: str, graph: Graph) -> int:
    """Parse ``text`` with the pattern expression grammar into ``graph``."""
    from .parser import _Parser
    from .syntax import is_int_valued, subexprs

    p = _Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.describe(p.tok)} after expression")
    for sub in subexprs(e):
        if not is_int_valued(sub):
            raise PatternSyntaxError("expected an integer expression", sub.pos)
    return graph.add_expr(e)


def apply_binop(op: BinOp, a: int, b: int, width: IntWidth) -> int:
    """Two's-complement result of ``a op b`` at ``width`` (Java semantics)."""
    bits = width.bits
    if op is BinOp.ADD:
        r = a + b
    elif op is BinOp.SUB:
        r = a - b
    elif op is BinOp.MUL:
        r = a * b
    elif op is BinOp.AND:
        r = a & b
    elif op is BinOp.OR:
        r = a | b
    elif op is BinOp.XOR:
        r = a ^ b
    else:
        s = b & (bits - 1)
        if op is BinOp.SHL:
            r = a << s
        elif op is BinOp.SHR:
            r = width.wrap(a) >> s
        else:
            r = (a & ((1 << bits) - 1)) >> s
    return width.wrap(r)


def evaluate(graph: Graph, root: int, env: dict[str, int]) -> int:
    """Evaluate ``root`` with atoms drawn from ``env``."""
    width = graph.width
    memo: dict[int, int] = {}

    def ev(nid: int) -> int:
        v = memo.get(nid)
        if v is not None:
            return v
        n = graph.nodes[nid]
        if n[0] == "atom":
            try:
                v = width.wrap(env[n[1]])
            except KeyError:
                raise KeyError(f"no value for atom {n[1]!r}") from None
        elif n[0] == "lit":
            v = n[1]
        else:
            v = apply_binop(n[0], ev(n[1]), ev(n[2]), width)
        memo[nid] = v
        return v

    return ev(root)
