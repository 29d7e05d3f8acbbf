"""Hash-consed expression DAGs (eASTs) for a pattern, and access paths.

All three expression kinds of a pattern (before, after, preconditions) live
in one arena, so an identifier used on several sides resolves to a single
node. Compound subexpressions are hash-consed too.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Union

from .syntax import (
    Bin,
    BinOp,
    BoolLit,
    Cmp,
    Expr,
    IntWidth,
    Lit,
    Logic,
    Not,
    Pattern,
    Var,
)


@dataclass(frozen=True)
class VarLeaf:
    id: int
    name: str
    width: IntWidth


@dataclass(frozen=True)
class ConstVarLeaf:
    id: int
    name: str
    width: IntWidth


@dataclass(frozen=True)
class LitLeaf:
    id: int
    value: int
    width: IntWidth


@dataclass(frozen=True)
class OpNode:
    id: int
    op: BinOp
    left: int
    right: int
    width: IntWidth


@dataclass(frozen=True)
class PredNode:
    """Comparison, logical connective, negation or boolean literal."""

    id: int
    op: str  # "==", "&&", "!", "true", ...
    args: tuple[int, ...]
    width: IntWidth


ENode = Union[VarLeaf, ConstVarLeaf, LitLeaf, OpNode, PredNode]
LEAVES = (VarLeaf, ConstVarLeaf, LitLeaf)

AccessPath = tuple[int, ...]


def _key(n: ENode):
    match n:
        case VarLeaf(_, name, w):
            return ("var", name, w)
        case ConstVarLeaf(_, name, w):
            return ("const", name, w)
        case LitLeaf(_, value, w):
            return ("lit", value, w)
        case OpNode(_, op, l, r, w):
            return ("op", op, l, r, w)
        case PredNode(_, op, args, w):
            return ("pred", op, args, w)


class EastBuilder:
    """Bottom-up arena builder; children always get smaller ids."""

    def __init__(self, pattern: Pattern):
        self.pattern = pattern
        self.width = pattern.width
        self.constants = pattern.constant_names
        self.nodes: list[ENode] = []
        self.memo: dict[tuple, int] = {}

    def _intern(self, cls, *fields) -> int:
        probe = cls(-1, *fields, self.width)
        key = _key(probe)
        found = self.memo.get(key)
        if found is not None:
            return found
        nid = len(self.nodes)
        self.nodes.append(cls(nid, *fields, self.width))
        self.memo[key] = nid
        return nid

    def add(self, e: Expr) -> int:
        match e:
            case Var(name):
                cls = ConstVarLeaf if name in self.constants else VarLeaf
                return self._intern(cls, name)
            case Lit(value):
                return self._intern(LitLeaf, value)
            case Bin(op, l, r):
                return self._intern(OpNode, op, self.add(l), self.add(r))
            case BoolLit(v):
                return self._intern(PredNode, "true" if v else "false", ())
            case Cmp(op, l, r) | Logic(op, l, r):
                return self._intern(PredNode, op, (self.add(l), self.add(r)))
            case Not(x):
                return self._intern(PredNode, "!", (self.add(x),))
        raise TypeError(f"cannot build an eAST node for {e!r}")


@dataclass(frozen=True)
class PatternEasts:
    pattern: Pattern
    arena: tuple[ENode, ...]
    before_root: int
    after_root: int
    precond_roots: tuple[int, ...]

    def __getitem__(self, nid: int) -> ENode:
        return self.arena[nid]

    def children(self, nid: int) -> tuple[int, ...]:
        n = self.arena[nid]
        if isinstance(n, OpNode):
            return (n.left, n.right)
        if isinstance(n, PredNode):
            return n.args
        return ()

    def reachable(self, root: int) -> list[int]:
        """Node ids reachable from ``root`` in preorder of first visit."""
        order: list[int] = []
        seen: set[int] = set()

        def visit(nid):
            if nid in seen:
                return
            seen.add(nid)
            order.append(nid)
            for c in self.children(nid):
                visit(c)

        visit(root)
        return order

    def deref(self, path: AccessPath, root: int | None = None) -> int:
        nid = self.before_root if root is None else root
        for step in path:
            nid = self.children(nid)[step - 1]
        return nid

    def dump(self) -> str:
        """One node per line: ``id kind children``."""
        lines = []
        for n in self.arena:
            match n:
                case VarLeaf(i, name):
                    lines.append(f"{i} var:{name}")
                case ConstVarLeaf(i, name):
                    lines.append(f"{i} const:{name}")
                case LitLeaf(i, v):
                    lines.append(f"{i} lit:{v}")
                case OpNode(i, op, l, r):
                    lines.append(f"{i} op:{op.node_name} {l} {r}")
                case PredNode(i, op, args):
                    lines.append(" ".join([f"{i} pred:{op}", *map(str, args)]))
        return "\n".join(lines) + "\n"


def build_easts(p: Pattern) -> PatternEasts:
    b = EastBuilder(p)
    before = b.add(p.before)
    after = b.add(p.after)
    preconds = tuple(b.add(c) for c in p.preconds)
    return PatternEasts(p, tuple(b.nodes), before, after, preconds)


def all_paths(e: PatternEasts, root: int | None = None) -> list[tuple[AccessPath, int]]:
    """Every root-to-node path of the DAG, in lexicographic order."""
    root = e.before_root if root is None else root
    out: list[tuple[AccessPath, int]] = []

    def dfs(nid, path):
        out.append((path, nid))
        for i, c in enumerate(e.children(nid), start=1):
            dfs(c, path + (i,))

    dfs(root, ())
    return out


def canonical_paths(e: PatternEasts) -> dict[int, tuple[AccessPath, list[AccessPath]]]:
    """Map each node reachable from before to (canonical path, all paths).

    Preorder DFS visits paths in lexicographic order, so the first path
    recorded for a node is its smallest.
    """
    result: dict[int, tuple[AccessPath, list[AccessPath]]] = {}
    for path, nid in all_paths(e):
        if nid in result:
            result[nid][1].append(path)
        else:
            result[nid] = (path, [path])
    return result


def opcode_multiset(root: int, e: PatternEasts) -> Counter:
    """Operators below ``root``; a shared DAG node counts once."""
    return Counter(
        e[nid].op for nid in e.reachable(root) if isinstance(e[nid], OpNode)
    )
