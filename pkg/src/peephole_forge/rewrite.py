"""Direct execution of patterns on concrete expression graphs."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import lru_cache

from .concrete import Graph, apply_binop, evaluate
from .east import ConstVarLeaf, LitLeaf, OpNode, PatternEasts, VarLeaf, build_easts
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


@lru_cache(maxsize=None)
def easts_of(p: Pattern) -> PatternEasts:
    return build_easts(p)


@dataclass
class Binding:
    free: dict[str, int] = field(default_factory=dict)
    consts: dict[str, int] = field(default_factory=dict)


def eval_int(e: Expr, values: dict[str, int]) -> int:
    """Unbounded-integer value of a precondition subterm."""
    match e:
        case Var(name):
            return values[name]
        case Lit(v):
            return v
        case Bin(BinOp.ADD, l, r):
            return eval_int(l, values) + eval_int(r, values)
        case Bin(BinOp.SUB, l, r):
            return eval_int(l, values) - eval_int(r, values)
        case Bin(BinOp.MUL, l, r):
            return eval_int(l, values) * eval_int(r, values)
    raise ValueError(f"unsupported precondition term {e!r}")


_CMP = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def eval_condition(e: Expr, values: dict[str, int]) -> bool:
    match e:
        case BoolLit(v):
            return v
        case Cmp(op, l, r):
            return _CMP[op](eval_int(l, values), eval_int(r, values))
        case Logic("&&", l, r):
            return eval_condition(l, values) and eval_condition(r, values)
        case Logic("||", l, r):
            return eval_condition(l, values) or eval_condition(r, values)
        case Not(x):
            return not eval_condition(x, values)
    raise ValueError(f"not a condition: {e!r}")


def preconditions_hold(p: Pattern, consts: dict[str, int]) -> bool:
    return all(eval_condition(c, consts) for c in p.preconds)


def match_expr(p: Pattern, g: Graph, root: int) -> Binding | None:
    """Match ``p.before`` against ``root``; None when it does not match.

    A pattern node that occurs several times (a repeated variable, or a
    repeated compound subexpression) must map to one concrete node id.
    """
    if g.width is not p.width:
        return None
    e = easts_of(p)
    seen: dict[int, int] = {}
    b = Binding()
    nodes = g.nodes
    arena = e.arena

    def m(pid: int, cid: int) -> bool:
        prev = seen.get(pid)
        if prev is not None:
            return prev == cid
        pn = arena[pid]
        cn = nodes[cid]
        if type(pn) is OpNode:
            if cn[0] is not pn.op or not (m(pn.left, cn[1]) and m(pn.right, cn[2])):
                return False
        elif type(pn) is VarLeaf:
            b.free[pn.name] = cid
        elif type(pn) is ConstVarLeaf:
            if cn[0] != "lit":
                return False
            b.consts[pn.name] = cn[1]
        elif type(pn) is LitLeaf:
            if cn[0] != "lit" or cn[1] != pn.value:
                return False
        seen[pid] = cid
        return True

    if not m(e.before_root, root):
        return None
    if p.preconds and not preconditions_hold(p, b.consts):
        return None
    return b


def _all_constant(e: PatternEasts, nid: int) -> bool:
    n = e[nid]
    if isinstance(n, OpNode):
        return _all_constant(e, n.left) and _all_constant(e, n.right)
    return isinstance(n, (ConstVarLeaf, LitLeaf))


def fold_constant(e: PatternEasts, nid: int, consts: dict[str, int]) -> int:
    """Wrapped value of an all-constant pattern subtree."""
    n = e[nid]
    match n:
        case ConstVarLeaf(_, name):
            return consts[name]
        case LitLeaf(_, value):
            return value
        case OpNode(_, op, l, r, width):
            return apply_binop(
                op, fold_constant(e, l, consts), fold_constant(e, r, consts), width
            )
    raise ValueError(f"not a constant subtree: {n!r}")


def instantiate_after(p: Pattern, b: Binding, g: Graph) -> int:
    """Build ``p.after`` under ``b`` in ``g``; constant subtrees are folded."""
    e = easts_of(p)

    def build(nid: int) -> int:
        n = e[nid]
        if _all_constant(e, nid):
            return g.lit(fold_constant(e, nid, b.consts))
        if isinstance(n, VarLeaf):
            return b.free[n.name]
        return g.op(n.op, build(n.left), build(n.right))

    return build(e.after_root)


def instantiate_before(
    p: Pattern, g: Graph, free: dict[str, int], consts: dict[str, int]
) -> int:
    """Substitute a binding into ``p.before`` (no folding)."""

    def build(x: Expr) -> int:
        match x:
            case Var(name) if name in consts:
                return g.lit(consts[name])
            case Var(name):
                return free[name]
            case Lit(v):
                return g.lit(v)
            case Bin(op, l, r):
                return g.op(op, build(l), build(r))
        raise TypeError(x)

    return build(p.before)


def apply_first(patterns, g: Graph, root: int) -> tuple[int, int | None]:
    """Rewrite ``root`` with the first matching pattern in list order.

    Returns ``(new_root, index)``, or ``(root, None)`` when nothing matches.
    Only the root is examined.
    """
    for i, p in enumerate(patterns):
        b = match_expr(p, g, root)
        if b is not None:
            return instantiate_after(p, b, g), i
    return root, None


# -- semantic fuzzing ------------------------------------------------------

MAX_CONST_DRAWS = 100_000


def draw_value(rng: random.Random, width: IntWidth) -> int:
    """Uniform draws mixed with boundary values and small magnitudes."""
    r = rng.random()
    if r < 0.15:
        return rng.choice((0, 1, -1, 2, width.min, width.max, width.min + 1, width.max - 1))
    if r < 0.35:
        return rng.randint(-64, 64)
    return rng.randint(width.min, width.max)


@dataclass
class FuzzResult:
    status: str  # "pass" | "counterexample" | "unsampleable"
    trials: int
    env: dict[str, int] | None = None
    before_value: int | None = None
    after_value: int | None = None

    @property
    def ok(self) -> bool:
        return self.status == "pass"


def semantic_fuzz_check(p: Pattern, trials: int = 10_000, seed: int = 0) -> FuzzResult:
    """Check before == after on ``trials`` random environments."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(seed)
    width = p.width
    g = Graph(width)
    free = {prm.name: g.atom(prm.name) for prm in p.free_params}
    draws = 0
    for t in range(trials):
        while True:
            consts = {prm.name: draw_value(rng, width) for prm in p.constant_params}
            draws += 1
            if preconditions_hold(p, consts):
                break
            if draws >= MAX_CONST_DRAWS:
                return FuzzResult("unsampleable", t)
        env = {name: draw_value(rng, width) for name in free}
        mark = g.mark()
        before = instantiate_before(p, g, free, consts)
        b = match_expr(p, g, before)
        assert b is not None, "a pattern must match its own instantiation"
        after = instantiate_after(p, b, g)
        lhs, rhs = evaluate(g, before, env), evaluate(g, after, env)
        g.rollback(mark)
        if lhs != rhs:
            return FuzzResult("counterexample", t + 1, {**env, **consts}, lhs, rhs)
    return FuzzResult("pass", trials)


# -- expression generation -------------------------------------------------


def random_expr(
    depth: int,
    atoms,
    consts,
    ops,
    seed: int | random.Random,
    graph: Graph,
) -> int:
    """A random expression of depth at most ``depth``; deterministic per seed."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    atoms, consts, ops = list(atoms), list(consts), list(ops)
    leaves = [("atom", a) for a in atoms] + [("lit", c) for c in consts]

    def gen(d: int) -> int:
        if d == 0 or not ops or rng.random() < 0.3:
            kind, v = rng.choice(leaves)
            return graph.atom(v) if kind == "atom" else graph.lit(v)
        op = rng.choice(ops)
        return graph.op(op, gen(d - 1), gen(d - 1))

    return gen(depth)


def enumerate_exprs(depth: int, atoms, consts, ops, graph: Graph) -> list[int]:
    """Every expression of depth at most ``depth``, smallest depth first."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    levels = [[graph.atom(a) for a in atoms] + [graph.lit(c) for c in consts]]
    everything = list(levels[0])
    for d in range(1, depth + 1):
        shallower = everything
        new = []
        # Exactly depth d: at least one child has depth d - 1.
        prev = set(levels[-1])
        for op in ops:
            for l, r in itertools.product(shallower, repeat=2):
                if l in prev or r in prev:
                    new.append(graph.op(op, l, r))
        levels.append(new)
        everything = everything + new
    return everything
