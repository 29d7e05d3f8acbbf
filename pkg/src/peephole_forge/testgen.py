"""Generate IR-shape unit tests from patterns."""
from __future__ import annotations

import zlib
from collections import Counter
from dataclasses import dataclass

from .east import OpNode, PatternEasts, opcode_multiset
from .errors import UnsupportedPattern
from .rewrite import _all_constant, easts_of
from .rng import SplitMix64
from .syntax import Bin, BinOp, Expr, IntWidth, Lit, Pattern, Var, format_expr


@dataclass(frozen=True)
class IrAnnotation:
    fail_on: tuple[str, ...]
    counts: tuple[tuple[str, int], ...]

    def __post_init__(self):
        assert not set(self.fail_on) & {k for k, _ in self.counts}


def _surviving_ops(e: PatternEasts, root: int) -> Counter:
    """Operators of the after side, skipping subtrees that fold to constants."""
    out: Counter = Counter()
    seen = set()

    def walk(nid):
        if nid in seen or _all_constant(e, nid):
            return
        seen.add(nid)
        n = e[nid]
        if isinstance(n, OpNode):
            out[n.op] += 1
            walk(n.left)
            walk(n.right)

    walk(root)
    return out


def derive_ir_annotations(p: Pattern) -> IrAnnotation:
    if p.preconds:
        raise UnsupportedPattern(
            f"{p.name}: patterns with preconditions are unsupported for test generation"
        )
    e = easts_of(p)
    before = opcode_multiset(e.before_root, e)
    after = _surviving_ops(e, e.after_root)
    order = list(BinOp)
    fail_on = tuple(op.ir_token for op in order if before[op] and not after[op])
    counts = tuple((op.ir_token, after[op]) for op in order if after[op])
    return IrAnnotation(fail_on, counts)


def _java_literal(value: int, width: IntWidth) -> str:
    if width is IntWidth.I64 and not IntWidth.I32.contains(value):
        return f"{value}L"
    return str(value)


def draw_constants(p: Pattern, seed: int) -> dict[str, int]:
    rng = SplitMix64(seed)
    return {prm.name: rng.next_signed(p.width.bits) for prm in p.constant_params}


def substitute(e: Expr, values: dict[str, int]) -> Expr:
    match e:
        case Var(name) if name in values:
            return Lit(values[name])
        case Bin(op, l, r):
            return Bin(op, substitute(l, values), substitute(r, values))
    return e


def ir_test_body(p: Pattern, seed: int) -> Expr:
    """before with each constant parameter replaced by a seeded draw."""
    return substitute(p.before, draw_constants(p, seed))


def emit_ir_test(p: Pattern, seed: int = 0) -> str:
    ann = derive_ir_annotations(p)
    width = p.width
    lines = ["@Test"]
    if ann.fail_on:
        toks = ", ".join(f"IRNode.{t}" for t in ann.fail_on)
        lines.append(f"@IR(failOn = {{{toks}}})")
    if ann.counts:
        toks = ", ".join(f'IRNode.{t}, "{n}"' for t, n in ann.counts)
        lines.append(f"@IR(counts = {{{toks}}})")
    after = format_expr(p.after)
    if isinstance(p.after, Bin):
        after = f"({after})"
    lines.append(f"// Checks {format_expr(p.before)} => {after}")
    params = ", ".join(f"{width.java_type} {prm.name}" for prm in p.free_params)
    lines.append(f"public {width.java_type} test{p.name}({params}) {{")
    body = format_expr(ir_test_body(p, seed), lit=lambda v: _java_literal(v, width))
    lines.append(f"  return {body};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def pattern_seed(seed: int, p: Pattern) -> int:
    """Per-pattern seed so tests in one class draw different constants."""
    return (seed ^ zlib.crc32(p.name.encode())) & ((1 << 64) - 1)


def ir_test_class(p: Pattern) -> str:
    root = easts_of(p)[easts_of(p).before_root]
    if not isinstance(root, OpNode):
        raise UnsupportedPattern(f"{p.name}: before must be rooted at an operator")
    return f"Test{root.op.node_name}Node"


def emit_test_classes(patterns, seed: int = 0):
    """Return ({class name: source}, [(pattern name, reason) skipped])."""
    groups: dict[str, list[str]] = {}
    skipped = []
    for p in patterns:
        try:
            method = emit_ir_test(p, pattern_seed(seed, p))
            cls = ir_test_class(p)
        except UnsupportedPattern as exc:
            skipped.append((p.name, str(exc)))
            continue
        groups.setdefault(cls, []).append(method)
    classes = {}
    for cls, methods in groups.items():
        out = [
            "package compiler.c2.irTests;",
            "",
            "import compiler.lib.ir_framework.*;",
            "",
            f"public class {cls} {{",
            "",
            "    public static void main(String[] args) {",
            "        TestFramework.run();",
            "    }",
        ]
        for m in methods:
            out.append("")
            out.extend("    " + line for line in m.splitlines())
        out.append("}")
        classes[cls] = "\n".join(out) + "\n"
    return classes, skipped
