"""Emit HotSpot-style C++ matcher/rewriter code from patterns.

A snippet has three parts: guarded input declarations for every path of
the before eAST, one ``if`` conjoining all match conditions, and a return
statement that builds the after expression.
"""
from __future__ import annotations

from dataclasses import dataclass

from .east import (
    ConstVarLeaf,
    LitLeaf,
    OpNode,
    PatternEasts,
    VarLeaf,
    all_paths,
    canonical_paths,
)
from .errors import UnsupportedPattern
from .rewrite import _all_constant, easts_of, fold_constant
from .syntax import Bin, IntWidth, Lit, Pattern, Var, format_expr, variables

PREFIX = "_P_"


@dataclass(frozen=True)
class EmittedSnippet:
    pattern_name: str
    root_opcode: str
    text: str
    opcodes: tuple[str, ...]


def path_var(path) -> str:
    return f"{PREFIX}in" + "".join(map(str, path))


def const_var(name: str) -> str:
    return f"{PREFIX}con_{name}"


def _con(width: IntWidth):
    if width is IntWidth.I32:
        return "Op_ConI", "get_int", "jint", "intcon"
    return "Op_ConL", "get_long", "jlong", "longcon"


def _literal(value: int, width: IntWidth) -> str:
    if width is IntWidth.I64 and not IntWidth.I32.contains(value):
        return f"CONST64({value})"
    return str(value)


def root_opcode(p: Pattern) -> str:
    root = easts_of(p)[easts_of(p).before_root]
    if not isinstance(root, OpNode):
        raise UnsupportedPattern(f"{p.name}: before must be rooted at an operator")
    return root.op.opcode(p.width)


def emit_matcher_snippet(p: Pattern) -> EmittedSnippet:
    e = easts_of(p)
    width = p.width
    con_op, getter, ctype, ctor = _con(width)
    lit = lambda v: _literal(v, width)
    root = root_opcode(p)
    paths = canonical_paths(e)
    canon = {nid: c for nid, (c, _) in paths.items()}
    lines: list[str] = []

    # (1) declarations, one per access path, in lexicographic order
    for path, _ in all_paths(e):
        if not path:
            continue
        name = path_var(path)
        if len(path) == 1:
            lines.append(f"Node* {name} = in({path[0]});")
        else:
            parent = path_var(path[:-1])
            k = path[-1]
            lines.append(
                f"Node* {name} = {parent} != NULL && {k} < {parent}->req() ? "
                f"{parent}->in({k}) : NULL;"
            )
    # constant values read by preconditions or folded after-side arithmetic
    needed = {v for c in p.preconds for v in variables(c)}
    for nid in e.reachable(e.after_root):
        if isinstance(e[nid], OpNode) and _all_constant(e, nid):
            needed.update(e[m].name for m in e.reachable(nid) if isinstance(e[m], ConstVarLeaf))
    used_consts = [prm.name for prm in p.constant_params if prm.name in needed]
    for cname in used_consts:
        nid = next(n for n in paths if isinstance(e[n], ConstVarLeaf) and e[n].name == cname)
        node = path_var(canon[nid])
        lines.append(
            f"{ctype} {const_var(cname)} = {node} != NULL && {node}->Opcode() == {con_op} ? "
            f"{node}->{getter}() : 0;"
        )

    # (2) conditions: opcodes, constants, same-node, preconditions
    ordered = sorted(paths, key=lambda n: canon[n])
    conds: list[str] = []
    opcodes = [root]
    for nid in ordered:
        n = e[nid]
        if isinstance(n, OpNode) and canon[nid]:
            opc = n.op.opcode(width)
            opcodes.append(opc)
            conds.append(f"{path_var(canon[nid])}->Opcode() == Op_{opc}")
    for nid in ordered:
        n = e[nid]
        if isinstance(n, (ConstVarLeaf, LitLeaf)):
            if not canon[nid]:
                raise UnsupportedPattern(f"{p.name}: before must be rooted at an operator")
            var = path_var(canon[nid])
            conds.append(f"{var}->Opcode() == {con_op}")
            if isinstance(n, LitLeaf):
                conds.append(f"{var}->{getter}() == {lit(n.value)}")
    same = []
    for nid in ordered:
        c, every = paths[nid]
        for other in every[1:]:
            same.append((other, f"{path_var(c)} == {path_var(other)}"))
    conds.extend(text for _, text in sorted(same))
    for cond in p.preconds:
        conds.append(f"({format_expr(cond, name=const_var, lit=lit)})")

    if conds:
        lines.append(f"if ({conds[0]}")
        for c in conds[1:]:
            lines.append(f"    && {c}")
        lines[-1] += ") {"
    else:
        lines.append("if (true) {")

    # (3) construction of the after side
    ret = _emit_after(p, e, canon, e.after_root, top=True)
    lines.append(f"  return {ret};")
    lines.append("}")
    return EmittedSnippet(p.name, root, "\n".join(lines) + "\n", tuple(opcodes))


def _emit_after(p: Pattern, e: PatternEasts, canon, nid: int, top: bool) -> str:
    width = p.width
    _, _, _, ctor = _con(width)
    n = e[nid]
    if isinstance(n, (VarLeaf, ConstVarLeaf)):
        return path_var(canon[nid])
    if _all_constant(e, nid):
        if isinstance(n, LitLeaf) or not any(
            isinstance(e[m], ConstVarLeaf) for m in e.reachable(nid)
        ):
            value = fold_constant(e, nid, {})
            return f"phase->{ctor}({_literal(value, width)})"
        sym = format_expr(_as_expr(e, nid), name=const_var, lit=lambda v: _literal(v, width))
        return f"phase->{ctor}({sym})"
    assert isinstance(n, OpNode)
    left = _emit_after(p, e, canon, n.left, top=False)
    right = _emit_after(p, e, canon, n.right, top=False)
    new = f"new {n.op.opcode(width)}Node({left}, {right})"
    return new if top else f"phase->transform({new})"


def _as_expr(e: PatternEasts, nid: int):
    n = e[nid]
    if isinstance(n, OpNode):
        return Bin(n.op, _as_expr(e, n.left), _as_expr(e, n.right))
    if isinstance(n, LitLeaf):
        return Lit(n.value)
    return Var(n.name)


def _indent(text: str, by: str) -> str:
    return "".join(by + line if line.strip() else line for line in text.splitlines(True))


def emit_pass_file(patterns) -> str:
    """Group snippets by before-root opcode into ``Ideal`` bodies.

    Groups appear in order of first occurrence; snippets keep file order
    within a group.
    """
    patterns = list(patterns)
    if not patterns:
        raise ValueError("no patterns to emit")
    groups: dict[str, list[EmittedSnippet]] = {}
    for p in patterns:
        s = emit_matcher_snippet(p)
        groups.setdefault(s.root_opcode, []).append(s)
    out = ["// Generated by peephole-forge. Do not edit.", ""]
    by_name = {p.name: p for p in patterns}
    for opcode, snippets in groups.items():
        out.append(f"Node *{opcode}Node::Ideal(PhaseGVN *phase, bool can_reshape) {{")
        for s in snippets:
            p = by_name[s.pattern_name]
            out.append(
                f"  // {s.pattern_name}: {format_expr(p.before)} => {format_expr(p.after)}"
            )
            out.append("  {")
            out.append(_indent(s.text, "    ").rstrip("\n"))
            out.append("  }")
        out.append("  return NULL;")
        out.append("}")
        out.append("")
    return "\n".join(out)
