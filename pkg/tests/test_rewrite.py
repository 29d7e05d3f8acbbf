import ctypes
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import pat, patterns
from peephole_forge.concrete import Graph, apply_binop, evaluate, parse_concrete
from peephole_forge.east import ConstVarLeaf, LitLeaf, OpNode
from peephole_forge.rewrite import (
    _all_constant,
    apply_first,
    easts_of,
    enumerate_exprs,
    fold_constant,
    instantiate_after,
    instantiate_before,
    match_expr,
    random_expr,
    semantic_fuzz_check,
)
from peephole_forge.syntax import BinOp, IntWidth


def graph_of(text, width=IntWidth.I32):
    g = Graph(width)
    return g, parse_concrete(text, g)


ABCD = pat("@Pattern void p(int a, int b, int c, int d) { before((a - b) + (c - d)); after(a); }")
AA = pat("@Pattern void p(int a) { before(a + a); after(a << 1); }")


# -- matching --------------------------------------------------------------


def test_match_binds_compound_subexpression():
    g, root = graph_of("((e + f) - b) + (c - d)")
    b = match_expr(ABCD, g, root)
    assert g.format(b.free["a"]) == "e + f"
    assert g.format(b.free["d"]) == "d"


def test_repeated_variable_needs_same_node():
    g, root = graph_of("1 + 2")
    assert match_expr(AA, g, root) is None
    g, root = graph_of("1 + 1")
    b = match_expr(AA, g, root)
    assert g.node(b.free["a"]) == ("lit", 1)


def test_constant_leaf_needs_literal(corpus):
    p = corpus["pNewAddAddSub1202"]
    g, root = graph_of("(X ^ -1) + Y")
    assert match_expr(p, g, root) is None
    g, root = graph_of("(X ^ -1) + 7")
    assert match_expr(p, g, root).consts == {"c": 7}
    g, root = graph_of("(X ^ -2) + 7")
    assert match_expr(p, g, root) is None


def test_preconditions_checked_after_match():
    p = pat("@Pattern void p(int x, @Constant int c) { before(x * c); if (c != 0) { after(x * c); } }")
    assert match_expr(p, *graph_of("y * 3")) is not None
    assert match_expr(p, *graph_of("y * 0")) is None


def test_width_mismatch_never_matches(padd6_long, corpus):
    g, root = graph_of("(p - q) + (r - p)", IntWidth.I32)
    assert match_expr(corpus["pAdd6"], g, root) is not None
    assert match_expr(padd6_long, g, root) is None


# -- instantiation ---------------------------------------------------------


def test_instantiate_padd6(padd6_long):
    g, root = graph_of("(A - B) + (C - A)", IntWidth.I64)
    b = match_expr(padd6_long, g, root)
    assert g.format(instantiate_after(padd6_long, b, g)) == "C - B"


def test_instantiate_folds_constants(corpus):
    g, root = graph_of("(X ^ -1) + 5")
    new, idx = apply_first([corpus["pNewAddAddSub1202"]], g, root)
    assert idx == 0
    assert g.format(new) == "4 - X"


def test_fold_wraps(corpus):
    g, root = graph_of("(X ^ -1) + -2147483648")
    new, _ = apply_first([corpus["pNewAddAddSub1202"]], g, root)
    assert g.format(new) == "2147483647 - X"


def test_identity_after_returns_bound_node():
    p = pat("@Pattern void p(int a, int b) { before(a & (a | b)); after(a); }")
    g, root = graph_of("(u + v) & ((u + v) | w)")
    new, _ = apply_first([p], g, root)
    assert new == parse_concrete("u + v", g)


def test_apply_first_order(corpus):
    g, root = graph_of("(p - q) + (q - r)")
    new, idx = apply_first([corpus["pAdd2"], corpus["pAdd5"]], g, root)
    assert idx == 0
    assert g.format(new) == "(p + q) - (q + r)"
    new, idx = apply_first([corpus["pAdd5"], corpus["pAdd2"]], g, root)
    assert (idx, g.format(new)) == (0, "p - r")
    assert apply_first([], g, root) == (root, None)


def test_apply_first_skips_non_matching(corpus):
    g, root = graph_of("(p - q) + (q - r)")
    _, idx = apply_first([corpus["pAdd6"], corpus["pNewAddAddSub1156"], corpus["pAdd5"]], g, root)
    assert idx == 2


# -- evaluation ------------------------------------------------------------


@pytest.mark.parametrize(
    "text, env, expected",
    [
        ("2147483647 + 1", {}, -2147483648),
        ("x << 1", {"x": 3}, 6),
        ("(x | y) - (x ^ y)", {"x": 6, "y": 3}, 2),
        ("x & y", {"x": 6, "y": 3}, 2),
        ("x << 33", {"x": 1}, 2),
        ("x >> 1", {"x": -8}, -4),
        ("x >>> 28", {"x": -1}, 15),
        ("x >>> 32", {"x": -1}, -1),
        ("x * x", {"x": 65536}, 0),
    ],
)
def test_evaluate_int(text, env, expected):
    g, root = graph_of(text)
    assert evaluate(g, root, env) == expected


def test_evaluate_long():
    g, root = graph_of("x << 33", IntWidth.I64)
    assert evaluate(g, root, {"x": 1}) == 1 << 33
    g, root = graph_of("x >>> 60", IntWidth.I64)
    assert evaluate(g, root, {"x": -1}) == 15


def test_evaluate_missing_atom():
    g, root = graph_of("x + y")
    with pytest.raises(KeyError, match="'y'"):
        evaluate(g, root, {"x": 1})


def _java_ref(op, a, b, width):
    """Reference semantics via ctypes fixed-width integers."""
    signed, unsigned = (
        (ctypes.c_int32, ctypes.c_uint32) if width is IntWidth.I32 else (ctypes.c_int64, ctypes.c_uint64)
    )
    mask = width.bits - 1
    match op:
        case BinOp.ADD: r = a + b
        case BinOp.SUB: r = a - b
        case BinOp.MUL: r = a * b
        case BinOp.AND: r = a & b
        case BinOp.OR: r = a | b
        case BinOp.XOR: r = a ^ b
        case BinOp.SHL: r = unsigned(a).value << (b & mask)
        case BinOp.SHR: r = a >> (b & mask)
        case BinOp.USHR: r = unsigned(a).value >> (b & mask)
    return signed(r).value


@given(
    st.sampled_from(list(IntWidth)).flatmap(
        lambda w: st.tuples(
            st.just(w),
            st.sampled_from(list(BinOp)),
            st.integers(w.min, w.max),
            st.integers(w.min, w.max),
        )
    )
)
def test_binop_matches_reference(case):
    width, op, a, b = case
    assert apply_binop(op, a, b, width) == _java_ref(op, a, b, width)


# -- fuzzing ---------------------------------------------------------------


@pytest.mark.parametrize("name", ["pAdd6", "pNewSubAddSub1564", "pNewAddAddSub1202"])
def test_fixture_fuzz_passes(corpus, name):
    r = semantic_fuzz_check(corpus[name], trials=10_000, seed=0)
    assert r.ok and r.trials == 10_000


def test_fuzz_long(padd6_long):
    assert semantic_fuzz_check(padd6_long, trials=2_000).ok


def test_fuzz_finds_counterexample():
    r = semantic_fuzz_check(pat("@Pattern void p(int a, int b) { before(a + b); after(a - b); }"))
    assert r.status == "counterexample"
    assert r.env["b"] != 0
    assert r.before_value != r.after_value


def test_fuzz_unsampleable():
    p = pat("@Pattern void p(int x, @Constant int c) { before(x + c); if (c < c) { after(x + c); } }")
    assert semantic_fuzz_check(p, trials=5).status == "unsampleable"


def test_fuzz_respects_preconditions():
    # Sound only when c == 0, which the precondition enforces.
    p = pat(
        "@Pattern void p(int x, @Constant int c) { before((x | c) - c); "
        "if (c == 0) { after(x); } }"
    )
    assert semantic_fuzz_check(p, trials=50).ok


def test_fuzz_rejects_zero_trials(corpus):
    with pytest.raises(ValueError):
        semantic_fuzz_check(corpus["pAdd6"], trials=0)


def test_fuzz_deterministic():
    p = pat("@Pattern void p(int a, int b) { before(a * b); after(a + b); }")
    assert semantic_fuzz_check(p, seed=7) == semantic_fuzz_check(p, seed=7)


# -- expression generation -------------------------------------------------


def test_random_expr_depth_zero():
    g = Graph()
    for seed in range(30):
        nid = random_expr(0, ["p"], [1], [BinOp.ADD], seed, g)
        assert g.node(nid) in (("atom", "p"), ("lit", 1))


def test_random_expr_deterministic():
    g1, g2 = Graph(), Graph()
    a = random_expr(4, "pqr", [-1, 0, 1, 2], list(BinOp), 11, g1)
    b = random_expr(4, "pqr", [-1, 0, 1, 2], list(BinOp), 11, g2)
    assert g1.format(a) == g2.format(b)
    assert g1.depth(a) <= 4


def test_enumeration_count():
    g = Graph()
    exprs = enumerate_exprs(1, ["p", "q"], [0, 1], [BinOp.ADD, BinOp.MUL], g)
    assert len(exprs) == 4 + 2 * 4 * 4
    assert len(set(exprs)) == len(exprs)


def test_enumeration_by_depth():
    g = Graph()
    exprs = enumerate_exprs(2, ["p"], [], [BinOp.SUB], g)
    # depth 0: p; depth 1: p-p; depth 2: three pairs with a depth-1 side
    assert [g.format(e) for e in exprs] == [
        "p", "p - p", "p - (p - p)", "(p - p) - p", "(p - p) - (p - p)",
    ]


# -- properties ------------------------------------------------------------


@st.composite
def pattern_and_instance(draw):
    p = draw(patterns(width=IntWidth.I32))
    g = Graph(p.width)
    rng = random.Random(draw(st.integers(0, 2**32)))
    free = {
        prm.name: random_expr(2, "pqr", [-1, 0, 5], [BinOp.ADD, BinOp.XOR], rng, g)
        for prm in p.free_params
    }
    consts = {prm.name: draw(st.integers(-100, 100)) for prm in p.constant_params}
    return p, g, instantiate_before(p, g, free, consts)


@settings(max_examples=200, deadline=None)
@given(pattern_and_instance())
def test_match_is_sound(case):
    p, g, root = case
    b = match_expr(p, g, root)
    assert b is not None
    size = len(g)
    assert instantiate_before(p, g, b.free, b.consts) == root
    assert len(g) == size


@settings(max_examples=200, deadline=None)
@given(pattern_and_instance())
def test_folding_agrees_with_evaluate(case):
    p, g, root = case
    b = match_expr(p, g, root)
    e = easts_of(p)
    for nid in e.reachable(e.after_root):
        if _all_constant(e, nid):
            folded = fold_constant(e, nid, b.consts)
            plain = Graph(p.width)

            def build(n):
                node = e[n]
                if isinstance(node, OpNode):
                    return plain.op(node.op, build(node.left), build(node.right))
                if isinstance(node, LitLeaf):
                    return plain.lit(node.value)
                assert isinstance(node, ConstVarLeaf)
                return plain.lit(b.consts[node.name])

            assert folded == evaluate(plain, build(nid), {})


@settings(max_examples=100, deadline=None)
@given(st.lists(patterns(width=IntWidth.I32), min_size=1, max_size=4), st.integers(0, 2**32))
def test_apply_first_respects_order(ps, seed):
    g = Graph()
    root = random_expr(3, "pq", [0, 1], list(BinOp), seed, g)
    _, idx = apply_first(ps, g, root)
    matches = [i for i, p in enumerate(ps) if match_expr(p, g, root) is not None]
    assert idx == (matches[0] if matches else None)
