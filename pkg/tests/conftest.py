import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from peephole_forge.concrete import Graph
from peephole_forge.east import LitLeaf, OpNode
from peephole_forge.parser import parse_pattern, parse_pattern_file
from peephole_forge.rewrite import easts_of, instantiate_before, random_expr
from peephole_forge.syntax import Bin, BinOp, IntWidth, Lit, Param, ParamKind, Pattern, Var, variables

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
GOLDEN = Path(__file__).resolve().parent / "golden"


def load(name):
    return parse_pattern_file((CORPUS / name).read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def corpus():
    """The int fixture corpus, by name, in file order."""
    return {p.name: p for p in load("ideal_add_sub.pat")}


@pytest.fixture(scope="session")
def padd6_long():
    (p,) = load("add_long.pat")
    return p


@pytest.fixture(scope="session")
def shadow_pair():
    u, v = load("shadow_pair.pat")
    return u, v


def pat(src: str) -> Pattern:
    return parse_pattern(src)


# -- candidate expressions -------------------------------------------------


def _literals(p):
    e = easts_of(p)
    return sorted({n.value for n in e.arena if isinstance(n, LitLeaf)})


def match_candidates(p, n, seed):
    """Mix of random expressions and perturbed instantiations of before."""
    rng = random.Random(seed)
    g = Graph(p.width)
    consts = sorted({-1, 0, 1, 2, *_literals(p)})
    pattern_ops = sorted(
        {n.op for n in easts_of(p).arena if isinstance(n, OpNode)}, key=list(BinOp).index
    )
    out = []
    for i in range(n):
        kind = i % 3
        if kind == 0:
            ops = pattern_ops if rng.random() < 0.7 else list(BinOp)
            out.append(random_expr(rng.randint(1, 4), "pqr", consts, ops, rng, g))
        else:
            # Instantiate with small pools so repeated variables collide often.
            pool = [random_expr(rng.randint(0, 1), "pq", consts[:2], pattern_ops, rng, g)
                    for _ in range(2)]
            free = {prm.name: rng.choice(pool) for prm in p.free_params}
            cvals = {prm.name: rng.choice(consts) for prm in p.constant_params}
            out.append(instantiate_before(p, g, free, cvals))
    return g, out


# -- hypothesis strategies -------------------------------------------------

FREE = ["a", "b", "c"]
CONSTS = ["k", "m"]


def exprs(names, width=IntWidth.I32, max_leaves=6):
    leaves = st.one_of(
        st.sampled_from(names).map(Var),
        st.integers(width.min, width.max).map(Lit),
    )
    return st.recursive(
        leaves,
        lambda kids: st.builds(Bin, st.sampled_from(list(BinOp)), kids, kids),
        max_leaves=max_leaves,
    )


@st.composite
def patterns(draw, width=None):
    """Valid, precondition-free patterns (not necessarily sound)."""
    width = width or draw(st.sampled_from(list(IntWidth)))
    n_free = draw(st.integers(1, len(FREE)))
    n_const = draw(st.integers(0, len(CONSTS)))
    free, consts = FREE[:n_free], CONSTS[:n_const]
    before = draw(
        st.builds(Bin, st.sampled_from(list(BinOp)),
                  exprs(free + consts, width, 4), exprs(free + consts, width, 4))
    )
    bound = sorted(set(variables(before)))
    if not bound:
        before = Bin(BinOp.ADD, before, Var(free[0]))
        bound = sorted(set(variables(before)))
    after = draw(exprs(bound, width, 4))
    params = tuple(
        Param(n, width, ParamKind.CONSTANT if n in CONSTS else ParamKind.FREE)
        for n in free + consts
    )
    return Pattern("pGen", params, before, after)


# -- acceptance reporting --------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
