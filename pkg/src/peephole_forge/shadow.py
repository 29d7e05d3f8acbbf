"""Decide whether one pattern shadows another.

X shadows Y when every expression Y matches is also matched by X; placed
after X in a pass, Y can never fire. The decision encodes both before
eASTs over a recursive datatype

    T ::= nil(Int) | tree(Opcode, T, T)

and asks an SMT solver whether

    forall y-nodes, y-values. (PhiY and PreY) => exists x-nodes, x-values. (PhiX and PreX and Psi)

is valid by checking its negation. A brute-force enumerator provides an
independent, one-sided cross-check.
"""
from __future__ import annotations

import enum
import itertools
import math
import os
import shutil
import subprocess
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field

from .concrete import Graph
from .east import ConstVarLeaf, LitLeaf, OpNode, PatternEasts, VarLeaf, all_paths
from .errors import SolverError
from .rewrite import easts_of, enumerate_exprs, instantiate_before, match_expr
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

DEFAULT_TIMEOUT = 10.0
SOLVER_ENV = "PEEPHOLE_FORGE_SOLVER"


class Verdict(enum.Enum):
    YES = "YES"
    NO = "NO"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class ShadowVerdict:
    result: Verdict
    witness: str | None = None

    def __str__(self) -> str:
        return self.result.value


# -- shape prefilter -------------------------------------------------------


def same_shape(ex: PatternEasts, x: int, ey: PatternEasts, y: int) -> bool:
    """Weak structural match: a leaf on either side matches anything."""
    nx, ny = ex[x], ey[y]
    if not isinstance(nx, OpNode) or not isinstance(ny, OpNode):
        return True
    if nx.op is not ny.op or nx.width is not ny.width:
        return False
    return same_shape(ex, nx.left, ey, ny.left) and same_shape(ex, nx.right, ey, ny.right)


def patterns_same_shape(X: Pattern, Y: Pattern) -> bool:
    if X.width is not Y.width:
        return False
    ex, ey = easts_of(X), easts_of(Y)
    return same_shape(ex, ex.before_root, ey, ey.before_root)


# -- SMT encoding ----------------------------------------------------------


def node_numbering(e: PatternEasts) -> dict[int, int]:
    """1-based numbers for before nodes, in preorder of first visit."""
    return {nid: k for k, nid in enumerate(e.reachable(e.before_root), start=1)}


def opcode_constructors() -> list[str]:
    return [op.opcode(w) for w in IntWidth for op in BinOp]


@dataclass
class SmtScript:
    text: str
    universal: list[str]
    existential: list[str]
    phi_x: list[str]
    phi_y: list[str]
    psi: list[tuple[str, str]]
    pre_x: list[str] = field(default_factory=list)
    pre_y: list[str] = field(default_factory=list)


def _smt_int(v: int) -> str:
    return str(v) if v >= 0 else f"(- {-v})"


def _range(var: str, width: IntWidth) -> str:
    return f"(<= {_smt_int(width.min)} {var} {_smt_int(width.max)})"


def _smt_cond(e: Expr, value_var) -> str:
    match e:
        case Var(name):
            return value_var(name)
        case Lit(v):
            return _smt_int(v)
        case BoolLit(v):
            return "true" if v else "false"
        case Bin(op, l, r) if op in _SMT_ARITH:
            return f"({_SMT_ARITH[op]} {_smt_cond(l, value_var)} {_smt_cond(r, value_var)})"
        case Cmp("!=", l, r):
            return f"(not (= {_smt_cond(l, value_var)} {_smt_cond(r, value_var)}))"
        case Cmp(op, l, r):
            sym = "=" if op == "==" else op
            return f"({sym} {_smt_cond(l, value_var)} {_smt_cond(r, value_var)})"
        case Logic(op, l, r):
            sym = "and" if op == "&&" else "or"
            return f"({sym} {_smt_cond(l, value_var)} {_smt_cond(r, value_var)})"
        case Not(x):
            return f"(not {_smt_cond(x, value_var)})"
    raise ValueError(f"cannot encode precondition term {e!r}")


_SMT_ARITH = {BinOp.ADD: "+", BinOp.SUB: "-", BinOp.MUL: "*"}


class _Side:
    """Variables and shape constraints for one pattern's before eAST."""

    def __init__(self, p: Pattern, tag: str):
        self.p = p
        self.e = easts_of(p)
        self.tag = tag
        self.num = node_numbering(self.e)
        self.node_vars = [self.var(n) for n in self.num]
        self.value_vars = [f"v{tag}_{prm.name}" for prm in p.constant_params
                           if self._uses_const(prm.name)]

    def _uses_const(self, name):
        return any(isinstance(self.e[n], ConstVarLeaf) and self.e[n].name == name
                   for n in self.num)

    def var(self, nid: int) -> str:
        return f"{self.tag}{self.num[nid]}"

    def value_var(self, name: str) -> str:
        return f"v{self.tag}_{name}"

    def shape(self) -> list[str]:
        out = []
        width = self.p.width
        for nid in self.num:
            n = self.e[nid]
            v = self.var(nid)
            if isinstance(n, OpNode):
                opc = n.op.opcode(width)
                out.append(f"(= {v} (tree {opc} {self.var(n.left)} {self.var(n.right)}))")
            elif isinstance(n, LitLeaf):
                out.append(f"(= {v} (nil {_smt_int(n.value)}))")
            elif isinstance(n, ConstVarLeaf):
                w = self.value_var(n.name)
                out.append(f"(= {v} (nil {w}))")
                out.append(_range(w, width))
        return out

    def preconds(self) -> list[str]:
        return [_smt_cond(c, self.value_var) for c in self.p.preconds]


def _equivalence(x: _Side, y: _Side) -> list[tuple[str, str]]:
    """Lockstep DFS from both roots; one equality per visited pair."""
    pairs: list[tuple[str, str]] = []
    seen = set()

    def dfs(a: int, b: int):
        pair = (x.var(a), y.var(b))
        if pair not in seen:
            seen.add(pair)
            pairs.append(pair)
        na, nb = x.e[a], y.e[b]
        if isinstance(na, OpNode) and isinstance(nb, OpNode):
            dfs(na.left, nb.left)
            dfs(na.right, nb.right)

    dfs(x.e.before_root, y.e.before_root)
    return pairs


def _conj(items: list[str], indent: str) -> str:
    if not items:
        return "true"
    if len(items) == 1:
        return items[0]
    inner = ("\n" + indent + "     ").join(items)
    return f"(and {inner})"


def encode_shadow_smt(X: Pattern, Y: Pattern) -> SmtScript:
    x, y = _Side(X, "x"), _Side(Y, "y")
    phi_x, phi_y = x.shape(), y.shape()
    pre_x, pre_y = x.preconds(), y.preconds()
    psi = _equivalence(x, y)
    universal = y.node_vars + y.value_vars
    existential = x.node_vars + x.value_vars

    def binders(names, sort_of):
        return " ".join(f"({n} {sort_of(n)})" for n in names)

    sort = lambda n: "Int" if n.startswith("v") else "T"
    psi_terms = [f"(= {a} {b})" for a, b in psi]
    body = _conj(phi_x + pre_x + psi_terms, "      ")
    antecedent = _conj(phi_y + pre_y, "    ")
    formula = (
        f"(forall ({binders(universal, sort)})\n"
        f"  (=> {antecedent}\n"
        f"    (exists ({binders(existential, sort)})\n"
        f"      {body})))"
    )
    ctors = " ".join(f"({c})" for c in opcode_constructors())
    lines = [
        f"; does {X.name} shadow {Y.name}?",
        "(set-logic ALL)",
        f"(declare-datatypes ((Opcode 0)) (({ctors})))",
        "(declare-datatypes ((T 0)) (((nil (nil_val Int)) "
        "(tree (tree_op Opcode) (tree_l T) (tree_r T)))))",
        f"(assert (not {formula}))",
        "(check-sat)",
        "",
    ]
    return SmtScript("\n".join(lines), universal, existential, phi_x, phi_y, psi, pre_x, pre_y)


# -- solver driver ---------------------------------------------------------


def resolve_solver(solver: str | None = None) -> str:
    candidate = solver or os.environ.get(SOLVER_ENV) or "z3"
    path = shutil.which(candidate)
    if path is None:
        raise SolverError(f"SMT solver {candidate!r} not found")
    return path


def _solver_command(path: str, timeout: float) -> list[str]:
    base = os.path.basename(path)
    if base.startswith("cvc5"):
        return [path, "--lang=smt2", f"--tlimit={int(timeout * 1000)}", "-"]
    return [path, "-smt2", "-in", f"-T:{max(1, math.ceil(timeout))}"]


def run_solver(script: str, timeout: float = DEFAULT_TIMEOUT, solver: str | None = None) -> str:
    """Return the solver's answer: ``sat``, ``unsat`` or ``unknown``."""
    if timeout <= 0:
        raise ValueError("timeout must be positive")
    cmd = _solver_command(resolve_solver(solver), timeout)
    try:
        proc = subprocess.run(
            cmd, input=script, capture_output=True, text=True, timeout=timeout + 5
        )
    except subprocess.TimeoutExpired:
        return "unknown"
    except OSError as exc:
        raise SolverError(f"cannot run {cmd[0]}: {exc}") from exc
    lines = [ln.strip() for ln in proc.stdout.splitlines() if ln.strip()]
    answer = lines[0] if lines else ""
    if answer in ("sat", "unsat", "unknown"):
        return answer
    if answer == "timeout":
        return "unknown"
    raise SolverError(
        f"unexpected solver output (exit {proc.returncode}): "
        f"{(proc.stdout + proc.stderr).strip()[:500]}"
    )


def determine_shadow(
    X: Pattern, Y: Pattern, timeout: float = DEFAULT_TIMEOUT, solver: str | None = None
) -> ShadowVerdict:
    if not patterns_same_shape(X, Y):
        return ShadowVerdict(Verdict.NO, "shape-mismatch")
    script = encode_shadow_smt(X, Y)
    answer = run_solver(script.text, timeout, solver)
    if answer == "unsat":
        return ShadowVerdict(Verdict.YES, "unsat")
    if answer == "sat":
        return ShadowVerdict(Verdict.NO, "sat")
    return ShadowVerdict(Verdict.UNKNOWN, answer)


# -- brute-force oracle ----------------------------------------------------

DEFAULT_ATOMS = ("p", "q", "r")
DEFAULT_CONSTS = (-1, 0, 1, 2)


@dataclass(frozen=True)
class Witness:
    graph: Graph
    root: int

    def __str__(self) -> str:
        return self.graph.format(self.root)


def _max_depths(e: PatternEasts) -> dict[int, int]:
    deepest: dict[int, int] = {}
    for path, nid in all_paths(e):
        deepest[nid] = max(deepest.get(nid, 0), len(path))
    return deepest


def y_matches(Y: Pattern, ops, depth: int, atoms, consts, graph: Graph):
    """Yield every expression of depth <= ``depth`` over ``atoms``/``consts``
    and ``ops`` that ``Y`` matches.

    Rather than filtering the full (astronomically large) expression space,
    Y's before is instantiated with every binding whose subterms fit the
    remaining depth budget; the two sets coincide.
    """
    e = easts_of(Y)
    deepest = _max_depths(e)
    consts = [c for c in consts if Y.width.contains(c)]
    if max(deepest.values()) > depth:
        return
    if any(isinstance(e[n], LitLeaf) and e[n].value not in consts for n in deepest):
        return
    pools = {}
    free_names, free_pools = [], []
    for nid, d in deepest.items():
        n = e[nid]
        if isinstance(n, VarLeaf):
            budget = depth - d
            if budget not in pools:
                pools[budget] = enumerate_exprs(budget, atoms, consts, ops, graph)
            free_names.append(n.name)
            free_pools.append(pools[budget])
    const_names = [n.name for n in map(e.__getitem__, deepest) if isinstance(n, ConstVarLeaf)]
    for const_values in itertools.product(consts, repeat=len(const_names)):
        cv = dict(zip(const_names, const_values))
        for choice in itertools.product(*free_pools):
            mark = graph.mark()
            root = instantiate_before(Y, graph, dict(zip(free_names, choice)), cv)
            # Without preconditions an instantiation always matches.
            if not Y.preconds or match_expr(Y, graph, root) is not None:
                yield root
            graph.rollback(mark)


def brute_force_counterexample(
    X: Pattern,
    Y: Pattern,
    depth: int = 3,
    atoms=DEFAULT_ATOMS,
    consts=DEFAULT_CONSTS,
) -> Witness | None:
    """First expression matched by Y but not X, or None if none exists
    within the bound (which is evidence, not proof, of shadowing)."""
    if X.width is not Y.width:
        # X never matches at Y's width, so any Y match is a witness.
        return _first_match(Y, depth, atoms, consts)
    ops = sorted(
        {n.op for n in easts_of(X).arena if isinstance(n, OpNode)}
        | {n.op for n in easts_of(Y).arena if isinstance(n, OpNode)},
        key=list(BinOp).index,
    )
    g = Graph(Y.width)
    for root in y_matches(Y, ops, depth, atoms, consts, g):
        if match_expr(X, g, root) is None:
            return Witness(g, root)
    return None


def _first_match(Y, depth, atoms, consts):
    g = Graph(Y.width)
    ops = sorted({n.op for n in easts_of(Y).arena if isinstance(n, OpNode)}, key=list(BinOp).index)
    for root in y_matches(Y, ops, depth, atoms, consts, g):
        return Witness(g, root)
    return None


# -- all pairs -------------------------------------------------------------


def shadow_matrix(
    patterns,
    timeout: float = DEFAULT_TIMEOUT,
    workers: int | None = None,
    solver: str | None = None,
) -> dict[tuple[int, int], ShadowVerdict]:
    """Verdicts for every ordered pair (i, j), i != j: does i shadow j?"""
    patterns = list(patterns)
    pairs = [(i, j) for i in range(len(patterns)) for j in range(len(patterns)) if i != j]
    if not pairs:
        return {}
    resolve_solver(solver)
    results: dict[tuple[int, int], ShadowVerdict] = {}
    failures = []

    def check(pair):
        i, j = pair
        return pair, determine_shadow(patterns[i], patterns[j], timeout, solver)

    with ThreadPoolExecutor(max_workers=workers or os.cpu_count() or 1) as pool:
        futures = [pool.submit(check, pair) for pair in pairs]
        for fut, pair in zip(futures, pairs):
            try:
                key, verdict = fut.result()
                results[key] = verdict
            except SolverError as exc:
                failures.append(f"{patterns[pair[0]].name} vs {patterns[pair[1]].name}: {exc}")
    if failures:
        raise SolverError("; ".join(failures))
    return results


@dataclass(frozen=True)
class OracleCheck:
    pair: tuple[int, int]
    verdict: Verdict
    witness: str | None

    @property
    def disagrees(self) -> bool:
        """A YES verdict contradicted by a concrete witness."""
        return self.verdict is Verdict.YES and self.witness is not None


def _oracle_job(args):
    X, Y, depth, atoms, consts = args
    w = brute_force_counterexample(X, Y, depth, atoms, consts)
    return None if w is None else str(w)


def oracle_cross_check(
    patterns,
    matrix,
    depth: int = 3,
    atoms=DEFAULT_ATOMS,
    consts=DEFAULT_CONSTS,
    workers: int | None = None,
) -> list[OracleCheck]:
    """Run the enumerator on every pair of ``matrix`` in parallel.

    A witness refutes a YES; finding none for a NO only means the bound
    was too small.
    """
    patterns = list(patterns)
    keys = sorted(matrix)
    jobs = [(patterns[i], patterns[j], depth, tuple(atoms), tuple(consts)) for i, j in keys]
    if not jobs:
        return []
    with ProcessPoolExecutor(max_workers=workers or os.cpu_count() or 1) as pool:
        witnesses = list(pool.map(_oracle_job, jobs))
    return [OracleCheck(k, matrix[k].result, w) for k, w in zip(keys, witnesses)]


def format_report(patterns, matrix, witnesses=None) -> str:
    """Tab-separated ``X  Y  verdict  witness`` lines in pair order."""
    witnesses = witnesses or {}
    lines = []
    for (i, j) in sorted(matrix):
        v = matrix[(i, j)]
        w = witnesses.get((i, j), v.witness) or ""
        lines.append(f"{patterns[i].name}\t{patterns[j].name}\t{v.result.value}\t{w}")
    return "\n".join(lines) + ("\n" if lines else "")
