"""Command-line entry point.

Exit status: 0 success, 1 a verification counterexample or a shadow
verdict contradicted by the oracle, 2 bad usage or input, 3 the SMT
solver is missing or misbehaved.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .codegen import emit_pass_file
from .errors import ForgeError, LexError, PatternError, SolverError, UnsupportedPattern
from .metrics import Language, measure
from .parser import parse_pattern_file
from .rewrite import semantic_fuzz_check
from .shadow import (
    DEFAULT_TIMEOUT,
    Verdict,
    encode_shadow_smt,
    format_report,
    oracle_cross_check,
    patterns_same_shape,
    shadow_matrix,
)
from .testgen import emit_test_classes

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INFRA = 0, 1, 2, 3
COMMANDS = ("translate", "gen-tests", "verify", "shadow", "metrics")


@dataclass
class RunConfig:
    inputs: list[Path]
    out: Path = Path(".")
    seed: int = 0
    timeout_secs: float = DEFAULT_TIMEOUT
    depth: int = 3
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    solver: str | None = None
    oracle: bool = False
    trials: int = 10_000

    def __post_init__(self):
        if self.timeout_secs <= 0:
            raise ValueError("--timeout-secs must be positive")
        if self.workers < 1:
            raise ValueError("--workers must be at least 1")
        if self.depth < 0:
            raise ValueError("--depth must be non-negative")
        if self.trials < 1:
            raise ValueError("--trials must be at least 1")


def write_atomic(path: Path, text: str) -> None:
    """Write UTF-8 text with LF newlines via a temporary file and rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_all(files: dict[Path, str]) -> None:
    # Everything is computed before the first write, so a failure never
    # leaves a half-updated output tree behind.
    for path, text in files.items():
        write_atomic(path, text)


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise PatternError(f"cannot read {path}: {exc.strerror}") from exc


def _load(config: RunConfig, unique: bool = True):
    """Parse every input; with ``unique``, names must not repeat across files."""
    per_file = []
    owner: dict[str, Path] = {}
    for path in config.inputs:
        source = _read(path)
        try:
            patterns = parse_pattern_file(source)
        except PatternError as exc:
            raise PatternError(f"{path}: {exc}") from exc
        for p in patterns:
            if unique and p.name in owner:
                raise PatternError(f"{path}: pattern {p.name} already defined in {owner[p.name]}")
            owner[p.name] = path
        per_file.append((path, patterns))
    return per_file


def cmd_translate(config: RunConfig) -> int:
    files = {}
    for path, patterns in _load(config, unique=False):
        if not patterns:
            raise PatternError(f"{path}: no patterns")
        files[config.out / f"{path.stem}.cpp"] = emit_pass_file(patterns)
    _write_all(files)
    for target in files:
        print(f"wrote {target}")
    return EXIT_OK


def cmd_gen_tests(config: RunConfig) -> int:
    patterns = [p for _, ps in _load(config) for p in ps]
    classes, skipped = emit_test_classes(patterns, config.seed)
    for name, reason in skipped:
        print(f"skipped {reason}", file=sys.stderr)
    files = {config.out / f"{cls}.java": text for cls, text in classes.items()}
    _write_all(files)
    for target in files:
        print(f"wrote {target}")
    return EXIT_OK


def cmd_verify(config: RunConfig) -> int:
    rows = ["file\tpattern\tstatus\ttrials\tdetail"]
    failed = 0
    for path, patterns in _load(config, unique=False):
        for p in patterns:
            r = semantic_fuzz_check(p, config.trials, config.seed)
            detail = ""
            if r.status == "counterexample":
                failed += 1
                env = ", ".join(f"{k}={v}" for k, v in sorted(r.env.items()))
                detail = f"{env}: before={r.before_value} after={r.after_value}"
                print(f"{p.name}: counterexample {detail}", file=sys.stderr)
            elif r.status == "unsampleable":
                detail = "preconditions rejected every sampled constant"
                print(f"{p.name}: warning: {detail}", file=sys.stderr)
            rows.append(f"{path}\t{p.name}\t{r.status}\t{r.trials}\t{detail}")
    _write_all({config.out / "verify.tsv": "\n".join(rows) + "\n"})
    print(f"{len(rows) - 1} patterns checked, {failed} with counterexamples")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_shadow(config: RunConfig) -> int:
    patterns = [p for _, ps in _load(config) for p in ps]
    matrix = shadow_matrix(patterns, config.timeout_secs, config.workers, config.solver)
    files = {}
    for (i, j) in sorted(matrix):
        X, Y = patterns[i], patterns[j]
        if patterns_same_shape(X, Y):
            files[config.out / "smt" / f"{X.name}__{Y.name}.smt2"] = encode_shadow_smt(X, Y).text
    witnesses = {}
    disagreements = []
    if config.oracle:
        checks = oracle_cross_check(
            patterns, matrix, depth=config.depth, workers=config.workers
        )
        for c in checks:
            if c.witness is not None:
                witnesses[c.pair] = c.witness
            if c.disagrees:
                disagreements.append(c)
    files[config.out / "shadow.tsv"] = format_report(patterns, matrix, witnesses)

    counts = {v: sum(1 for r in matrix.values() if r.result is v) for v in Verdict}
    summary = [
        f"{len(patterns)} patterns, {len(matrix)} ordered pairs: "
        f"{counts[Verdict.YES]} YES, {counts[Verdict.NO]} NO, {counts[Verdict.UNKNOWN]} UNKNOWN"
    ]
    for (i, j), v in sorted(matrix.items()):
        if v.result is Verdict.YES:
            summary.append(f"  {patterns[i].name} shadows {patterns[j].name}")
        elif v.result is Verdict.UNKNOWN:
            summary.append(f"  {patterns[i].name} vs {patterns[j].name}: undecided ({v.witness})")
    if config.oracle:
        summary.append(
            f"oracle (depth {config.depth}): {len(disagreements)} disagreement(s)"
        )
        for c in disagreements:
            i, j = c.pair
            summary.append(
                f"  {patterns[i].name} reported to shadow {patterns[j].name}, "
                f"but {c.witness} is a counterexample"
            )
    text = "\n".join(summary) + "\n"
    files[config.out / "shadow-summary.txt"] = text
    _write_all(files)
    sys.stdout.write(text)
    return EXIT_FAIL if disagreements else EXIT_OK


def cmd_metrics(config: RunConfig) -> int:
    rows = ["file\tcharacters\tidentifiers"]
    for path in config.inputs:
        try:
            language = Language.for_path(path)
        except ValueError as exc:
            raise PatternError(str(exc)) from exc
        c = measure(_read(path), language)
        rows.append(f"{path}\t{c.characters}\t{c.identifiers}")
    text = "\n".join(rows) + "\n"
    _write_all({config.out / "metrics.tsv": text})
    sys.stdout.write(text)
    return EXIT_OK


_HANDLERS = {
    "translate": cmd_translate,
    "gen-tests": cmd_gen_tests,
    "verify": cmd_verify,
    "shadow": cmd_shadow,
    "metrics": cmd_metrics,
}


def run(command: str, config: RunConfig) -> int:
    try:
        return _HANDLERS[command](config)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFRA
    except (PatternError, LexError, UnsupportedPattern) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("inputs", nargs="+", type=Path, metavar="FILE")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--timeout-secs", type=float, default=DEFAULT_TIMEOUT,
                        help="solver time limit per pattern pair")
    common.add_argument("--depth", type=int, default=3, help="oracle expression depth")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    common.add_argument("--solver", help="SMT solver executable "
                        "(default: $PEEPHOLE_FORGE_SOLVER, then z3 on PATH)")
    common.add_argument("--oracle", action="store_true",
                        help="cross-check shadow verdicts by enumeration")
    common.add_argument("--trials", type=int, default=10_000,
                        help="random environments per pattern for verify")

    parser = argparse.ArgumentParser(prog="peephole-forge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "translate": "emit C++ Ideal() bodies for each pattern file",
        "gen-tests": "emit IR-shape test classes",
        "verify": "fuzz each pattern for before/after equivalence",
        "shadow": "decide shadowing for every ordered pattern pair",
        "metrics": "count non-whitespace characters and identifiers",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig(
            inputs=args.inputs,
            out=args.out,
            seed=args.seed,
            timeout_secs=args.timeout_secs,
            depth=args.depth,
            workers=args.workers,
            solver=args.solver,
            oracle=args.oracle,
            trials=args.trials,
        )
    except ValueError as exc:
        parser.error(str(exc))
    return run(args.command, config)


if __name__ == "__main__":
    sys.exit(main())
