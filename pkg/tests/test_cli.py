import os
import shutil
import subprocess
import sys

import pytest

from conftest import CORPUS, ROOT
from peephole_forge.cli import EXIT_FAIL, EXIT_INFRA, EXIT_OK, EXIT_USAGE, RunConfig, main

requires_solver = pytest.mark.skipif(shutil.which("z3") is None, reason="z3 not on PATH")

IDEAL = str(CORPUS / "ideal_add_sub.pat")
ADD_LONG = str(CORPUS / "add_long.pat")
SHADOW_PAIR = str(CORPUS / "shadow_pair.pat")


def tree(root):
    """Relative path -> bytes for every file below root."""
    out = {}
    for dirpath, _, names in os.walk(root):
        for n in names:
            p = os.path.join(dirpath, n)
            out[os.path.relpath(p, root)] = open(p, "rb").read()
    return out


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def padd_subset(tmp_path):
    text = (CORPUS / "ideal_add_sub.pat").read_text(encoding="utf-8")
    return write(tmp_path, "padd.pat", text[text.index("@Pattern\npublic void pAdd2"):])


def test_translate(tmp_path, capsys):
    assert main(["translate", IDEAL, ADD_LONG, "--out", str(tmp_path)]) == EXIT_OK
    assert sorted(tree(tmp_path)) == ["add_long.cpp", "ideal_add_sub.cpp"]
    golden = (ROOT / "tests" / "golden" / "ideal_add_sub.cpp").read_bytes()
    assert (tmp_path / "ideal_add_sub.cpp").read_bytes() == golden


def test_gen_tests_skips_precondition_pattern(tmp_path, capsys):
    assert main(["gen-tests", IDEAL, "--out", str(tmp_path)]) == EXIT_OK
    err = capsys.readouterr().err
    assert "skipped" in err and "pNewSubAddSub1574" in err
    files = tree(tmp_path)
    assert sorted(files) == ["TestAddNode.java", "TestSubNode.java"]
    assert b"pNewSubAddSub1574" not in b"".join(files.values())
    assert b"testpNewSubAddSub1564" in files["TestSubNode.java"]


def test_verify_corpus(tmp_path, capsys):
    assert main(["verify", IDEAL, ADD_LONG, "--trials", "500", "--out", str(tmp_path / "o")]) == EXIT_OK
    rows = (tmp_path / "o" / "verify.tsv").read_text().splitlines()
    assert rows[0] == "file\tpattern\tstatus\ttrials\tdetail"
    assert len(rows) == 12
    assert all(r.split("\t")[2] == "pass" for r in rows[1:])
    assert rows[-1].startswith(f"{ADD_LONG}\tpAdd6\tpass\t500")


def test_verify_counterexample(tmp_path, capsys):
    bad = write(tmp_path, "bad.pat", "@Pattern void wrong(int a, int b) { before(a + b); after(a - b); }")
    assert main(["verify", bad, "--out", str(tmp_path)]) == EXIT_FAIL
    assert "wrong: counterexample" in capsys.readouterr().err
    row = (tmp_path / "verify.tsv").read_text().splitlines()[1]
    assert row.startswith(f"{bad}\twrong\tcounterexample\t")


def test_verify_unsampleable_is_a_warning(tmp_path, capsys):
    src = "@Pattern void never(int x, @Constant int c) { before(x + c); if (c < c) { after(x + c); } }"
    assert main(["verify", write(tmp_path, "n.pat", src), "--trials", "10", "--out", str(tmp_path)]) == EXIT_OK
    assert "warning" in capsys.readouterr().err


@requires_solver
def test_shadow_report(tmp_path, capsys):
    assert main(["shadow", SHADOW_PAIR, "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "2 patterns, 2 ordered pairs: 1 YES, 1 NO, 0 UNKNOWN" in out
    assert "V shadows U" in out
    rows = (tmp_path / "shadow.tsv").read_text().splitlines()
    assert rows == ["U\tV\tNO\tsat", "V\tU\tYES\tunsat"]
    assert sorted(tree(tmp_path / "smt")) == ["U__V.smt2", "V__U.smt2"]


@requires_solver
def test_shadow_oracle_fills_witnesses(tmp_path, capsys):
    assert main(["shadow", SHADOW_PAIR, "--oracle", "--out", str(tmp_path)]) == EXIT_OK
    rows = dict(
        ((r.split("\t")[0], r.split("\t")[1]), r.split("\t")[3])
        for r in (tmp_path / "shadow.tsv").read_text().splitlines()
    )
    assert rows[("U", "V")] == "p + q"
    assert rows[("V", "U")] == "unsat"
    assert "0 disagreement(s)" in capsys.readouterr().out


def test_metrics(tmp_path, capsys):
    assert main(["metrics", ADD_LONG, "--out", str(tmp_path)]) == EXIT_OK
    assert capsys.readouterr().out == f"file\tcharacters\tidentifiers\n{ADD_LONG}\t75\t12\n"


# -- exit codes ------------------------------------------------------------


def test_missing_input(tmp_path, capsys):
    assert main(["verify", str(tmp_path / "none.pat"), "--out", str(tmp_path)]) == EXIT_USAGE
    assert "cannot read" in capsys.readouterr().err


def test_parse_error(tmp_path, capsys):
    bad = write(tmp_path, "bad.pat", "@Pattern void p(int a) { before(a / 2); after(a); }")
    assert main(["translate", bad, "--out", str(tmp_path / "o")]) == EXIT_USAGE
    assert "unsupported operator '/'" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_duplicate_names_rejected(tmp_path, capsys):
    assert main(["gen-tests", IDEAL, IDEAL, "--out", str(tmp_path)]) == EXIT_USAGE
    assert "already defined" in capsys.readouterr().err


def test_metrics_unknown_suffix(tmp_path, capsys):
    assert main(["metrics", write(tmp_path, "x.txt", "a"), "--out", str(tmp_path)]) == EXIT_USAGE


def test_metrics_unlexable(tmp_path, capsys):
    assert main(["metrics", write(tmp_path, "x.cpp", "a ` b"), "--out", str(tmp_path)]) == EXIT_USAGE


@pytest.mark.parametrize("flag", [["--workers", "0"], ["--timeout-secs", "0"], ["--depth", "-1"], ["--trials", "0"]])
def test_bad_flags(tmp_path, flag):
    with pytest.raises(SystemExit) as info:
        main(["verify", IDEAL, *flag])
    assert info.value.code == EXIT_USAGE


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate", IDEAL])
    assert info.value.code == EXIT_USAGE


def test_missing_solver_writes_nothing(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["shadow", SHADOW_PAIR, "--solver", "/no/such/z3", "--out", str(out)]) == EXIT_INFRA
    assert "not found" in capsys.readouterr().err
    assert not out.exists()


def test_solver_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("PEEPHOLE_FORGE_SOLVER", "/no/such/z3")
    assert main(["shadow", SHADOW_PAIR, "--out", str(tmp_path)]) == EXIT_INFRA


def test_run_config_defaults():
    c = RunConfig(inputs=[])
    assert (c.seed, c.depth, c.timeout_secs, c.trials, c.oracle) == (0, 3, 10, 10_000, False)
    assert c.workers == (os.cpu_count() or 1)


# -- whole-pipeline behaviour ----------------------------------------------


def run_everything(out, extra=()):
    codes = [
        main(["translate", IDEAL, ADD_LONG, "--out", str(out), *extra]),
        main(["gen-tests", IDEAL, "--out", str(out / "tests"), *extra]),
        main(["verify", IDEAL, ADD_LONG, "--trials", "300", "--out", str(out), *extra]),
        main(["metrics", IDEAL, ADD_LONG, str(ROOT / "tests" / "golden" / "ideal_add_sub.cpp"),
              "--out", str(out), *extra]),
    ]
    if shutil.which("z3"):
        codes.append(main(["shadow", IDEAL, "--out", str(out), *extra]))
    return codes


def test_runs_are_byte_identical(tmp_path, capsys):
    assert run_everything(tmp_path / "a") == run_everything(tmp_path / "b")
    a, b = tree(tmp_path / "a"), tree(tmp_path / "b")
    assert a == b and len(a) > 5
    assert all(b"\r" not in data for data in a.values())


def test_seed_changes_generated_tests(tmp_path, capsys):
    main(["gen-tests", IDEAL, "--out", str(tmp_path / "s0")])
    main(["gen-tests", IDEAL, "--seed", "1", "--out", str(tmp_path / "s1")])
    assert tree(tmp_path / "s0") != tree(tmp_path / "s1")


def test_rerun_overwrites_in_place(tmp_path, capsys):
    main(["metrics", ADD_LONG, "--out", str(tmp_path)])
    first = tree(tmp_path)
    main(["metrics", ADD_LONG, "--out", str(tmp_path)])
    assert tree(tmp_path) == first
    assert not any(name.endswith(".tmp") for name in first)


def test_module_entry_point(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "peephole_forge", "metrics", ADD_LONG, "--out", str(tmp_path)],
        capture_output=True, text=True, check=False,
    )
    assert r.returncode == EXIT_OK
    assert r.stdout.endswith("\t75\t12\n")


@requires_solver
def test_shadow_facts_subset(tmp_path, capsys):
    code = main(["shadow", padd_subset(tmp_path), "--out", str(tmp_path / "o")])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "3 patterns, 6 ordered pairs: 2 YES, 4 NO, 0 UNKNOWN" in out
    assert "pAdd2 shadows pAdd5" in out and "pAdd2 shadows pAdd6" in out
