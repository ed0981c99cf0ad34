import json
import subprocess
import sys
from pathlib import Path

import pytest

from imprec import bundled
from imprec.cli import main
from imprec.pddl import parse_domain

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("argv,golden", [
    (["recognize", "--bundle", "abstract-p1", "--heuristic", "gc_enhanced", "--kinds", "DPO", "--theta", "0"],
     "recognize_abstract.json"),
    (["recognize", "--bundle", "blocks-words", "--heuristic", "gc_baseline"], "recognize_blocks_gc_baseline.json"),
    (["extract-landmarks", "--bundle", "abstract-p1"], "extract_abstract.json"),
    (["validate-plan", "--bundle", "abstract-p1", "--actions", "a,b,c"], "validate_abstract.json"),
    (["completions", "--bundle", "abstract-p1"], "completions_abstract.json"),
])
def test_golden_json(capsys, argv, golden):
    code, out, _ = run(capsys, *argv, "--json")
    assert code == 0
    assert json.loads(out) == json.loads((GOLDEN / golden).read_text())


def test_recognize_with_bundle_path(capsys):
    # a path whose last component names a bundled problem also resolves
    code, out, _ = run(capsys, "recognize", "--bundle", "examples/abstract-p1", "--json")
    assert code == 0 and json.loads(out)["scores"]["0"] == 0.75


def test_human_output(capsys):
    code, out, _ = run(capsys, "recognize", "--bundle", str(bundled("abstract-p1")))
    assert code == 0 and "0.75" in out


def test_completions_plain(capsys):
    code, out, _ = run(capsys, "completions", "--domain", str(bundled("abstract-p1") / "domain.pddl"))
    assert (code, out.strip()) == (0, "32")


def test_usage_errors(capsys):
    code, _, err = run(capsys, "recognize")
    assert code == 2 and "usage" in err
    assert run(capsys)[0] == 2
    assert run(capsys, "recognize", "--bundle", "abstract-p1", "--kinds", "DX")[0] == 2
    assert run(capsys, "recognize", "--bundle", "abstract-p1", "--theta", "-1")[0] == 2


def test_domain_errors_exit_one(capsys, tmp_path):
    bad = tmp_path / "bad.pddl"
    bad.write_text("(define (domain x) (:predicates (p)) (:action a")
    code, out, err = run(capsys, "completions", "--domain", str(bad))
    assert code == 1 and "line" in err and out == ""
    code, _, err = run(capsys, "recognize", "--bundle", str(tmp_path / "missing"))
    assert code == 1


def test_validate_plan_failures(capsys):
    code, out, err = run(capsys, "validate-plan", "--bundle", "abstract-p1", "--actions", "c", "--json")
    assert code == 1
    assert json.loads(out)["step"] == 0
    code, _, _ = run(capsys, "validate-plan", "--bundle", "abstract-p1", "--actions", "a,c", "--strict-preconditions")
    assert code == 1


def test_extract_complete_and_graph(capsys):
    code, out, _ = run(capsys, "extract-landmarks", "--bundle", "blocks-words", "--hypothesis", "0",
                       "--complete", "--dump-graph", "--json")
    goal = json.loads(out)["goals"][0]
    assert code == 0 and len(goal["nodes"]) == 10
    assert goal["graph"]["fact_levels"][0][0] == "(clear d)"


def test_gen_incomplete_writes_variants(capsys, tmp_path):
    domain = str(bundled("blocks-words") / "domain.pddl")
    code, _, _ = run(capsys, "gen-incomplete", "--domain", domain, "--percent", "40", "--seed", "5",
                     "--variants", "2", "--out", str(tmp_path), "--strict")
    assert code == 0
    files = sorted(tmp_path.glob("*.pddl"))
    assert len(files) == 2
    d = parse_domain(files[0].read_text())
    assert sum(len(op.poss_pre) for op in d.operators) == 4
    first = [f.read_text() for f in files]
    run(capsys, "gen-incomplete", "--domain", domain, "--percent", "40", "--seed", "5", "--variants", "2",
        "--out", str(tmp_path))
    assert [f.read_text() for f in files] == first


def test_strict_mode_demands_seed(capsys):
    domain = str(bundled("blocks-words") / "domain.pddl")
    assert run(capsys, "gen-incomplete", "--domain", domain, "--percent", "20", "--strict")[0] == 2
    assert run(capsys, "sample-obs", "--bundle", "blocks-words", "--percent", "50", "--strict")[0] == 2


def test_sample_obs(capsys, tmp_path):
    plan = tmp_path / "plan.txt"
    plan.write_text("(a)\n(b)\n(c)\n(d)\n(e)\n")
    code, out, _ = run(capsys, "sample-obs", "--plan", str(plan), "--percent", "40", "--seed", "3", "--json")
    obs = json.loads(out)["observations"]
    assert code == 0 and len(obs) == 2 and obs == sorted(obs)
    run(capsys, "sample-obs", "--plan", str(plan), "--percent", "100", "--out", str(tmp_path / "o.dat"))
    assert (tmp_path / "o.dat").read_text().split() == ["(a)", "(b)", "(c)", "(d)", "(e)"]


def test_evaluate(capsys, tmp_path):
    from imprec.datasets import mini_blocks_dataset
    from imprec.evaluation import write_dataset

    write_dataset(mini_blocks_dataset(n_base=2, incompleteness=(40,), observability=(50, 100), variants=1),
                  tmp_path / "ds")
    code, out, _ = run(capsys, "evaluate", "--dataset", str(tmp_path / "ds"), "--heuristic", "gc_baseline",
                       "--heuristic", "gc_enhanced", "--kinds", "DPO", "--kinds", "D", "--csv",
                       str(tmp_path / "r.csv"), "--roc", str(tmp_path / "roc.json"), "--roc-aggregate", "--json")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert {r["config"] for r in rows} == {"gc_baseline", "gc_enhanced[DPO]", "gc_enhanced[D]"}
    assert (tmp_path / "r.csv").read_text().startswith("domain_name,")
    assert json.loads((tmp_path / "roc.json").read_text())


def test_timeout_env(capsys, tmp_path, monkeypatch):
    from imprec.evaluation import write_dataset
    from imprec.datasets import EvalProblem
    from imprec.pddl import parse_recognition_bundle

    write_dataset([EvalProblem(parse_recognition_bundle(bundled("abstract-p1")), "abstract", 0, 100, "p")],
                  tmp_path)
    monkeypatch.setenv("IMPREC_TIMEOUT_SECS", "0")
    code, out, _ = run(capsys, "evaluate", "--dataset", str(tmp_path), "--json")
    assert code == 0 and json.loads(out)["rows"][0]["n_timed_out"] == 1


def test_console_script_is_strict_json():
    out = subprocess.run([sys.executable, "-m", "imprec.cli", "recognize", "--bundle", "abstract-p1", "--json"],
                         capture_output=True, text=True, check=True).stdout
    json.loads(out)  # no trailing text
