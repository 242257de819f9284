import json
import subprocess
import sys

import pytest

from datalogo.cli import main
from oracles import floyd_warshall


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_boolean_paths(capsys, data_dir):
    code, out, _ = run(capsys, "run", "--program", str(data_dir / "tc.dlo"), "--facts",
                       str(data_dir / "path4.tsv"), "--semiring", "boolean", "--report", "json")
    assert code == 0
    report = json.loads(out)
    assert report["converged"] and report["fixpoint_index"] == 3
    code, out, _ = run(capsys, "run", "--program", str(data_dir / "tc.dlo"), "--facts",
                       str(data_dir / "path3.tsv"), "--semiring", "boolean", "--report", "json")
    assert code == 0 and json.loads(out)["fixpoint_index"] == 2


def test_run_apsp_matches_oracle(capsys, data_dir):
    code, out, _ = run(capsys, "run", "--program", str(data_dir / "apsp.dlo"), "--facts",
                       str(data_dir / "digraph5.tsv"), "--semiring", "tropical", "--report", "json")
    assert code == 0
    edges = {}
    for line in (data_dir / "digraph5.tsv").read_text().splitlines():
        if line and not line.startswith("#"):
            _, u, v, w = line.split("\t")
            edges[(u, v)] = int(w)
    dist = floyd_warshall({x for e in edges for x in e}, edges)
    got = {row["atom"]: row["value"] for row in json.loads(out)["state"]}
    assert got == {f"T({u},{v})": d for (u, v), d in dist.items() if d != float("inf")}


def test_run_maxplus_nonconvergent(capsys, data_dir):
    code, out, _ = run(capsys, "run", "--program", str(data_dir / "tc.dlo"), "--facts",
                       str(data_dir / "cycle.tsv"), "--semiring", "maxplus", "--max-iters", "50")
    assert code == 2
    assert "NonConvergent" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--program", "missing.dlo", "--facts", "missing.tsv", "--semiring", "boolean"],
        ["run", "--semiring", "boolean"],
        ["run", "--program", "{d}/tc.dlo", "--facts", "{d}/path3.tsv", "--semiring", "reals"],
        ["run", "--program", "{d}/tc.dlo", "--facts", "{d}/digraph5.tsv", "--semiring", "boolean"],
        ["run", "--program", "{d}/path3.tsv", "--facts", "{d}/path3.tsv", "--semiring", "boolean"],
        ["bound", "1", "2"],
        ["frobnicate"],
    ],
)
def test_input_errors(capsys, data_dir, argv):
    code, _, _ = run(capsys, *[a.format(d=data_dir) for a in argv])
    assert code == 1


def test_bound(capsys):
    assert run(capsys, "bound", "1", "2", "2", "2")[1].strip() == "(249, 48, 5)"
    assert run(capsys, "bound", "1", "1", "1", "1")[1].strip() == "(12, 4, 2)"
    code, out, err = run(capsys, "bound", "0", "3", "2", "2")
    assert code == 0 and out.startswith("(0, ") and "p = 0" in err
    _, out, _ = run(capsys, "bound", "1", "2", "2", "2", "--report", "json")
    assert json.loads(out) == {"theorem_bound": 249, "h": 48, "c": 5}


def test_ground_and_grammar(capsys, data_dir):
    args = ["--program", str(data_dir / "apsp.dlo"), "--facts", str(data_dir / "chain.tsv"), "--semiring", "tropical"]
    code, out, _ = run(capsys, "ground", *args)
    assert code == 0 and len(out.splitlines()) == 6
    code, out, _ = run(capsys, "ground", *args, "--report", "json")
    stats = json.loads(out)
    assert (stats["n"], stats["lambda_effective"], stats["sigma"]) == (6, 2, 3)
    code, out, _ = run(capsys, "grammar", *args)
    assert code == 0
    assert "X2 -> X0 X4 | X1 X5    % T(1,4)" in out
    assert "% terminals: a = 1, b = 2, c = 3" in out


def test_stability(capsys):
    code, out, _ = run(capsys, "stability", "--semiring", "bounded-nat:B=3", "--report", "json")
    assert code == 0
    assert [r["index"] for r in json.loads(out)["indices"]] == [0, 2, 1, 1]
    _, out, _ = run(capsys, "stability", "--semiring", "maxplus", "1", "--cap", "20")
    assert "not-stable-within-cap" in out
    assert run(capsys, "stability", "--semiring", "tropical")[0] == 1


SMALL = ["--suite", "trees", "--suite", "absorption"]


def test_verify_passes_and_is_deterministic(capsys, data_dir):
    args = ["verify", "--seed", "4", *SMALL, "--program", str(data_dir / "apsp.dlo"),
            "--facts", str(data_dir / "chain.tsv"), "--semiring", "tropical"]
    code, first, _ = run(capsys, *args)
    assert code == 0
    assert json.loads(first)["ok"]
    _, second, _ = run(capsys, *args)
    assert first == second


def test_verify_budget_zero(capsys):
    code, out, _ = run(capsys, "verify", "--budget", "0")
    report = json.loads(out)
    assert code == 2
    assert {s["status"] for s in report["suites"].values()} == {"budget-exceeded"}
    assert set(report["suites"]) == {"trees", "wedge", "semilinear", "absorption"}


def test_verify_fault_injection(capsys):
    code, out, _ = run(capsys, "parikh-verify", "--suite", "trees", "--inject-fault")
    assert code == 2
    trees = json.loads(out)["suites"]["trees"]
    assert trees["status"] == "fail"
    cex = trees["counterexample"]
    monomials = sum(len(e["monomials"]) for e in cex["system"]["equations"])
    assert monomials == 1
    assert cex["engine"] != cex["trees"]


def test_module_entry_point(data_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "datalogo", "bound", "1", "1", "1", "1"], capture_output=True, text=True
    )
    assert proc.returncode == 0 and proc.stdout.strip() == "(12, 4, 2)"
