from __future__ import annotations

import json
import subprocess
import sys

import pytest

from pdtn.cli import main
from pdtn.library import data_path, load_async_read
from pdtn.model import valuate
from pdtn.semantics import replay, trace_from_json

MODEL = str(data_path("async_read.pdtn.json"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", MODEL)
    doc = json.loads(out)
    assert code == 0 and doc["lu_partition"] == {"lower": ["p"], "upper": []}


def test_reach_with_oracle_and_witness(capsys, tmp_path):
    w = tmp_path / "w.json"
    code, out, _ = run(capsys, "reach", MODEL, "--target", "error", "--n", "3", "--param", "p=1", "--oracle", "--witness", str(w))
    doc = json.loads(out)
    assert code == 0 and doc["status"] == doc["oracle"] == "reachable"
    saved = json.loads(w.read_text())
    final = replay(trace_from_json(saved["trace"]), valuate(load_async_read(), {"p": 1}), 3)
    assert "error" in final.locs


def test_reach_property(capsys):
    code, out, _ = run(capsys, "reach", MODEL, "--prop", "#error >= 1 & #done = 0", "--n", "2", "--param", "p=1", "--symmetry")
    assert code == 0 and json.loads(out)["status"] == "unreachable"


def test_check_pr_e(capsys):
    code, out, err = run(capsys, "check", MODEL, "--mode", "pr-e", "--target", "error")
    doc = json.loads(out)
    assert code == 0 and doc["answer"] == "nonempty" and doc["method"] == "lu"
    final = replay(trace_from_json(doc["witness"]), valuate(load_async_read(), doc["valuation"]), doc["n"])
    assert "error" in final.locs
    assert "nonempty" in err


def test_check_pgr_e_small_bounds(capsys):
    prop = "#init = 0 & #listen = 0 & #post = 0 & #reading = 0 & #done = 0"
    code, out, _ = run(capsys, "check", MODEL, "--mode", "pgr-e", "--prop", prop, "--bound-n", "3", "--bound-p", "1")
    doc = json.loads(out)
    assert code == 0 and doc["answer"] == "unknown" and doc["exact"] is False


def test_bundled_name_fallback(capsys):
    code, out, _ = run(capsys, "classify", "async_read.pdtn.json")
    assert code == 0


def test_simulate_deterministic(capsys):
    args = ("simulate", MODEL, "--n", "3", "--param", "p=1", "--steps", "50", "--seed", "9")
    a = run(capsys, *args)[1]
    b = run(capsys, *args)[1]
    assert a == b and len(json.loads(a)) == 50


def test_fmt_fixpoint(capsys, tmp_path):
    first = run(capsys, "fmt", MODEL)[1]
    f = tmp_path / "m.pdtn.json"
    f.write_text(first)
    assert run(capsys, "fmt", str(f))[1] == first


def test_compile_2cm(capsys, tmp_path):
    out_path = tmp_path / "inc.pdtn.json"
    code, out, _ = run(capsys, "compile-2cm", "inc_inc.2cm", "--encoding", "three", "--invariants", "-o", str(out_path))
    doc = json.loads(out)
    assert code == 0 and out_path.exists() and (tmp_path / "inc.roles.json").exists()
    code, out, _ = run(capsys, "reach", str(out_path), "--target", doc["halt"], "--n", "3", "--param", "p=4", "--symmetry")
    assert json.loads(out)["status"] == "reachable"


@pytest.mark.parametrize(
    "argv",
    [
        ("classify", "no/such/file.json"),
        ("reach", MODEL, "--target", "error", "--n", "0", "--param", "p=1"),
        ("reach", MODEL, "--target", "error", "--n", "1", "--param", "p"),
        ("reach", MODEL, "--target", "error", "--n", "1", "--param", "p=x"),
        ("reach", MODEL, "--target", "error", "--n", "1"),
        ("reach", MODEL, "--target", "ghost", "--n", "1", "--param", "p=1"),
        ("reach", MODEL, "--prop", "#error >= 2", "--n", "1", "--param", "p=1"),
        ("check", MODEL, "--mode", "pr-e", "--prop", "#error >= 1"),
        ("check", MODEL, "--mode", "pr-e", "--target", "error", "--bound-p", "-1"),
        ("compile-2cm", "inc_inc.2cm", "--encoding", "fixed:2", "-o", "x.json"),
    ],
)
def test_input_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith(("error", "parse error"))


def test_parse_error_in_model(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, _, err = run(capsys, "classify", str(bad))
    assert code == 2 and "parse error" in err


def test_env_budget(capsys, monkeypatch):
    monkeypatch.setenv("PDTN_BUDGET", "4")
    code, out, _ = run(capsys, "reach", MODEL, "--target", "error", "--n", "3", "--param", "p=1")
    assert code == 0 and json.loads(out)["status"] == "budget_exceeded"
    monkeypatch.setenv("PDTN_BUDGET", "lots")
    assert run(capsys, "reach", MODEL, "--target", "error", "--n", "3", "--param", "p=1")[0] == 2


def test_check_budget_exhaustion_is_unknown(capsys):
    code, out, _ = run(capsys, "check", MODEL, "--mode", "pr-e", "--target", "error", "--budget", "3")
    assert code == 0 and json.loads(out)["answer"] == "unknown"


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "pdtn", "classify", MODEL], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["clock_count"] == 1
