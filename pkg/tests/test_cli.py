import json
import math
import subprocess
import sys

import pytest

from polycond.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from polycond.harness import PropertyResult, load_report
from polycond.polycore import loads_system


def test_sample_then_kappa(tmp_path, capsys):
    sysfile = tmp_path / "p.json"
    assert main(["sample", "--n", "2", "--degrees", "2", "--seed", "3", "--out", str(sysfile)]) == EXIT_OK
    P = loads_system(sysfile.read_text())
    assert P.n_vars == 2 and tuple(P.degrees) == (2,)
    out = tmp_path / "k.json"
    assert main(["kappa", str(sysfile), "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["certified"]
    assert 1.0 <= doc["bracket"]["lower"] <= doc["bracket"]["upper"]


def test_sample_is_deterministic(capsys):
    main(["sample", "--n", "3", "--degrees", "2,2", "--seed", "9", "--index", "4"])
    a = capsys.readouterr().out
    main(["sample", "--n", "3", "--degrees", "2,2", "--seed", "9", "--index", "4"])
    assert capsys.readouterr().out == a


@pytest.mark.parametrize("model", ["lp", "sphere"])
def test_sample_models(model, capsys):
    assert main(["sample", "--n", "2", "--degrees", "3", "--model", model]) == EXIT_OK
    assert loads_system(capsys.readouterr().out).m == 1


def test_bounds_table(capsys):
    assert main(["bounds", "--n", "3", "--degrees", "2,2", "--t", "1,10,100"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4
    assert lines[0].split("\t")[0] == "t"


def test_experiment_and_report(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n = 2\ndegrees = [2]\ntrials = 5\nt_grid = [1, 10]\nconstant_trials = 10000\n")
    out = tmp_path / "res"
    code = main(["experiment", "tail", str(cfg), "--seed", "2", "--trials", "6", "--jobs", "1", "--out", str(out)])
    assert code == EXIT_OK
    rep = load_report(out)
    assert rep.config["seed"] == 2 and len(rep.trials) == 6
    capsys.readouterr()
    assert main(["report", str(out / "results.json")]) == EXIT_OK
    assert "kind: tail" in capsys.readouterr().out


def test_verify_quick(capsys):
    assert main(["verify", "--scale", "quick"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("[PASS]") >= 10 and "[FAIL]" not in out


def test_verify_failure_exit(monkeypatch, capsys):
    bad = [PropertyResult("x", "a <= b", 1, -1.0, False)]
    monkeypatch.setattr("polycond.cli.run_property_suite", lambda seed, scale: bad)
    assert main(["verify"]) == EXIT_FAIL
    assert "[FAIL] x" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["nonsense"],
        ["sample", "--n", "2"],
        ["sample", "--n", "2", "--degrees", "a,b"],
        ["sample", "--n", "1", "--degrees", "2"],
        ["kappa", "/nonexistent/file.json"],
        ["report", "/nonexistent"],
        ["experiment", "tail", "/nonexistent.cfg"],
        ["verify", "--scale", "huge"],
        ["bounds", "--n", "3", "--degrees", "2,2", "--t", "0.5"],
    ],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE


def test_malformed_config(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n = 2\ndegrees = [2]\nt_grid = [3, 1]\n")
    assert main(["experiment", "tail", str(cfg)]) == EXIT_USAGE
    assert "t_grid" in capsys.readouterr().err


def test_help_exits_zero(capsys):
    assert main(["--help"]) == EXIT_OK


def test_module_entry_point(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "polycond.cli", "bounds", "--n", "2", "--degrees", "3", "--t", "2"],
        capture_output=True,
        text=True,
    )
    assert r.returncode == 0
    row = r.stdout.strip().splitlines()[1].split("\t")
    assert math.isclose(float(row[0]), 2.0)
