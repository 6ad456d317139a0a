import json

import pytest

from objectify import cli
from objectify.scenario import bundled_text
from objectify.suite import SuiteResult, Tally


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(p)


def test_example_list_and_emit(capsys):
    assert cli.main(["example", "list"]) == 0
    assert "luders_qubit" in capsys.readouterr().out.split()
    assert cli.main(["example", "depolarising_counterexample"]) == 0
    assert json.loads(capsys.readouterr().out)["apparatus_dim"] == 2
    assert cli.main(["example", "nope"]) == 2


def test_validate_exit_codes(tmp_path, capsys):
    good = write(tmp_path, "q.json", bundled_text("luders_qubit"))
    assert cli.main(["validate", good]) == 0
    d = json.loads(bundled_text("luders_qubit"))
    d["normal_luders"]["e"][1] = [[0, 0], [0, 1.2]]
    bad = write(tmp_path, "bad.json", d)
    assert cli.main(["validate", bad]) == 1
    err = capsys.readouterr().err
    assert "completeness" in err and "2.000e-01" in err


def test_run_writes_report_and_csv(tmp_path):
    src = write(tmp_path, "q.json", bundled_text("luders_qubit"))
    out, csv = tmp_path / "r.json", tmp_path / "r.csv"
    assert cli.main(["run", src, "--alpha", "0.25", "--alpha", "0.75", "--out", str(out), "--csv", str(csv)]) == 0
    rep = json.loads(out.read_text())
    assert [v["alpha"] for v in rep["variance"]] == [0.25, 0.75]
    assert rep["energetics"]["work"] == pytest.approx(0.5)
    assert csv.read_text().count("\n") == 3
    out2 = tmp_path / "r2.json"
    cli.main(["run", src, "--alpha", "0.25", "--alpha", "0.75", "--out", str(out2)])
    assert out.read_bytes() == out2.read_bytes()


def test_run_precondition_failure(tmp_path, capsys):
    d = json.loads(bundled_text("luders_qubit"))
    d["j"] = {"kraus": [[[[1, 0], [0, 0]]], [[[0, 1], [0, 0]]]]}
    src = write(tmp_path, "nr.json", d)
    assert cli.main(["run", src]) == 2
    assert "repeatab" in capsys.readouterr().err


def test_global_tol_loosens_validation(tmp_path):
    d = json.loads(bundled_text("luders_qubit"))
    d["rho"] = [[0.5, 0.5], [0.5, 0.5 + 1e-6]]
    src = write(tmp_path, "t.json", d)
    assert cli.main(["validate", src]) == 1
    assert cli.main(["--tol", "1e-5", "validate", src]) == 0


def test_suite_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(cli, "run_suite", lambda seed, dims: SuiteResult(seed, dims))
    # an empty result has no passing invariants, but also no failures
    assert cli.main(["suite", "--dims", "2"]) == 0

    bad = SuiteResult(0, (2,))
    t = Tally("x", 1e-10)
    t.add(1.0)
    bad.tallies["x"] = t
    monkeypatch.setattr(cli, "run_suite", lambda seed, dims: bad)
    assert cli.main(["suite"]) == 3
    assert "FAIL" in capsys.readouterr().out


def test_bad_dims_argument():
    with pytest.raises(SystemExit):
        cli.main(["suite", "--dims", "1,x"])
