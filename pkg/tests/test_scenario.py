import json

import numpy as np
import pytest

from objectify import linalg as la
from objectify.report import RunReport, resolve_seed, run
from objectify.scenario import (
    ScenarioError,
    bundled_names,
    bundled_text,
    encode_matrix,
    load_bundled,
    load_scenario,
    parse_matrix,
    scenario_from_dict,
)


def qubit_dict():
    return json.loads(bundled_text("luders_qubit"))


def test_matrix_codec_roundtrip(rng):
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    m[0] = m[0].real
    assert np.array_equal(parse_matrix(encode_matrix(m)), m)
    assert np.array_equal(parse_matrix([[1, [0, 2]], [[0, -2], 3.5]]), np.array([[1, 2j], [-2j, 3.5]]))


@pytest.mark.parametrize("bad", [[], [1, 2], [[1, 2], [3]], [["x"]], [[True]], [[[1, 2, 3]]]])
def test_matrix_parse_errors(bad):
    with pytest.raises(ScenarioError):
        parse_matrix(bad)


def test_bundled_scenarios_load():
    assert {"luders_qubit", "depolarising_counterexample", "identity_coupling", "yanase_violation"} <= set(bundled_names())
    for name in bundled_names():
        sc = load_bundled(name)
        assert sc.name == name


def test_normal_luders_directive_builds_unitary():
    sc = load_bundled("luders_qubit")
    assert la.max_abs(la.dag(sc.scheme.u) @ sc.scheme.u - np.eye(4)) <= 1e-10
    assert np.allclose(sc.h_a, np.diag([0, 1]))


def test_completeness_violation_reported(tmp_path):
    d = qubit_dict()
    d["normal_luders"]["e"] = [[[0.6, 0], [0, 0.6]], [[0.6, 0], [0, 0.6]]]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(d))
    with pytest.raises(ScenarioError) as info:
        load_scenario(path)
    names = dict(info.value.violations)
    assert names["normal_luders.e: completeness"] == pytest.approx(0.2)
    assert "completeness" in str(info.value) and "2.000e-01" in str(info.value)


def test_every_violation_listed():
    d = qubit_dict()
    d["rho"] = [[1.5, 0], [0, -0.5]]
    d["h_s"] = [[0, 1], [0, 0]]
    with pytest.raises(ScenarioError) as info:
        scenario_from_dict(d)
    names = [n for n, _ in info.value.violations]
    assert "rho: positivity" in names and "h_s: hermiticity" in names


def test_parse_and_missing_field_errors(tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{not json")
    with pytest.raises(ScenarioError, match="parse"):
        load_scenario(path)
    with pytest.raises(ScenarioError, match="cannot read"):
        load_scenario(tmp_path / "missing.json")
    d = qubit_dict()
    del d["rho"]
    with pytest.raises(ScenarioError, match="rho"):
        scenario_from_dict(d)


def test_explicit_scheme_and_instrument_specs():
    d = json.loads(bundled_text("identity_coupling"))
    d["j"] = {"kraus": [[[[1, 0], [0, 0]]], [[[0, 0], [0, 1]]]]}
    sc = scenario_from_dict(d)
    assert len(sc.j) == 2
    d["j"] = {"sequential": {"channel": [[[1, 0], [0, 1]]]}}
    assert len(scenario_from_dict(d).j) == 2
    d["j"] = {"measure_prepare": {"targets": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]}}
    assert len(scenario_from_dict(d).j) == 2
    d["j"] = "depolarising"
    with pytest.raises(ScenarioError, match="rank-2"):
        scenario_from_dict(d)


def test_alpha_out_of_range():
    d = qubit_dict()
    d["alpha"] = [0.5, 1.0]
    with pytest.raises(ScenarioError, match="alpha"):
        scenario_from_dict(d)


def test_run_case_study():
    rep = run(load_bundled("luders_qubit"))
    e = rep.energetics
    assert e["work"] == pytest.approx(0.5, abs=1e-9)
    assert [o["heat"] for o in e["outcomes"]] == pytest.approx([-1, 1], abs=1e-9)
    assert abs(e["mean_heat"]) <= 1e-9
    for v in rep.variance:
        assert v["var_q"] == pytest.approx(1.0, abs=1e-9) and abs(v["delta_v_qu"]) <= 1e-9
    assert rep.checks["yanase"]["ok"] and rep.checks["fixed_point"]["ok"]


def test_run_identity_coupling():
    rep = run(load_bundled("identity_coupling"))
    assert rep.energetics["work"] == 0.0
    assert all(o["heat"] == 0.0 for o in rep.energetics["outcomes"])


def test_run_depolarising_counterexample():
    rep = run(load_bundled("depolarising_counterexample"))
    assert not rep.checks["fixed_point"]["ok"]
    assert rep.checks["fixed_point"]["magnitude"] == pytest.approx(0.5, abs=1e-10)
    assert rep.energetics["mean_heat"] == pytest.approx(0.5, abs=1e-10)
    assert rep.energetics["work"] == pytest.approx(0.0, abs=1e-12)


def test_run_yanase_violation_notes_skip():
    rep = run(load_bundled("yanase_violation"))
    assert not rep.checks["yanase"]["ok"]
    assert "skipped" in rep.conditional
    assert all(i["entropy_gap"] < -1e-3 for i in rep.info)


def test_report_roundtrip_and_determinism():
    sc = load_bundled("luders_qubit")
    a, b = run(sc), run(sc)
    assert a.to_json() == b.to_json()
    assert RunReport.from_json(a.to_json()) == a
    t = run(sc, timing=True)
    assert "timing" in t.to_dict() and "timing" not in a.to_dict()
    csv = a.to_csv().splitlines()
    assert csv[0].startswith("outcome,p,") and len(csv) == 3


def test_seed_resolution(monkeypatch):
    monkeypatch.delenv("OBJECTIFY_SEED", raising=False)
    assert resolve_seed() == 0
    monkeypatch.setenv("OBJECTIFY_SEED", "17")
    assert resolve_seed() == 17
    assert resolve_seed(None, 4) == 4
    assert resolve_seed(9, 4) == 9


def test_default_waiting_times_follow_seed():
    d = qubit_dict()
    del d["g"]
    sc = scenario_from_dict(d)
    r1, r2 = run(sc, seed=3), run(sc, seed=3)
    assert r1.checks["stability"]["g"] == r2.checks["stability"]["g"]
    assert len(set(r1.checks["stability"]["g"])) == 2
