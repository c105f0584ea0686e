import csv
import json

import numpy as np
import pytest

from hoferlab import geom, scenarios
from hoferlab.cli import run_cli
from hoferlab.scenarios import ScenarioConfig, ScenarioError

FAST = dict(mesh=128, tsamples=41, budget=20)


@pytest.fixture(scope="module")
def reports():
    return {
        "rot": scenarios.scenario_projective_rotation(1, 1, 1.0, **FAST),
        "torus": scenarios.scenario_torus_graph(0.1, **FAST),
        "trans": scenarios.scenario_translated_circle(**FAST),
        "disj": scenarios.scenario_disjoint_endpoints(1.0, **FAST),
    }


# config ---------------------------------------------------------------------


@pytest.mark.parametrize("bad", [
    dict(scenario="nope"),
    dict(scenario="torus-graph", mesh=8),
    dict(scenario="torus-graph", tsamples=1),
    dict(scenario="torus-graph", budget=0),
    dict(scenario="torus-graph", offset=1.0),
    dict(scenario="torus-graph", warp=-1.0),
    dict(scenario="torus-graph", tol_val=1e-3),
    dict(scenario="torus-graph", steps=10),
])
def test_config_rejects_bad_values(bad):
    with pytest.raises(ScenarioError if bad.get("steps") is None else ValueError):
        ScenarioConfig(**bad)


def test_config_from_dict():
    cfg = ScenarioConfig.from_dict({"scenario": "torus-graph", "amplitude": 0.05})
    assert cfg.amplitude == 0.05 and ScenarioConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ScenarioError):
        ScenarioConfig.from_dict({"scenario": "torus-graph", "colour": 1})
    with pytest.raises(ScenarioError):
        ScenarioConfig.from_dict({"n": 1})


@pytest.mark.parametrize("opts", [
    dict(n=3), dict(n=1, k=2), dict(s=0.0), dict(s=1.5), dict(n=2, mesh_theta=64),
])
def test_projective_rejects_bad_parameters(opts):
    with pytest.raises(ScenarioError):
        scenarios.run_scenario(ScenarioConfig("projective-rotation", **opts))


def test_builders_reject_out_of_range():
    with pytest.raises(ScenarioError):
        scenarios.scenario_torus_graph(0.3)
    with pytest.raises(ScenarioError):
        scenarios.scenario_disjoint_endpoints(0.0)


# scenario examples ----------------------------------------------------------


def test_rotation_example(reports):
    rep = reports["rot"]
    kind = rep.lift.kind
    assert rep.verdict == "critical"
    assert rep.length.total == pytest.approx(0.5, abs=1e-3)
    assert geom.distance_raw(kind, rep.criticality.p_plus[0], np.array([1, 0])) < 1e-2
    assert geom.distance_raw(kind, rep.criticality.p_minus[0], np.array([0, 1])) < 1e-2
    assert rep.extras["loop_closure"] < 1e-8
    assert rep.oracle["max_node_distance"] < 1e-8


def test_rotation_rp2_example():
    # the extremum is quadratic, so the value tolerance must be tight to keep candidates on the locus
    rep = scenarios.scenario_projective_rotation(2, 1, 0.5, mesh_theta=33, mesh_phi=64, tsamples=21, budget=10,
                                                 tol_val=2.5e-7, tol_geo=0.2, tol_probe=2.5e-4)
    assert rep.verdict == "critical"
    assert np.abs(rep.criticality.p_plus[:, 1]).max() < 1e-2
    minus = rep.criticality.p_minus
    assert geom.distance_raw(rep.lift.kind, minus, np.array([0, 1, 0])).max() < 1e-2


def test_torus_example(reports):
    rep = reports["torus"]
    assert rep.verdict == "critical"
    assert rep.length.total == pytest.approx(0.1 / np.pi, abs=1e-6)
    # candidates are sorted by drift; the exact critical points are nodes and never move
    np.testing.assert_allclose(rep.criticality.p_plus[0], [0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(rep.criticality.p_minus[0], [0.5, 0.0], atol=1e-12)


def test_torus_zero_amplitude_is_inconclusive():
    rep = scenarios.scenario_torus_graph(0.0, **FAST)
    assert rep.verdict == "inconclusive" and rep.length.total == 0.0


def test_translated_circle_example(reports):
    rep = reports["trans"]
    assert rep.verdict == "non-critical"
    assert rep.length.total == pytest.approx(2.0, abs=1e-3)
    assert rep.criticality.p_plus.size == 0 and rep.criticality.p_minus.size == 0
    assert rep.criticality.certificate.decrease >= 0.05


def test_disjoint_endpoints_example(reports):
    rep = reports["disj"]
    assert rep.verdict == "non-critical"
    assert rep.criticality.certificate.decrease > 0
    assert rep.extras["endpoint_distance"] > rep.criticality.tolerances.tol_geo
    assert any("disjoint" in note for note in rep.notes)


def test_every_report_passes_self_checks(reports):
    for rep in reports.values():
        assert rep.checks_ok, rep.checks


@pytest.mark.parametrize("scenario", ["torus-graph", "projective-rotation"])
def test_mesh_refinement(scenario):
    a = scenarios.run(scenario, mesh=256, tsamples=41, budget=5)
    b = scenarios.run(scenario, mesh=512, tsamples=41, budget=5)
    assert abs(a.length.total - b.length.total) <= 1e-4


# reports --------------------------------------------------------------------


def test_report_serialization(reports):
    rep = reports["trans"]
    d = json.loads(rep.to_json())
    assert d["scenario"] == "translated-circle"
    assert d["config"] == rep.config.to_dict()
    assert set(d["run"]) == {"timestamp", "wall_clock_s"}
    assert "run" not in rep.comparable_dict()
    rows = list(csv.reader(rep.probes_csv().splitlines()))
    assert rows[0] == ["id", "s_star", "decrease"] and len(rows) == 1 + FAST["budget"]
    rows = list(csv.reader(rep.candidates_csv().splitlines()))
    assert rows[0] == ["t", "max", "min", "dist_plus", "dist_minus"] and len(rows) == 1 + FAST["tsamples"]


def test_config_echo_reproduces_run(reports):
    rep = reports["disj"]
    again = scenarios.run_scenario(ScenarioConfig.from_dict(rep.config.to_dict()))
    assert json.dumps(again.comparable_dict(), sort_keys=True) == json.dumps(rep.comparable_dict(), sort_keys=True)


# cli ------------------------------------------------------------------------


def test_cli_writes_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    code = run_cli(["run", "--scenario", "projective-rotation", "--n", "1", "--k", "1", "--s", "1",
                    "--mesh", "128", "--tsamples", "41", "--budget", "10", "--out", str(out)])
    assert code == 0
    for name in ("report.json", "length.csv", "probes.csv", "candidates.csv"):
        assert (out / name).is_file()
    header = (out / "length.csv").read_text().splitlines()[0]
    assert header == "t,max,min,osc"
    assert json.loads((out / "report.json").read_text())["criticality"]["verdict"] == "critical"
    assert "critical" in capsys.readouterr().out


def test_cli_list(capsys):
    assert run_cli(["run", "--list"]) == 0
    listed = capsys.readouterr().out
    for name in scenarios.REGISTRY:
        assert name in listed


def test_cli_errors(capsys, tmp_path):
    assert run_cli(["run", "--scenario", "nope"]) == 1
    assert run_cli(["run"]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"scenario": "torus-graph", "bogus": 1}))
    assert run_cli(["run", "--config", str(bad)]) == 1
    assert "bogus" in capsys.readouterr().err


def test_cli_inconclusive_exit_code():
    assert run_cli(["run", "--scenario", "torus-graph", "--amplitude", "0", "--mesh", "128",
                    "--tsamples", "21", "--budget", "5"]) == 2


def test_cli_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "torus-graph", "amplitude": 0.2, "mesh": 128,
                               "tsamples": 21, "budget": 5}))
    out = tmp_path / "o"
    assert run_cli(["run", "--config", str(cfg), "--amplitude", "0.05", "--out", str(out)]) == 0
    d = json.loads((out / "report.json").read_text())
    assert d["config"]["amplitude"] == 0.05 and d["config"]["mesh"] == 128


def test_cli_determinism(tmp_path):
    texts = []
    for i in range(2):
        out = tmp_path / f"r{i}"
        assert run_cli(["run", "--scenario", "disjoint-endpoints", "--gap", "1", "--seed", "7",
                        "--mesh", "128", "--tsamples", "41", "--budget", "20", "--out", str(out)]) == 0
        d = json.loads((out / "report.json").read_text())
        d.pop("run")
        d["config"].pop("out")
        texts.append((json.dumps(d, sort_keys=True), (out / "probes.csv").read_bytes(),
                      (out / "length.csv").read_bytes()))
    assert texts[0] == texts[1]
