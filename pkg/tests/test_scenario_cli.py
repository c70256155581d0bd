import csv
import json

import numpy as np
import pytest
from click.testing import CliRunner

from dihedral_formation.cli import cli, run
from dihedral_formation.errors import ScenarioError
from dihedral_formation.scenario import (
    cmd_analyze,
    cmd_predict,
    cmd_simulate,
    parse_scenario,
    parse_scenario_text,
    preset_path,
)

PRESETS = ["example2", "example3", "example4", "example5"]


def write(tmp_path, obj, name="s.json"):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj, indent=2))
    return path


def small(**kw):
    base = {"name": "small", "n": 6, "removed_edge": [6, 1], "family": "anchored-reflection", "anchor_vertex": 1}
    base.update(kw)
    return base


def test_example2_parses_to_path_tree():
    s = parse_scenario(preset_path("example2"))
    assert s.graph().edges == ((0, 1), (1, 2), (2, 3), (3, 4), (4, 5))


@pytest.mark.parametrize("name", PRESETS)
def test_presets_parse(name):
    s = parse_scenario(preset_path(name))
    assert s.name == name
    assert s.initial_configuration().shape == (2 * s.n,)


def test_seeded_p0_is_deterministic():
    text = json.dumps(small(p0={"seed": 7}))
    a = parse_scenario_text(text).initial_configuration()
    b = parse_scenario_text(text).initial_configuration()
    assert np.array_equal(a, b)
    c = parse_scenario_text(json.dumps(small(p0={"seed": 8}))).initial_configuration()
    assert not np.array_equal(a, c)


def test_explicit_p0():
    pts = [[float(i), -float(i)] for i in range(6)]
    s = parse_scenario_text(json.dumps(small(p0=pts)))
    np.testing.assert_array_equal(s.initial_configuration(), np.array(pts).ravel())


@pytest.mark.parametrize(
    "data, fragment",
    [
        (small(family="anchored-reflection", anchor_vertex=None), "requires anchor_vertex"),
        (small(family="triangle"), "unknown family"),
        ({"n": 6, "family": "reflection"}, "missing field: removed_edge"),
        (small(n="six"), "n:"),
        (small(removed_edge=[1, 3]), "not an edge"),
        (small(p0=[[0, 0]] * 5), "expected 6 positions"),
        (small(dt=-1), "dt:"),
        (small(colour="red"), "unknown field"),
        (small(anchor_vertex=9), "outside"),
    ],
)
def test_parse_errors(data, fragment):
    data = {k: v for k, v in data.items() if v is not None}
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(json.dumps(data, indent=2))
    assert fragment in str(info.value)


def test_parse_error_names_line():
    text = json.dumps(small(family="triangle"), indent=2)
    with pytest.raises(ScenarioError, match=r"^line 8: family: "):
        parse_scenario_text(text)


def test_malformed_json_reports_line():
    with pytest.raises(ScenarioError, match=r"line 4: malformed JSON"):
        parse_scenario_text('{\n  "n": 6,\n  "family": \n}')


def test_analyze_null_dims():
    free = small(family="reflection")
    del free["anchor_vertex"]
    reflect = cmd_analyze(parse_scenario_text(json.dumps(free)))
    assert reflect["null_dim"] == 2
    anchored = cmd_analyze(parse_scenario_text(json.dumps(small())))
    assert anchored["null_dim"] == 1
    assert anchored["v0_norm_sq"] == pytest.approx(6, abs=1e-10)
    assert len(anchored["mirror_angles"]) == 6


def test_predict_matches_simulation(tmp_path):
    s = parse_scenario(preset_path("example4"))
    pred = np.array(cmd_predict(s)["p_inf"]).ravel()
    summary = cmd_simulate(s, tmp_path)
    final = np.array(next(reversed(list(csv.reader(open(tmp_path / "trajectory.csv"))))), dtype=float)[1:]
    assert np.linalg.norm(final - pred) <= 1e-6
    assert summary["steady_state_gap"] <= 1e-6


def test_simulate_outputs(tmp_path):
    summary = cmd_simulate(parse_scenario(preset_path("example3")), tmp_path)
    rows = list(csv.reader(open(tmp_path / "trajectory.csv")))
    assert rows[0] == ["t"] + [f"p{i}{a}" for i in range(1, 7) for a in "xy"]
    assert 2 < len(rows) <= 2001
    res = list(csv.reader(open(tmp_path / "residuals.csv")))
    assert res[0] == ["t", "edge_residual", "anchor_residual", "full_group_residual"]
    on_disk = json.loads((tmp_path / "summary.json").read_text())
    term = on_disk["terminal_residuals"]
    assert term["edge"] < 1e-6
    assert term["full_group"] > 0.05
    assert term["anchor"] is None
    assert summary["n"] == 6


def test_simulate_is_byte_deterministic(tmp_path):
    s = parse_scenario(preset_path("example2"))
    cmd_simulate(s, tmp_path / "a")
    cmd_simulate(s, tmp_path / "b")
    for name in ("trajectory.csv", "residuals.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_simulate_default_dir_from_env(tmp_path, monkeypatch):
    monkeypatch.setenv("DF_OUT_DIR", str(tmp_path))
    s = parse_scenario_text(json.dumps(small(horizon=2.0)))
    cmd_simulate(s)
    assert (tmp_path / "small" / "summary.json").exists()


def test_simulate_maneuver_writes_virtual(tmp_path):
    data = small(
        n=4,
        removed_edge=[4, 1],
        family="maneuver",
        horizon=3.0,
        dt=0.01,
        maneuver={"v": [[0, 1, 0]], "omega": [[0, 0.1]], "alpha": [[0, 0], [1, 0.05]]},
    )
    summary = cmd_simulate(parse_scenario_text(json.dumps(data)), tmp_path)
    head = (tmp_path / "virtual.csv").read_text().splitlines()[0]
    assert head == "t,rx,ry,theta,s"
    assert summary["frame"] == "moving"
    assert summary["terminal_virtual"]["s"] == pytest.approx(np.exp(0.1))


def test_cli_analyze_ok(tmp_path):
    result = CliRunner().invoke(cli, ["analyze", str(preset_path("example4"))])
    assert result.exit_code == 0
    assert json.loads(result.output)["null_dim"] == 1


def test_cli_predict_ok():
    result = CliRunner().invoke(cli, ["predict", str(preset_path("example4"))])
    assert result.exit_code == 0
    assert len(json.loads(result.output)["p_inf"]) == 12


def test_cli_simulate_ok(tmp_path):
    out = tmp_path / "run"
    result = CliRunner().invoke(cli, ["simulate", str(preset_path("example4")), "--out", str(out), "--horizon", "5"])
    assert result.exit_code == 0
    assert (out / "trajectory.csv").exists()


def run_cli(capsys, argv):
    code = run(argv)
    err = capsys.readouterr().err
    return code, err


def test_exit_code_parse_error(tmp_path, capsys):
    path = write(tmp_path, small(family="triangle"))
    code, err = run_cli(capsys, ["analyze", str(path)])
    assert code == 2
    assert err.count("\n") == 1 and err.startswith("error: parse-error: ")


def test_exit_code_missing_file(tmp_path, capsys):
    code, err = run_cli(capsys, ["analyze", str(tmp_path / "nope.json")])
    assert code == 2 and err.count("\n") == 1


def test_exit_code_usage(capsys):
    code, err = run_cli(capsys, ["frobnicate"])
    assert code == 2 and err.startswith("error: usage: ")


def test_exit_code_unstable_step(tmp_path, capsys):
    path = write(tmp_path, small())
    code, err = run_cli(capsys, ["simulate", str(path), "--out", str(tmp_path / "o"), "--dt", "10"])
    assert code == 3
    assert err.count("\n") == 1 and err.startswith("error: ")


def test_exit_code_divergence(tmp_path, capsys):
    data = small(n=4, removed_edge=[4, 1], family="maneuver", maneuver={"alpha": [[0, 1000]]})
    path = write(tmp_path, data)
    code, err = run_cli(capsys, ["simulate", str(path), "--out", str(tmp_path / "o"), "--dt", "0.01", "--horizon", "2"])
    assert code == 4
    assert err.count("\n") == 1 and "t=" in err


def test_exit_code_ok(capsys):
    assert run(["analyze", str(preset_path("example2"))]) == 0
