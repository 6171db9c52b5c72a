import json
import math
from pathlib import Path

import pytest
from click.testing import CliRunner

from cli import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, EXIT_UNCERTIFIED, cli

DEMO = Path(__file__).resolve().parent.parent / "demodata" / "source"


@pytest.fixture
def runner():
    return CliRunner()


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data) if isinstance(data, dict) else data)
    return str(path)


def test_fit_monotone_input(runner, tmp_path):
    src = write(tmp_path, "m.json", {"a": 0, "b": 3, "values": [0.0, 1.0, 2.5]})
    out = tmp_path / "m-out.json"
    result = runner.invoke(cli, ["fit", src, "-o", str(out)])
    assert result.exit_code == EXIT_OK, result.output
    data = json.loads(out.read_text())
    assert data["g_star"] == [0.0, 1.0, 2.5]
    assert data["modular_value"] == 0.0
    assert data["certificate"]["passed"] is True
    plot = (tmp_path / "m-out.csv").read_text().splitlines()
    assert plot[0] == "x,f,g_star"
    assert len(plot) == 4


def test_fit_power2_pair(runner, tmp_path):
    out = tmp_path / "pair.json"
    result = runner.invoke(cli, ["fit", str(DEMO / "two_cells.json"), "--family", "power", "-o", str(out)])
    assert result.exit_code == EXIT_OK, result.output
    data = json.loads(out.read_text())
    assert [(b["start_cell"], b["end_cell"], b["level"]) for b in data["blocks"]] == [(0, 1, 1.5)]
    assert data["spec"] == {"family": "power", "p": 2.0}


def test_fit_sawtooth_to_stdout(runner):
    result = runner.invoke(cli, ["fit", str(DEMO / "sawtooth.csv"), "--family", "arctan"])
    assert result.exit_code == EXIT_OK, result.output
    g = json.loads(result.output)["g_star"]
    assert all(x <= y for x, y in zip(g, g[1:]))


def test_malformed_csv_exits_2(runner, tmp_path):
    src = write(tmp_path, "bad.csv", "x_left,x_right,f\n0,1,2\n1,0.5,3\n")
    result = runner.invoke(cli, ["fit", src])
    assert result.exit_code == EXIT_INPUT
    assert "input error" in result.output


def test_non_utf8_problem_exits_2(runner, tmp_path):
    src = tmp_path / "bytes.csv"
    src.write_bytes(b"x_left,x_right,f\n0,1,\xff\xfe\n")
    result = runner.invoke(cli, ["fit", str(src)])
    assert result.exit_code == EXIT_INPUT
    assert "input error" in result.output


def test_non_utf8_candidate_exits_2(runner, tmp_path):
    cand = tmp_path / "g.csv"
    cand.write_bytes(b"g\n\xff\n\xfe\n")
    result = runner.invoke(cli, ["certify", str(DEMO / "two_cells.json"), str(cand)])
    assert result.exit_code == EXIT_INPUT


def test_score_overflow_exits_3(runner, tmp_path):
    src = write(tmp_path, "far.json", {"a": 0, "b": 2, "values": [2000.0, 0.0]})
    result = runner.invoke(cli, ["fit", src, "--family", "exponential"])
    assert result.exit_code == EXIT_NUMERICAL
    assert "numerical failure" in result.output


def test_power_one_is_refused(runner):
    result = runner.invoke(cli, ["fit", str(DEMO / "two_cells.json"), "--family", "power", "--p", "1"])
    assert result.exit_code == EXIT_INPUT
    assert "φ(0⁺) = 0" in result.output


def test_power_one_oracle_mode_is_uncertified(runner, tmp_path):
    out = tmp_path / "l1.json"
    result = runner.invoke(
        cli, ["fit", str(DEMO / "two_cells.json"), "--family", "power", "--p", "1", "--allow-l1-oracle", "-o", str(out)]
    )
    assert result.exit_code == EXIT_UNCERTIFIED
    data = json.loads(out.read_text())
    assert data["modular_value"] == pytest.approx(1.0, abs=1e-12)
    assert "certificate" not in data


def test_certify_solver_output(runner, tmp_path):
    cand = write(tmp_path, "g.json", {"values": [1.5, 1.5]})
    result = runner.invoke(cli, ["certify", str(DEMO / "two_cells.json"), cand, "--family", "power"])
    assert result.exit_code == EXIT_OK, result.output


def test_certify_perturbed_candidate(runner, tmp_path):
    cand = write(tmp_path, "g.csv", "g\n1.5\n1.6\n")
    out = tmp_path / "report.json"
    result = runner.invoke(cli, ["certify", str(DEMO / "two_cells.json"), cand, "--family", "power", "-o", str(out)])
    assert result.exit_code == EXIT_UNCERTIFIED
    report = json.loads(out.read_text())["certificate"]
    assert report["passed"] is False
    assert report["items"]["item3"] is False
    assert report["characterization_probe"]


def test_certify_rejects_decreasing_candidate(runner, tmp_path):
    cand = write(tmp_path, "g.csv", "g\n2\n1\n")
    result = runner.invoke(cli, ["certify", str(DEMO / "two_cells.json"), cand])
    assert result.exit_code == EXIT_INPUT


def test_norm_prints_one(runner, tmp_path):
    src = write(tmp_path, "root2.json", {"a": 0, "b": 1, "values": [math.sqrt(2.0)]})
    result = runner.invoke(cli, ["norm", src, "--family", "power"])
    assert result.exit_code == EXIT_OK
    assert result.output.strip() == "1.0"


def test_lux_fit_pair(runner, tmp_path):
    out = tmp_path / "lux.json"
    result = runner.invoke(cli, ["lux-fit", str(DEMO / "two_cells.json"), "--family", "power", "-o", str(out)])
    assert result.exit_code == EXIT_OK, result.output
    data = json.loads(out.read_text())
    assert data["delta"] == pytest.approx(0.5, abs=1e-8)
    assert data["h_star"] == pytest.approx([1.5, 1.5], abs=1e-12)
    assert data["landers_rogge"]["consistent"] is True
    assert data["inner_certificate"]["passed"] is True


def test_output_is_deterministic(runner, tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}.json"
        result = runner.invoke(cli, ["fit", str(DEMO / "sawtooth.csv"), "--seed", "7", "-o", str(out)])
        assert result.exit_code == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_seed_falls_back_to_environment(runner, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    runner.invoke(cli, ["fit", str(DEMO / "sawtooth.csv"), "--seed", "3", "-o", str(a)])
    runner.invoke(cli, ["fit", str(DEMO / "sawtooth.csv"), "-o", str(b)], env={"ORLICZ_ISOTONE_SEED": "3"})
    assert a.read_bytes() == b.read_bytes()


def test_refine_study_step_fixture(runner, tmp_path):
    out = tmp_path / "study.csv"
    result = runner.invoke(
        cli,
        ["refine-study", "--fixture", "step", "--base-cells", "8", "--refine-levels", "2", "--plot-csv", str(out)],
    )
    assert result.exit_code == EXIT_OK, result.output
    lines = out.read_text().splitlines()
    assert lines[0] == "n,max_jump,modular,certified"
    rows = [line.split(",") for line in lines[1:]]
    assert [int(r[0]) for r in rows] == [8, 16, 32]
    assert all(float(r[1]) == 1.0 for r in rows)
    assert all(r[3] == "true" for r in rows)


def test_refine_study_of_user_file(runner):
    result = runner.invoke(cli, ["refine-study", str(DEMO / "sawtooth.csv"), "--refine-levels", "1"])
    assert result.exit_code == EXIT_OK, result.output
    assert [line.split(",")[0] for line in result.output.splitlines()[1:]] == ["5", "10"]


def test_refine_study_needs_a_problem(runner):
    assert runner.invoke(cli, ["refine-study"]).exit_code == EXIT_INPUT


def test_bad_tolerance_is_a_usage_error(runner):
    result = runner.invoke(cli, ["fit", str(DEMO / "two_cells.json"), "--tol", "-1"])
    assert result.exit_code == 2
    assert "tolerances must be positive" in result.output


def test_demo(runner):
    result = runner.invoke(cli, ["demo", "--allow-l1-oracle"])
    assert result.exit_code == EXIT_OK, result.output
    assert "g* = [1.5, 1.5]" in result.output
    assert "power(p=1) refused" in result.output
    assert "L¹ oracle" in result.output
