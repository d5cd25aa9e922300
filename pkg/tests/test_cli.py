import importlib
import json
import logging

import pytest
from click.testing import CliRunner

from entity.sim_config import RESULT_COLUMNS
from manager.oracle_manager import OracleManager, OracleReport


@pytest.fixture
def cli():
    import cli
    return cli.cli


@pytest.fixture
def sim_file(tmp_path):
    path = tmp_path / "sim.json"
    path.write_text(json.dumps({
        "n_t": 2, "n_r": 2, "m_c": 2,
        "snr_db_list": [5, 10],
        "n_trials": 4,
        "detectors": ["exact_log_map", "candidate_max_log(4)", "lmmse", "mpps(4)"],
        "seed": 3,
        "train_samples": 6,
        "train_snr_db": [5, 10],
    }))
    return path


def write_config(path, **changes):
    data = json.loads(path.read_text())
    data.update(changes)
    path.write_text(json.dumps(data))


def test_simulate_csv(cli, sim_file, tmp_path):
    write_config(sim_file, detectors=["exact_log_map", "lmmse"])
    out = tmp_path / "rows.csv"
    result = CliRunner().invoke(cli, ["simulate", "-c", str(sim_file), "-o", str(out)])
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(RESULT_COLUMNS)
    assert len(lines) == 5
    assert "Results written" in result.output


def test_simulate_json(cli, sim_file, tmp_path):
    write_config(sim_file, detectors=["lmmse"])
    out = tmp_path / "rows.json"
    result = CliRunner().invoke(cli, ["simulate", "-c", str(sim_file), "-o", str(out), "-f", "json", "-t", "2"])
    assert result.exit_code == 0, result.output
    assert [record["snr_db"] for record in json.loads(out.read_text())] == [5.0, 10.0]


def test_simulate_rejects_bad_config(cli, sim_file, tmp_path):
    write_config(sim_file, antennas=8)
    result = CliRunner().invoke(cli, ["simulate", "-c", str(sim_file), "-o", str(tmp_path / "rows.csv")])
    assert result.exit_code == 1
    assert "Error: Unknown config fields" in result.output


def test_simulate_requires_model(cli, sim_file, tmp_path):
    result = CliRunner().invoke(cli, ["simulate", "-c", str(sim_file), "-o", str(tmp_path / "rows.csv")])
    assert result.exit_code == 1
    assert "requires a trained model" in result.output


def test_train_then_evaluate(cli, sim_file, tmp_path, config):
    config.config["network"]["epochs"] = 5
    model_path = tmp_path / "models" / "net.txt"
    result = CliRunner().invoke(cli, ["train", "-c", str(sim_file), "-m", str(model_path)])
    assert result.exit_code == 0, result.output
    assert model_path.read_text().startswith("mppsnet-v1 7 ")

    out = tmp_path / "rows.csv"
    result = CliRunner().invoke(cli, ["evaluate", "-m", str(model_path), "-c", str(sim_file), "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert any(line.split(",")[1] == "mpps(4)" for line in out.read_text().splitlines()[1:])


def test_evaluate_rejects_bad_model(cli, sim_file, tmp_path):
    model_path = tmp_path / "net.txt"
    model_path.write_text("not a model\n")
    result = CliRunner().invoke(cli, ["evaluate", "-m", str(model_path), "-c", str(sim_file), "-o",
        str(tmp_path / "rows.csv")])
    assert result.exit_code == 1
    assert "Error:" in result.output


@pytest.mark.parametrize("passed, exit_code", [(True, 0), (False, 1)])
def test_oracle_exit_code(cli, sim_file, monkeypatch, passed, exit_code):
    monkeypatch.setattr(OracleManager, "run_all", lambda self: [OracleReport("suite", passed, "detail", 0.1)])
    result = CliRunner().invoke(cli, ["oracle", "-c", str(sim_file)])
    assert result.exit_code == exit_code
    assert ("PASS suite" if passed else "FAIL suite") in result.output


def test_simulate_snr_override(cli, sim_file, tmp_path):
    write_config(sim_file, detectors=["lmmse"])
    out = tmp_path / "rows.csv"
    result = CliRunner().invoke(cli, ["simulate", "-c", str(sim_file), "-o", str(out), "--snr", "0, 3.5,7"])
    assert result.exit_code == 0, result.output
    assert [line.split(",")[0] for line in out.read_text().splitlines()[1:]] == ["0", "3.5", "7"]


def test_log_level_from_config(config, monkeypatch):
    import cli as cli_module
    calls = []
    config.config["logging"]["level"] = "WARNING"
    monkeypatch.setattr(logging, "basicConfig", lambda **kwargs: calls.append(kwargs))
    importlib.reload(cli_module)
    assert calls[0]["level"] == "WARNING"
    assert calls[0]["filename"] == config.log_file
