import json
import math

import pytest

from entity.channel import ChannelModelConfig, ChannelModelKind
from entity.constellation import ConstellationError
from entity.sim_config import ResultRow, SimConfig, SimConfigError


def test_from_dict_defaults(config):
    cfg = SimConfig.from_dict({"n_t": 2, "n_r": 4, "m_c": 4})
    assert cfg.channel == ChannelModelConfig()
    assert cfg.k_budget == config.k_budget
    assert cfg.lambda_max == config.lambda_max
    assert cfg.train_snr_db == tuple(config.train_snr_db)
    assert cfg.constellation.num_levels == 4


def test_from_dict_flat_channel():
    cfg = SimConfig.from_dict({"n_t": 2, "n_r": 2, "m_c": 2, "channel": "kronecker_rayleigh", "rho_t": 0.3,
        "rho_r": 0.5})
    assert cfg.channel == ChannelModelConfig(ChannelModelKind.KRONECKER_RAYLEIGH, 0.3, 0.5)


def test_from_dict_nested_channel():
    cfg = SimConfig.from_dict({"n_t": 1, "n_r": 1, "m_c": 2, "channel": {"kind": "identity_awgn"}})
    assert cfg.channel.kind == ChannelModelKind.IDENTITY_AWGN


def test_from_dict_rejects_unknown_fields():
    with pytest.raises(SimConfigError):
        SimConfig.from_dict({"n_t": 2, "n_r": 2, "m_c": 2, "antennas": 4})


@pytest.mark.parametrize("changes", [
    {"n_t": 0},
    {"n_r": 1},
    {"n_trials": 0},
    {"detectors": ()},
    {"snr_db_list": ()},
    {"k_budget": 0},
    {"seed": -1},
    {"moment_method": "median"},
    {"train_snr_db": (20.0, 10.0)},
])
def test_validation(changes):
    data = {"n_t": 2, "n_r": 2, "m_c": 2, **changes}
    with pytest.raises(SimConfigError):
        SimConfig(**data)


def test_unsupported_constellation():
    with pytest.raises(ConstellationError):
        SimConfig(n_t=2, n_r=2, m_c=5)


def test_from_file_and_seed_override(tmp_path, monkeypatch):
    path = tmp_path / "sim.json"
    path.write_text(json.dumps({"n_t": 2, "n_r": 2, "m_c": 2, "seed": 4, "snr_db_list": [0, 5]}))
    assert SimConfig.from_file(str(path)).seed == 4
    monkeypatch.setenv("MPPS_SEED", "99")
    cfg = SimConfig.from_file(str(path))
    assert cfg.seed == 99
    assert cfg.snr_db_list == (0.0, 5.0)


def test_hash_and_replace():
    cfg = SimConfig(n_t=2, n_r=2, m_c=2)
    assert cfg.get_hash() == SimConfig(n_t=2, n_r=2, m_c=2).get_hash()
    changed = cfg.replace(seed=1)
    assert changed.seed == 1 and cfg.seed == 0
    assert changed.get_hash() != cfg.get_hash()
    assert SimConfig.from_dict(cfg.to_dict()) == cfg


def test_train_config_uses_seed(config):
    tc = SimConfig(n_t=2, n_r=2, m_c=2, seed=8).train_config()
    assert tc.seed == 8
    assert tc.epochs == config.network["epochs"]


def test_result_row_validation():
    with pytest.raises(SimConfigError):
        ResultRow(10.0, "lmmse", 0, 4, 1.5, 0.0, 0.0, 0.0, 0, 0.0)
    with pytest.raises(SimConfigError):
        ResultRow(10.0, "lmmse", 0, -1, 0.5, 0.0, 0.0, 0.0, 0, 0.0)
    marker = ResultRow.error_marker(12.0, 3)
    assert marker.detector == "error"
    assert math.isnan(marker.llr_mse)
    assert ResultRow.from_record(marker.to_record()).seed == 3
