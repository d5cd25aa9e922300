import numpy as np
import pytest

from detectors import EnumerationTooLargeError
from entity.mlp_model import TrainConfig
from entity.sim_config import SimConfig
import manager.training_manager as training_manager
from manager.training_manager import TrainingManager, build_dataset


def qpsk_config(**changes) -> SimConfig:
    return SimConfig(n_t=2, n_r=2, m_c=2, k_budget=4, train_samples=20, train_snr_db=(5.0, 15.0), seed=2,
        lambda_max=8.0).replace(**changes)


def test_dataset_shape(rng):
    dataset = build_dataset(qpsk_config(), 30, rng)
    assert dataset.features.shape == (60, 7)
    assert dataset.labels.shape == (60, 2)
    assert np.all(np.abs(dataset.labels) <= 8.0)
    assert np.all(dataset.features[:, 2:4] > 0)
    assert np.all((dataset.features[:, 6] > 0))


def test_dataset_deterministic():
    a = build_dataset(qpsk_config(), 5, np.random.default_rng(4))
    b = build_dataset(qpsk_config(), 5, np.random.default_rng(4))
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)


def test_dataset_noise_feature_spans_training_range(rng):
    cfg = qpsk_config()
    dataset = build_dataset(cfg, 50, rng)
    noise = dataset.features[:, 6]
    # iid QPSK with N_t = 2: noise_var = 4 / 10^(snr/10)
    assert np.all((noise >= 4 * 10 ** -1.5 - 1e-12) & (noise <= 4 * 10 ** -0.5 + 1e-12))


def test_dataset_enumeration_guard(config, rng):
    config.config["detection"]["enumeration_limit"] = 4
    with pytest.raises(EnumerationTooLargeError):
        build_dataset(qpsk_config(), 2, rng)


def test_dataset_cache(config, tmp_path, monkeypatch):
    config.config["cache"] = {"active": True, "dir": str(tmp_path / "cache")}
    calls = []
    original = training_manager.build_dataset

    def counting_build(cfg, n_samples, rng):
        calls.append(n_samples)
        return original(cfg, n_samples, rng)

    monkeypatch.setattr(training_manager, "build_dataset", counting_build)
    manager = TrainingManager(qpsk_config())
    first = manager.get_dataset(6, 1)
    second = TrainingManager(qpsk_config()).get_dataset(6, 1)
    TrainingManager(qpsk_config(seed=5)).get_dataset(6, 1)
    assert calls == [6, 6]
    assert np.array_equal(first.features, second.features)


def test_train_small_model():
    manager = TrainingManager(qpsk_config())
    model, trace = manager.train(train_config=TrainConfig(epochs=3, batch_size=8, seed=2))
    assert len(trace) == 3
    assert model.m_c == 2
    assert model.lambda_max == 8.0
    assert model.hidden_dim == manager.config.hidden_dim
    assert np.all(model.feat_std > 0)


def test_labels_symmetric_about_zero():
    dataset = build_dataset(qpsk_config(lambda_max=60.0), 4000, np.random.default_rng(9))
    assert abs(dataset.labels.mean()) < 0.05 * np.abs(dataset.labels).mean()
    assert np.all(np.abs(dataset.labels) <= 60.0)
