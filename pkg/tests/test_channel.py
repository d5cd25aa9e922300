import numpy as np
import pytest

from entity.channel import (
    ChannelError, ChannelModelConfig, ChannelModelKind, ChannelRealization, correlation_sqrt, draw_channel,
    noise_var_from_snr, transmit,
)
from entity.constellation import build_constellation


def test_noise_var_examples():
    iid = ChannelModelConfig(ChannelModelKind.IID_RAYLEIGH)
    identity = ChannelModelConfig(ChannelModelKind.IDENTITY_AWGN)
    assert noise_var_from_snr(0, 4, build_constellation(4), iid) == pytest.approx(40.0)
    assert noise_var_from_snr(10, 1, build_constellation(2), identity) == pytest.approx(0.2)
    assert noise_var_from_snr(200, 4, build_constellation(4), iid) < 1e-15


def test_identity_channel(rng):
    h = draw_channel(ChannelModelConfig("identity_awgn"), 4, 4, rng)
    assert np.array_equal(h, np.eye(4))


def test_zero_correlation_matches_iid():
    iid = draw_channel(ChannelModelConfig("iid_rayleigh"), 4, 4, np.random.default_rng(7))
    kron = draw_channel(ChannelModelConfig("kronecker_rayleigh", 0.0, 0.0), 4, 4, np.random.default_rng(7))
    assert np.array_equal(iid, kron)


def test_correlation_sqrt_squares_back():
    root = correlation_sqrt(0.3, 4)
    index = np.arange(4)
    assert np.allclose(root @ root, 0.3 ** np.abs(index[:, None] - index[None, :]), atol=1e-12)
    assert np.allclose(root, root.T)


def test_kronecker_receive_correlation(rng):
    cfg = ChannelModelConfig("kronecker_rayleigh", 0.3, 0.3)
    acc = np.zeros((4, 4), dtype=complex)
    draws = 100000
    for _ in range(draws // 1000):
        h = np.stack([draw_channel(cfg, 4, 4, rng) for _ in range(1000)])
        acc += np.einsum("nij,nkj->ik", h, h.conj())
    estimate = acc / draws / 4
    assert abs(estimate[0, 1].real - 0.3) < 0.05


def test_noiseless_transmit(rng):
    h = draw_channel(ChannelModelConfig(), 3, 2, rng)
    s = np.array([1 + 1j, -3 + 1j])
    assert np.array_equal(transmit(h, s, 0.0, rng), h @ s)


def test_noise_moments(rng):
    samples = np.concatenate([transmit(np.eye(4), np.zeros(4), 1.0, rng) for _ in range(25000)])
    assert abs(np.mean(np.abs(samples) ** 2) - 1.0) < 0.02
    assert abs(np.var(samples.real) - 0.5) < 0.02
    assert abs(np.var(samples.imag) - 0.5) < 0.02


def test_invalid_inputs(rng):
    with pytest.raises(ChannelError):
        ChannelModelConfig("kronecker_rayleigh", 1.0, 0.0)
    with pytest.raises(ChannelError):
        draw_channel(ChannelModelConfig(), 2, 3, rng)
    with pytest.raises(ChannelError):
        transmit(np.eye(2), np.zeros(3), 1.0, rng)
    with pytest.raises(ChannelError):
        ChannelRealization(np.eye(2), 0.0)
    with pytest.raises(ValueError):
        ChannelModelConfig("rician")
