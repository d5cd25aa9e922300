import numpy as np
import pytest

from algorithms.lattice_search import extract_layer_metrics, kbest_search, real_decompose
from detectors.candidate_detector import candidate_log_map, candidate_max_log
from detectors.log_map_detector import exact_log_map, exact_max_log
from entity.candidate_list import CandidateList
from entity.channel import ChannelModelConfig, draw_channel, transmit
from entity.constellation import build_constellation, level_indices_to_bits, modulate
from manager.oracle_manager import full_candidate_list


def instance(rng, m_c, n_t=2, noise_var=1.0):
    c = build_constellation(m_c)
    h = draw_channel(ChannelModelConfig(), n_t, n_t, rng)
    y = transmit(h, modulate(rng.integers(0, 2, n_t * m_c), c, n_t), noise_var, rng)
    return c, h, y


@pytest.mark.parametrize("m_c", [2, 4])
def test_exhaustive_list_matches_exact_max_log(rng, m_c):
    for _ in range(10):
        c, h, y = instance(rng, m_c, noise_var=rng.uniform(0.2, 4.0))
        cands = full_candidate_list(y, h, c, 2)
        listed = candidate_max_log(cands, extract_layer_metrics(cands, c, 2), 0.9, c, 60.0)
        assert np.allclose(listed.llr, exact_max_log(y, h, 0.9, c, 2).llr, atol=1e-10)


def test_exhaustive_list_matches_exact_log_map(rng):
    c, h, y = instance(rng, 4)
    cands = full_candidate_list(y, h, c, 2)
    assert np.allclose(candidate_log_map(cands, 1.3, c, 60.0).llr, exact_log_map(y, h, 1.3, c, 2).llr, atol=1e-10)


def test_single_path_saturates():
    c = build_constellation(4)
    path = np.array([3, 0, 1, 2])
    cands = CandidateList.from_paths([path], [0.4])
    expected = np.where(level_indices_to_bits(path, c) == 1, 60.0, -60.0)
    assert np.array_equal(candidate_max_log(cands, extract_layer_metrics(cands, c, 2), 1.0, c, 60.0).llr, expected)
    assert np.array_equal(candidate_log_map(cands, 1.0, c, 60.0).llr, expected)


def test_partial_list(rng):
    c, h, y = instance(rng, 4, noise_var=2.0)
    cands = kbest_search(real_decompose(h, y), c, 6)
    llr = candidate_max_log(cands, extract_layer_metrics(cands, c, 2), 2.0, c, 60.0).llr
    bits = level_indices_to_bits(cands.level_indices, c)
    for b in range(8):
        ones, zeros = cands.metrics[bits[:, b] == 1], cands.metrics[bits[:, b] == 0]
        if ones.size and zeros.size:
            assert llr[b] == pytest.approx((zeros.min() - ones.min()) / 2.0, abs=1e-10)
        else:
            assert llr[b] == (60.0 if ones.size else -60.0)
    assert np.all(np.sign(llr) == np.where(level_indices_to_bits(cands.best, c) == 1, 1, -1))


def test_empty_list():
    c = build_constellation(2)
    empty = CandidateList.from_paths(np.zeros((0, 2), dtype=int), [])
    with pytest.raises(ValueError):
        candidate_log_map(empty, 1.0, c, 60.0)


def test_log_map_with_widely_spread_metrics():
    c = build_constellation(4)
    cands = CandidateList.from_paths([[0, 0], [1, 0], [3, 3]], [0.0, 5e3, 1e4])
    llr = candidate_log_map(cands, 1.0, c, 60.0).llr
    assert np.all(np.isfinite(llr))
    bits = level_indices_to_bits(cands.level_indices, c)
    for b in range(4):
        ones, zeros = cands.metrics[bits[:, b] == 1], cands.metrics[bits[:, b] == 0]
        if ones.size and zeros.size:
            assert llr[b] == pytest.approx(zeros.min() - ones.min())
