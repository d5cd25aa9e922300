import numpy as np

from entity.constellation import build_constellation
from entity.sim_config import SimConfig
from manager.oracle_manager import OracleManager, full_candidate_list, gaussian_metric_row


def manager() -> OracleManager:
    return OracleManager(SimConfig(n_t=2, n_r=2, m_c=4, seed=7))


def test_moment_fit_suite():
    report = manager().check_moment_fit(100)
    assert report.passed, report.detail


def test_transport_suite():
    report = manager().check_transport_optimality(20)
    assert report.passed, report.detail


def test_minimal_path_set_suite():
    report = manager().check_minimal_path_set(60, n_t=2)
    assert report.passed, report.detail
    assert report.detail.endswith("fallbacks 0")


def test_oracle_equivalence_suite():
    report = manager().check_oracle_equivalence(3)
    assert report.passed, report.detail


def test_gradient_suite():
    report = manager().check_gradients(2, 10)
    assert report.passed, report.detail


def test_gaussian_metric_row():
    levels = build_constellation(4).pam_levels
    row = gaussian_metric_row(levels, 1.0, 2.0)
    assert np.argmin(row) == 2
    assert np.allclose(np.diff(row), [-3.0, -1.0, 1.0])


def test_full_candidate_list_size(rng):
    c = build_constellation(2)
    cands = full_candidate_list(rng.standard_normal(2) + 0j, np.eye(2), c, 2)
    assert len(cands) == 16


def test_sign_agreement_suite():
    report = manager().check_sign_agreement(10_000)
    assert report.passed, report.detail
    assert "over 80000 bits" in report.detail
