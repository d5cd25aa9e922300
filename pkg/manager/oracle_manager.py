from __future__ import annotations
from dataclasses import dataclass
from itertools import permutations, product
import logging
import time

import numpy as np

from algorithms.lattice_search import (
    DegenerateChannelError, enumerate_lattice, exhaustive_search, extract_layer_metrics, minimal_path_set,
    real_decompose,
)
from algorithms.mlp import grad_l2, init_model, l2_loss
from algorithms.moment_fitting import fit_moments_ls, fit_moments_three_point, mpps_layer_statistics
from algorithms.optimal_transport import log_probabilities, ot_sort_transform
from detectors import candidate_max_log, exact_log_map, exact_max_log
from entity.candidate_list import CandidateList
from entity.channel import ChannelModelConfig, draw_channel, noise_var_from_snr, transmit
from entity.config import Config
from entity.constellation import Constellation, build_constellation, modulate
from entity.mlp_model import Dataset
from entity.sim_config import SimConfig
import utils.utils as utils


logger = logging.getLogger(__name__)

FIT_TOLERANCE = 1e-8
TRANSPORT_TOLERANCE = 1e-12
ORACLE_TOLERANCE = 1e-10
GRADIENT_TOLERANCE = 1e-4
# exact max-log vs exact log-MAP hard decisions, 2x2 16-QAM Rayleigh at SIGN_AGREEMENT_SNR_DB
SIGN_AGREEMENT_THRESHOLD = 0.99
SIGN_AGREEMENT_SNR_DB = 15.0


@dataclass
class OracleReport():

    name: str
    passed: bool
    detail: str
    elapsed: float = 0.0


def gaussian_metric_row(levels: np.ndarray, mu: float, sigma2: float, offset: float = 0.0) -> np.ndarray:
    """
    Negative log of a discretised Gaussian: (X_i - mu)^2 / (2 sigma2) plus
    the normalising constant and an arbitrary offset.
    """
    return (levels - mu) ** 2 / (2 * sigma2) + 0.5 * np.log(2 * np.pi * sigma2) + offset


def naive_log_map(y: np.ndarray, h: np.ndarray, noise_var: float, c: Constellation, n_t: int) -> np.ndarray:
    """
    Log-MAP LLRs by a plain loop over every complex symbol vector, sharing
    nothing with the vectorised detector except the constellation tables.
    """
    points = []
    for re, im in product(range(c.num_levels), repeat=2):
        bits = list(c.level_bits[re]) + list(c.level_bits[im])
        points.append((c.pam_levels[re] + 1j * c.pam_levels[im], bits))
    n_bits = n_t * c.bits_per_symbol
    terms = {(b, v): [] for b in range(n_bits) for v in (0, 1)}
    for combo in product(points, repeat=n_t):
        s = np.array([symbol for symbol, _ in combo])
        bits = [bit for _, symbol_bits in combo for bit in symbol_bits]
        metric = float(np.sum(np.abs(y - h @ s) ** 2))
        for b, v in enumerate(bits):
            terms[(b, int(v))].append(-metric / noise_var)
    llr = np.empty(n_bits)
    for b in range(n_bits):
        ones, zeros = np.array(terms[(b, 1)]), np.array(terms[(b, 0)])
        m1, m0 = ones.max(), zeros.max()
        llr[b] = (m1 + np.log(np.sum(np.exp(ones - m1)))) - (m0 + np.log(np.sum(np.exp(zeros - m0))))
    return llr


def full_candidate_list(y: np.ndarray, h: np.ndarray, c: Constellation, n_t: int) -> CandidateList:
    dec = real_decompose(h, y)
    paths = np.vstack(list(enumerate_lattice(c, n_t)))
    return CandidateList.from_paths(paths, dec.metrics(c.pam_levels[paths]))


class OracleManager:
    """
    Invariant and oracle suites run by the `oracle` command.

    Methods:
        check_moment_fit(n_rows) -> OracleReport
        check_transport_optimality(n_rows) -> OracleReport
        check_minimal_path_set(n_channels) -> OracleReport
        check_oracle_equivalence(n_instances) -> OracleReport
        check_gradients(n_models, n_coords) -> OracleReport
        check_sign_agreement(n_instances) -> OracleReport
        run_all() -> list[OracleReport]
    """

    def __init__(self, sim_config: SimConfig):
        self.sim_config = sim_config
        self.config = Config.get_singleton()

    def _rng(self, suite: int) -> np.random.Generator:
        return utils.trial_rng(self.sim_config.seed, suite, 0)

    def check_moment_fit(self, n_rows: int = 1000) -> OracleReport:
        rng = self._rng(1)
        worst = 0.0
        for row_idx in range(n_rows):
            c = build_constellation(4 if row_idx % 2 == 0 else 6)
            levels = c.pam_levels
            mu = rng.uniform(levels[0], levels[-1])
            sigma2 = rng.uniform(0.1, 10.0)
            row = gaussian_metric_row(levels, mu, sigma2, rng.uniform(-5, 5))
            center = int(np.clip(np.argmin(np.abs(levels - mu)), 1, levels.size - 2))
            fits = [
                fit_moments_ls(levels, row),
                fit_moments_three_point(levels[center], row[center - 1], row[center], row[center + 1], levels),
            ]
            for fit_mu, fit_sigma2 in fits:
                worst = max(worst, abs(fit_mu - mu), abs(fit_sigma2 - sigma2))
        return OracleReport("moment fit exactness", worst < FIT_TOLERANCE, f"max abs error {worst:.3e}")

    def check_transport_optimality(self, n_rows: int = 500) -> OracleReport:
        rng = self._rng(2)
        worst = 0.0
        for k in (4, 6):
            perms = np.array(list(permutations(range(k))))
            for _ in range(n_rows):
                row = rng.uniform(0.0, 10.0, size=k)
                _, transformed = ot_sort_transform(row)
                peak = int(np.argmin(transformed))
                # q strictly decreasing in distance from the peak, equal at equal distance
                q = np.exp(-0.5 * (np.arange(k) - peak) ** 2)
                q /= q.sum()
                log_p = log_probabilities(row)
                best = float(np.max(log_p[perms] @ q))
                attained = float(q @ log_probabilities(transformed.data))
                worst = max(worst, best - attained)
        return OracleReport("sorting transform optimality", worst <= TRANSPORT_TOLERANCE,
            f"max objective gap {worst:.3e}")

    def check_minimal_path_set(self, n_channels: int = 1000, n_t: int = 4, snr_db: float = 15.0) -> OracleReport:
        rng = self._rng(3)
        c = build_constellation(4)
        budget = 4 * n_t + 1
        channel = ChannelModelConfig()
        fallbacks, non_finite, oversized, checked = 0, 0, 0, 0
        noise_var = noise_var_from_snr(snr_db, n_t, c, channel)
        for _ in range(n_channels):
            h = draw_channel(channel, n_t, n_t, rng)
            bits = rng.integers(0, 2, size=n_t * c.bits_per_symbol)
            y = transmit(h, modulate(bits, c, n_t), noise_var, rng)
            try:
                dec = real_decompose(h, y)
            except DegenerateChannelError:
                continue
            checked += 1
            exhaustive = exhaustive_search(dec, c)
            cands = minimal_path_set(dec, c, exhaustive.best, exhaustive=exhaustive)
            oversized += len(cands) > budget
            moments = mpps_layer_statistics(extract_layer_metrics(cands, c, n_t), c, ot_sort=True)
            for m in moments:
                non_finite += not (np.isfinite(m.mu) and np.isfinite(m.sigma2) and m.sigma2 > 0)
                fallbacks += m.fallback
        passed = oversized == 0 and non_finite == 0 and fallbacks == 0 and checked > 0
        return OracleReport("minimal path set", passed,
            f"{checked} channels, budget {budget}, oversized {oversized}, non-finite {non_finite}, "
            f"fallbacks {fallbacks}")

    def check_oracle_equivalence(self, n_instances: int = 100) -> OracleReport:
        rng = self._rng(4)
        n_t = 2
        worst_log_map = 0.0
        c = build_constellation(4)
        for _ in range(n_instances):
            h = draw_channel(ChannelModelConfig(), n_t, n_t, rng)
            bits = rng.integers(0, 2, size=n_t * c.bits_per_symbol)
            noise_var = rng.uniform(0.5, 20.0)
            y = transmit(h, modulate(bits, c, n_t), noise_var, rng)
            llr = exact_log_map(y, h, noise_var, c, n_t).llr
            worst_log_map = max(worst_log_map, float(np.max(np.abs(llr - naive_log_map(y, h, noise_var, c, n_t)))))
        qpsk = build_constellation(2)
        worst_max_log = 0.0
        for _ in range(n_instances):
            h = draw_channel(ChannelModelConfig(), n_t, n_t, rng)
            bits = rng.integers(0, 2, size=n_t * qpsk.bits_per_symbol)
            noise_var = rng.uniform(0.1, 4.0)
            y = transmit(h, modulate(bits, qpsk, n_t), noise_var, rng)
            cands = full_candidate_list(y, h, qpsk, n_t)
            listed = candidate_max_log(cands, extract_layer_metrics(cands, qpsk, n_t), noise_var, qpsk,
                self.sim_config.lambda_max).llr
            exact = exact_max_log(y, h, noise_var, qpsk, n_t).llr
            worst_max_log = max(worst_max_log, float(np.max(np.abs(listed - exact))))
        passed = worst_log_map <= ORACLE_TOLERANCE and worst_max_log <= ORACLE_TOLERANCE
        return OracleReport("oracle equivalence", passed,
            f"log-MAP vs naive {worst_log_map:.3e}, list max-log vs exact {worst_max_log:.3e}")

    def check_gradients(self, n_models: int = 10, n_coords: int = 20, eps: float = 1e-5) -> OracleReport:
        rng = self._rng(5)
        worst = 0.0
        for _ in range(n_models):
            model = init_model(8, 4, rng, self.sim_config.lambda_max)
            batch = Dataset(rng.standard_normal((16, model.in_dim)), rng.standard_normal((16, 4)))
            grad = grad_l2(model, batch)
            for _ in range(n_coords):
                name = ("w1", "b1", "w2", "b2")[rng.integers(4)]
                param = getattr(model, name)
                index = tuple(int(rng.integers(n)) for n in param.shape)
                original = param[index]
                param[index] = original + eps
                loss_plus = l2_loss(model, batch)
                param[index] = original - eps
                loss_minus = l2_loss(model, batch)
                param[index] = original
                numeric = (loss_plus - loss_minus) / (2 * eps)
                analytic = getattr(grad, name)[index]
                worst = max(worst, abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-6))
        return OracleReport("gradient check", worst < GRADIENT_TOLERANCE, f"max relative error {worst:.3e}")

    def check_sign_agreement(self, n_instances: int = 10_000) -> OracleReport:
        rng = self._rng(6)
        n_t = 2
        c = build_constellation(4)
        channel = ChannelModelConfig()
        noise_var = noise_var_from_snr(SIGN_AGREEMENT_SNR_DB, n_t, c, channel)
        agree, total = 0, 0
        for _ in range(n_instances):
            h = draw_channel(channel, n_t, n_t, rng)
            bits = rng.integers(0, 2, size=n_t * c.bits_per_symbol)
            y = transmit(h, modulate(bits, c, n_t), noise_var, rng)
            log_map = exact_log_map(y, h, noise_var, c, n_t).llr
            max_log = exact_max_log(y, h, noise_var, c, n_t).llr
            agree += int(np.count_nonzero((log_map > 0) == (max_log > 0)))
            total += bits.size
        rate = agree / total
        return OracleReport("max-log sign agreement", rate >= SIGN_AGREEMENT_THRESHOLD,
            f"{rate:.5f} over {total} bits at {SIGN_AGREEMENT_SNR_DB:g} dB")

    def run_all(self) -> list[OracleReport]:
        reports = []
        for check in (self.check_moment_fit, self.check_transport_optimality, self.check_minimal_path_set,
                self.check_oracle_equivalence, self.check_gradients, self.check_sign_agreement):
            start = time.perf_counter()
            report = check()
            report.elapsed = time.perf_counter() - start
            logger.info(f"Oracle '{report.name}': {'PASS' if report.passed else 'FAIL'} ({report.detail})")
            reports.append(report)
        return reports
