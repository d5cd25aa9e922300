from __future__ import annotations
import logging

import numpy as np
from scipy.special import logsumexp

from algorithms.lattice_search import lattice_metric_tensor, lattice_size, real_embedding
from detectors.detector import Detector
from entity.config import Config
from entity.constellation import Constellation, layer_rows_to_bits, level_indices_to_bits
from entity.llr_vector import LlrVector
from entity.trial import TrialContext
from utils.decorators import to_complex_array


logger = logging.getLogger(__name__)


def check_enumeration(c: Constellation, n_t: int, limit: int | None = None):
    limit = limit or Config.get_singleton().enumeration_limit
    size = lattice_size(c, n_t)
    if size > limit:
        raise EnumerationTooLargeError(f"{c.name} with N_t={n_t} has {size} lattice points, limit is {limit}")


def _layer_reductions(metrics: np.ndarray, reduce) -> np.ndarray:
    """
    Applies `reduce(array, axis=...)` over every layer but one, giving the
    (2N_t, 2M) per-layer, per-level reduction of the metric tensor.
    """
    n = metrics.ndim
    return np.stack([reduce(metrics, axis=tuple(k for k in range(n) if k != j)) for j in range(n)])


def _metric_tensor(y: np.ndarray, h: np.ndarray, c: Constellation, n_t: int, limit: int | None) -> np.ndarray:
    if h.shape[1] != n_t:
        raise ValueError(f"H has {h.shape[1]} columns, expected N_t={n_t}")
    check_enumeration(c, n_t, limit)
    h_r, y_r = real_embedding(h, y)
    return lattice_metric_tensor(h_r, y_r, c)


def _check_noise_var(noise_var: float):
    if not noise_var > 0:
        raise ValueError(f"Noise variance must be positive, got {noise_var}")


@to_complex_array(0, 1)
def exact_log_map(y: np.ndarray, h: np.ndarray, noise_var: float, c: Constellation, n_t: int,
        limit: int | None = None) -> LlrVector:
    """
    Exact per-bit LLRs by log-sum-exp over every lattice point, with the
    likelihood exp(-||y - Hs||^2 / noise_var).

    A bit of real layer j depends on that layer's level only, so the lattice
    is first reduced to per-(layer, level) log-likelihoods and the bits are
    read off those.
    """
    _check_noise_var(noise_var)
    exponent = -_metric_tensor(y, h, c, n_t, limit) / noise_var
    per_level = _layer_reductions(exponent, logsumexp)
    bit_is_one = c.level_bits.T.astype(bool)
    with np.errstate(divide="ignore"):
        log_one = logsumexp(np.where(bit_is_one[None], per_level[:, None, :], -np.inf), axis=2)
        log_zero = logsumexp(np.where(bit_is_one[None], -np.inf, per_level[:, None, :]), axis=2)
    return LlrVector(layer_rows_to_bits(log_one - log_zero, n_t))


@to_complex_array(0, 1)
def exact_max_log(y: np.ndarray, h: np.ndarray, noise_var: float, c: Constellation, n_t: int,
        limit: int | None = None) -> LlrVector:
    _check_noise_var(noise_var)
    per_level = _layer_reductions(_metric_tensor(y, h, c, n_t, limit), np.min)
    bit_is_one = c.level_bits.T.astype(bool)
    min_one = np.where(bit_is_one[None], per_level[:, None, :], np.inf).min(axis=2)
    min_zero = np.where(bit_is_one[None], np.inf, per_level[:, None, :]).min(axis=2)
    return LlrVector(layer_rows_to_bits((min_zero - min_one) / noise_var, n_t))


@to_complex_array(0, 1)
def ml_hard(y: np.ndarray, h: np.ndarray, c: Constellation, n_t: int, lambda_max: float,
        limit: int | None = None) -> LlrVector:
    """
    Exhaustive ML decision emitted as hard LLRs +-lambda_max. Ties resolve to
    the lexicographically smallest level-index vector.
    """
    metrics = _metric_tensor(y, h, c, n_t, limit)
    best = np.array(np.unravel_index(int(np.argmin(metrics)), metrics.shape))
    bits = level_indices_to_bits(best, c)
    return LlrVector(np.where(bits == 1, lambda_max, -lambda_max))


class ExactLogMapDetector(Detector):

    name = "exact_log_map"

    def detect(self, ctx: TrialContext) -> LlrVector:
        return exact_log_map(ctx.y, ctx.h, ctx.noise_var, ctx.c, ctx.n_t)


class ExactMaxLogDetector(Detector):

    name = "exact_max_log"

    def detect(self, ctx: TrialContext) -> LlrVector:
        return exact_max_log(ctx.y, ctx.h, ctx.noise_var, ctx.c, ctx.n_t)


class MlDetector(Detector):

    name = "ml"

    def detect(self, ctx: TrialContext) -> LlrVector:
        return ml_hard(ctx.y, ctx.h, ctx.c, ctx.n_t, ctx.lambda_max)


class EnumerationTooLargeError(Exception):
    pass
