from __future__ import annotations
import logging

import numpy as np
from scipy.special import logsumexp

from detectors.detector import Detector
from entity.candidate_list import CandidateList, LayerMetricTable
from entity.constellation import Constellation, layer_rows_to_bits, level_indices_to_bits
from entity.llr_vector import LlrVector
from entity.trial import TrialContext


logger = logging.getLogger(__name__)


def _fill_missing(llr: np.ndarray, has_one: np.ndarray, has_zero: np.ndarray, lambda_max: float) -> np.ndarray:
    missing = ~(has_one & has_zero)
    if missing.any():
        logger.debug(f"{np.count_nonzero(missing)} bits without counter-hypothesis, clamped to +-{lambda_max}")
    llr = np.where(has_one & ~has_zero, lambda_max, llr)
    return np.where(has_zero & ~has_one, -lambda_max, llr)


def candidate_max_log(cands: CandidateList, table: LayerMetricTable, noise_var: float, c: Constellation,
        lambda_max: float) -> LlrVector:
    """
    Max-log LLRs restricted to a candidate list. The per-bit minima come
    from the layer metric table: the minimum over candidates with bit b
    equal to v is the minimum of D_{i,j} over the levels i carrying v.
    Bits whose counter-hypothesis is missing get +-lambda_max with the sign
    of the hypothesis that is present.

    Args:
        cands (CandidateList): Sampled paths, nonempty.
        table (LayerMetricTable): extract_layer_metrics(cands).
        noise_var (float): Noise variance.
        c (Constellation): The constellation.
        lambda_max (float): Clamp for missing counter-hypotheses.

    Returns:
        LlrVector: N_t * M_c LLRs.
    """
    if len(cands) == 0:
        raise ValueError("Candidate list is empty")
    n_t = table.num_real_layers // 2
    width = c.bits_per_dimension
    d = np.where(table.present, table.d.data, np.inf)
    # (2N_t, width): minimum metric over present levels whose bit is 1 / 0
    bit_is_one = c.level_bits.T.astype(bool)
    min_one = np.where(bit_is_one[None, :, :], d[:, None, :], np.inf).min(axis=2)
    min_zero = np.where(bit_is_one[None, :, :], np.inf, d[:, None, :]).min(axis=2)
    has_one, has_zero = np.isfinite(min_one), np.isfinite(min_zero)
    with np.errstate(invalid="ignore"):
        llr = np.where(has_one & has_zero, (min_zero - min_one) / noise_var, 0.0)
    llr = _fill_missing(llr, has_one, has_zero, lambda_max)
    return LlrVector(layer_rows_to_bits(llr, n_t))


def candidate_log_map(cands: CandidateList, noise_var: float, c: Constellation, lambda_max: float) -> LlrVector:
    if len(cands) == 0:
        raise ValueError("Candidate list is empty")
    bits = level_indices_to_bits(cands.level_indices, c).astype(bool)
    exponent = -cands.metrics[:, None] / noise_var
    with np.errstate(divide="ignore"):
        log_one = logsumexp(np.where(bits, exponent, -np.inf), axis=0)
        log_zero = logsumexp(np.where(bits, -np.inf, exponent), axis=0)
    has_one, has_zero = bits.any(axis=0), (~bits).any(axis=0)
    with np.errstate(invalid="ignore"):
        llr = np.where(has_one & has_zero, log_one - log_zero, 0.0)
    return LlrVector(_fill_missing(llr, has_one, has_zero, lambda_max))


class CandidateMaxLogDetector(Detector):

    name = "candidate_max_log"
    budgeted = True

    def detect(self, ctx: TrialContext) -> LlrVector:
        return candidate_max_log(ctx.candidates(self.k), ctx.layer_metrics(self.k), ctx.noise_var, ctx.c,
            ctx.lambda_max)


class CandidateLogMapDetector(Detector):

    name = "candidate_log_map"
    budgeted = True

    def detect(self, ctx: TrialContext) -> LlrVector:
        return candidate_log_map(ctx.candidates(self.k), ctx.noise_var, ctx.c, ctx.lambda_max)
