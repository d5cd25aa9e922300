from __future__ import annotations
from dataclasses import dataclass, field
from functools import cached_property
import logging

import numpy as np

from algorithms.lattice_search import (
    ExhaustiveSearch, exhaustive_search, extract_layer_metrics, kbest_search, real_decompose,
)
from entity.candidate_list import CandidateList, LayerMetricTable, RealDecomposition
from entity.constellation import Constellation
from entity.llr_vector import LlrVector


logger = logging.getLogger(__name__)


class TrialContext():
    """
    One channel use shared by every detector of a trial: the observation,
    the decomposition and the candidate lists, computed once per budget so
    that detectors with equal budgets see the same sample paths.

    Attributes:
        y (np.ndarray): Received vector, length N_r.
        h (np.ndarray): Channel matrix, N_r x N_t.
        noise_var (float): Per-complex-entry noise variance.
        c (Constellation): The constellation.
        lambda_max (float): LLR clamp.
        sigma2_floor (float): Fallback variance for moment fits.
        ot_sort (bool): Apply the sorting transform before fitting.
        moment_method (str): "fit" or "statistical".

    Methods:
        candidates(k: int) -> CandidateList:
            K-best list for budget k, memoised.

        layer_metrics(k: int) -> LayerMetricTable:
            Per-layer minima of candidates(k).

        candidate_hash(k: int) -> str:
            Content hash of candidates(k).
    """

    def __init__(self, y: np.ndarray, h: np.ndarray, noise_var: float, c: Constellation,
            lambda_max: float, sigma2_floor: float, ot_sort: bool = True, moment_method: str = "fit"):
        self.y = np.asarray(y, dtype=complex)
        self.h = np.asarray(h, dtype=complex)
        self.noise_var = float(noise_var)
        self.c = c
        self.lambda_max = float(lambda_max)
        self.sigma2_floor = float(sigma2_floor)
        self.ot_sort = ot_sort
        self.moment_method = moment_method
        self._candidates: dict[int, CandidateList] = {}

    @property
    def n_t(self) -> int:
        return self.h.shape[1]

    @cached_property
    def decomposition(self) -> RealDecomposition:
        return real_decompose(self.h, self.y)

    @cached_property
    def exhaustive(self) -> ExhaustiveSearch:
        return exhaustive_search(self.decomposition, self.c)

    def candidates(self, k: int) -> CandidateList:
        if k not in self._candidates:
            self._candidates[k] = kbest_search(self.decomposition, self.c, k)
        return self._candidates[k]

    def layer_metrics(self, k: int) -> LayerMetricTable:
        return extract_layer_metrics(self.candidates(k), self.c, self.n_t)

    def candidate_hash(self, k: int) -> str:
        return self.candidates(k).get_hash()


@dataclass
class TrialOutcome():
    """
    Everything one trial produced, keyed by detector label.

    Attributes:
        bits (np.ndarray): Transmitted bits, N_t * M_c.
        llrs (dict[str, LlrVector]): Detector outputs.
        reference (LlrVector | None): Exact log-MAP LLRs when within the
            enumeration guard.
        candidate_hashes (dict[str, str]): Candidate-list hash of every
            list-based detector.
        elapsed (dict[str, float]): Detector wall time in seconds.
    """

    bits: np.ndarray
    llrs: dict[str, LlrVector] = field(default_factory=dict)
    reference: LlrVector | None = None
    candidate_hashes: dict[str, str] = field(default_factory=dict)
    elapsed: dict[str, float] = field(default_factory=dict)
