from __future__ import annotations
import logging

import numpy as np

from algorithms.lattice_search import extract_layer_metrics, minimal_path_set
from algorithms.mlp import forward
from algorithms.moment_fitting import moment_features, mpps_layer_statistics
from detectors.detector import Detector
from entity.candidate_list import LayerMetricTable
from entity.constellation import Constellation
from entity.llr_vector import LlrVector
from entity.mlp_model import MlpModel
from entity.trial import TrialContext


logger = logging.getLogger(__name__)


def mpps_features(table: LayerMetricTable, c: Constellation, noise_var: float, sigma2_floor: float,
        ot_sort: bool = True, moment_method: str = "fit") -> np.ndarray:
    """
    Network inputs for every complex layer of a sampled metric table.

    Returns:
        np.ndarray: (N_t, 7) features.
    """
    moments = mpps_layer_statistics(table, c, sigma2_floor, ot_sort, moment_method, noise_var)
    return moment_features(moments, table.num_real_layers // 2, noise_var)


def mpps_llrs(model: MlpModel, table: LayerMetricTable, c: Constellation, noise_var: float,
        sigma2_floor: float, ot_sort: bool = True, moment_method: str = "fit") -> LlrVector:
    if model.m_c != c.bits_per_symbol:
        raise ValueError(f"Model outputs {model.m_c} bits per symbol, constellation has {c.bits_per_symbol}")
    features = mpps_features(table, c, noise_var, sigma2_floor, ot_sort, moment_method)
    return LlrVector(forward(model, features).ravel())


class MppsDetector(Detector):
    """
    K-best sampling, per-layer moment fitting and the shared network.
    """

    name = "mpps"
    budgeted = True
    requires_model = True

    def __init__(self, k: int, model: MlpModel):
        super().__init__(k)
        self.model = model

    def detect(self, ctx: TrialContext) -> LlrVector:
        return mpps_llrs(self.model, ctx.layer_metrics(self.k), ctx.c, ctx.noise_var, ctx.sigma2_floor,
            ctx.ot_sort, ctx.moment_method)


class MppsIdealDetector(Detector):
    """
    The network fed the minimal path set around the true ML path. Reports
    k = 4N_t + 1.
    """

    name = "mpps_ideal"
    requires_model = True

    def __init__(self, k: int, model: MlpModel):
        super().__init__(k)
        self.model = model

    def path_budget(self, n_t: int) -> int:
        return 4 * n_t + 1

    def detect(self, ctx: TrialContext) -> LlrVector:
        cands = minimal_path_set(ctx.decomposition, ctx.c, ctx.exhaustive.best, exhaustive=ctx.exhaustive)
        table = extract_layer_metrics(cands, ctx.c, ctx.n_t)
        return mpps_llrs(self.model, table, ctx.c, ctx.noise_var, ctx.sigma2_floor, ctx.ot_sort,
            ctx.moment_method)

    def candidate_hash(self, ctx: TrialContext) -> str | None:
        return None
