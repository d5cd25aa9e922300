from __future__ import annotations
import logging

import numpy as np

from algorithms.lattice_search import DegenerateChannelError, extract_layer_metrics, kbest_search, real_decompose
from algorithms.mlp import init_model, train
from detectors import exact_log_map
from detectors.log_map_detector import check_enumeration
from detectors.mpps_detector import mpps_features
from entity.cachable import Cachable
from entity.config import Config
from entity.mlp_model import Dataset, MlpModel, TrainConfig
from entity.sim_config import SimConfig
from manager.simulation_manager import MAX_REDRAWS, draw_channel_use
from utils.decorators import cache, timed


logger = logging.getLogger(__name__)


def build_dataset(cfg: SimConfig, n_samples: int, rng: np.random.Generator) -> Dataset:
    """
    Draws n_samples channel uses at SNRs uniform over cfg.train_snr_db and
    labels every complex layer with its exact log-MAP LLRs.

    Args:
        cfg (SimConfig): System dimensions, channel model and MPPS settings.
        n_samples (int): Channel uses; the dataset has n_samples * N_t rows.
        rng (np.random.Generator): Source of every draw.

    Returns:
        Dataset: (n_samples * N_t, 7) features and (n_samples * N_t, M_c)
            labels clamped to [-lambda_max, lambda_max].
    """
    c = cfg.constellation
    check_enumeration(c, cfg.n_t)
    features, labels = [], []
    redraws = 0
    while len(features) < n_samples:
        snr_db = rng.uniform(*cfg.train_snr_db)
        use = draw_channel_use(cfg, snr_db, rng)
        try:
            dec = real_decompose(use.h, use.y)
        except DegenerateChannelError as e:
            redraws += 1
            logger.warning(f"Redrawing degenerate training channel: {e}")
            if redraws > MAX_REDRAWS:
                raise
            continue
        table = extract_layer_metrics(kbest_search(dec, c, cfg.k_budget), c, cfg.n_t)
        features.append(mpps_features(table, c, use.noise_var, cfg.sigma2_floor, cfg.ot_sort, cfg.moment_method))
        llr = exact_log_map(use.y, use.h, use.noise_var, c, cfg.n_t).clamp(cfg.lambda_max).llr
        labels.append(llr.reshape(cfg.n_t, c.bits_per_symbol))
    logger.info(f"Built dataset of {n_samples * cfg.n_t} layer samples ({redraws} degenerate redraws)")
    return Dataset(np.vstack(features), np.vstack(labels))


class TrainingManager(Cachable):
    """
    Dataset generation and training for one SimConfig.

    Methods:
        get_dataset(n_samples: int, seed: int) -> Dataset:
            Oracle-labelled dataset, cached under 'datasets'.

        train(model: MlpModel | None) -> tuple[MlpModel, list[float]]:
            Trains a fresh (or the given) model on cfg.train_samples draws.
    """

    def __init__(self, sim_config: SimConfig):
        self.sim_config = sim_config
        self.config = Config.get_singleton()

    def get_hash(self) -> str:
        return self.sim_config.get_hash()

    @cache("datasets")
    def get_dataset(self, n_samples: int, seed: int) -> Dataset:
        return build_dataset(self.sim_config, n_samples, np.random.default_rng(seed))

    @timed
    def train(self, model: MlpModel | None = None, train_config: TrainConfig | None = None) -> tuple[MlpModel, list[float]]:
        cfg = self.sim_config
        dataset = self.get_dataset(cfg.train_samples, cfg.seed)
        if model is None:
            rng = np.random.default_rng(cfg.seed)
            model = init_model(self.config.hidden_dim, cfg.m_c, rng, cfg.lambda_max)
        return train(model, dataset, train_config or cfg.train_config())
