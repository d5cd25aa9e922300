from __future__ import annotations
from dataclasses import dataclass
import logging

import numpy as np

from entity.config import Config
from entity.mlp_model import Dataset, MlpModel, TrainConfig
from algorithms.moment_fitting import FEATURE_DIM


logger = logging.getLogger(__name__)

PARAMETERS = ("w1", "b1", "w2", "b2")


@dataclass
class MlpGradient():
    """
    Gradient of the mean squared error, one array per trainable parameter
    with the parameter's shape.
    """

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def norm(self) -> float:
        return float(np.sqrt(sum(np.sum(getattr(self, name) ** 2) for name in PARAMETERS)))


def init_model(hidden_dim: int, m_c: int, rng: np.random.Generator, lambda_max: float | None = None,
        in_dim: int = FEATURE_DIM) -> MlpModel:
    """
    Glorot-uniform weights, zero biases, identity standardisation.
    """
    if hidden_dim < 1:
        raise ValueError(f"hidden_dim must be >= 1, got {hidden_dim}")
    if lambda_max is None:
        lambda_max = Config.get_singleton().lambda_max
    r1 = np.sqrt(6.0 / (in_dim + hidden_dim))
    r2 = np.sqrt(6.0 / (hidden_dim + m_c))
    w1 = rng.uniform(-r1, r1, size=(hidden_dim, in_dim))
    w2 = rng.uniform(-r2, r2, size=(m_c, hidden_dim))
    return MlpModel(w1, np.zeros(hidden_dim), w2, np.zeros(m_c),
        np.zeros(in_dim), np.ones(in_dim), m_c, float(lambda_max))


def zero_model(hidden_dim: int, m_c: int, lambda_max: float = 60.0, in_dim: int = FEATURE_DIM) -> MlpModel:
    return MlpModel(np.zeros((hidden_dim, in_dim)), np.zeros(hidden_dim), np.zeros((m_c, hidden_dim)),
        np.zeros(m_c), np.zeros(in_dim), np.ones(in_dim), m_c, lambda_max)


def _as_batch(m: MlpModel, features) -> np.ndarray:
    x = np.asarray(features, dtype=float)
    if x.shape[-1] != m.in_dim or x.ndim not in (1, 2):
        raise ValueError(f"Expected features of width {m.in_dim}, got shape {x.shape}")
    return np.atleast_2d(x)


def _hidden(m: MlpModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    xs = (x - m.feat_mean) / m.feat_std
    return xs, np.tanh(xs @ m.w1.T + m.b1)


def raw_forward(m: MlpModel, features) -> np.ndarray:
    """
    Network output before the LLR clamp, (N, out_dim) for 2-D input or
    (out_dim,) for a single feature vector.
    """
    x = _as_batch(m, features)
    _, h = _hidden(m, x)
    out = h @ m.w2.T + m.b2
    return out[0] if np.ndim(features) == 1 else out


def forward(m: MlpModel, features) -> np.ndarray:
    return np.clip(raw_forward(m, features), -m.lambda_max, m.lambda_max)


def l2_loss(m: MlpModel, batch: Dataset) -> float:
    if len(batch) == 0:
        raise ValueError("Batch is empty")
    error = raw_forward(m, batch.features) - batch.labels
    return float(np.mean(error ** 2))


def grad_l2(m: MlpModel, batch: Dataset) -> MlpGradient:
    """
    Analytic gradient of the mean squared error over every output of every
    sample in the batch.
    """
    if len(batch) == 0:
        raise ValueError("Batch is empty")
    x = _as_batch(m, batch.features)
    xs, h = _hidden(m, x)
    out = h @ m.w2.T + m.b2
    d_out = 2.0 * (out - batch.labels) / out.size
    d_hidden = (d_out @ m.w2) * (1.0 - h ** 2)
    return MlpGradient(
        w1=d_hidden.T @ xs,
        b1=d_hidden.sum(axis=0),
        w2=d_out.T @ h,
        b2=d_out.sum(axis=0),
    )


def fit_standardization(m: MlpModel, features: np.ndarray) -> MlpModel:
    features = np.atleast_2d(np.asarray(features, dtype=float))
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    fitted = m.copy()
    fitted.feat_mean, fitted.feat_std = mean, std
    return fitted


def train(m: MlpModel, dataset: Dataset, config: TrainConfig) -> tuple[MlpModel, list[float]]:
    """
    Adam on the L2 loss with per-epoch seeded shuffling. The input
    standardisation is fitted on the dataset first.

    Args:
        m (MlpModel): Initial model; not modified.
        dataset (Dataset): Training samples.
        config (TrainConfig): Optimiser settings and shuffle seed.

    Returns:
        tuple[MlpModel, list[float]]: The trained model and the mean loss of
            each epoch.
    """
    if len(dataset) == 0:
        raise ValueError("Dataset is empty")
    model = fit_standardization(m, dataset.features)
    rng = np.random.default_rng(config.seed)
    moment1 = {name: np.zeros_like(getattr(model, name)) for name in PARAMETERS}
    moment2 = {name: np.zeros_like(getattr(model, name)) for name in PARAMETERS}
    step = 0
    trace = []
    logger.info(f"Training {model.in_dim}-{model.hidden_dim}-{model.out_dim} on {len(dataset)} samples, "
        f"{config.epochs} epochs")
    for epoch in range(config.epochs):
        order = rng.permutation(len(dataset))
        total = 0.0
        for start in range(0, len(dataset), config.batch_size):
            batch = dataset.subset(order[start:start + config.batch_size])
            total += l2_loss(model, batch) * len(batch)
            grad = grad_l2(model, batch)
            step += 1
            for name in PARAMETERS:
                g = getattr(grad, name)
                moment1[name] = config.beta1 * moment1[name] + (1 - config.beta1) * g
                moment2[name] = config.beta2 * moment2[name] + (1 - config.beta2) * g ** 2
                m_hat = moment1[name] / (1 - config.beta1 ** step)
                v_hat = moment2[name] / (1 - config.beta2 ** step)
                setattr(model, name, getattr(model, name) - config.step_size * m_hat / (np.sqrt(v_hat) + config.eps))
        loss = total / len(dataset)
        if not np.isfinite(loss) or loss > config.divergence_limit:
            raise TrainingDivergedError(f"Loss {loss:.3e} at epoch {epoch} exceeds {config.divergence_limit:.1e}")
        trace.append(float(loss))
        if epoch % 50 == 0 or epoch == config.epochs - 1:
            logger.debug(f"Epoch {epoch}: loss {loss:.6g}")
    return model, trace


class TrainingDivergedError(Exception):
    pass
