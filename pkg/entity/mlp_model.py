from __future__ import annotations
from dataclasses import dataclass, field, replace
import logging

import numpy as np

from entity.config import Config


logger = logging.getLogger(__name__)

MODEL_VERSION = "mppsnet-v1"


@dataclass(eq=False)
class MlpModel():
    """
    One-hidden-layer network g(mu, sigma2, T) -> per-symbol LLRs, shared by
    every complex layer.

    Attributes:
        w1 (np.ndarray): hidden_dim x in_dim.
        b1 (np.ndarray): hidden_dim.
        w2 (np.ndarray): out_dim x hidden_dim.
        b2 (np.ndarray): out_dim.
        feat_mean (np.ndarray): Input standardisation offset.
        feat_std (np.ndarray): Input standardisation scale, > 0.
        m_c (int): Bits per symbol; equals out_dim.
        lambda_max (float): Output clamp.
    """

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    feat_mean: np.ndarray
    feat_std: np.ndarray
    m_c: int
    lambda_max: float

    def __post_init__(self):
        hidden, in_dim = self.w1.shape
        if self.b1.shape != (hidden,) or self.w2.shape != (self.m_c, hidden) or self.b2.shape != (self.m_c,):
            raise ModelFormatError("Inconsistent layer dimensions")
        if self.feat_mean.shape != (in_dim,) or self.feat_std.shape != (in_dim,):
            raise ModelFormatError("Standardisation does not match the input dimension")
        if np.any(self.feat_std <= 0):
            raise ModelFormatError("feat_std entries must be positive")
        for name in ("w1", "b1", "w2", "b2", "feat_mean", "feat_std"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ModelFormatError(f"{name} has non-finite entries")

    @property
    def in_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def out_dim(self) -> int:
        return self.w2.shape[0]

    def copy(self) -> MlpModel:
        return replace(self, **{name: getattr(self, name).copy()
            for name in ("w1", "b1", "w2", "b2", "feat_mean", "feat_std")})


@dataclass(eq=False)
class Dataset():
    """
    Training samples stored by column: row i is one complex layer with its
    7 moment features and M_c exact log-MAP labels clamped to
    [-lambda_max, lambda_max].
    """

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=float))
        self.labels = np.atleast_2d(np.asarray(self.labels, dtype=float))
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("One label row per feature row is required")

    def __len__(self) -> int:
        return self.features.shape[0]

    def subset(self, indices: np.ndarray) -> Dataset:
        return Dataset(self.features[indices], self.labels[indices])

    def concat(self, other: Dataset) -> Dataset:
        return Dataset(np.vstack([self.features, other.features]), np.vstack([self.labels, other.labels]))


@dataclass(frozen=True)
class TrainConfig():

    epochs: int = 200
    batch_size: int = 128
    step_size: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    divergence_limit: float = 1e6

    @staticmethod
    def from_config(seed: int = 0, **overrides) -> TrainConfig:
        network = Config.get_singleton().network
        values = {name: network[name] for name in ("epochs", "batch_size", "step_size", "beta1", "beta2", "eps")}
        values["divergence_limit"] = network["divergence_limit"]
        values.update(overrides)
        return TrainConfig(seed=seed, **values)


def _format_values(values: np.ndarray) -> str:
    return " ".join(f"{v:.17g}" for v in np.asarray(values, dtype=float).ravel())


def save_model(m: MlpModel, path: str):
    lines = [
        f"{MODEL_VERSION} {m.in_dim} {m.hidden_dim} {m.out_dim} {m.m_c} {m.lambda_max:.17g}",
        _format_values(m.feat_mean),
        _format_values(m.feat_std),
        _format_values(m.w1),
        _format_values(m.b1),
        _format_values(m.w2),
        _format_values(m.b2),
    ]
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    logger.info(f"Saved model {m.in_dim}-{m.hidden_dim}-{m.out_dim} to {path}")


def load_model(path: str) -> MlpModel:
    with open(path, "r") as f:
        lines = f.read().splitlines()
    if not lines:
        raise ModelFormatError(f"Empty model file: {path}")
    header = lines[0].split()
    if len(header) != 6 or header[0] != MODEL_VERSION:
        raise ModelFormatError(f"Expected header '{MODEL_VERSION} <in> <hidden> <out> <m_c> <lambda_max>'")
    try:
        in_dim, hidden, out_dim, m_c = (int(v) for v in header[1:5])
        lambda_max = float(header[5])
    except ValueError as e:
        raise ModelFormatError(f"Malformed header: {lines[0]}") from e
    shapes = [(in_dim,), (in_dim,), (hidden, in_dim), (hidden,), (out_dim, hidden), (out_dim,)]
    body = lines[1:]
    if len(body) != len(shapes):
        raise ModelFormatError(f"Expected {len(shapes)} parameter lines, got {len(body)}")
    arrays = []
    for line, shape in zip(body, shapes):
        try:
            values = np.array([float(token) for token in line.split()])
        except ValueError as e:
            raise ModelFormatError(f"Malformed value in {path}") from e
        if values.size != int(np.prod(shape)):
            raise ModelFormatError(f"Expected {int(np.prod(shape))} values, got {values.size}")
        arrays.append(values.reshape(shape))
    feat_mean, feat_std, w1, b1, w2, b2 = arrays
    return MlpModel(w1, b1, w2, b2, feat_mean, feat_std, m_c, lambda_max)


class ModelFormatError(Exception):
    pass
