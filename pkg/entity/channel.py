from __future__ import annotations
from dataclasses import dataclass
from functools import lru_cache
import enum
import logging

import numpy as np
from scipy.linalg import eigh

from entity.constellation import Constellation, average_symbol_energy


logger = logging.getLogger(__name__)


@enum.unique
class ChannelModelKind(str, enum.Enum):
    IDENTITY_AWGN = "identity_awgn"
    IID_RAYLEIGH = "iid_rayleigh"
    KRONECKER_RAYLEIGH = "kronecker_rayleigh"


@dataclass(frozen=True)
class ChannelModelConfig():
    """
    Channel model selection. rho_t / rho_r are the exponential correlation
    coefficients R(i, j) = rho^|i - j| of the Kronecker model and are ignored
    by the other kinds.
    """

    kind: ChannelModelKind = ChannelModelKind.IID_RAYLEIGH
    rho_t: float = 0.0
    rho_r: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelModelKind(self.kind))
        for name in ("rho_t", "rho_r"):
            rho = float(getattr(self, name))
            if not 0.0 <= rho < 1.0:
                raise ChannelError(f"{name} must be in [0, 1), got {rho}")
            object.__setattr__(self, name, rho)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "rho_t": self.rho_t, "rho_r": self.rho_r}


@dataclass(frozen=True, eq=False)
class ChannelRealization():

    h: np.ndarray
    noise_var: float

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        if h.ndim != 2 or h.shape[0] < h.shape[1]:
            raise ChannelError(f"Channel must be N_r x N_t with N_r >= N_t, got shape {h.shape}")
        if not np.all(np.isfinite(h)):
            raise ChannelError("Channel entries must be finite")
        if not self.noise_var > 0:
            raise ChannelError(f"Noise variance must be positive, got {self.noise_var}")
        object.__setattr__(self, "h", h)

    @property
    def n_r(self) -> int:
        return self.h.shape[0]

    @property
    def n_t(self) -> int:
        return self.h.shape[1]


def noise_var_from_snr(snr_db: float, n_t: int, c: Constellation, model: ChannelModelConfig) -> float:
    """
    Per-complex-entry noise variance for SNR = E||Hs||^2 / E||n||^2 with
    E|H_kl|^2 = 1. Identity channels carry a single stream's energy per
    receive entry.
    """
    if n_t < 1:
        raise ChannelError(f"n_t must be >= 1, got {n_t}")
    energy = average_symbol_energy(c)
    if model.kind != ChannelModelKind.IDENTITY_AWGN:
        energy *= n_t
    return float(energy / 10 ** (snr_db / 10))


@lru_cache(maxsize=None)
def correlation_sqrt(rho: float, n: int) -> np.ndarray:
    """
    Principal (symmetric PSD) square root of the exponential correlation
    matrix R(i, j) = rho^|i - j|.
    """
    index = np.arange(n)
    r = rho ** np.abs(index[:, None] - index[None, :])
    eigvals, eigvecs = eigh(r)
    root = (eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))) @ eigvecs.T
    root.setflags(write=False)
    return root


def draw_channel(cfg: ChannelModelConfig, n_r: int, n_t: int, rng: np.random.Generator) -> np.ndarray:
    if n_t < 1 or n_r < n_t:
        raise ChannelError(f"Invalid antenna configuration n_r={n_r}, n_t={n_t}")
    if cfg.kind == ChannelModelKind.IDENTITY_AWGN:
        return np.eye(n_r, n_t, dtype=complex)
    a = (rng.standard_normal((n_r, n_t)) + 1j * rng.standard_normal((n_r, n_t))) / np.sqrt(2)
    if cfg.kind == ChannelModelKind.IID_RAYLEIGH:
        return a
    # rho = 0 leaves A untouched so the draw equals iid_rayleigh bit for bit
    if cfg.rho_r > 0:
        a = correlation_sqrt(cfg.rho_r, n_r) @ a
    if cfg.rho_t > 0:
        a = a @ correlation_sqrt(cfg.rho_t, n_t)
    return a


def transmit(h: np.ndarray, s: np.ndarray, noise_var: float, rng: np.random.Generator) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    s = np.asarray(s, dtype=complex).ravel()
    if h.ndim != 2 or h.shape[1] != s.size:
        raise ChannelError(f"Shape mismatch: H {h.shape}, s {s.shape}")
    if noise_var < 0:
        raise ChannelError(f"Noise variance must be >= 0, got {noise_var}")
    n_r = h.shape[0]
    noise = (rng.standard_normal(n_r) + 1j * rng.standard_normal(n_r)) * np.sqrt(noise_var / 2)
    return h @ s + noise


class ChannelError(ValueError):
    pass
