from __future__ import annotations
import logging

import numpy as np
from scipy import linalg

from algorithms.lattice_search import DegenerateChannelError
from detectors.detector import Detector
from entity.constellation import Constellation, average_symbol_energy
from entity.llr_vector import LlrVector
from entity.trial import TrialContext
from utils.decorators import to_complex_array


logger = logging.getLogger(__name__)

MIN_RESIDUAL = 1e-300


@to_complex_array(0)
def lmmse_filter(h: np.ndarray, noise_var: float, es: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    LMMSE filter W = (H^H H + (noise_var / es) I)^-1 H^H.

    Returns:
        tuple[np.ndarray, np.ndarray, np.ndarray]: (W, g, nu2) with the
            per-stream gain g_j = Re (WH)_jj and the normalised residual
            variance nu2_j = g_j - g_j^2; multiply by es for symbol units.
    """
    if not noise_var > 0:
        raise ValueError(f"Noise variance must be positive, got {noise_var}")
    n_t = h.shape[1]
    gram = h.conj().T @ h + (noise_var / es) * np.eye(n_t)
    try:
        w = linalg.solve(gram, h.conj().T, assume_a="pos")
    except linalg.LinAlgError as e:
        raise DegenerateChannelError(f"Regularised Gram matrix is singular: {e}") from e
    gain = np.real(np.diag(w @ h))
    residual = np.maximum(gain - gain ** 2, MIN_RESIDUAL)
    return w, gain, residual


@to_complex_array(0, 1)
def lmmse_soft(y: np.ndarray, h: np.ndarray, noise_var: float, c: Constellation, n_t: int,
        lambda_max: float | None = None) -> LlrVector:
    """
    Per-dimension max-log demapping of the LMMSE output on the scalar
    channel z_j = g_j s_j + eta_j with E|eta_j|^2 = es * (g_j - g_j^2).
    """
    if h.shape[1] != n_t:
        raise ValueError(f"H has {h.shape[1]} columns, expected N_t={n_t}")
    es = average_symbol_energy(c)
    w, gain, residual = lmmse_filter(h, noise_var, es)
    z = w @ y
    variance = es * residual
    # (N_t, 2): real and imaginary coordinate per stream
    coords = np.stack([z.real, z.imag], axis=1)
    distances = (coords[:, :, None] - gain[:, None, None] * c.pam_levels[None, None, :]) ** 2
    bit_is_one = c.level_bits.T.astype(bool)
    min_one = np.where(bit_is_one[None, None], distances[:, :, None, :], np.inf).min(axis=3)
    min_zero = np.where(bit_is_one[None, None], np.inf, distances[:, :, None, :]).min(axis=3)
    llr = (min_zero - min_one) / variance[:, None, None]
    if lambda_max is not None:
        llr = np.clip(llr, -lambda_max, lambda_max)
    return LlrVector(llr.reshape(n_t * c.bits_per_symbol))


class LmmseDetector(Detector):

    name = "lmmse"

    def detect(self, ctx: TrialContext) -> LlrVector:
        return lmmse_soft(ctx.y, ctx.h, ctx.noise_var, ctx.c, ctx.n_t, ctx.lambda_max)
