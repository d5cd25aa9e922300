from __future__ import annotations
from typing import Sequence
import logging

import numpy as np

from algorithms.optimal_transport import (
    EmptyRowError, as_metric_row, log_probabilities, ot_sort_transform,
)
from entity.candidate_list import LayerMetricTable
from entity.config import Config
from entity.constellation import Constellation
from entity.layer_moments import LayerMoments, SortTransform


logger = logging.getLogger(__name__)

SLOPE_TOLERANCE = 1e-12
FEATURE_DIM = 7


def _slope_to_moments(a: float, b: float) -> tuple[float, float]:
    # Δ_i = D_{i+1} - D_i = (2/σ²) X_i + (2/σ²)(1 - μ)
    if not a > SLOPE_TOLERANCE:
        raise NonConvexFitError(f"Fitted curvature {a:.3e} is not positive")
    return 1.0 - b / a, 2.0 / a


def consecutive_differences(levels: Sequence[float], metric_row) -> tuple[np.ndarray, np.ndarray]:
    """
    Forward differences Δ_i = D_{i+1} - D_i over every pair of consecutive
    present levels, with the left level X_i of each pair.
    """
    levels = np.asarray(levels, dtype=float)
    row = as_metric_row(metric_row)
    present = ~np.ma.getmaskarray(row)
    if row.size != levels.size:
        raise ValueError(f"Row has {row.size} entries for {levels.size} levels")
    pairs = np.flatnonzero(present[:-1] & present[1:])
    return levels[pairs], row.data[pairs + 1] - row.data[pairs]


def fit_moments_ls(levels: Sequence[float], metric_row) -> tuple[float, float]:
    """
    Least-squares fit of Δ_i = a X_i + b over all consecutive present pairs.

    Returns:
        tuple[float, float]: (mu, sigma2) with sigma2 = 2/a and mu = 1 - b/a.
    """
    x, delta = consecutive_differences(levels, metric_row)
    if x.size < 2:
        raise InsufficientSamplesError(f"Need two consecutive differences, got {x.size}")
    x_mean, delta_mean = x.mean(), delta.mean()
    sxx = np.sum((x - x_mean) ** 2)
    a = np.sum((x - x_mean) * (delta - delta_mean)) / sxx
    b = delta_mean - a * x_mean
    return _slope_to_moments(float(a), float(b))


def fit_moments_three_point(x_center: float, f_minus: float, f_center: float, f_plus: float,
        levels: Sequence[float] | None = None) -> tuple[float, float]:
    if levels is not None:
        lattice = set(np.asarray(levels, dtype=float).tolist())
        if not {x_center - 2, x_center, x_center + 2} <= lattice:
            raise ValueError(f"Levels {x_center - 2}, {x_center}, {x_center + 2} not all in the lattice")
    if not np.all(np.isfinite([f_minus, f_center, f_plus])):
        raise ValueError("Metrics must be finite")
    delta_minus = f_center - f_minus
    delta_plus = f_plus - f_center
    a = (delta_plus - delta_minus) / 2
    b = delta_plus - a * x_center
    return _slope_to_moments(a, b)


def fit_moments_anchored(levels: Sequence[float], metric_row) -> tuple[float, float]:
    """
    Moments of a Gaussian centred on the argmin level, with the variance
    taken from the rise to the present adjacent levels:
    D_{m±1} - D_m = (X_{m±1} - X_m)^2 / (2 sigma2).

    Used when the difference fit is not convex, typically a minimum on the
    outermost level with a one-sided window.
    """
    levels = np.asarray(levels, dtype=float)
    row = as_metric_row(metric_row)
    present = ~np.ma.getmaskarray(row)
    if np.count_nonzero(present) < 2:
        raise InsufficientSamplesError("Need the argmin level and one neighbour")
    m = int(np.flatnonzero(present)[np.argmin(row.data[present])])
    neighbours = [i for i in (m - 1, m + 1) if 0 <= i < row.size and present[i]]
    if not neighbours:
        raise InsufficientSamplesError(f"No present level adjacent to level index {m}")
    curvature = np.mean([(row.data[i] - row.data[m]) / (levels[i] - levels[m]) ** 2 for i in neighbours])
    if not curvature > SLOPE_TOLERANCE:
        raise NonConvexFitError(f"Rise around level index {m} is {curvature:.3e}")
    return float(levels[m]), float(1.0 / (2.0 * curvature))


def statistical_moments(levels: Sequence[float], metric_row, noise_var: float = 1.0) -> tuple[float, float]:
    """
    Probability-weighted mean and variance of the sampled marginal,
    p_i ∝ exp(-D_i / noise_var) over present levels.
    """
    levels = np.asarray(levels, dtype=float)
    row = as_metric_row(metric_row)
    present = ~np.ma.getmaskarray(row)
    if np.count_nonzero(present) < 2:
        raise InsufficientSamplesError("Need two present levels")
    p = np.exp(log_probabilities(row.data[present], noise_var))
    x = levels[present]
    mu = float(np.sum(p * x))
    sigma2 = float(np.sum(p * (x - mu) ** 2))
    if not sigma2 > 0:
        raise NonConvexFitError("Sampled marginal is degenerate")
    return mu, sigma2


def fit_row(levels: np.ndarray, row: np.ma.MaskedArray, sigma2_floor: float) -> tuple[float, float, bool]:
    """
    Fits one transformed row: exact three-point solve on a lone
    three-level window, least squares otherwise. A row too short for the
    difference fit, or whose fit is not convex, gets the argmin-anchored
    estimate. When that fails too, a single consecutive pair fixes sigma2 at
    the floor and solves for mu; anything else falls back to
    (argmin level, floor).

    Returns:
        tuple[float, float, bool]: (mu, sigma2, fallback).
    """
    present = np.flatnonzero(~np.ma.getmaskarray(row))
    argmin_level = float(levels[present[np.argmin(row.data[present])]])
    try:
        if present.size == 3 and present[2] - present[0] == 2:
            lo, mid, hi = present
            mu, sigma2 = fit_moments_three_point(levels[mid], row.data[lo], row.data[mid], row.data[hi])
        else:
            mu, sigma2 = fit_moments_ls(levels, row)
        return mu, sigma2, False
    except (InsufficientSamplesError, NonConvexFitError) as e:
        logger.debug(f"Difference fit unusable, anchoring on the argmin level: {e}")
    try:
        mu, sigma2 = fit_moments_anchored(levels, row)
        return mu, sigma2, False
    except (InsufficientSamplesError, NonConvexFitError) as e:
        logger.debug(f"Anchored fit failed, falling back: {e}")
    x, delta = consecutive_differences(levels, row)
    if x.size == 1:
        return float(x[0] + 1 - delta[0] * sigma2_floor / 2), sigma2_floor, True
    return argmin_level, sigma2_floor, True


def mpps_layer_statistics(table: LayerMetricTable, c: Constellation, sigma2_floor: float | None = None,
        ot_sort: bool = True, method: str = "fit", noise_var: float = 1.0) -> list[LayerMoments]:
    """
    Per real layer: sort the sampled metrics into Gaussian rank order, fit
    (mu, sigma2) and attach the transform's displaced fraction.

    Args:
        table (LayerMetricTable): Sampled D_{i,j}.
        c (Constellation): The constellation.
        sigma2_floor (float | None): Fallback variance, Config default if None.
        ot_sort (bool): Apply the sorting transform before fitting.
        method (str): "fit" for the difference fit, "statistical" for the
            probability-weighted moments of the sampled marginal.
        noise_var (float): Noise variance, used by the statistical method.

    Returns:
        list[LayerMoments]: One entry per real layer.
    """
    if sigma2_floor is None:
        sigma2_floor = Config.get_singleton().sigma2_floor
    if method not in ("fit", "statistical"):
        raise ValueError(f"Unknown moment method: {method}")
    levels = c.pam_levels
    moments = []
    for j in range(table.num_real_layers):
        row = as_metric_row(table.row(j))
        if row.count() == 0:
            raise EmptyRowError(f"Layer {j} has no sampled levels")
        if ot_sort:
            transform, row = ot_sort_transform(row)
        else:
            transform = SortTransform.identity(row.size)
        if method == "statistical":
            try:
                mu, sigma2 = statistical_moments(levels, row, noise_var)
                fallback = False
            except (InsufficientSamplesError, NonConvexFitError):
                present = np.flatnonzero(~np.ma.getmaskarray(row))
                mu = float(levels[present[np.argmin(row.data[present])]])
                sigma2, fallback = sigma2_floor, True
        else:
            mu, sigma2, fallback = fit_row(levels, row, sigma2_floor)
        if fallback:
            logger.debug(f"Layer {j}: fallback moments mu={mu:.4g}, sigma2={sigma2:.4g}")
        moments.append(LayerMoments(mu, sigma2, transform.displaced_fraction, j, fallback))
    return moments


def moment_features(moments: list[LayerMoments], n_t: int, noise_var: float) -> np.ndarray:
    """
    Network inputs per complex layer:
    [mu_re, mu_im, sigma2_re, sigma2_im, T_re, T_im, noise_var].

    Returns:
        np.ndarray: (N_t, 7) features.
    """
    features = np.empty((n_t, FEATURE_DIM))
    for layer in range(n_t):
        re, im = moments[layer], moments[layer + n_t]
        features[layer] = [re.mu, im.mu, re.sigma2, im.sigma2,
            re.transform_feature, im.transform_feature, noise_var]
    return features


class NonConvexFitError(Exception):
    pass


class InsufficientSamplesError(Exception):
    pass
