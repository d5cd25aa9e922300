from __future__ import annotations
from collections import Counter
from typing import Sequence
import logging

import numpy as np
from scipy.special import logsumexp, rel_entr

from entity.layer_moments import SortTransform


logger = logging.getLogger(__name__)

PROBABILITY_TOLERANCE = 1e-9


def as_metric_row(metric_row) -> np.ma.MaskedArray:
    """
    Normalises a metric row to a masked array. None entries and masked
    entries are ABSENT.
    """
    if isinstance(metric_row, np.ma.MaskedArray):
        return np.ma.array(metric_row.data.astype(float), mask=np.ma.getmaskarray(metric_row).copy())
    values = list(metric_row)
    mask = [v is None or v is np.ma.masked for v in values]
    data = [0.0 if m else float(v) for v, m in zip(values, mask)]
    return np.ma.array(data, mask=mask, dtype=float)


def gaussian_target_order(k: int, peak: int) -> list[int]:
    if not 0 <= peak < k:
        raise ValueError(f"peak must be in [0, {k}), got {peak}")
    return sorted(range(k), key=lambda i: (abs(i - peak), i))


def ot_sort_transform(metric_row) -> tuple[SortTransform, np.ma.MaskedArray]:
    """
    Rearranges the present metrics so that ascending metrics (descending
    probabilities) occupy positions in ascending distance from the minimum.

    Positions at equal distance carry equal target probability, so any
    assignment inside such a group is optimal; entries that already hold one
    of their group's values stay in place, the rest are filled left first.
    ABSENT positions are neither sources nor targets.

    Returns:
        tuple[SortTransform, np.ma.MaskedArray]: The transform and the
            rearranged row.
    """
    row = as_metric_row(metric_row)
    mask = np.ma.getmaskarray(row)
    positions = np.flatnonzero(~mask)
    if positions.size == 0:
        raise EmptyRowError("Metric row has no present entries")
    values = row.data[positions]
    peak = int(positions[np.argmin(values)])
    ranked = sorted(positions.tolist(), key=lambda p: (abs(p - peak), p))
    ascending = np.sort(values, kind="stable")

    target = {}
    rank = 0
    while rank < len(ranked):
        distance = abs(ranked[rank] - peak)
        group = [p for p in ranked[rank:] if abs(p - peak) == distance]
        pool = Counter(ascending[rank:rank + len(group)].tolist())
        unfilled = []
        for p in group:
            current = float(row.data[p])
            if pool[current] > 0:
                target[p] = current
                pool[current] -= 1
            else:
                unfilled.append(p)
        leftover = sorted(pool.elements())
        for p, value in zip(unfilled, leftover):
            target[p] = value
        rank += len(group)

    perm = np.arange(row.size)
    sources = set(positions.tolist())
    pending = []
    for p in positions:
        if target[p] == row.data[p]:
            perm[p] = p
            sources.discard(int(p))
        else:
            pending.append(int(p))
    for p in pending:
        source = min(s for s in sources if row.data[s] == target[p])
        perm[source] = p
        sources.discard(source)

    transformed = row.copy()
    for p in positions:
        transformed[p] = target[p]
    transform = SortTransform(perm)
    logger.debug(f"Sort transform peak={peak}, displaced={transform.displaced_fraction:.3f}")
    return transform, transformed


def log_probabilities(metrics: Sequence[float], noise_var: float = 1.0) -> np.ndarray:
    # p_i ∝ exp(-D_i / noise_var)
    x = -np.asarray(metrics, dtype=float) / noise_var
    return x - logsumexp(x)


def transport_objective(q: Sequence[float], metrics: Sequence[float]) -> float:
    """
    Σ q_i log p_i with p_i ∝ exp(-D_i): the quantity the sorting transform
    maximises over rearrangements of the metrics.
    """
    q = np.asarray(q, dtype=float)
    return float(np.sum(q * log_probabilities(metrics)))


def kl_divergence(q: Sequence[float], p: Sequence[float]) -> float:
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if q.shape != p.shape:
        raise SupportError(f"Shape mismatch: {q.shape} vs {p.shape}")
    if np.any(q < 0) or np.any(p < 0):
        raise SupportError("Probabilities must be nonnegative")
    if abs(q.sum() - 1) > PROBABILITY_TOLERANCE or abs(p.sum() - 1) > PROBABILITY_TOLERANCE:
        raise SupportError("Probabilities must sum to 1")
    if np.any((p == 0) & (q > 0)):
        raise SupportError("q is not absolutely continuous with respect to p")
    return float(np.sum(rel_entr(q, p)))


class EmptyRowError(ValueError):
    pass


class SupportError(ValueError):
    pass
