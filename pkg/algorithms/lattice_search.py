from __future__ import annotations
from dataclasses import dataclass
from typing import Iterator
import logging

import numpy as np

from entity.candidate_list import CandidateList, LayerMetricTable, RealDecomposition
from entity.channel import ChannelError
from entity.config import Config
from entity.constellation import Constellation


logger = logging.getLogger(__name__)

DEGENERATE_TOLERANCE = 1e-12
LATTICE_CHUNK = 1 << 16
METRIC_TENSOR_BUDGET = 1 << 22


@dataclass(frozen=True, eq=False)
class ExhaustiveSearch():
    """
    Result of a full lattice enumeration.

    Attributes:
        table (LayerMetricTable): Exact constrained minima D_{i,j}.
        best (np.ndarray): Level indices of the ML path (lexicographically
            smallest among ties).
        best_metric (float): Its metric.
        argmin_paths (np.ndarray): (2N_t, 2M, 2N_t) the path attaining each
            D_{i,j}.
    """

    table: LayerMetricTable
    best: np.ndarray
    best_metric: float
    argmin_paths: np.ndarray


def real_embedding(h: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Returns:
        tuple[np.ndarray, np.ndarray]: (h_r, y_r) with
            h_r = [[Re H, -Im H], [Im H, Re H]] and y_r = [Re y; Im y].
    """
    h = np.asarray(h, dtype=complex)
    y = np.asarray(y, dtype=complex).ravel()
    if h.ndim != 2 or h.shape[0] != y.size:
        raise ChannelError(f"Shape mismatch: H {h.shape}, y {y.shape}")
    return np.block([[h.real, -h.imag], [h.imag, h.real]]), np.concatenate([y.real, y.imag])


def real_decompose(h: np.ndarray, y: np.ndarray) -> RealDecomposition:
    h_r, y_r = real_embedding(h, y)
    h = np.asarray(h, dtype=complex)
    n_r, n_t = h.shape
    if n_r < n_t:
        raise ChannelError(f"QR search requires N_r >= N_t, got {n_r} x {n_t}")
    col_perm = np.argsort(np.linalg.norm(h_r, axis=0), kind="stable")
    q, r = np.linalg.qr(h_r[:, col_perm])
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    q = q * signs[None, :]
    r = signs[:, None] * r
    scale = np.linalg.norm(h)
    if scale == 0 or np.min(np.abs(np.diag(r))) < DEGENERATE_TOLERANCE * scale:
        raise DegenerateChannelError(f"Rank-deficient channel, min |R_jj| = {np.min(np.abs(np.diag(r))):.3e}")
    layer_map = tuple((j % n_t, j >= n_t) for j in range(2 * n_t))
    return RealDecomposition(y_r, h_r, layer_map, q, r, col_perm)


def kbest_search(dec: RealDecomposition, c: Constellation, k: int,
        constraint: dict[int, int] | None = None) -> CandidateList:
    """
    Breadth-first K-best search over the QR-triangularised real lattice.

    Args:
        dec (RealDecomposition): The decomposed channel and observation.
        c (Constellation): The constellation.
        k (int): Partial paths kept per layer.
        constraint (dict[int, int] | None): Optional real layer -> level index
            restriction; constrained layers only expand the given level.

    Returns:
        CandidateList: At most k full paths with exact metrics.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    constraint = constraint or {}
    levels = c.pam_levels
    n = dec.num_real_layers
    z = dec.q.T @ dec.y_r
    r = dec.r
    all_levels = np.arange(c.num_levels)
    # columns hold positions t..n-1 of the permuted order
    paths = np.zeros((1, 0), dtype=np.int64)
    acc = np.zeros(1)
    for t in range(n - 1, -1, -1):
        layer = int(dec.col_perm[t])
        allowed = np.array([constraint[layer]]) if layer in constraint else all_levels
        interference = levels[paths] @ r[t, t + 1:]
        increments = (z[t] - interference[:, None] - r[t, t] * levels[allowed][None, :]) ** 2
        metric = (acc[:, None] + increments).ravel()
        new_paths = np.column_stack([
            np.tile(allowed, paths.shape[0]),
            np.repeat(paths, allowed.size, axis=0),
        ])
        keys = [new_paths[:, col] for col in reversed(range(new_paths.shape[1]))]
        order = np.lexsort(keys + [metric])[:k]
        paths, acc = new_paths[order], metric[order]
    level_indices = np.empty_like(paths)
    level_indices[:, dec.col_perm] = paths
    metrics = dec.metrics(levels[level_indices])
    logger.debug(f"K-best k={k} kept {len(metrics)} paths, best metric {metrics.min():.6g}")
    return CandidateList.from_paths(level_indices, metrics)


def extract_layer_metrics(cands: CandidateList, c: Constellation, n_t: int) -> LayerMetricTable:
    if len(cands) == 0:
        raise ValueError("Candidate list is empty")
    n = 2 * n_t
    d = np.full((n, c.num_levels), np.inf)
    rows = np.broadcast_to(np.arange(n), cands.level_indices.shape)
    values = np.broadcast_to(cands.metrics[:, None], cands.level_indices.shape)
    np.minimum.at(d, (rows, cands.level_indices), values)
    present = np.isfinite(d)
    table = np.ma.array(np.where(present, d, 0.0), mask=~present)
    return LayerMetricTable(table, float(cands.metrics[0]))


def lattice_size(c: Constellation, n_t: int) -> int:
    return c.num_levels ** (2 * n_t)


def enumerate_lattice(c: Constellation, n_t: int, chunk: int = LATTICE_CHUNK) -> Iterator[np.ndarray]:
    """
    Yields every level-index vector of the real lattice in lexicographic
    order, in blocks of at most `chunk` rows.
    """
    shape = (c.num_levels,) * (2 * n_t)
    total = lattice_size(c, n_t)
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total))
        yield np.column_stack(np.unravel_index(flat, shape)).astype(np.int64)


def lattice_metric_tensor(h_r: np.ndarray, y_r: np.ndarray, c: Constellation) -> np.ndarray:
    """
    Path metrics ||y_r - h_r s||^2 of every lattice point, one axis per real
    layer indexed by level index; flattening gives lexicographic order.

    The trailing layers are expanded by broadcasting within
    METRIC_TENSOR_BUDGET residual entries, the leading ones are looped.
    """
    levels = c.pam_levels
    n_levels = levels.size
    n = h_r.shape[1]
    # (2N_t, 2M, 2N_r): column j scaled by each level
    contrib = levels[None, :, None] * h_r.T[:, None, :]
    tail = n
    while tail > 1 and n_levels ** tail * y_r.size > METRIC_TENSOR_BUDGET:
        tail -= 1
    head = n - tail
    tail_residual = np.zeros(y_r.size)
    for j in range(head, n):
        tail_residual = tail_residual[..., None, :] - contrib[j]
    metrics = np.empty((n_levels,) * n)
    for prefix in np.ndindex(*(n_levels,) * head):
        offset = y_r - sum((contrib[j, i] for j, i in enumerate(prefix)), np.zeros(y_r.size))
        residual = offset + tail_residual
        metrics[prefix] = np.einsum("...k,...k->...", residual, residual)
    return metrics


def exhaustive_search(dec: RealDecomposition, c: Constellation) -> ExhaustiveSearch:
    n = dec.num_real_layers
    n_levels = c.num_levels
    metrics = lattice_metric_tensor(dec.h_r, dec.y_r, c)
    best = np.array(np.unravel_index(int(np.argmin(metrics)), metrics.shape), dtype=np.int64)
    d = np.empty((n, n_levels))
    argmin_paths = np.empty((n, n_levels, n), dtype=np.int64)
    rest_shape = (n_levels,) * (n - 1)
    for j in range(n):
        # argmin over the flattened remaining layers keeps the lexicographic tie-break
        per_level = np.moveaxis(metrics, j, 0).reshape(n_levels, -1)
        arg = np.argmin(per_level, axis=1)
        d[j] = per_level[np.arange(n_levels), arg]
        rest = np.column_stack(np.unravel_index(arg, rest_shape))
        argmin_paths[j] = np.insert(rest, j, np.arange(n_levels), axis=1)
    best_metric = float(metrics[tuple(best)])
    table = LayerMetricTable(np.ma.array(d, mask=np.zeros_like(d, dtype=bool)), best_metric)
    return ExhaustiveSearch(table, best, best_metric, argmin_paths)


def exhaustive_layer_metrics(dec: RealDecomposition, c: Constellation) -> tuple[LayerMetricTable, np.ndarray]:
    search = exhaustive_search(dec, c)
    return search.table, search.best


def neighbour_levels(index: int, num_levels: int) -> list[int]:
    """
    The two levels adjacent to `index`, taken one-sided (the two nearest
    inner levels) at the lattice edges.
    """
    if num_levels == 2:
        return [1 - index]
    if index == 0:
        return [1, 2]
    if index == num_levels - 1:
        return [num_levels - 2, num_levels - 3]
    return [index - 1, index + 1]


def minimal_path_set(dec: RealDecomposition, c: Constellation, best: np.ndarray,
        k: int | None = None, exhaustive: ExhaustiveSearch | None = None) -> CandidateList:
    """
    The best path plus, per real layer, the constrained-minimum paths at the
    two levels adjacent to best[j]: at most 4N_t + 1 paths.

    Constrained minima are exact when the lattice is within the configured
    exhaustive limit, otherwise they come from a constrained K-best re-search
    with budget k.
    """
    best = np.asarray(best, dtype=np.int64)
    n = dec.num_real_layers
    config = Config.get_singleton()
    if exhaustive is None and lattice_size(c, dec.n_t) <= config.exhaustive_limit:
        exhaustive = exhaustive_search(dec, c)
    elif exhaustive is None:
        logger.debug(f"Lattice above exhaustive limit, constrained re-search with k={k or config.k_budget}")
    paths = [best]
    for j in range(n):
        for i in neighbour_levels(int(best[j]), c.num_levels):
            if exhaustive is not None:
                paths.append(exhaustive.argmin_paths[j, i])
            else:
                constrained = kbest_search(dec, c, k or config.k_budget, constraint={j: i})
                paths.append(constrained.best)
    paths = np.array(paths)
    return CandidateList.from_paths(paths, dec.metrics(c.pam_levels[paths]))


class DegenerateChannelError(Exception):
    pass
