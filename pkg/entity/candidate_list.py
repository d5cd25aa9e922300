from __future__ import annotations
from dataclasses import dataclass
import hashlib

import numpy as np

from entity.cachable import Cachable


@dataclass(frozen=True, eq=False)
class RealDecomposition():
    """
    Real embedding of y = Hs + n with the QR factors used by the tree search.

    Attributes:
        y_r (np.ndarray): [Re y; Im y], length 2N_r.
        h_r (np.ndarray): [[Re H, -Im H], [Im H, Re H]], 2N_r x 2N_t.
        layer_map (tuple): real layer j -> (complex layer, is_imaginary).
        q (np.ndarray): Orthonormal columns, 2N_r x 2N_t.
        r (np.ndarray): Upper triangular with nonnegative diagonal.
        col_perm (np.ndarray): Column order of h_r factorised by QR;
            q @ r == h_r[:, col_perm].
    """

    y_r: np.ndarray
    h_r: np.ndarray
    layer_map: tuple
    q: np.ndarray
    r: np.ndarray
    col_perm: np.ndarray

    @property
    def num_real_layers(self) -> int:
        return self.h_r.shape[1]

    @property
    def n_t(self) -> int:
        return self.h_r.shape[1] // 2

    def metrics(self, levels: np.ndarray) -> np.ndarray:
        """
        Exact path metrics ||y_r - h_r s_r||^2 for real amplitude vectors.

        Args:
            levels (np.ndarray): (P, 2N_t) real amplitudes.

        Returns:
            np.ndarray: (P,) metrics.
        """
        residual = self.y_r[None, :] - np.atleast_2d(levels) @ self.h_r.T
        return np.einsum("ij,ij->i", residual, residual)


@dataclass(frozen=True, eq=False)
class CandidateList(Cachable):
    """
    Sampled full paths sorted ascending by metric, without duplicates.

    Attributes:
        level_indices (np.ndarray): (P, 2N_t) level indices in real-embedding order.
        metrics (np.ndarray): (P,) path metrics ||y - Hs||^2.
    """

    level_indices: np.ndarray
    metrics: np.ndarray

    @staticmethod
    def from_paths(level_indices: np.ndarray, metrics: np.ndarray) -> CandidateList:
        level_indices = np.atleast_2d(np.asarray(level_indices, dtype=np.int64))
        metrics = np.asarray(metrics, dtype=float).ravel()
        if level_indices.shape[0] != metrics.size:
            raise ValueError("One metric per path is required")
        metrics = np.clip(metrics, 0.0, None)
        if level_indices.shape[0]:
            _, first = np.unique(level_indices, axis=0, return_index=True)
            first = np.sort(first)
            level_indices, metrics = level_indices[first], metrics[first]
            keys = [level_indices[:, col] for col in reversed(range(level_indices.shape[1]))]
            order = np.lexsort(keys + [metrics])
            level_indices, metrics = level_indices[order], metrics[order]
        level_indices.setflags(write=False)
        metrics.setflags(write=False)
        return CandidateList(level_indices, metrics)

    def __len__(self) -> int:
        return self.metrics.size

    @property
    def best(self) -> np.ndarray:
        return self.level_indices[0]

    def merge(self, other: CandidateList) -> CandidateList:
        return CandidateList.from_paths(
            np.vstack([self.level_indices, other.level_indices]),
            np.concatenate([self.metrics, other.metrics]),
        )

    def get_hash(self) -> str:
        digest = hashlib.sha256()
        digest.update(np.ascontiguousarray(self.level_indices).tobytes())
        digest.update(np.ascontiguousarray(self.metrics).tobytes())
        return digest.hexdigest()


@dataclass(frozen=True, eq=False)
class LayerMetricTable():
    """
    Per real layer, per level minimum sampled metric D_{i,j}.

    Attributes:
        d (np.ma.MaskedArray): (2N_t, 2M) minima; masked entries are ABSENT
            (no sampled path visits that level at that layer).
        global_min (float): Best metric over all sampled paths.
    """

    d: np.ma.MaskedArray
    global_min: float

    @property
    def num_real_layers(self) -> int:
        return self.d.shape[0]

    @property
    def present(self) -> np.ndarray:
        return ~np.ma.getmaskarray(self.d)

    def row(self, j: int) -> np.ma.MaskedArray:
        return self.d[j]
