from __future__ import annotations
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class SortTransform():
    """
    Rearrangement of a sampled metric row into the rank order of a discretised
    Gaussian centred at the row's minimum.

    Attributes:
        perm (np.ndarray): perm[i] is the level index entry i moves to.
        displaced_fraction (float): Share of the 2M level indices that move.
    """

    perm: np.ndarray

    @property
    def displaced_fraction(self) -> float:
        return float(np.count_nonzero(self.perm != np.arange(self.perm.size)) / self.perm.size)

    @staticmethod
    def identity(size: int) -> SortTransform:
        return SortTransform(np.arange(size))


@dataclass(frozen=True)
class LayerMoments():
    """
    Fitted Gaussian moments of one real layer's marginal posterior.

    Attributes:
        mu (float): Mean, lattice units.
        sigma2 (float): Variance, lattice units squared, > 0.
        transform_feature (float): Displaced fraction of the sorting transform.
        layer (int): Real layer index.
        fallback (bool): True when the fit was replaced by the fallback rule.
    """

    mu: float
    sigma2: float
    transform_feature: float
    layer: int
    fallback: bool = False
