from __future__ import annotations
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class LlrVector():
    """
    Per-bit log-likelihood ratios log p(b=1|y) - log p(b=0|y), ordered
    layer-major then bit index (real-part bits before imaginary-part bits).
    """

    llr: np.ndarray

    def __post_init__(self):
        llr = np.asarray(self.llr, dtype=float).ravel()
        if not np.all(np.isfinite(llr)):
            raise ValueError("LLRs must be finite")
        object.__setattr__(self, "llr", llr)

    def __len__(self) -> int:
        return self.llr.size

    def hard_bits(self) -> np.ndarray:
        return (self.llr > 0).astype(np.int8)

    def clamp(self, lambda_max: float) -> LlrVector:
        return LlrVector(np.clip(self.llr, -lambda_max, lambda_max))
