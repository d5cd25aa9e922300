from __future__ import annotations
from dataclasses import dataclass, field
from functools import lru_cache
import logging

import numpy as np


logger = logging.getLogger(__name__)

SUPPORTED_BITS_PER_SYMBOL = (2, 4, 6, 8)


@dataclass(frozen=True, eq=False)
class Constellation():
    """
    Square QAM constellation on the unnormalized lattice (levels spaced by 2).

    Attributes:
        bits_per_symbol (int): M_c, bits carried by one complex symbol.
        half_levels (int): M, so that each real dimension has 2M levels.
        pam_levels (np.ndarray): Ascending per-dimension amplitudes 2(i - M) + 1.
        level_bits (np.ndarray): (2M, M_c/2) reflected-binary Gray bits of each
            level index, most significant bit first.
        gray_map (dict): Gray bit pattern -> level index.
    """

    bits_per_symbol: int
    half_levels: int
    pam_levels: np.ndarray
    level_bits: np.ndarray
    gray_map: dict = field(repr=False)

    @property
    def num_levels(self) -> int:
        return 2 * self.half_levels

    @property
    def bits_per_dimension(self) -> int:
        return self.bits_per_symbol // 2

    @property
    def name(self) -> str:
        return "QPSK" if self.bits_per_symbol == 2 else f"{2**self.bits_per_symbol}-QAM"


@lru_cache(maxsize=None)
def build_constellation(m_c: int) -> Constellation:
    if m_c not in SUPPORTED_BITS_PER_SYMBOL:
        raise ConstellationError(f"Unsupported bits per symbol: {m_c}, expected one of {SUPPORTED_BITS_PER_SYMBOL}")
    half = 2 ** (m_c // 2 - 1)
    width = m_c // 2
    indices = np.arange(2 * half)
    pam_levels = (2 * (indices - half) + 1).astype(float)
    gray = indices ^ (indices >> 1)
    level_bits = ((gray[:, None] >> np.arange(width - 1, -1, -1)[None, :]) & 1).astype(np.int8)
    gray_map = {tuple(int(b) for b in bits): int(i) for i, bits in enumerate(level_bits)}
    pam_levels.setflags(write=False)
    level_bits.setflags(write=False)
    logger.debug(f"Built constellation m_c={m_c}, levels={pam_levels.tolist()}")
    return Constellation(m_c, half, pam_levels, level_bits, gray_map)


def average_symbol_energy(c: Constellation) -> float:
    # E|s|^2 of the unnormalized square QAM: 2, 10, 42, 170
    return float(2 * np.mean(c.pam_levels ** 2))


def bits_to_level_indices(bits, c: Constellation, n_t: int) -> np.ndarray:
    """
    Maps a bit block to real-layer level indices, real parts of all layers
    first, then imaginary parts (the real-embedding order).
    """
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size != n_t * c.bits_per_symbol:
        raise ConstellationError(f"Expected {n_t * c.bits_per_symbol} bits, got {bits.size}")
    if np.any((bits != 0) & (bits != 1)):
        raise ConstellationError("Bits must be 0 or 1")
    width = c.bits_per_dimension
    weights = 1 << np.arange(width - 1, -1, -1)
    per_symbol = bits.reshape(n_t, 2, width)
    gray_values = per_symbol @ weights
    gray_to_index = np.empty(c.num_levels, dtype=np.int64)
    for bit_pattern, index in c.gray_map.items():
        gray_to_index[int(np.dot(bit_pattern, weights))] = index
    indices = gray_to_index[gray_values]
    return np.concatenate([indices[:, 0], indices[:, 1]])


def level_indices_to_bits(level_indices: np.ndarray, c: Constellation) -> np.ndarray:
    """
    Inverse of bits_to_level_indices for one or many paths.

    Args:
        level_indices (np.ndarray): (..., 2N_t) level indices in real-embedding order.
        c (Constellation): The constellation.

    Returns:
        np.ndarray: (..., N_t * M_c) bits, layer-major then bit index.
    """
    level_indices = np.asarray(level_indices, dtype=np.int64)
    n_t = level_indices.shape[-1] // 2
    real_bits = c.level_bits[level_indices[..., :n_t]]
    imag_bits = c.level_bits[level_indices[..., n_t:]]
    bits = np.concatenate([real_bits, imag_bits], axis=-1)
    return bits.reshape(level_indices.shape[:-1] + (n_t * c.bits_per_symbol,))


def level_indices_to_symbols(level_indices: np.ndarray, c: Constellation) -> np.ndarray:
    level_indices = np.asarray(level_indices, dtype=np.int64)
    n_t = level_indices.shape[-1] // 2
    levels = c.pam_levels[level_indices]
    return levels[..., :n_t] + 1j * levels[..., n_t:]


def layer_rows_to_bits(rows: np.ndarray, n_t: int) -> np.ndarray:
    """
    Reorders per-real-layer bit values, shape (2N_t, M_c/2), into the
    N_t * M_c bit order: rows l and l + N_t hold the real and imaginary bits
    of symbol l.
    """
    rows = np.asarray(rows)
    return np.concatenate([rows[:n_t], rows[n_t:]], axis=1).reshape(n_t * 2 * rows.shape[1])


def modulate(bits, c: Constellation, n_t: int) -> np.ndarray:
    return level_indices_to_symbols(bits_to_level_indices(bits, c, n_t), c)


def symbols_to_level_indices(symbols, c: Constellation) -> np.ndarray:
    symbols = np.asarray(symbols, dtype=complex).ravel()
    coords = np.concatenate([symbols.real, symbols.imag])
    indices = np.rint((coords + c.num_levels - 1) / 2).astype(np.int64)
    return np.clip(indices, 0, c.num_levels - 1)


def demap(symbols, c: Constellation) -> np.ndarray:
    return level_indices_to_bits(symbols_to_level_indices(symbols, c), c)


class ConstellationError(ValueError):
    pass
