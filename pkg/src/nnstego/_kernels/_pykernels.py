"""Numpy implementations of the hot bit-twiddling kernels.

Fallback used when the compiled extension is unavailable (or disabled via
NNSTEGO_PURE_PYTHON=1). Both backends are bit-for-bit equivalent; the test
suite enforces parity.

All kernels take logical word values as uint32 arrays; none of them mutate
their inputs.
"""

from __future__ import annotations

import numpy as np


def pack_triplets(data: np.ndarray, pins: np.ndarray) -> np.ndarray:
    """[pin, b0, b1, b2] big-endian concatenation for each 3-byte group."""
    groups = data.reshape(-1, 3).astype(np.uint32)
    return (
        (pins.astype(np.uint32) << np.uint32(24))
        | (groups[:, 0] << np.uint32(16))
        | (groups[:, 1] << np.uint32(8))
        | groups[:, 2]
    )


def unpack_triplets(words: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split each word into (3 trailing bytes, leading byte)."""
    raw = words.astype(">u4").view(np.uint8).reshape(-1, 4)
    return raw[:, 1:].reshape(-1).copy(), raw[:, 0].copy()


def embed_low_bits(words: np.ndarray, bits: np.ndarray, k: int) -> np.ndarray:
    """Write MSB-first k-bit chunks of ``bits`` into the low k bits of the
    first len(bits)//k words. ``bits`` length must be a multiple of k."""
    if bits.size % k:
        raise ValueError(f"bit count {bits.size} not a multiple of k={k}")
    weights = np.left_shift(np.uint32(1), np.arange(k - 1, -1, -1, dtype=np.uint32))
    chunks = (bits.reshape(-1, k).astype(np.uint32) * weights).sum(axis=1, dtype=np.uint32)
    mask = np.uint32((1 << k) - 1)
    out = words.copy()
    out[: chunks.size] = (out[: chunks.size] & ~mask) | chunks
    return out


def extract_low_bits(words: np.ndarray, k: int) -> np.ndarray:
    """Read the low k bits of every word as an MSB-first bit stream."""
    shifts = np.arange(k - 1, -1, -1, dtype=np.uint32)
    return ((words[:, None] >> shifts) & np.uint32(1)).astype(np.uint8).reshape(-1)


def leading_byte_histogram(words: np.ndarray) -> np.ndarray:
    return np.bincount(words >> np.uint32(24), minlength=256).astype(np.int64)


def trailing_bytes_histogram(words: np.ndarray) -> np.ndarray:
    """Pooled 256-bin histogram of the 3 trailing bytes of each word."""
    hist = np.zeros(256, dtype=np.int64)
    for shift in (16, 8, 0):
        hist += np.bincount((words >> np.uint32(shift)) & np.uint32(0xFF), minlength=256)
    return hist


def randomize_low_bits(words: np.ndarray, rand: np.ndarray, k: int) -> np.ndarray:
    """Replace the low k bits of every word with bits from ``rand``."""
    mask = np.uint32((1 << k) - 1)
    return (words & ~mask) | (rand & mask)
