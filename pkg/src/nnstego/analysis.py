"""Forensics over tensor models: statistics, detection, sanitization.

Detection keys on the fast-substitution signature: embedded values share a
handful of leading (sign + exponent) bytes, so a tensor whose leading-byte
mass concentrates on the pin set stands out from trained weights, whose
leading bytes spread over many exponents. The trailing three bytes of an
embedded value carry the payload, so their pooled entropy runs near 8
bits per byte, another useful signal reported alongside.

Sanitization overwrites the low k mantissa bits of every parameter with
seeded random bits. That moves each value by less than 2**(k-23) relative
but corrupts any embedded payload regardless of where it hides.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import (
    leading_byte_histogram,
    randomize_low_bits,
    trailing_bytes_histogram,
)
from .container import TensorModel
from .engine import MAX_LSB_BITS
from .floatcodec import PIN_BYTES

DEFAULT_THRESHOLD = 0.2
DEFAULT_WINDOW = 4096
_PIN_INDEX = np.array(PIN_BYTES, dtype=np.intp)


@dataclass(frozen=True)
class ParamStats:
    """Distribution summary of one tensor's float32 values."""

    tensor: str
    count: int
    negatives: int
    positives: int
    zeros: int
    minimum: float
    maximum: float
    frac_abs_below_1e4: float
    frac_abs_below_1e3: float
    leading_byte_histogram: np.ndarray = field(repr=False)


def stats(model: TensorModel, tensor_name: str) -> ParamStats:
    values = model.tensor(tensor_name).reshape(-1)
    words = model.tensor_words(tensor_name).reshape(-1)
    count = values.size
    if count == 0:
        return ParamStats(tensor_name, 0, 0, 0, 0, float("nan"), float("nan"), 0.0, 0.0,
                          np.zeros(256, dtype=np.int64))
    magnitudes = np.abs(values)
    return ParamStats(
        tensor=tensor_name,
        count=count,
        negatives=int(np.count_nonzero(values < 0)),
        positives=int(np.count_nonzero(values > 0)),
        zeros=int(np.count_nonzero(values == 0)),
        minimum=float(values.min()),
        maximum=float(values.max()),
        frac_abs_below_1e4=float(np.count_nonzero(magnitudes < 1e-4)) / count,
        frac_abs_below_1e3=float(np.count_nonzero(magnitudes < 1e-3)) / count,
        leading_byte_histogram=leading_byte_histogram(words),
    )


@dataclass(frozen=True)
class TensorDetection:
    """Per-tensor detection signals."""

    tensor: str
    count: int
    pinned_fraction: float
    trailing_entropy_bits: float
    flagged: bool


@dataclass(frozen=True)
class DetectionReport:
    threshold: float
    window: int
    tensors: tuple[TensorDetection, ...]

    @property
    def flagged(self) -> bool:
        return any(t.flagged for t in self.tensors)

    @property
    def flagged_tensors(self) -> tuple[str, ...]:
        return tuple(t.tensor for t in self.tensors if t.flagged)


def shannon_entropy_bits(histogram: np.ndarray) -> float:
    """Entropy of a count histogram in bits per symbol (0 for empty)."""
    total = int(histogram.sum())
    if total == 0:
        return 0.0
    p = histogram[histogram > 0] / total
    return float(-(p * np.log2(p)).sum())


def detect(
    model: TensorModel,
    threshold: float = DEFAULT_THRESHOLD,
    window: int = DEFAULT_WINDOW,
) -> DetectionReport:
    """Scan every tensor for the fast-substitution signature.

    A tensor is flagged when it has at least ``window`` values and its
    pinned-leading-byte fraction reaches ``threshold``. Tensors below the
    window still get signals reported, they just never flag.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    if window < 1:
        raise ValueError(f"window must be positive, got {window}")
    rows = []
    for name in model.names:
        words = model.tensor_words(name).reshape(-1)
        count = words.size
        if count:
            pinned = float(leading_byte_histogram(words)[_PIN_INDEX].sum()) / count
            entropy = shannon_entropy_bits(trailing_bytes_histogram(words))
        else:
            pinned, entropy = 0.0, 0.0
        rows.append(
            TensorDetection(name, count, pinned, entropy, count >= window and pinned >= threshold)
        )
    return DetectionReport(threshold, window, tuple(rows))


def sanitize(model: TensorModel, k: int, seed: int) -> TensorModel:
    """Randomize the low k mantissa bits of every parameter in the model.

    Deterministic for a given seed: tensors are processed in sorted name
    order so the random stream lands identically however the model was
    produced.
    """
    if not 1 <= k <= MAX_LSB_BITS:
        raise ValueError(f"bits to randomize must be in 1..{MAX_LSB_BITS}, got {k}")
    rng = np.random.default_rng(seed)
    out = model
    for name in sorted(model.names):
        words = model.tensor_words(name).reshape(-1)
        rand = rng.integers(0, 1 << 32, size=words.size, dtype=np.uint32)
        scrubbed = randomize_low_bits(words, rand, k)
        out = out.with_tensor_data(name, scrubbed.view(np.float32).reshape(model.spec(name).shape))
    return out
