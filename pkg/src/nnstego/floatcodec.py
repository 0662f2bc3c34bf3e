"""Bit-exact codec between 3-byte groups and exponent-pinned float32 values.

A 32-bit IEEE-754 word, read big-endian, is laid out as

    [ pin byte | b0 | b1 | b2 ]

where the pin byte carries the sign bit plus the top seven bits of the
biased exponent, and the remaining 24 bits are free to carry three payload
bytes. Four pin bytes are supported; each confines the decoded value to a
narrow magnitude band of normal (never NaN/Inf/subnormal) floats:

    0x3C / 0xBC   biased exponent 120 or 121, |value| in [2**-7, 2**-5)
    0x38 / 0xB8   biased exponent 112 or 113, |value| in [2**-15, 2**-13)

0xBC and 0xB8 are the negative-sign variants. The codec works on logical
word values; byte order on disk is the container's concern.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NotPinned

PIN_LARGE_POS = 0x3C
PIN_LARGE_NEG = 0xBC
PIN_SMALL_POS = 0x38
PIN_SMALL_NEG = 0xB8

PIN_BYTES = (PIN_LARGE_POS, PIN_LARGE_NEG, PIN_SMALL_POS, PIN_SMALL_NEG)

_SIGN_MASK = 0x8000_0000
_EXPONENT_MASK = 0x7F80_0000
_MANTISSA_MASK = 0x007F_FFFF


@dataclass(frozen=True)
class Float32Bits:
    """A float32 value split into its sign/exponent/mantissa fields."""

    sign: int
    exponent: int
    mantissa: int

    def __post_init__(self) -> None:
        if not (self.sign in (0, 1) and 0 <= self.exponent <= 0xFF and 0 <= self.mantissa <= _MANTISSA_MASK):
            raise ValueError(f"invalid float32 fields: {self}")

    @classmethod
    def from_word(cls, word: int) -> "Float32Bits":
        if not 0 <= word <= 0xFFFF_FFFF:
            raise ValueError(f"word out of 32-bit range: {word:#x}")
        return cls(word >> 31, (word >> 23) & 0xFF, word & _MANTISSA_MASK)

    @classmethod
    def from_float(cls, value: float) -> "Float32Bits":
        (word,) = struct.unpack(">I", struct.pack(">f", value))
        return cls.from_word(word)

    def to_word(self) -> int:
        return (self.sign << 31) | (self.exponent << 23) | self.mantissa

    def to_float(self) -> float:
        (value,) = struct.unpack(">f", struct.pack(">I", self.to_word()))
        return value

    @property
    def leading_byte(self) -> int:
        return self.to_word() >> 24


def _check_pin(pin: int) -> None:
    if pin not in PIN_BYTES:
        raise ValueError(f"not a valid pin byte: {pin:#04x} (expected one of 3c/bc/38/b8)")


def encode_triplet(payload: bytes, pin: int) -> Float32Bits:
    """Pack exactly three payload bytes behind a pin byte."""
    _check_pin(pin)
    if len(payload) != 3:
        raise ValueError(f"payload group must be exactly 3 bytes, got {len(payload)}")
    word = (pin << 24) | (payload[0] << 16) | (payload[1] << 8) | payload[2]
    return Float32Bits.from_word(word)


def decode_triplet(bits: Float32Bits) -> tuple[bytes, int]:
    """Inverse of :func:`encode_triplet`: returns (3 payload bytes, pin byte).

    Raises NotPinned when the leading byte is outside the pin set, which
    signals a corrupted or never-embedded parameter.
    """
    word = bits.to_word()
    pin = word >> 24
    if pin not in PIN_BYTES:
        raise NotPinned(f"leading byte {pin:#04x} is not a pin byte")
    return bytes([(word >> 16) & 0xFF, (word >> 8) & 0xFF, word & 0xFF]), pin


def pinned_interval(pin: int) -> tuple[float, float]:
    """Value band of all floats encodable under ``pin``, as (lo, hi) with
    lo < hi.

    For positive pins the band is closed at lo and open at hi; for negative
    pins it is open at lo and closed at hi (the mirror image).
    """
    _check_pin(pin)
    lo, hi = (2.0**-7, 2.0**-5) if pin & 0x7F == PIN_LARGE_POS else (2.0**-15, 2.0**-13)
    if pin & 0x80:
        return -hi, -lo
    return lo, hi


def encode_triplets(payload: bytes | np.ndarray, pins: np.ndarray) -> np.ndarray:
    """Bulk encode: ``payload`` of length 3*N plus N pin bytes -> N words.

    Returns a uint32 array of logical (big-endian) word values.
    """
    data = np.frombuffer(payload, dtype=np.uint8) if isinstance(payload, (bytes, bytearray)) else np.ascontiguousarray(payload, dtype=np.uint8)
    pins = np.ascontiguousarray(pins, dtype=np.uint8)
    if data.size != 3 * pins.size:
        raise ValueError(f"payload length {data.size} does not match {pins.size} pins")
    bad = ~np.isin(pins, np.array(PIN_BYTES, dtype=np.uint8))
    if bad.any():
        raise ValueError(f"invalid pin byte at index {int(np.argmax(bad))}")
    return _kernels.pack_triplets(data, pins)


def decode_triplets(words: np.ndarray) -> tuple[bytes, np.ndarray]:
    """Bulk decode: N uint32 words -> (3*N payload bytes, N pin bytes)."""
    words = np.ascontiguousarray(words, dtype=np.uint32)
    data, pins = _kernels.unpack_triplets(words)
    bad = ~np.isin(pins, np.array(PIN_BYTES, dtype=np.uint8))
    if bad.any():
        i = int(np.argmax(bad))
        raise NotPinned(f"word {i} has leading byte {int(pins[i]):#04x}, not a pin byte")
    return data.tobytes(), pins
