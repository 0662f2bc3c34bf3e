"""Float codec tests against an independent IEEE-754 reference decoder.

The reference decoder below evaluates the binary32 formula with exact
rational arithmetic (sign * (1 + mantissa/2^23) * 2^(exponent-127)), sharing
no code with the codec under test; frozen expected values were produced by
hand from that formula.
"""

from __future__ import annotations

import struct
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nnstego.errors import NotPinned
from nnstego.floatcodec import (
    PIN_BYTES,
    PIN_LARGE_NEG,
    PIN_LARGE_POS,
    PIN_SMALL_NEG,
    PIN_SMALL_POS,
    Float32Bits,
    decode_triplet,
    decode_triplets,
    encode_triplet,
    encode_triplets,
    pinned_interval,
)


def reference_decode(word: int) -> Fraction:
    """Exact value of a binary32 bit pattern (normal numbers only)."""
    sign = -1 if word >> 31 else 1
    exponent = (word >> 23) & 0xFF
    mantissa = word & 0x7F_FFFF
    assert 0 < exponent < 255, "reference covers normal numbers only"
    return sign * (1 + Fraction(mantissa, 2**23)) * Fraction(2) ** (exponent - 127)


triplets = st.binary(min_size=3, max_size=3)
pins = st.sampled_from(PIN_BYTES)


class TestReferenceAgreement:
    def test_spec_word_examples(self):
        # [0x00,0x00,0x00] behind 0x3C lands exactly on the band floor 2**-7
        bits = encode_triplet(b"\x00\x00\x00", PIN_LARGE_POS)
        assert bits.to_word() == 0x3C000000
        assert bits.to_float() == 0.0078125

        assert encode_triplet(b"\x12\x34\x56", PIN_LARGE_NEG).to_word() == 0xBC123456

    def test_derived_value_0x3c123456(self):
        # frozen from the reference formula: (1 + 1193046/2^23) * 2^-7
        expected = (1 + Fraction(1193046, 2**23)) * Fraction(1, 128)
        assert reference_decode(0x3C123456) == expected
        value = encode_triplet(b"\x12\x34\x56", PIN_LARGE_POS).to_float()
        assert value == float(expected)  # exactly representable in binary32
        assert value == 0.008923610672354698

    @given(st.integers(min_value=0, max_value=0xFF_FFFF), pins)
    def test_encoded_words_match_reference(self, payload_int, pin):
        payload = payload_int.to_bytes(3, "big")
        bits = encode_triplet(payload, pin)
        exact = reference_decode(bits.to_word())
        assert bits.to_float() == float(np.float32(float(exact)))

    @given(st.integers(min_value=0, max_value=0xFF_FFFF), pins)
    def test_band_containment(self, payload_int, pin):
        value = encode_triplet(payload_int.to_bytes(3, "big"), pin).to_float()
        lo, hi = pinned_interval(pin)
        if pin & 0x80:
            assert lo < value <= hi
        else:
            assert lo <= value < hi
        assert np.isfinite(value)


class TestTripletRoundTrip:
    @given(triplets, pins)
    def test_decode_encode_identity(self, payload, pin):
        assert decode_triplet(encode_triplet(payload, pin)) == (payload, pin)

    def test_decode_spec_examples(self):
        assert decode_triplet(Float32Bits.from_word(0x3C000000)) == (b"\x00\x00\x00", 0x3C)
        assert decode_triplet(Float32Bits.from_word(0xBC123456)) == (b"\x12\x34\x56", 0xBC)

    def test_unpinned_word_rejected(self):
        bits = Float32Bits.from_float(10.0)
        assert bits.to_word() == 0x41200000
        with pytest.raises(NotPinned):
            decode_triplet(bits)

    def test_payload_length_enforced(self):
        with pytest.raises(ValueError, match="3 bytes"):
            encode_triplet(b"\x00\x00", PIN_LARGE_POS)
        with pytest.raises(ValueError, match="pin"):
            encode_triplet(b"\x00\x00\x00", 0x41)


class TestPinnedInterval:
    def test_large_band_endpoints(self):
        assert pinned_interval(PIN_LARGE_POS) == (0.0078125, 0.03125)
        assert pinned_interval(PIN_LARGE_NEG) == (-0.03125, -0.0078125)

    def test_small_band_endpoints(self):
        assert pinned_interval(PIN_SMALL_POS) == (3.0517578125e-5, 1.220703125e-4)
        assert pinned_interval(PIN_SMALL_NEG) == (-1.220703125e-4, -3.0517578125e-5)

    def test_endpoints_are_powers_of_two(self):
        assert pinned_interval(PIN_LARGE_POS) == (2.0**-7, 2.0**-5)
        assert pinned_interval(PIN_SMALL_POS) == (2.0**-15, 2.0**-13)

    def test_invalid_pin(self):
        with pytest.raises(ValueError):
            pinned_interval(0x00)


class TestFloat32Bits:
    @given(st.integers(min_value=0, max_value=0xFFFF_FFFF))
    def test_word_round_trip(self, word):
        assert Float32Bits.from_word(word).to_word() == word

    def test_field_bounds(self):
        with pytest.raises(ValueError):
            Float32Bits(2, 0, 0)
        with pytest.raises(ValueError):
            Float32Bits(0, 256, 0)
        with pytest.raises(ValueError):
            Float32Bits(0, 0, 1 << 23)
        with pytest.raises(ValueError):
            Float32Bits.from_word(1 << 32)

    def test_float_round_trip(self):
        for value in (0.0078125, -0.03125, 1.0, -2.5):
            assert Float32Bits.from_float(value).to_float() == value

    def test_leading_byte(self):
        assert Float32Bits.from_word(0xBC123456).leading_byte == 0xBC

    def test_matches_struct_layout(self):
        (word,) = struct.unpack(">I", struct.pack(">f", 0.0089236107))
        bits = Float32Bits.from_float(0.0089236107)
        assert bits.to_word() == word


class TestBulkCodec:
    @given(st.lists(st.tuples(triplets, pins), min_size=0, max_size=64))
    def test_bulk_matches_scalar(self, items):
        payload = b"".join(p for p, _ in items)
        pin_arr = np.array([q for _, q in items], dtype=np.uint8)
        words = encode_triplets(payload, pin_arr)
        expected = [encode_triplet(p, q).to_word() for p, q in items]
        assert words.tolist() == expected
        data, decoded_pins = decode_triplets(words)
        assert data == payload
        assert decoded_pins.tolist() == pin_arr.tolist()

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="does not match"):
            encode_triplets(b"\x00\x00", np.array([0x3C], dtype=np.uint8))

    def test_invalid_pin_position_reported(self):
        pins_arr = np.array([0x3C, 0x40], dtype=np.uint8)
        with pytest.raises(ValueError, match="index 1"):
            encode_triplets(b"\x00" * 6, pins_arr)

    def test_not_pinned_position_reported(self):
        words = np.array([0x3C000000, 0x41200000], dtype=np.uint32)
        with pytest.raises(NotPinned, match="word 1"):
            decode_triplets(words)

    def test_words_view_as_float32_values(self):
        # logical word bits are the float bits; no byte swapping on the way out
        words = encode_triplets(b"\x00\x00\x00", np.array([0x3C], dtype=np.uint8))
        assert words.view(np.float32)[0] == np.float32(0.0078125)
