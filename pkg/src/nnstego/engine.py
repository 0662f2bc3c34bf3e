"""Embedding and extraction engines over a dense layer of a tensor model.

Fast substitution rewrites whole values: each carrier float32 becomes
[pin byte | 3 payload bytes], so a layer of m neurons with fan-in n holds
3*m*n payload bytes in its weights. A 45-byte record in the first 15 bias
values carries magic, version, payload length and a SHA-256 digest.

Low-bit substitution keeps the carrier values and replaces only the low k
mantissa bits of successive parameters (per neuron: weights, then bias),
MSB-first. The same record, packed to 43 bytes, occupies the first
ceil(344/k) parameters; the payload follows.

Both embedders are pure: they return a new model and touch nothing outside
the targeted bit positions.

Extraction validates in this order: magic (NoStegoHeader when absent),
then the payload digest with the recorded length clamped to capacity
(DigestMismatch on any corruption), and only once content verifies, the
version byte (UnsupportedVersion). Digest-before-version matters: the
version and length fields sit partly in low mantissa bits, so a sanitized
model corrupts them along with the payload, and DigestMismatch is the one
signal that should report corruption.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import floatcodec
from ._kernels import embed_low_bits, extract_low_bits
from .container import TensorModel, layer_view
from .errors import (
    EmptyPayload,
    LayerTooSmall,
    DigestMismatch,
    NoStegoHeader,
    NotPinned,
    PayloadTooLarge,
    UnsupportedVersion,
)
from .floatcodec import PIN_LARGE_POS, PIN_SMALL_POS

MAGIC = b"\x45\x4d"
VERSION = 1
HEADER_NEURONS = 15
HEADER_BYTES = 43
_HEADER_BITS = 8 * HEADER_BYTES
_BIAS_HEADER_BYTES = 3 * HEADER_NEURONS
DIGEST_BYTES = 32
MAX_LSB_BITS = 23


class Band(str, Enum):
    """Which magnitude band embedded values land in."""

    LARGE = "large"  # pin 0x3C / 0xBC, magnitudes in [2**-7, 2**-5)
    SMALL = "small"  # pin 0x38 / 0xB8, magnitudes in [2**-15, 2**-13)


class SignRule(str, Enum):
    """How embedded values get their sign."""

    PRESERVE = "preserve"  # keep the carrier's sign, zero counts as positive
    POSITIVE = "positive"


@dataclass(frozen=True)
class EncodingParams:
    band: Band = Band.LARGE
    sign_rule: SignRule = SignRule.PRESERVE

    @property
    def base_pin(self) -> int:
        return PIN_LARGE_POS if self.band is Band.LARGE else PIN_SMALL_POS

    def pins_for(self, original: np.ndarray) -> np.ndarray:
        """Pin byte per carrier value, applying the sign rule."""
        pins = np.full(original.shape, self.base_pin, dtype=np.uint8)
        if self.sign_rule is SignRule.PRESERVE:
            pins |= np.where(original < 0, np.uint8(0x80), np.uint8(0))
        return pins


@dataclass(frozen=True)
class StegoHeader:
    """Payload descriptor stored alongside the embedded bytes."""

    payload_length: int
    digest: bytes
    version: int = VERSION

    def __post_init__(self):
        if self.payload_length < 0:
            raise ValueError(f"payload_length must be non-negative, got {self.payload_length}")
        if len(self.digest) != DIGEST_BYTES:
            raise ValueError(f"digest must be {DIGEST_BYTES} bytes, got {len(self.digest)}")

    @classmethod
    def for_payload(cls, payload: bytes) -> "StegoHeader":
        return cls(len(payload), hashlib.sha256(payload).digest())

    def to_bytes(self) -> bytes:
        """Packed 43-byte form: magic, version, length (big-endian), digest."""
        return MAGIC + struct.pack(">BQ", self.version, self.payload_length) + self.digest

    @classmethod
    def from_bytes(cls, raw: bytes) -> "StegoHeader":
        """Parse the packed form. Checks magic only; callers judge version."""
        if len(raw) != HEADER_BYTES:
            raise ValueError(f"expected {HEADER_BYTES} header bytes, got {len(raw)}")
        if raw[:2] != MAGIC:
            raise NoStegoHeader(f"no stego header: magic {raw[:2].hex()}, expected {MAGIC.hex()}")
        version, length = struct.unpack(">BQ", raw[2:11])
        return cls(length, raw[11:43], version)

    def to_bias_bytes(self) -> bytes:
        """45-byte form laid out over 15 bias values, 3 bytes each.

        Value 0 carries magic + version; values 1..3 carry the length plus a
        reserved zero byte; values 4..14 carry the digest plus a zero pad.
        """
        packed = self.to_bytes()
        return packed[:3] + packed[3:11] + b"\x00" + packed[11:43] + b"\x00"

    @classmethod
    def from_bias_bytes(cls, raw: bytes) -> "StegoHeader":
        if len(raw) != _BIAS_HEADER_BYTES:
            raise ValueError(f"expected {_BIAS_HEADER_BYTES} bias header bytes, got {len(raw)}")
        return cls.from_bytes(raw[:11] + raw[12:44])


@dataclass(frozen=True)
class CapacityReport:
    """Fast-substitution capacity of one dense layer."""

    layer: str
    neurons: int
    fan_in: int

    @property
    def per_neuron_bytes(self) -> int:
        return 3 * self.fan_in

    @property
    def payload_capacity_bytes(self) -> int:
        return 3 * self.neurons * self.fan_in

    def neurons_required(self, payload_bytes: int) -> int:
        """Smallest neuron count whose weights hold the payload."""
        return -(-payload_bytes // self.per_neuron_bytes)

    def lsb_capacity_bytes(self, k: int) -> int:
        """Low-bit payload capacity at k bits per parameter, header included."""
        total = self.neurons * (self.fan_in + 1)
        header_params = -(-_HEADER_BITS // k)
        return max(0, k * (total - header_params)) // 8


def capacity(model: TensorModel, layer_name: str) -> CapacityReport:
    view = layer_view(model, layer_name)
    return CapacityReport(layer_name, view.m, view.n)


def embed_fast_substitution(
    model: TensorModel,
    layer_name: str,
    payload: bytes,
    params: EncodingParams = EncodingParams(),
) -> TensorModel:
    """Embed payload bytes into a layer's weights, header into its biases.

    Payload bytes go three per weight in neuron order (row-major), the last
    group zero-padded. The first 15 bias values are replaced by the header;
    all other parameters keep their exact bits.
    """
    payload = bytes(payload)
    if not payload:
        raise EmptyPayload("refusing to embed an empty payload")
    view = layer_view(model, layer_name)
    m, n = view.m, view.n
    if m < HEADER_NEURONS:
        raise LayerTooSmall(f"layer {layer_name!r} has {m} neurons, header needs {HEADER_NEURONS}")
    cap = 3 * m * n
    if len(payload) > cap:
        raise PayloadTooLarge(f"payload is {len(payload)} bytes, layer {layer_name!r} holds {cap}")

    padded = payload + b"\x00" * (-len(payload) % 3)
    groups = len(padded) // 3

    weights = model.tensor(view.weight_name).reshape(-1)
    w_words = model.tensor_words(view.weight_name).reshape(-1).copy()
    w_words[:groups] = floatcodec.encode_triplets(padded, params.pins_for(weights[:groups]))

    header = StegoHeader.for_payload(payload)
    biases = model.tensor(view.bias_name)
    b_words = model.tensor_words(view.bias_name).copy()
    b_words[:HEADER_NEURONS] = floatcodec.encode_triplets(
        header.to_bias_bytes(), params.pins_for(biases[:HEADER_NEURONS])
    )

    out = model.with_tensor_data(view.weight_name, w_words.view(np.float32).reshape(m, n))
    return out.with_tensor_data(view.bias_name, b_words.view(np.float32))


def _verify_extracted(header: StegoHeader, payload: bytes, layer_name: str) -> bytes:
    if hashlib.sha256(payload).digest() != header.digest:
        raise DigestMismatch(f"payload digest does not match the embedded header in {layer_name!r}")
    if header.version != VERSION:
        raise UnsupportedVersion(
            f"header version {header.version} in {layer_name!r}, this codec reads version {VERSION}"
        )
    return payload


def extract_fast_substitution(model: TensorModel, layer_name: str) -> bytes:
    """Recover an embedded payload; verifies length, digest and version."""
    view = layer_view(model, layer_name)
    m, n = view.m, view.n
    if m < HEADER_NEURONS:
        raise NoStegoHeader(
            f"no stego header: layer {layer_name!r} has {m} neurons, fewer than the {HEADER_NEURONS} a header needs"
        )

    b_words = model.tensor_words(view.bias_name)[:HEADER_NEURONS]
    try:
        bias_bytes, _ = floatcodec.decode_triplets(b_words)
    except NotPinned as e:
        raise NoStegoHeader(f"no stego header in {layer_name!r}: bias values are not pinned ({e})") from None
    header = StegoHeader.from_bias_bytes(bias_bytes)

    cap = 3 * m * n
    if header.payload_length > cap:
        raise DigestMismatch(
            f"recorded payload length {header.payload_length} exceeds layer capacity {cap}, "
            f"embedded header in {layer_name!r} is corrupt"
        )
    groups = -(-header.payload_length // 3)
    w_words = model.tensor_words(view.weight_name).reshape(-1)[:groups]
    try:
        raw, _ = floatcodec.decode_triplets(w_words)
    except NotPinned as e:
        raise DigestMismatch(f"payload region in {layer_name!r} is corrupt: {e}") from None
    return _verify_extracted(header, bytes(raw[: header.payload_length]), layer_name)


def _check_lsb_bits(k: int) -> None:
    if not 1 <= k <= MAX_LSB_BITS:
        raise ValueError(f"bits per parameter must be in 1..{MAX_LSB_BITS}, got {k}")


def _interleaved_words(model: TensorModel, view) -> np.ndarray:
    """Layer parameters in embed order: per neuron, weights then bias."""
    w = model.tensor_words(view.weight_name).reshape(view.m, view.n)
    b = model.tensor_words(view.bias_name).reshape(view.m, 1)
    return np.concatenate([w, b], axis=1).reshape(-1)


def _bits_of(data: bytes, nbits: int) -> np.ndarray:
    """MSB-first bit array of ``data``, zero-padded to ``nbits``."""
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    return np.concatenate([bits, np.zeros(nbits - bits.size, dtype=np.uint8)])


def embed_lsb(model: TensorModel, layer_name: str, payload: bytes, k: int) -> TensorModel:
    """Embed into the low k mantissa bits of successive layer parameters.

    The 43-byte header occupies the first ceil(344/k) parameters; the
    payload starts at the next parameter. Bits above the low k are
    untouched, so carrier values move by less than 2**(k-23) relative.
    """
    _check_lsb_bits(k)
    payload = bytes(payload)
    view = layer_view(model, layer_name)
    total = view.m * (view.n + 1)
    header_params = -(-_HEADER_BITS // k)
    payload_params = -(-8 * len(payload) // k)
    if header_params + payload_params > total:
        raise PayloadTooLarge(
            f"{len(payload)} payload bytes need {header_params + payload_params} parameters "
            f"at {k} bits each, layer {layer_name!r} has {total}"
        )

    header = StegoHeader.for_payload(payload)
    bits = np.concatenate(
        [_bits_of(header.to_bytes(), header_params * k), _bits_of(payload, payload_params * k)]
    )
    words = embed_low_bits(_interleaved_words(model, view), bits, k)

    grid = words.reshape(view.m, view.n + 1)
    out = model.with_tensor_data(
        view.weight_name, np.ascontiguousarray(grid[:, : view.n]).view(np.float32)
    )
    return out.with_tensor_data(
        view.bias_name, np.ascontiguousarray(grid[:, view.n]).view(np.float32)
    )


def extract_lsb(model: TensorModel, layer_name: str, k: int) -> bytes:
    """Recover a payload embedded at k bits per parameter."""
    _check_lsb_bits(k)
    view = layer_view(model, layer_name)
    total = view.m * (view.n + 1)
    header_params = -(-_HEADER_BITS // k)
    if header_params > total:
        raise NoStegoHeader(
            f"no stego header: layer {layer_name!r} has {total} parameters, fewer than the {header_params} a header needs"
        )

    words = _interleaved_words(model, view)
    header_bits = extract_low_bits(words[:header_params], k)[:_HEADER_BITS]
    header = StegoHeader.from_bytes(np.packbits(header_bits).tobytes())

    payload_params = -(-8 * header.payload_length // k)
    if header_params + payload_params > total:
        raise DigestMismatch(
            f"recorded payload length {header.payload_length} exceeds layer capacity at {k} bits, "
            f"embedded header in {layer_name!r} is corrupt"
        )
    payload_bits = extract_low_bits(words[header_params : header_params + payload_params], k)
    payload = np.packbits(payload_bits[: 8 * header.payload_length]).tobytes()
    return _verify_extracted(header, payload, layer_name)
