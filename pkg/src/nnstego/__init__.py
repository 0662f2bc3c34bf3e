"""Steganographic codec and forensics toolkit for neural-network weights.

Embeds arbitrary byte payloads in float32 model parameters, either by fast
substitution (three payload bytes per value behind a fixed exponent byte)
or by low-mantissa-bit substitution, and provides the matching analysis
side: capacity planning, parameter statistics, detection and sanitization.
A small numpy training harness exercises the codec on real models.
"""

from .errors import (
    CapacityError,
    CodecError,
    ContainerError,
    DigestMismatch,
    EmptyPayload,
    IntegrityError,
    LayerTooSmall,
    MalformedHeader,
    MissingTensor,
    NnstegoError,
    NonFiniteLoss,
    NoStegoHeader,
    NotPinned,
    OffsetOverlap,
    PayloadTooLarge,
    ShapeMismatch,
    TrainingError,
    TruncatedData,
    UnsupportedVersion,
)
from .floatcodec import (
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
from .container import (
    LayerView,
    TensorModel,
    TensorSpec,
    layer_view,
    load,
    parse,
    save,
    serialize,
)
from .engine import (
    Band,
    CapacityReport,
    EncodingParams,
    SignRule,
    StegoHeader,
    capacity,
    embed_fast_substitution,
    embed_lsb,
    extract_fast_substitution,
    extract_lsb,
)
from .analysis import (
    DetectionReport,
    ParamStats,
    TensorDetection,
    detect,
    sanitize,
    stats,
)
from . import datasets, mlp, sweep

__version__ = "0.1.0"

__all__ = [
    "Band",
    "CapacityError",
    "CapacityReport",
    "CodecError",
    "ContainerError",
    "DetectionReport",
    "DigestMismatch",
    "EmptyPayload",
    "EncodingParams",
    "Float32Bits",
    "IntegrityError",
    "LayerTooSmall",
    "LayerView",
    "MalformedHeader",
    "MissingTensor",
    "NnstegoError",
    "NonFiniteLoss",
    "NoStegoHeader",
    "NotPinned",
    "OffsetOverlap",
    "ParamStats",
    "PayloadTooLarge",
    "PIN_BYTES",
    "PIN_LARGE_NEG",
    "PIN_LARGE_POS",
    "PIN_SMALL_NEG",
    "PIN_SMALL_POS",
    "ShapeMismatch",
    "SignRule",
    "StegoHeader",
    "TensorDetection",
    "TensorModel",
    "TensorSpec",
    "TrainingError",
    "TruncatedData",
    "UnsupportedVersion",
    "capacity",
    "datasets",
    "decode_triplet",
    "decode_triplets",
    "detect",
    "mlp",
    "sweep",
    "embed_fast_substitution",
    "embed_lsb",
    "encode_triplet",
    "encode_triplets",
    "extract_fast_substitution",
    "extract_lsb",
    "layer_view",
    "load",
    "parse",
    "pinned_interval",
    "sanitize",
    "save",
    "serialize",
    "stats",
    "__version__",
]
