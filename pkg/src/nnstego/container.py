"""Binary tensor-container format: bit-exact parse and serialize.

File layout:

    [8 bytes]  little-endian unsigned header length N
    [N bytes]  UTF-8 JSON header
    [rest]     data region, raw little-endian float32 words

The header is a single JSON object whose keys are tensor names plus an
optional "__metadata__" string-to-string map. Each tensor entry has exactly
the keys dtype ("F32" only), shape (array of non-negative integers) and
data_offsets (two integers relative to the data region start). Tensor
regions must be contiguous, non-overlapping and ascending, covering the
whole data region.

Serialization is canonical: tensor names sorted, minimal JSON separators,
data packed in sorted-name order from offset 0. parse and serialize are
mutually inverse bit-for-bit on canonical files.

Parsed models are immutable; mutation goes through ``with_tensor_data`` or
a :class:`LayerView` (copy-on-write).
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    MalformedHeader,
    MissingTensor,
    OffsetOverlap,
    ShapeMismatch,
    TruncatedData,
)

DTYPE_F32 = "F32"
METADATA_KEY = "__metadata__"
_F32_BYTES = 4


@dataclass(frozen=True)
class TensorSpec:
    name: str
    dtype: str
    shape: tuple[int, ...]
    data_offsets: tuple[int, int]

    @property
    def numel(self) -> int:
        return math.prod(self.shape)

    @property
    def nbytes(self) -> int:
        return self.data_offsets[1] - self.data_offsets[0]


class TensorModel:
    """Named collection of float32 tensors plus a string metadata map."""

    def __init__(self, specs: tuple[TensorSpec, ...], data: bytes, metadata: dict[str, str]):
        self._specs = {s.name: s for s in specs}
        self._data = data
        self._metadata = dict(metadata)

    @classmethod
    def from_arrays(cls, tensors: dict[str, np.ndarray], metadata: dict[str, str] | None = None) -> "TensorModel":
        """Build a model from name->float32 array, in canonical order."""
        specs = []
        chunks = []
        offset = 0
        for name in sorted(tensors):
            arr = tensors[name]
            if arr.dtype != np.float32:
                raise ValueError(f"tensor {name!r} must be float32, got {arr.dtype}")
            raw = np.ascontiguousarray(arr, dtype="<f4").tobytes()
            specs.append(TensorSpec(name, DTYPE_F32, tuple(int(d) for d in arr.shape), (offset, offset + len(raw))))
            chunks.append(raw)
            offset += len(raw)
        return cls(tuple(specs), b"".join(chunks), metadata or {})

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._specs)

    @property
    def metadata(self) -> dict[str, str]:
        return dict(self._metadata)

    def spec(self, name: str) -> TensorSpec:
        try:
            return self._specs[name]
        except KeyError:
            raise MissingTensor(f"no tensor named {name!r}") from None

    def _raw(self, name: str) -> memoryview:
        spec = self.spec(name)
        start, end = spec.data_offsets
        return memoryview(self._data)[start:end]

    def tensor(self, name: str) -> np.ndarray:
        """Read-only float32 view of the tensor's raw data."""
        return np.frombuffer(self._raw(name), dtype="<f4").reshape(self.spec(name).shape)

    def tensor_words(self, name: str) -> np.ndarray:
        """Read-only view of the same bytes as logical 32-bit words."""
        return np.frombuffer(self._raw(name), dtype="<u4").reshape(self.spec(name).shape)

    def with_tensor_data(self, name: str, arr: np.ndarray) -> "TensorModel":
        """New model with one tensor's data replaced (shape must match)."""
        spec = self.spec(name)
        if tuple(arr.shape) != spec.shape:
            raise ShapeMismatch(f"replacement for {name!r} has shape {tuple(arr.shape)}, expected {spec.shape}")
        if arr.dtype != np.float32:
            raise ValueError(f"replacement for {name!r} must be float32, got {arr.dtype}")
        raw = np.ascontiguousarray(arr, dtype="<f4").tobytes()
        start, end = spec.data_offsets
        data = b"".join([self._data[:start], raw, self._data[end:]])
        return TensorModel(tuple(self._specs.values()), data, self._metadata)

    def __eq__(self, other: object) -> bool:
        """Same tensors (name, dtype, shape, bytes) and metadata; internal
        name order is presentation, not content."""
        if not isinstance(other, TensorModel):
            return NotImplemented
        if self._metadata != other._metadata or sorted(self.names) != sorted(other.names):
            return False
        for name in self.names:
            a, b = self.spec(name), other.spec(name)
            if a.shape != b.shape or a.dtype != b.dtype or self._raw(name) != other._raw(name):
                return False
        return True

    def __repr__(self) -> str:
        return f"TensorModel({len(self._specs)} tensors, {len(self._data)} data bytes)"


def _parse_header(raw: bytes) -> tuple[list[TensorSpec], dict[str, str]]:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise MalformedHeader(f"header is not valid UTF-8: {e}") from None

    def reject_duplicates(pairs):
        keys = [k for k, _ in pairs]
        if len(keys) != len(set(keys)):
            raise MalformedHeader("duplicate keys in header")
        return dict(pairs)

    try:
        obj = json.loads(text, object_pairs_hook=reject_duplicates)
    except json.JSONDecodeError as e:
        raise MalformedHeader(f"header is not valid JSON: {e}") from None
    if not isinstance(obj, dict):
        raise MalformedHeader("header must be a JSON object")

    metadata: dict[str, str] = {}
    specs = []
    for name, entry in obj.items():
        if name == METADATA_KEY:
            if not isinstance(entry, dict) or not all(
                isinstance(k, str) and isinstance(v, str) for k, v in entry.items()
            ):
                raise MalformedHeader("__metadata__ must map strings to strings")
            metadata = dict(entry)
            continue
        if not name:
            raise MalformedHeader("tensor name must be non-empty")
        if not isinstance(entry, dict) or set(entry) != {"dtype", "shape", "data_offsets"}:
            raise MalformedHeader(f"tensor {name!r} entry must have exactly dtype/shape/data_offsets")
        if entry["dtype"] != DTYPE_F32:
            raise MalformedHeader(f"tensor {name!r} has unsupported dtype {entry['dtype']!r} (only F32)")
        shape = entry["shape"]
        if not isinstance(shape, list) or not all(type(d) is int and d >= 0 for d in shape):
            raise MalformedHeader(f"tensor {name!r} shape must be a list of non-negative integers")
        offsets = entry["data_offsets"]
        if not isinstance(offsets, list) or len(offsets) != 2 or not all(type(o) is int for o in offsets):
            raise MalformedHeader(f"tensor {name!r} data_offsets must be two integers")
        start, end = offsets
        if not 0 <= start <= end:
            raise MalformedHeader(f"tensor {name!r} has invalid offsets [{start}, {end}]")
        if end - start != _F32_BYTES * math.prod(shape):
            raise MalformedHeader(
                f"tensor {name!r} occupies {end - start} bytes but shape {shape} needs {_F32_BYTES * math.prod(shape)}"
            )
        specs.append(TensorSpec(name, DTYPE_F32, tuple(shape), (start, end)))
    return specs, metadata


def parse(blob: bytes) -> TensorModel:
    """Parse a container file; raw tensor data is preserved exactly."""
    if len(blob) < 8:
        raise MalformedHeader(f"file too short for length prefix ({len(blob)} bytes)")
    header_len = int.from_bytes(blob[:8], "little")
    if 8 + header_len > len(blob):
        raise MalformedHeader(f"header length {header_len} exceeds file size {len(blob)}")
    specs, metadata = _parse_header(blob[8 : 8 + header_len])
    data = blob[8 + header_len :]

    cursor = 0
    for spec in specs:
        start, end = spec.data_offsets
        if start < cursor:
            raise OffsetOverlap(f"tensor {spec.name!r} starts at {start}, before previous end {cursor}")
        if start > cursor:
            raise MalformedHeader(f"gap of {start - cursor} bytes before tensor {spec.name!r}")
        if end > len(data):
            raise TruncatedData(f"tensor {spec.name!r} ends at {end} but data region has {len(data)} bytes")
        cursor = end
    if cursor != len(data):
        raise MalformedHeader(f"{len(data) - cursor} unclaimed bytes at end of data region")
    return TensorModel(tuple(specs), data, metadata)


def serialize(model: TensorModel) -> bytes:
    """Canonical byte form of a model (deterministic for equal models)."""
    entries: dict[str, object] = {}
    chunks = []
    offset = 0
    for name in sorted(model.names):
        spec = model.spec(name)
        raw = bytes(model._raw(name))
        entries[name] = {
            "dtype": spec.dtype,
            "shape": list(spec.shape),
            "data_offsets": [offset, offset + len(raw)],
        }
        chunks.append(raw)
        offset += len(raw)
    if model.metadata:
        entries[METADATA_KEY] = model.metadata
    header = json.dumps(entries, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    return len(header).to_bytes(8, "little") + header + b"".join(chunks)


def load(path: str | Path) -> TensorModel:
    return parse(Path(path).read_bytes())


def save(model: TensorModel, path: str | Path) -> None:
    """Serialize to ``path`` atomically (temp file + rename)."""
    write_bytes_atomic(path, serialize(model))


def write_bytes_atomic(path: str | Path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class LayerView:
    """Copy-on-write view of one dense layer: weight [m, n] + bias [m].

    Neuron i is weight row i plus bias[i]. ``weight`` and ``bias`` are
    writable copies; ``commit`` writes them back into a new model.
    """

    def __init__(self, model: TensorModel, layer_name: str):
        self._model = model
        self.layer_name = layer_name
        self.weight_name = f"{layer_name}.weight"
        self.bias_name = f"{layer_name}.bias"
        w_spec = model.spec(self.weight_name)
        b_spec = model.spec(self.bias_name)
        if len(w_spec.shape) != 2:
            raise ShapeMismatch(f"{self.weight_name!r} has rank {len(w_spec.shape)}, expected a rank-2 weight matrix")
        if len(b_spec.shape) != 1 or b_spec.shape[0] != w_spec.shape[0]:
            raise ShapeMismatch(
                f"{self.bias_name!r} has shape {b_spec.shape}, expected ({w_spec.shape[0]},) to match weight rows"
            )
        self.weight = model.tensor(self.weight_name).copy()
        self.bias = model.tensor(self.bias_name).copy()

    @property
    def m(self) -> int:
        return self.weight.shape[0]

    @property
    def n(self) -> int:
        return self.weight.shape[1]

    def commit(self) -> TensorModel:
        out = self._model.with_tensor_data(self.weight_name, self.weight)
        return out.with_tensor_data(self.bias_name, self.bias)


def layer_view(model: TensorModel, layer_name: str) -> LayerView:
    return LayerView(model, layer_name)
