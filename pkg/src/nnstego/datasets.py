"""Datasets for the desk harness: seeded Gaussian blobs, plus an IDX loader.

Blobs are the default: balanced classes, deterministic for a seed, no
downloads. Class centers sit on a sphere of radius ``center_radius`` in
input space with unit-variance noise around each, so the difficulty knob
is the radius-to-noise ratio.

The IDX loader reads the classic big-endian image/label format (magic
``00 00 <dtype> <ndim>`` then dimension sizes then row-major data) for
running the harness on real digit data when such files are on hand.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_IDX_DTYPES = {
    0x08: np.dtype(">u1"),
    0x09: np.dtype(">i1"),
    0x0B: np.dtype(">i2"),
    0x0C: np.dtype(">i4"),
    0x0D: np.dtype(">f4"),
    0x0E: np.dtype(">f8"),
}


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray  # float32 [N, d]
    y: np.ndarray  # int64 [N]

    def __post_init__(self):
        if self.x.ndim != 2 or self.y.ndim != 1 or self.x.shape[0] != self.y.shape[0]:
            raise ValueError(f"inconsistent dataset shapes {self.x.shape} / {self.y.shape}")

    def __len__(self) -> int:
        return self.x.shape[0]


def make_blobs(
    train_size: int = 10_000,
    test_size: int = 2_000,
    dim: int = 64,
    classes: int = 10,
    center_radius: float = 5.0,
    noise: float = 1.0,
    seed: int = 0,
) -> tuple[Dataset, Dataset]:
    """Balanced Gaussian-blob classification sets, train and test."""
    if classes < 2 or dim < 1 or train_size < classes or test_size < classes:
        raise ValueError("need at least 2 classes and one sample per class in each split")
    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(classes, dim))
    centers *= center_radius / np.linalg.norm(centers, axis=1, keepdims=True)

    def split(size: int) -> Dataset:
        y = np.arange(size, dtype=np.int64) % classes
        x = centers[y] + noise * rng.normal(size=(size, dim))
        order = rng.permutation(size)
        return Dataset(x[order].astype(np.float32), y[order])

    return split(train_size), split(test_size)


def load_idx(path: str | Path) -> np.ndarray:
    """Array from one IDX file, native byte order."""
    raw = Path(path).read_bytes()
    if len(raw) < 4:
        raise ValueError(f"{path}: too short for an IDX magic")
    zero, dtype_code, ndim = struct.unpack(">HBB", raw[:4])
    if zero != 0 or dtype_code not in _IDX_DTYPES:
        raise ValueError(f"{path}: bad IDX magic {raw[:4].hex()}")
    header_end = 4 + 4 * ndim
    if len(raw) < header_end:
        raise ValueError(f"{path}: truncated dimension list")
    shape = struct.unpack(f">{ndim}I", raw[4:header_end])
    dtype = _IDX_DTYPES[dtype_code]
    expected = header_end + dtype.itemsize * int(np.prod(shape))
    if len(raw) != expected:
        raise ValueError(f"{path}: {len(raw)} bytes, expected {expected} for shape {shape}")
    data = np.frombuffer(raw, dtype=dtype, offset=header_end).reshape(shape)
    return data.astype(dtype.newbyteorder("="))


def load_idx_dataset(images_path: str | Path, labels_path: str | Path) -> Dataset:
    """Dataset from an IDX image file and its label file; pixel values
    scaled to [0, 1], images flattened."""
    images = load_idx(images_path)
    labels = load_idx(labels_path)
    if labels.ndim != 1 or images.shape[0] != labels.shape[0]:
        raise ValueError(
            f"images {images.shape} and labels {labels.shape} do not describe the same samples"
        )
    x = images.reshape(images.shape[0], -1).astype(np.float32)
    if images.dtype.kind in "iu":
        x /= np.float32(255.0)
    return Dataset(x, labels.astype(np.int64))
