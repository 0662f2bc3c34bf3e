"""Hot-loop kernels with a compiled core and a numpy fallback.

The Cython extension is picked at import time when present; set
NNSTEGO_PURE_PYTHON=1 to force the numpy implementation. ``BACKEND``
reports which one is active. Both are bit-for-bit equivalent.
"""

import os

from . import _pykernels

_impl = _pykernels
BACKEND = "python"

if not os.environ.get("NNSTEGO_PURE_PYTHON"):
    try:
        from . import _cykernels

        _impl = _cykernels
        BACKEND = "compiled"
    except ImportError:
        pass

pack_triplets = _impl.pack_triplets
unpack_triplets = _impl.unpack_triplets
embed_low_bits = _impl.embed_low_bits
extract_low_bits = _impl.extract_low_bits
leading_byte_histogram = _impl.leading_byte_histogram
trailing_bytes_histogram = _impl.trailing_bytes_histogram
randomize_low_bits = _impl.randomize_low_bits

__all__ = [
    "BACKEND",
    "pack_triplets",
    "unpack_triplets",
    "embed_low_bits",
    "extract_low_bits",
    "leading_byte_histogram",
    "trailing_bytes_histogram",
    "randomize_low_bits",
]
