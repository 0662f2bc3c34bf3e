#!/usr/bin/env python3
"""Benchmark the compiled bit-twiddling kernels against the numpy fallback.

Runs every kernel on the same random inputs with both backends, checks the
outputs agree, and prints best-of-N wall times with the speedup ratio.

    python3 benchmarks/bench_kernels.py [--words N] [--repeats R] [--bits K]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from nnstego._kernels import _pykernels

try:
    from nnstego._kernels import _cykernels
except ImportError:
    _cykernels = None


def best_of(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--words", type=int, default=4_000_000,
                        help="number of 32-bit words per input (default 4M)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats, best one reported (default 5)")
    parser.add_argument("--bits", type=int, default=8,
                        help="k for the low-bit kernels (default 8)")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    n, k = args.words, args.bits
    words = rng.integers(0, 2**32, size=n, dtype=np.uint32)
    data = rng.integers(0, 256, size=3 * n, dtype=np.uint8)
    pins = rng.choice(np.array([0x3C, 0xBC, 0x38, 0xB8], dtype=np.uint8), size=n)
    bits = rng.integers(0, 2, size=n * k, dtype=np.uint8)
    rand = rng.integers(0, 2**32, size=n, dtype=np.uint32)

    cases = [
        ("pack_triplets", lambda m: m.pack_triplets(data, pins)),
        ("unpack_triplets", lambda m: m.unpack_triplets(words)),
        (f"embed_low_bits k={k}", lambda m: m.embed_low_bits(words, bits, k)),
        (f"extract_low_bits k={k}", lambda m: m.extract_low_bits(words, k)),
        ("leading_byte_histogram", lambda m: m.leading_byte_histogram(words)),
        ("trailing_bytes_histogram", lambda m: m.trailing_bytes_histogram(words)),
        (f"randomize_low_bits k={k}", lambda m: m.randomize_low_bits(words, rand, k)),
    ]

    print(f"{n:,} words per input, best of {args.repeats} runs")
    if _cykernels is None:
        print("compiled backend not built; timing the numpy fallback only\n")
        print(f"{'kernel':<26} {'python':>10}")
        for name, call in cases:
            py = best_of(lambda: call(_pykernels), args.repeats)
            print(f"{name:<26} {py * 1e3:>8.1f} ms")
        return

    print()
    print(f"{'kernel':<26} {'compiled':>10} {'python':>10} {'speedup':>9}")
    for name, call in cases:
        if not same(call(_cykernels), call(_pykernels)):
            raise SystemExit(f"backend outputs differ for {name}")
        cy = best_of(lambda: call(_cykernels), args.repeats)
        py = best_of(lambda: call(_pykernels), args.repeats)
        print(f"{name:<26} {cy * 1e3:>8.1f} ms {py * 1e3:>8.1f} ms {py / cy:>8.1f}x")


if __name__ == "__main__":
    main()
