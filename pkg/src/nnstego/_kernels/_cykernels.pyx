# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; semantics match _pykernels exactly (see its docstring)."""

import numpy as np


def pack_triplets(const unsigned char[::1] data, const unsigned char[::1] pins):
    cdef Py_ssize_t n = pins.shape[0]
    if data.shape[0] != 3 * n:
        raise ValueError("data length must be 3 * len(pins)")
    out_arr = np.empty(n, dtype=np.uint32)
    cdef unsigned int[::1] out = out_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            out[i] = (
                (<unsigned int> pins[i] << 24)
                | (<unsigned int> data[3 * i] << 16)
                | (<unsigned int> data[3 * i + 1] << 8)
                | <unsigned int> data[3 * i + 2]
            )
    return out_arr


def unpack_triplets(const unsigned int[::1] words):
    cdef Py_ssize_t n = words.shape[0]
    data_arr = np.empty(3 * n, dtype=np.uint8)
    pins_arr = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] data = data_arr
    cdef unsigned char[::1] pins = pins_arr
    cdef Py_ssize_t i
    cdef unsigned int w
    with nogil:
        for i in range(n):
            w = words[i]
            pins[i] = <unsigned char> (w >> 24)
            data[3 * i] = <unsigned char> (w >> 16)
            data[3 * i + 1] = <unsigned char> (w >> 8)
            data[3 * i + 2] = <unsigned char> w
    return data_arr, pins_arr


def embed_low_bits(const unsigned int[::1] words, const unsigned char[::1] bits, int k):
    cdef Py_ssize_t nbits = bits.shape[0]
    if nbits % k:
        raise ValueError(f"bit count {nbits} not a multiple of k={k}")
    cdef Py_ssize_t nchunks = nbits // k
    cdef Py_ssize_t n = words.shape[0]
    if nchunks > n:
        raise ValueError("more bit chunks than words")
    out_arr = np.empty(n, dtype=np.uint32)
    cdef unsigned int[::1] out = out_arr
    cdef unsigned int mask = (1u << k) - 1u
    cdef unsigned int chunk
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(nchunks):
            chunk = 0
            for j in range(k):
                chunk = (chunk << 1) | bits[i * k + j]
            out[i] = (words[i] & ~mask) | chunk
        for i in range(nchunks, n):
            out[i] = words[i]
    return out_arr


def extract_low_bits(const unsigned int[::1] words, int k):
    cdef Py_ssize_t n = words.shape[0]
    out_arr = np.empty(n * k, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef unsigned int w
    with nogil:
        for i in range(n):
            w = words[i]
            for j in range(k):
                out[i * k + j] = <unsigned char> ((w >> (k - 1 - j)) & 1u)
    return out_arr


def leading_byte_histogram(const unsigned int[::1] words):
    cdef Py_ssize_t n = words.shape[0]
    hist_arr = np.zeros(256, dtype=np.int64)
    cdef long long[::1] hist = hist_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            hist[words[i] >> 24] += 1
    return hist_arr


def trailing_bytes_histogram(const unsigned int[::1] words):
    cdef Py_ssize_t n = words.shape[0]
    hist_arr = np.zeros(256, dtype=np.int64)
    cdef long long[::1] hist = hist_arr
    cdef Py_ssize_t i
    cdef unsigned int w
    with nogil:
        for i in range(n):
            w = words[i]
            hist[(w >> 16) & 0xFFu] += 1
            hist[(w >> 8) & 0xFFu] += 1
            hist[w & 0xFFu] += 1
    return hist_arr


def randomize_low_bits(const unsigned int[::1] words, const unsigned int[::1] rand, int k):
    cdef Py_ssize_t n = words.shape[0]
    if rand.shape[0] != n:
        raise ValueError("rand length must match words")
    out_arr = np.empty(n, dtype=np.uint32)
    cdef unsigned int[::1] out = out_arr
    cdef unsigned int mask = (1u << k) - 1u
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            out[i] = (words[i] & ~mask) | (rand[i] & mask)
    return out_arr
