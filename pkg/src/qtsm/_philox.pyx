# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython Philox4x32-10 kernel (compiled backend).

Produces output bit-identical to the numpy fallback in ``_philox_py.py``;
see that module for the (seed, path, draw) -> uniform mapping.
"""

import numpy as np

ctypedef unsigned long long u64
ctypedef unsigned int u32

cdef u32 M0 = 0xD2511F53u
cdef u32 M1 = 0xCD9E8D57u
cdef u32 W0 = 0x9E3779B9u
cdef u32 W1 = 0xBB67AE85u

BACKEND = "cython"


cdef inline void philox_block(u32 c0, u32 c1, u32 c2, u32 c3,
                              u32 k0, u32 k1, u32* out) noexcept nogil:
    cdef u64 p0, p1
    cdef u32 t0, t2
    cdef int r
    for r in range(10):
        p0 = (<u64> M0) * c0
        p1 = (<u64> M1) * c2
        t0 = (<u32> (p1 >> 32)) ^ c1 ^ k0
        t2 = (<u32> (p0 >> 32)) ^ c3 ^ k1
        c1 = <u32> p1
        c3 = <u32> p0
        c0 = t0
        c2 = t2
        k0 = k0 + W0
        k1 = k1 + W1
    out[0] = c0
    out[1] = c1
    out[2] = c2
    out[3] = c3


def uniforms(u64 seed, u64 path_start, Py_ssize_t n_paths, Py_ssize_t draws_per_path):
    """Uniform (0, 1) doubles, shape (n_paths, draws_per_path)."""
    result = np.empty((n_paths, draws_per_path), dtype=np.float64)
    cdef double[:, ::1] out = result
    cdef Py_ssize_t p, j, n_blocks
    cdef u64 path, bits, jj
    cdef u32 k0, k1
    cdef u32 words[4]
    cdef double scale = 2.0 ** -53

    k0 = <u32> (seed & 0xFFFFFFFFULL)
    k1 = <u32> (seed >> 32)
    n_blocks = (draws_per_path + 1) // 2

    with nogil:
        for p in range(n_paths):
            path = path_start + <u64> p
            for j in range(n_blocks):
                jj = <u64> j
                philox_block(<u32> (jj & 0xFFFFFFFFULL), <u32> (jj >> 32),
                             <u32> (path & 0xFFFFFFFFULL), <u32> (path >> 32),
                             k0, k1, words)
                bits = ((<u64> words[0]) << 32) | words[1]
                out[p, 2 * j] = ((<double> (bits >> 11)) + 0.5) * scale
                if 2 * j + 1 < draws_per_path:
                    bits = ((<u64> words[2]) << 32) | words[3]
                    out[p, 2 * j + 1] = ((<double> (bits >> 11)) + 0.5) * scale
    return result
