# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernel: joint-type counting plus bound test per codebook row.

Must stay semantically identical to _kernels_py.typical_mask.
"""

import numpy as np

cimport numpy as cnp


def typical_mask(
    const cnp.int64_t[:, :] codebook,
    const cnp.int64_t[:] y,
    int q,
    int y_size,
    const cnp.float64_t[:, :] lo,
    const cnp.float64_t[:, :] hi,
):
    cdef Py_ssize_t rows = codebook.shape[0]
    cdef Py_ssize_t n = codebook.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.zeros(rows, dtype=np.uint8)
    cdef cnp.uint8_t[:] out_v = out
    cdef cnp.ndarray[cnp.int64_t, ndim=2] counts = np.zeros((q, y_size), dtype=np.int64)
    cdef cnp.int64_t[:, :] c = counts
    cdef Py_ssize_t r, t, z, yv
    cdef cnp.int64_t cc
    cdef bint ok
    for r in range(rows):
        for z in range(q):
            for yv in range(y_size):
                c[z, yv] = 0
        for t in range(n):
            c[codebook[r, t], y[t]] += 1
        ok = True
        for z in range(q):
            if not ok:
                break
            for yv in range(y_size):
                cc = c[z, yv]
                if cc < lo[z, yv] or cc > hi[z, yv]:
                    ok = False
                    break
        out_v[r] = 1 if ok else 0
    return out.astype(bool)
