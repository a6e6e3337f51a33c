# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: BM25 score accumulation and Ratcliff-Obershelp matching."""

import numpy as np

cimport numpy as cnp

BACKEND = "compiled"


def bm25_accumulate(cnp.float64_t[::1] scores,
                    cnp.int64_t[::1] ordinals,
                    cnp.float64_t[::1] tfs,
                    double idf,
                    double k1,
                    cnp.float64_t[::1] norms):
    cdef Py_ssize_t i, d
    cdef double tf
    cdef double k1p1 = k1 + 1.0
    with nogil:
        for i in range(ordinals.shape[0]):
            d = ordinals[i]
            tf = tfs[i]
            scores[d] += idf * (tf * k1p1) / (tf + norms[d])


def ratcliff_matches(str a, str b):
    cdef cnp.uint32_t[::1] av = np.frombuffer(a.encode("utf-32-le"), dtype=np.uint32).copy() \
        if len(a) else np.empty(0, dtype=np.uint32)
    cdef cnp.uint32_t[::1] bv = np.frombuffer(b.encode("utf-32-le"), dtype=np.uint32).copy() \
        if len(b) else np.empty(0, dtype=np.uint32)
    cdef cnp.int64_t[::1] run = np.zeros(len(b), dtype=np.int64)
    cdef list stack = [(0, len(a), 0, len(b))]
    cdef Py_ssize_t alo, ahi, blo, bhi, size, ai, bj
    cdef long total = 0
    while stack:
        alo, ahi, blo, bhi = stack.pop()
        if alo >= ahi or blo >= bhi:
            continue
        size, ai, bj = _longest_block(av, alo, ahi, bv, blo, bhi, run)
        if size == 0:
            continue
        total += size
        stack.append((alo, ai, blo, bj))
        stack.append((ai + size, ahi, bj + size, bhi))
    return total


cdef tuple _longest_block(cnp.uint32_t[::1] a, Py_ssize_t alo, Py_ssize_t ahi,
                          cnp.uint32_t[::1] b, Py_ssize_t blo, Py_ssize_t bhi,
                          cnp.int64_t[::1] run):
    cdef Py_ssize_t best_size = 0
    cdef Py_ssize_t best_i = alo
    cdef Py_ssize_t best_j = blo
    cdef Py_ssize_t i, j, length
    cdef cnp.int64_t prev, cur
    cdef cnp.uint32_t ch
    with nogil:
        for j in range(blo, bhi):
            run[j] = 0
        for i in range(alo, ahi):
            prev = 0
            ch = a[i]
            for j in range(blo, bhi):
                cur = run[j]
                if ch == b[j]:
                    length = prev + 1
                    run[j] = length
                    if length > best_size:
                        best_size = length
                        best_i = i - length + 1
                        best_j = j - length + 1
                else:
                    run[j] = 0
                prev = cur
    return best_size, best_i, best_j
