# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_ref``."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos

cnp.import_array()


def sample_rows(const double[:, ::1] cum, const cnp.int64_t[:, ::1] outcomes,
                const cnp.int64_t[::1] states, const double[::1] u):
    cdef Py_ssize_t n = states.shape[0]
    cdef Py_ssize_t ncols = cum.shape[1]
    out = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] ov = out
    cdef Py_ssize_t i, lo, hi, mid
    cdef cnp.int64_t s
    cdef double x
    for i in range(n):
        s = states[i]
        x = u[i]
        # Count of cumulative entries <= x, as an upper-bound binary search.
        lo = 0
        hi = ncols
        while lo < hi:
            mid = (lo + hi) >> 1
            if cum[s, mid] <= x:
                lo = mid + 1
            else:
                hi = mid
        if lo > ncols - 1:
            lo = ncols - 1
        ov[i] = outcomes[s, lo]
    return out


def orbit_sums(const double[:, ::1] vectors, const cnp.int64_t[::1] offsets,
               const double[:, ::1] points):
    cdef Py_ssize_t n_weights = offsets.shape[0] - 1
    cdef Py_ssize_t n_points = points.shape[0]
    cdef Py_ssize_t q = points.shape[1]
    out = np.empty((n_weights, n_points))
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t w, g, v, k, a, b
    cdef double acc, dot
    for w in range(n_weights):
        a = offsets[w]
        b = offsets[w + 1]
        for g in range(n_points):
            acc = 0.0
            for v in range(a, b):
                dot = 0.0
                for k in range(q):
                    dot += vectors[v, k] * points[g, k]
                acc += cos(dot)
            ov[w, g] = acc / (b - a)
    return out
