# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled pointwise kernels: elementary symmetric polynomials, cone-margin
minima over index subsets, and 2x2 Hermitian eigenvalues.

Mirrors ``_fallback.py`` exactly; n <= 4 throughout, so stack-local loops beat
vectorized temporaries.
"""

from libc.math cimport sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()


def sigma_all(vals):
    cdef const double[:, ::1] v = np.ascontiguousarray(vals, dtype=np.float64)
    cdef Py_ssize_t m = v.shape[0], n = v.shape[1]
    out_arr = np.zeros((m, n + 1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double x
    for i in range(m):
        out[i, 0] = 1.0
        for j in range(n):
            x = v[i, j]
            for k in range(j + 1, 0, -1):
                out[i, k] += x * out[i, k - 1]
    return out_arr


def sigma_batch(vals, int k):
    return sigma_all(vals)[:, k]


def subset_margins(vals, subsets, coeffs):
    cdef const double[:, ::1] v = np.ascontiguousarray(vals, dtype=np.float64)
    cdef const cnp.int64_t[:, ::1] sub = np.ascontiguousarray(subsets, dtype=np.int64)
    cdef const double[::1] c = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef Py_ssize_t m = v.shape[0], ns = sub.shape[0], arity = sub.shape[1]
    cdef Py_ssize_t i, s, j, k
    cdef double e[5]
    cdef double x, val, best
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(m):
        best = 0.0
        for s in range(ns):
            for k in range(arity + 1):
                e[k] = 0.0
            e[0] = 1.0
            for j in range(arity):
                x = v[i, sub[s, j]]
                for k in range(j + 1, 0, -1):
                    e[k] += x * e[k - 1]
            val = 0.0
            for k in range(arity + 1):
                # coeffs listed highest-order first: c[0] multiplies sigma_arity
                val += c[arity - k] * e[k]
            if s == 0 or val < best:
                best = val
        out[i] = best
    return out_arr


def eigh2_batch(h11, h22, re12, im12):
    shape = np.shape(h11)
    a_arr = np.ascontiguousarray(np.asarray(h11, dtype=np.float64).ravel())
    b_arr = np.ascontiguousarray(np.asarray(h22, dtype=np.float64).ravel())
    p_arr = np.ascontiguousarray(np.asarray(re12, dtype=np.float64).ravel())
    q_arr = np.ascontiguousarray(np.asarray(im12, dtype=np.float64).ravel())
    cdef const double[::1] a = a_arr, b = b_arr, p = p_arr, q = q_arr
    cdef Py_ssize_t m = a.shape[0], i
    lo_arr = np.empty(m, dtype=np.float64)
    hi_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] lo = lo_arr, hi = hi_arr
    cdef double mean, rad
    for i in range(m):
        mean = 0.5 * (a[i] + b[i])
        rad = sqrt(0.25 * (a[i] - b[i]) * (a[i] - b[i]) + p[i] * p[i] + q[i] * q[i])
        lo[i] = mean - rad
        hi[i] = mean + rad
    return lo_arr.reshape(shape), hi_arr.reshape(shape)
