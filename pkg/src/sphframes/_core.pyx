# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled series kernels: Gegenbauer recurrences and zonal sums.

Semantics match sphframes._purecore exactly (same per-element operation
order, so results agree to the last bit on one platform); see that module
for the reference implementations.  Loops run degree-outer / angle-inner:
the three-term recurrence is serial in the degree, so putting the
independent angle axis innermost lets the C compiler vectorize it.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def gegenbauer_batch(int l, double lam, double[::1] t):
    cdef Py_ssize_t m = t.shape[0]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] c = out_arr
    cdef double[::1] cm1 = np.empty(m, dtype=np.float64)
    cdef Py_ssize_t i
    cdef int j
    cdef double a1, a2, dj, tmp
    if l == 0:
        for i in range(m):
            c[i] = 1.0
        return out_arr
    with nogil:
        for i in range(m):
            cm1[i] = 1.0
            c[i] = 2.0 * lam * t[i]
        for j in range(2, l + 1):
            a1 = 2.0 * (j + lam - 1.0)
            a2 = j + 2.0 * lam - 2.0
            dj = j
            for i in range(m):
                tmp = (a1 * t[i] * c[i] - a2 * cm1[i]) / dj
                cm1[i] = c[i]
                c[i] = tmp
    return out_arr


def zonal_series(double[::1] coef, double lam, double[::1] t):
    cdef Py_ssize_t m = t.shape[0]
    cdef Py_ssize_t n_terms = coef.shape[0]
    out_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] c = np.empty(m, dtype=np.float64)
    cdef double[::1] cm1 = np.empty(m, dtype=np.float64)
    cdef Py_ssize_t i, l
    cdef double a1, a2, dl, cl, tmp
    if n_terms == 0:
        return out_arr
    with nogil:
        cl = coef[0]
        for i in range(m):
            cm1[i] = 1.0
            out[i] = cl
        if n_terms > 1:
            cl = coef[1]
            for i in range(m):
                c[i] = 2.0 * lam * t[i]
                out[i] += cl * c[i]
            for l in range(2, n_terms):
                a1 = 2.0 * (l + lam - 1.0)
                a2 = l + 2.0 * lam - 2.0
                dl = l
                cl = coef[l]
                for i in range(m):
                    tmp = (a1 * t[i] * c[i] - a2 * cm1[i]) / dl
                    cm1[i] = c[i]
                    c[i] = tmp
                    out[i] += cl * tmp
    return out_arr


def zonal_series_dt(double[::1] coef, double lam, double[::1] t):
    """d/dt of zonal_series: sum_{l>=1} coef[l] * 2 lam * C_{l-1}^{lam+1}(t)."""
    cdef Py_ssize_t m = t.shape[0]
    cdef Py_ssize_t n_terms = coef.shape[0]
    out_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] c = np.empty(m, dtype=np.float64)
    cdef double[::1] cm1 = np.empty(m, dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double a1, a2, dj, cj, tmp, mu
    if n_terms <= 1:
        return out_arr
    mu = lam + 1.0
    with nogil:
        cj = coef[1]  # j = 0 term: C_0^{lam+1} = 1
        for i in range(m):
            cm1[i] = 1.0
            out[i] = cj
        if n_terms > 2:
            cj = coef[2]
            for i in range(m):
                c[i] = 2.0 * mu * t[i]
                out[i] += cj * c[i]
            for j in range(2, n_terms - 1):
                a1 = 2.0 * (j + mu - 1.0)
                a2 = j + 2.0 * mu - 2.0
                dj = j
                cj = coef[j + 1]
                for i in range(m):
                    tmp = (a1 * t[i] * c[i] - a2 * cm1[i]) / dj
                    cm1[i] = c[i]
                    c[i] = tmp
                    out[i] += cj * tmp
        for i in range(m):
            out[i] = 2.0 * lam * out[i]
    return out_arr
