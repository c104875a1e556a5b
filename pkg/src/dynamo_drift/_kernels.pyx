# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; mirrors ``_fallback`` bit for bit."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


def window_extrema(Q, Py_ssize_t lam):
    cdef double[:, ::1] q = np.ascontiguousarray(Q, dtype=np.float64)
    cdef Py_ssize_t n = q.shape[0], m = q.shape[1]
    cmax_a = np.empty((n, m))
    cmin_a = np.empty((n, m))
    cdef double[:, ::1] cmax = cmax_a
    cdef double[:, ::1] cmin = cmin_a
    cdef Py_ssize_t j, h, k, lo
    cdef double hi_v, lo_v, v
    for j in range(n):
        lo = j - lam if j > lam else 0
        for h in range(m):
            hi_v = q[lo, h]
            lo_v = hi_v
            for k in range(lo + 1, j + 1):
                v = q[k, h]
                if v > hi_v:
                    hi_v = v
                if v < lo_v:
                    lo_v = v
            cmax[j, h] = hi_v
            cmin[j, h] = lo_v
    return cmax_a, cmin_a


def span_readings(Q, Py_ssize_t lam):
    cmax_a, cmin_a = window_extrema(Q, lam)
    cdef double[:, ::1] cmax = cmax_a
    cdef double[:, ::1] cmin = cmin_a
    cdef Py_ssize_t n = cmax.shape[0], m = cmax.shape[1]
    vol_a = np.empty(n)
    l2_a = np.empty(n)
    dmax_a = np.zeros((n, m))
    dmin_a = np.zeros((n, m))
    dl2_a = np.zeros((n, 2))
    cdef double[::1] vol = vol_a
    cdef double[::1] l2 = l2_a
    cdef double[:, ::1] dmax = dmax_a
    cdef double[:, ::1] dmin = dmin_a
    cdef double[:, ::1] dl2 = dl2_a
    cdef Py_ssize_t j, h
    cdef double p, sq, s, hi, lo, a, b
    for j in range(n):
        p = 1.0
        sq = 0.0
        for h in range(m):
            s = cmax[j, h] - cmin[j, h]
            p = p * s
            sq = sq + s * s
        vol[j] = p
        l2[j] = sqrt(sq)
        if j == 0:
            continue
        hi = 0.0
        lo = 0.0
        for h in range(m):
            a = cmax[j - 1, h] - cmax[j, h]
            b = cmin[j - 1, h] - cmin[j, h]
            dmax[j, h] = a
            dmin[j, h] = b
            hi = hi + a * a
            lo = lo + b * b
        dl2[j, 0] = sqrt(hi)
        dl2[j, 1] = sqrt(lo)
    return vol_a, l2_a, dmax_a, dmin_a, dl2_a


def ks_statistic(a, b):
    cdef double[::1] x = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] y = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n1 = x.shape[0], n2 = y.shape[0], i = 0, k = 0
    cdef double d = 0.0, diff, v
    while i < n1 or k < n2:
        if k >= n2 or (i < n1 and x[i] <= y[k]):
            v = x[i]
        else:
            v = y[k]
        while i < n1 and x[i] <= v:
            i += 1
        while k < n2 and y[k] <= v:
            k += 1
        diff = fabs(<double>i / n1 - <double>k / n2)
        if diff > d:
            d = diff
    return d


def total_variation(x):
    cdef double[::1] v = np.ascontiguousarray(x, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(1, v.shape[0]):
        acc = acc + fabs(v[i] - v[i - 1])
    return acc
