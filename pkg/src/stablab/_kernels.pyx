# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled round-loop kernels. Semantics mirror ``stablab._fallback``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs
from libc.stdlib cimport malloc, free
from libc.string cimport memmove

cnp.import_array()


def hedge_expected_losses(table, etas):
    cdef double[:, ::1] tab = np.ascontiguousarray(table, dtype=np.float64)
    cdef double[::1] eta_v = np.ascontiguousarray(etas, dtype=np.float64)
    cdef Py_ssize_t m = tab.shape[0], d = tab.shape[1], t, k
    cdef double eta, cmin, total, acc
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] out_v = out
    cum_arr = np.zeros(d, dtype=np.float64)
    w_arr = np.zeros(d, dtype=np.float64)
    cdef double[::1] cum = cum_arr
    cdef double[::1] w = w_arr
    for t in range(m):
        eta = eta_v[t]
        cmin = cum[0]
        for k in range(1, d):
            if cum[k] < cmin:
                cmin = cum[k]
        total = 0.0
        for k in range(d):
            w[k] = exp(-eta * (cum[k] - cmin))
            total += w[k]
        acc = 0.0
        for k in range(d):
            acc += w[k] * tab[t, k]
        out_v[t] = acc / total
        for k in range(d):
            cum[k] += tab[t, k]
    return out


def interval_rerm_tracking(Py_ssize_t m, lambdas):
    cdef double[::1] lam = np.ascontiguousarray(lambdas, dtype=np.float64)
    if lam.shape[0] < m + 1:
        raise ValueError("need lambda_0..lambda_m")
    losses = np.empty(m, dtype=np.float64)
    cdef double[::1] lv = losses
    cdef Py_ssize_t i, ones = 0
    cdef double lam_sum = lam[0], n
    for i in range(m):
        n = <double>i
        if 2.0 * ones > n + lam_sum:
            lv[i] = 1.0
        elif 2.0 * ones < n - lam_sum:
            raise ValueError("unreachable state")
        else:
            lv[i] = 0.5
            ones += 1
        lam_sum += lam[i + 1]
    return losses, ones


cdef inline double _clip(double h, double lo, double hi) nogil:
    if h < lo:
        return lo
    if h > hi:
        return hi
    return h


cdef double _argmin_skip(double* z, Py_ssize_t n_full, Py_ssize_t skip,
                         double lam, double center) nogil:
    # Same search as _fallback._abs_reg_argmin_sorted on z with index `skip`
    # removed (skip = -1 keeps every point).
    cdef Py_ssize_t n = n_full - (1 if skip >= 0 else 0)
    cdef Py_ssize_t lo = 0, hi = n, mid, c
    cdef double h, zc
    while lo < hi:
        mid = (lo + hi) // 2
        zc = z[mid + 1] if (skip >= 0 and mid >= skip) else z[mid]
        if center + (n - 2 * mid) / (2.0 * lam) <= zc:
            hi = mid
        else:
            lo = mid + 1
    c = lo
    h = center + (n - 2 * c) / (2.0 * lam)
    if c > 0:
        zc = z[c] if (skip >= 0 and c - 1 >= skip) else z[c - 1]
        if zc > h:
            h = zc
    return h


def abs_reg_argmin(z, double lam, double center, double lo, double hi):
    cdef double[::1] zs = np.sort(np.asarray(z, dtype=np.float64))
    cdef Py_ssize_t n = zs.shape[0]
    cdef double h
    if n == 0:
        h = center
    else:
        h = _argmin_skip(&zs[0], n, -1, lam, center)
    return _clip(h, lo, hi)


def abs_reg_loo(z, double lam, double center, double lo, double hi):
    zarr = np.asarray(z, dtype=np.float64)
    cdef double[::1] zs = np.sort(zarr)
    cdef double[::1] zv = np.ascontiguousarray(zarr)
    cdef Py_ssize_t n = zs.shape[0], i, r, a, b, mid
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double v
    for i in range(n):
        v = zv[i]
        # bisect_right(zs, v) - 1
        a = 0
        b = n
        while a < b:
            mid = (a + b) // 2
            if v < zs[mid]:
                b = mid
            else:
                a = mid + 1
        r = a - 1
        ov[i] = _clip(_argmin_skip(&zs[0], n, r, lam, center), lo, hi)
    return out


def abs_prefix_hindsight(z, double lo, double hi):
    cdef double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t m = zv.shape[0], t, j, pos, a, b, mid
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double* buf = <double*>malloc((m if m > 0 else 1) * sizeof(double))
    cdef double v, h, acc
    if buf == NULL:
        raise MemoryError()
    try:
        for t in range(m):
            v = zv[t]
            a = 0
            b = t
            while a < b:
                mid = (a + b) // 2
                if v < buf[mid]:
                    b = mid
                else:
                    a = mid + 1
            pos = a
            memmove(&buf[pos + 1], &buf[pos], (t - pos) * sizeof(double))
            buf[pos] = v
            h = _clip(buf[t // 2], lo, hi)
            acc = 0.0
            for j in range(t + 1):
                acc += fabs(buf[j] - h)
            ov[t] = acc
    finally:
        free(buf)
    return out
