# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the parallel-Hammerstein and basis kernels."""

import numpy as np


cdef void _snl_rows(const double complex[::1] x, const Py_ssize_t[::1] orders,
                    double complex[:, ::1] out, Py_ssize_t offset) noexcept nogil:
    cdef Py_ssize_t n, k, power, target
    cdef Py_ssize_t length = x.shape[0]
    cdef Py_ssize_t korders = orders.shape[0]
    cdef double a2, g
    for n in range(length):
        a2 = x[n].real * x[n].real + x[n].imag * x[n].imag
        g = 1.0
        power = 0
        for k in range(korders):
            target = (orders[k] - 1) // 2
            while power < target:
                g = g * a2
                power += 1
            out[k, n + offset] = g * x[n]


def ph_eval(x, orders, taps):
    cdef const double complex[::1] xv = np.ascontiguousarray(x, dtype=np.complex128)
    cdef const Py_ssize_t[::1] ov = np.ascontiguousarray(orders, dtype=np.intp)
    cdef const double complex[:, ::1] tv = np.ascontiguousarray(taps, dtype=np.complex128)
    cdef Py_ssize_t length = xv.shape[0]
    cdef Py_ssize_t korders = ov.shape[0]
    cdef Py_ssize_t ntaps = tv.shape[1]
    basis = np.empty((korders, length), dtype=np.complex128)
    cdef double complex[:, ::1] bv = basis
    y = np.zeros(length, dtype=np.complex128)
    cdef double complex[::1] yv = y
    cdef Py_ssize_t n, k, lag, top
    cdef double complex acc
    with nogil:
        _snl_rows(xv, ov, bv, 0)
        for n in range(length):
            acc = 0
            top = ntaps if ntaps <= n + 1 else n + 1
            for k in range(korders):
                for lag in range(top):
                    acc = acc + tv[k, lag] * bv[k, n - lag]
            yv[n] = acc
    return y


def snl_basis(x, orders, memory, Py_ssize_t start, Py_ssize_t length):
    cdef const double complex[::1] xv = np.ascontiguousarray(x, dtype=np.complex128)
    cdef const Py_ssize_t[::1] ov = np.ascontiguousarray(orders, dtype=np.intp)
    cdef const Py_ssize_t[::1] mv = np.ascontiguousarray(memory, dtype=np.intp)
    cdef Py_ssize_t korders = ov.shape[0]
    cdef Py_ssize_t max_lag = 0, ncols = 0, k, lag, r, col, lo, pad
    for k in range(korders):
        if mv[k] > max_lag:
            max_lag = mv[k]
        ncols += mv[k] + 1
    lo = start - max_lag
    if lo < 0:
        lo = 0
    pad = max_lag - (start - lo)
    stack = np.zeros((korders, length + max_lag), dtype=np.complex128)
    cdef double complex[:, ::1] sv = stack
    out = np.empty((length, ncols), dtype=np.complex128)
    cdef double complex[:, ::1] outv = out
    with nogil:
        _snl_rows(xv[lo:start + length], ov, sv, pad)
        for r in range(length):
            col = 0
            for k in range(korders):
                for lag in range(mv[k] + 1):
                    outv[r, col] = sv[k, max_lag - lag + r]
                    col += 1
    return out
