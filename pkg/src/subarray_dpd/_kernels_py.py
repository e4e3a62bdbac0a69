"""Pure numpy implementation of the hot kernels.

Both functions mirror the compiled versions in ``_kernels_ext.pyx`` and are
used whenever the extension is unavailable (or ``SUBARRAY_DPD_PURE_PYTHON``
is set).
"""

import numpy as np


def _snl_stack(x, orders):
    """Rows |x|^(p-1) x for each odd ``p`` in ``orders`` (ascending)."""
    a2 = x.real * x.real + x.imag * x.imag
    out = np.empty((len(orders), x.shape[0]), dtype=np.complex128)
    g = np.ones(x.shape[0])
    power = 0
    for k, p in enumerate(orders):
        while power < (p - 1) // 2:
            g = g * a2
            power += 1
        out[k] = g * x
    return out


def ph_eval(x, orders, taps):
    """y(n) = sum_k sum_l taps[k, l] * |x(n-l)|^(orders[k]-1) x(n-l).

    History before the first sample is zero.
    """
    x = np.ascontiguousarray(x, dtype=np.complex128)
    taps = np.ascontiguousarray(taps, dtype=np.complex128)
    n = x.shape[0]
    basis = _snl_stack(x, orders)
    y = np.zeros(n, dtype=np.complex128)
    for k in range(taps.shape[0]):
        for lag in range(min(taps.shape[1], n)):
            c = taps[k, lag]
            if c != 0:
                y[lag:] += c * basis[k, : n - lag]
    return y


def snl_basis(x, orders, memory, start, length):
    """Basis matrix with one column per (order, lag) pair.

    Column order is order-major: all lags of ``orders[0]`` first. Row ``r``
    corresponds to sample ``start + r``; samples before index 0 are zero.
    """
    x = np.ascontiguousarray(x, dtype=np.complex128)
    max_lag = max(memory)
    lo = max(start - max_lag, 0)
    seg = x[lo : start + length]
    pad = max_lag - (start - lo)
    stack = _snl_stack(seg, orders)
    if pad:
        stack = np.concatenate([np.zeros((len(orders), pad), dtype=np.complex128), stack], axis=1)
    ncols = sum(m + 1 for m in memory)
    out = np.empty((length, ncols), dtype=np.complex128)
    col = 0
    for k, m in enumerate(memory):
        for lag in range(m + 1):
            out[:, col] = stack[k, max_lag - lag : max_lag - lag + length]
            col += 1
    return out
