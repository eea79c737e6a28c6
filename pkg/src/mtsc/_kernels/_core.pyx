# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: 1-D convolution forward/backward.

Fixed kernel width 3 with zero padding 1 (time axis preserved), f64 only.
Inner loops run over the contiguous time axis with the edge columns peeled
off, so the hot path is branch-free. The numpy fallback in ``fallback.py``
implements the same contracts.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def conv1d_forward(double[:, :, ::1] x, double[:, :, ::1] w, double[::1] b):
    cdef Py_ssize_t batch = x.shape[0], cin = x.shape[1], t = x.shape[2]
    cdef Py_ssize_t cout = w.shape[0]
    out_arr = np.empty((batch, cout, t), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t n, o, i, j
    cdef double w0, w1, w2
    with nogil:
        for n in range(batch):
            for o in range(cout):
                for j in range(t):
                    out[n, o, j] = b[o]
                for i in range(cin):
                    w0 = w[o, i, 0]
                    w1 = w[o, i, 1]
                    w2 = w[o, i, 2]
                    if t == 1:
                        out[n, o, 0] += w1 * x[n, i, 0]
                        continue
                    out[n, o, 0] += w1 * x[n, i, 0] + w2 * x[n, i, 1]
                    for j in range(1, t - 1):
                        out[n, o, j] += (w0 * x[n, i, j - 1]
                                         + w1 * x[n, i, j]
                                         + w2 * x[n, i, j + 1])
                    out[n, o, t - 1] += (w0 * x[n, i, t - 2]
                                         + w1 * x[n, i, t - 1])
    return out_arr


def conv1d_backward(double[:, :, ::1] x, double[:, :, ::1] w,
                    double[:, :, ::1] gy):
    cdef Py_ssize_t batch = x.shape[0], cin = x.shape[1], t = x.shape[2]
    cdef Py_ssize_t cout = w.shape[0]
    gx_arr = np.zeros((batch, cin, t), dtype=np.float64)
    gw_arr = np.zeros((cout, cin, 3), dtype=np.float64)
    gb_arr = np.zeros(cout, dtype=np.float64)
    cdef double[:, :, ::1] gx = gx_arr
    cdef double[:, :, ::1] gw = gw_arr
    cdef double[::1] gb = gb_arr
    cdef Py_ssize_t n, o, i, j
    cdef double w0, w1, w2, a0, a1, a2, g
    with nogil:
        for n in range(batch):
            for o in range(cout):
                for j in range(t):
                    gb[o] += gy[n, o, j]
                for i in range(cin):
                    w0 = w[o, i, 0]
                    w1 = w[o, i, 1]
                    w2 = w[o, i, 2]
                    a0 = 0.0
                    a1 = 0.0
                    a2 = 0.0
                    if t == 1:
                        g = gy[n, o, 0]
                        gw[o, i, 1] += g * x[n, i, 0]
                        gx[n, i, 0] += g * w1
                        continue
                    # j = 0 and j = t-1 peeled; src = j + k - 1
                    g = gy[n, o, 0]
                    a1 += g * x[n, i, 0]
                    a2 += g * x[n, i, 1]
                    gx[n, i, 0] += g * w1
                    gx[n, i, 1] += g * w2
                    for j in range(1, t - 1):
                        g = gy[n, o, j]
                        a0 += g * x[n, i, j - 1]
                        a1 += g * x[n, i, j]
                        a2 += g * x[n, i, j + 1]
                        gx[n, i, j - 1] += g * w0
                        gx[n, i, j] += g * w1
                        gx[n, i, j + 1] += g * w2
                    g = gy[n, o, t - 1]
                    a0 += g * x[n, i, t - 2]
                    a1 += g * x[n, i, t - 1]
                    gx[n, i, t - 2] += g * w0
                    gx[n, i, t - 1] += g * w1
                    gw[o, i, 0] += a0
                    gw[o, i, 1] += a1
                    gw[o, i, 2] += a2
    return gx_arr, gw_arr, gb_arr
