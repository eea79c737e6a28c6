"""Numpy implementations of the hot kernels.

Used when the compiled core is missing or ``MTSC_PURE_PYTHON`` is set.
Same contracts as ``_core``: f64 in, f64 out, kernel width fixed at 3,
zero padding of 1 so the time axis is preserved. Windows are flattened
into matrices so the contractions run on BLAS.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _windows(a, width):
    """(B, C, T + pad) -> (B*T, C*width) row-major window matrix."""
    win = sliding_window_view(a, width, axis=2)        # (B, C, T, width)
    b, c, t, _ = win.shape
    return win.transpose(0, 2, 1, 3).reshape(b * t, c * width), b, t


def conv1d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross-correlation of (B, Cin, T) with (Cout, Cin, 3), zero-padded."""
    batch, cin, t = x.shape
    cout = w.shape[0]
    xp = np.zeros((batch, cin, t + 2), dtype=np.float64)
    xp[:, :, 1:t + 1] = x
    mat, _, _ = _windows(xp, 3)
    out = mat @ w.reshape(cout, cin * 3).T + b
    return out.reshape(batch, t, cout).transpose(0, 2, 1).copy()


def conv1d_backward(x: np.ndarray, w: np.ndarray, gy: np.ndarray):
    """Gradients of conv1d_forward w.r.t. input, weights and bias."""
    batch, cin, t = x.shape
    cout = w.shape[0]
    xp = np.zeros((batch, cin, t + 2), dtype=np.float64)
    xp[:, :, 1:t + 1] = x
    mat, _, _ = _windows(xp, 3)

    gy_rows = gy.transpose(0, 2, 1).reshape(batch * t, cout)
    gw = (mat.T @ gy_rows).T.reshape(cout, cin, 3)
    gb = gy_rows.sum(axis=0)

    # input gradient: full correlation of gy with the kernel reversed in k
    gyp = np.zeros((batch, cout, t + 2), dtype=np.float64)
    gyp[:, :, 1:t + 1] = gy
    gmat, _, _ = _windows(gyp, 3)
    rev = w[:, :, ::-1].transpose(0, 2, 1).reshape(cout * 3, cin)
    gx = (gmat @ rev).reshape(batch, t, cin).transpose(0, 2, 1).copy()
    return gx, gw, gb
