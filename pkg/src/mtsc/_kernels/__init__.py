"""Kernel backend selection.

Prefers the compiled Cython core; falls back to the numpy implementations
when the extension is absent or ``MTSC_PURE_PYTHON`` is set in the
environment. ``BACKEND`` names the active implementation. The two backends
agree to floating-point round-off; bit-level output is only guaranteed
stable within one backend.
"""

import os

import numpy as np

from . import fallback

if os.environ.get("MTSC_PURE_PYTHON"):
    _impl = fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = fallback
        BACKEND = "python"


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def conv1d_forward(x, w, b):
    return _impl.conv1d_forward(_c(x), _c(w), _c(b))


def conv1d_backward(x, w, gy):
    return _impl.conv1d_backward(_c(x), _c(w), _c(gy))
