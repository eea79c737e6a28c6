"""Dense f64 layer primitives with hand-written backward passes.

Every forward here is a plain function over numpy arrays; the backward
companions take whatever intermediate state the forward produced. No
autodiff graph is built. Layer inputs are validated for shape and
finiteness at the public boundary; NaN or Inf raises DegenerateInput.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import errors
from .. import _kernels as kernels


def _as_f64(name, arr, ndim):
    out = np.asarray(arr, dtype=np.float64)
    if out.ndim != ndim:
        raise errors.ShapeMismatch(f"{name} must be {ndim}-d, got {out.ndim}-d")
    return out


def _require_finite(name, arr):
    if not np.isfinite(arr).all():
        raise errors.DegenerateInput(f"non-finite values in {name}")


# --- convolution ---------------------------------------------------------------------

def conv1d(x, weights, bias, padding=1):
    """Cross-correlate (batch, C_in, T) with (C_out, C_in, 3), zero padded.

    The kernel width is fixed at 3 with padding 1 so the time axis length
    is preserved. The heavy lifting happens in the compiled kernel when it
    is available.
    """
    x = _as_f64("input", x, 3)
    w = _as_f64("weights", weights, 3)
    b = _as_f64("bias", bias, 1)
    if w.shape[2] != 3 or padding != 1:
        raise errors.ShapeMismatch("kernel width must be 3 with padding 1")
    if w.shape[1] != x.shape[1]:
        raise errors.ShapeMismatch(
            f"weights expect {w.shape[1]} input channels, input has {x.shape[1]}")
    if b.shape[0] != w.shape[0]:
        raise errors.ShapeMismatch("bias length must equal output channels")
    if x.shape[2] < 1:
        raise errors.ShapeMismatch("time axis must be non-empty")
    _require_finite("input", x)
    return kernels.conv1d_forward(x, w, b)


def conv1d_backward(x, weights, grad_out):
    """Gradients of conv1d w.r.t. input, weights and bias."""
    return kernels.conv1d_backward(x, weights, grad_out)


# --- batch normalization -------------------------------------------------------------------

@dataclass
class BnParams:
    """Per-channel affine batch normalization state.

    Running statistics use an exponential moving average with momentum 0.1
    and population (biased) batch variance, in training mode only.
    """

    gamma: np.ndarray
    beta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray
    eps: float = 1e-5
    momentum: float = 0.1

    def __post_init__(self):
        c = np.asarray(self.gamma, dtype=np.float64).shape
        for name in ("gamma", "beta", "running_mean", "running_var"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.ndim != 1 or arr.shape != c:
                raise errors.ShapeMismatch(f"{name} must be 1-d of {c[0]} channels")
            setattr(self, name, arr)
        if not 0.0 < self.eps:
            raise errors.InvalidParams("eps must be positive")

    @property
    def channels(self):
        return self.gamma.shape[0]


def bn_init(channels):
    return BnParams(np.ones(channels), np.zeros(channels),
                    np.zeros(channels), np.ones(channels))


def batchnorm1d(x, params, mode):
    """Normalize (batch, C, T) per channel; train mode updates running stats."""
    out, _ = _batchnorm_forward(x, params, mode)
    return out


def _batchnorm_forward(x, params, mode):
    x = _as_f64("input", x, 3)
    if x.shape[1] != params.channels:
        raise errors.ShapeMismatch(
            f"expected {params.channels} channels, got {x.shape[1]}")
    _require_finite("input", x)
    if mode == "eval":
        inv = 1.0 / np.sqrt(params.running_var + params.eps)
        xhat = (x - params.running_mean[None, :, None]) * inv[None, :, None]
        return params.gamma[None, :, None] * xhat + params.beta[None, :, None], None
    if mode != "train":
        raise errors.ConfigError(f"unknown batchnorm mode {mode!r}")

    batch, _, t = x.shape
    m = batch * t
    if m < 2:
        raise errors.DegenerateBatch("training batchnorm needs >= 2 values per channel")
    mean = x.mean(axis=(0, 2))
    var = x.var(axis=(0, 2))                     # population variance
    inv = 1.0 / np.sqrt(var + params.eps)
    centered = x - mean[None, :, None]
    xhat = centered * inv[None, :, None]
    out = params.gamma[None, :, None] * xhat + params.beta[None, :, None]

    mom = params.momentum
    params.running_mean = (1.0 - mom) * params.running_mean + mom * mean
    params.running_var = (1.0 - mom) * params.running_var + mom * var
    cache = (params.gamma, centered, inv, m)
    return out, cache


def _batchnorm_backward(cache, grad_out):
    gamma, centered, inv, m = cache
    xhat = centered * inv[None, :, None]
    ggamma = np.sum(grad_out * xhat, axis=(0, 2))
    gbeta = np.sum(grad_out, axis=(0, 2))

    gxhat = grad_out * gamma[None, :, None]
    gvar = np.sum(gxhat * centered, axis=(0, 2)) * (-0.5) * inv ** 3
    gmean = (-np.sum(gxhat, axis=(0, 2)) * inv
             + gvar * (-2.0 / m) * np.sum(centered, axis=(0, 2)))
    gx = (gxhat * inv[None, :, None]
          + (gvar[None, :, None] * 2.0 / m) * centered
          + gmean[None, :, None] / m)
    return gx, ggamma, gbeta


# --- small pieces ------------------------------------------------------------------

def relu(x):
    return np.maximum(x, 0.0)


def _relu_backward(x, grad_out):
    return np.where(x > 0.0, grad_out, 0.0)


def adaptive_avg_pool_to_1(x):
    """Mean over the time axis of (batch, C, T), keeping a length-1 axis."""
    x = _as_f64("input", x, 3)
    if x.shape[2] < 1:
        raise errors.ShapeMismatch("time axis must be non-empty")
    return x.mean(axis=2, keepdims=True)


def _pool_backward(t, grad_out):
    return np.repeat(grad_out / t, t, axis=2)


def dropout(x, p, mode, seed=0):
    """Inverted dropout: kept values are scaled by 1/(1-p) at train time."""
    x = np.asarray(x, dtype=np.float64)
    if not 0.0 <= p < 1.0:
        raise errors.InvalidP(f"dropout probability must be in [0, 1), got {p}")
    if mode == "eval" or p == 0.0:
        return x
    if mode != "train":
        raise errors.ConfigError(f"unknown dropout mode {mode!r}")
    mask = _dropout_mask(x.shape, p, np.random.default_rng(seed))
    return x * mask


def _dropout_mask(shape, p, rng):
    # pre-scaled keep mask so forward and backward are a single multiply
    return (rng.random(shape) >= p) / (1.0 - p)


# --- losses ----------------------------------------------------------------------

def log_softmax(logits):
    """Row-wise log-softmax of (batch, classes), stabilized by max subtraction."""
    z = _as_f64("logits", logits, 2)
    _require_finite("logits", z)
    shifted = z - z.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax(logits):
    return np.exp(log_softmax(logits))


def _check_targets(targets, classes):
    t = np.asarray(targets)
    if t.ndim != 1:
        raise errors.BadTargetIndex("targets must be a 1-d index array")
    if t.size and (not np.issubdtype(t.dtype, np.integer)
                   or t.min() < 0 or t.max() >= classes):
        raise errors.BadTargetIndex(
            f"targets must be integers in [0, {classes})")
    return t.astype(np.int64)


def cross_entropy(logits, targets):
    """Mean negative log-likelihood of integer class targets."""
    ls = log_softmax(logits)
    t = _check_targets(targets, ls.shape[1])
    if t.shape[0] != ls.shape[0]:
        raise errors.ShapeMismatch("one target per logits row required")
    return float(-ls[np.arange(len(t)), t].mean())


def _cross_entropy_backward(logits, targets):
    """Gradient of cross_entropy w.r.t. the logits: (softmax - onehot) / batch."""
    p = softmax(logits)
    t = _check_targets(targets, p.shape[1])
    p[np.arange(len(t)), t] -= 1.0
    return p / len(t)
