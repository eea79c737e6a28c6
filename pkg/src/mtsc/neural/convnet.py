"""Two-block temporal convolution classifier with manual gradients.

Fixed graph: conv(C -> 64) -> bn -> relu -> conv(64 -> 128) -> bn -> relu
-> mean pool over time -> dropout -> linear(128 -> 3). Kernel width 3 and
padding 1 throughout, so any window length T >= 1 is accepted; T = 1
degenerates to a plain feed-forward net on the feature vector.
"""

from dataclasses import dataclass

import numpy as np

from .. import errors
from ..pipeline import scaler_fit, scaler_transform
from .adam import adam_init, adam_step
from .data import decode_labels, windowed_tensors
from .layers import (
    BnParams,
    _batchnorm_backward,
    _batchnorm_forward,
    _cross_entropy_backward,
    _dropout_mask,
    _pool_backward,
    _relu_backward,
    bn_init,
    conv1d,
    conv1d_backward,
    cross_entropy,
    relu,
)

HIDDEN1 = 64
HIDDEN2 = 128
CLASSES = 3

PARAM_NAMES = ("conv1_w", "conv1_b", "bn1_gamma", "bn1_beta",
               "conv2_w", "conv2_b", "bn2_gamma", "bn2_beta",
               "fc_w", "fc_b")


@dataclass
class ConvTimeNetLite:
    conv1_w: np.ndarray
    conv1_b: np.ndarray
    bn1: BnParams
    conv2_w: np.ndarray
    conv2_b: np.ndarray
    bn2: BnParams
    fc_w: np.ndarray
    fc_b: np.ndarray
    dropout_p: float = 0.5
    mode: str = "train"

    def __post_init__(self):
        for name in ("conv1_w", "conv1_b", "conv2_w", "conv2_b", "fc_w", "fc_b"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        c = self.conv1_w.shape[1] if self.conv1_w.ndim == 3 else -1
        expect = {"conv1_w": (HIDDEN1, c, 3), "conv1_b": (HIDDEN1,),
                  "conv2_w": (HIDDEN2, HIDDEN1, 3), "conv2_b": (HIDDEN2,),
                  "fc_w": (CLASSES, HIDDEN2), "fc_b": (CLASSES,)}
        for name, shape in expect.items():
            if getattr(self, name).shape != shape:
                raise errors.ShapeMismatch(f"{name} must have shape {shape}")
        if self.bn1.channels != HIDDEN1 or self.bn2.channels != HIDDEN2:
            raise errors.ShapeMismatch("batchnorm widths must be 64 and 128")
        if not 0.0 <= self.dropout_p < 1.0:
            raise errors.InvalidP("dropout_p must be in [0, 1)")
        if self.mode not in ("train", "eval"):
            raise errors.ConfigError(f"unknown mode {self.mode!r}")

    @property
    def in_channels(self):
        return self.conv1_w.shape[1]


def _kaiming_uniform(rng, shape, fan_in):
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, shape)


def init_convtimenet(in_channels, seed=0, dropout_p=0.5):
    """Fresh network with Kaiming-uniform conv/fc weights and unit batchnorm."""
    if in_channels < 1:
        raise errors.InvalidParams("need at least one input channel")
    rng = np.random.default_rng([seed, 90])
    fan1, fan2, fan3 = in_channels * 3, HIDDEN1 * 3, HIDDEN2
    return ConvTimeNetLite(
        conv1_w=_kaiming_uniform(rng, (HIDDEN1, in_channels, 3), fan1),
        conv1_b=rng.uniform(-1, 1, HIDDEN1) / np.sqrt(fan1),
        bn1=bn_init(HIDDEN1),
        conv2_w=_kaiming_uniform(rng, (HIDDEN2, HIDDEN1, 3), fan2),
        conv2_b=rng.uniform(-1, 1, HIDDEN2) / np.sqrt(fan2),
        bn2=bn_init(HIDDEN2),
        fc_w=_kaiming_uniform(rng, (CLASSES, HIDDEN2), fan3),
        fc_b=rng.uniform(-1, 1, CLASSES) / np.sqrt(fan3),
        dropout_p=dropout_p,
    )


def net_params(net):
    """Live views of every trainable array, keyed by canonical names."""
    return {"conv1_w": net.conv1_w, "conv1_b": net.conv1_b,
            "bn1_gamma": net.bn1.gamma, "bn1_beta": net.bn1.beta,
            "conv2_w": net.conv2_w, "conv2_b": net.conv2_b,
            "bn2_gamma": net.bn2.gamma, "bn2_beta": net.bn2.beta,
            "fc_w": net.fc_w, "fc_b": net.fc_b}


def _forward(net, x, rng):
    a1 = conv1d(x, net.conv1_w, net.conv1_b)
    b1, bn1_cache = _batchnorm_forward(a1, net.bn1, net.mode)
    r1 = relu(b1)
    a2 = conv1d(r1, net.conv2_w, net.conv2_b)
    b2, bn2_cache = _batchnorm_forward(a2, net.bn2, net.mode)
    r2 = relu(b2)
    t = r2.shape[2]
    flat = r2.mean(axis=2)
    if net.mode == "train" and net.dropout_p > 0.0:
        if rng is None:
            raise errors.ConfigError("training forward with dropout needs an rng")
        mask = _dropout_mask(flat.shape, net.dropout_p, rng)
        dropped = flat * mask
    else:
        mask = None
        dropped = flat
    logits = dropped @ net.fc_w.T + net.fc_b
    cache = (x, bn1_cache, b1, r1, bn2_cache, b2, t, mask, dropped)
    return logits, cache


def _backward(net, cache, grad_logits):
    x, bn1_cache, b1, r1, bn2_cache, b2, t, mask, dropped = cache
    gfc_w = grad_logits.T @ dropped
    gfc_b = grad_logits.sum(axis=0)
    gflat = grad_logits @ net.fc_w
    if mask is not None:
        gflat = gflat * mask
    gr2 = _pool_backward(t, gflat[:, :, None])
    gb2 = _relu_backward(b2, gr2)
    ga2, g2_gamma, g2_beta = _batchnorm_backward(bn2_cache, gb2)
    gr1, gconv2_w, gconv2_b = conv1d_backward(r1, net.conv2_w, ga2)
    gb1 = _relu_backward(b1, gr1)
    ga1, g1_gamma, g1_beta = _batchnorm_backward(bn1_cache, gb1)
    gx, gconv1_w, gconv1_b = conv1d_backward(x, net.conv1_w, ga1)
    grads = {"conv1_w": gconv1_w, "conv1_b": gconv1_b,
             "bn1_gamma": g1_gamma, "bn1_beta": g1_beta,
             "conv2_w": gconv2_w, "conv2_b": gconv2_b,
             "bn2_gamma": g2_gamma, "bn2_beta": g2_beta,
             "fc_w": gfc_w, "fc_b": gfc_b}
    return grads, gx


def convtimenet_forward(net, x, seed=0):
    """Logits (batch, 3) for input (batch, C, T); eval mode is deterministic."""
    rng = np.random.default_rng([seed, 91])
    logits, _ = _forward(net, x, rng)
    return logits


def convtimenet_backward(net, x, targets, seed=0):
    """Gradients of mean cross-entropy for every parameter plus the input.

    Runs its own training-mode forward; the dropout mask, if any, is drawn
    from `seed` so forward and backward see the same mask.
    """
    if net.mode != "train":
        raise errors.ConfigError("backward requires train mode")
    rng = np.random.default_rng([seed, 91])
    logits, cache = _forward(net, x, rng)
    grad_logits = _cross_entropy_backward(logits, targets)
    return _backward(net, cache, grad_logits)


def train_convtimenet(net, x, y, epochs=100, batch_size=32, lr=1e-5,
                      seed=0, shuffle=True):
    """Minibatch Adam on mean cross-entropy; returns per-epoch mean loss."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 3 or x.shape[0] != y.shape[0]:
        raise errors.ShapeMismatch("need (n, C, T) inputs and one target per sample")
    n = x.shape[0]
    if n < 2:
        raise errors.TooFewSamples("training needs at least 2 samples")
    params = net_params(net)
    opt = adam_init(params, lr)
    order_rng = np.random.default_rng([seed, 92])
    net.mode = "train"
    losses = []
    step = 0
    for _ in range(epochs):
        order = order_rng.permutation(n) if shuffle else np.arange(n)
        total = 0.0
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            rng = np.random.default_rng([seed, 93, step])
            logits, cache = _forward(net, x[idx], rng)
            total += cross_entropy(logits, y[idx]) * len(idx)
            grad_logits = _cross_entropy_backward(logits, y[idx])
            grads, _ = _backward(net, cache, grad_logits)
            adam_step(opt, params, grads)
            step += 1
        losses.append(total / n)
    net.mode = "eval"
    return losses


def predict_classes(net, x):
    """Eval-mode class indices, leaving the network untouched."""
    saved = net.mode
    net.mode = "eval"
    try:
        logits = convtimenet_forward(net, x)
    finally:
        net.mode = saved
    return np.argmax(logits, axis=1)


@dataclass(frozen=True)
class ConvnetClassifier:
    """Trained net plus the feature scaler and window used to cut samples."""

    net: ConvTimeNetLite
    window: int
    scaler: object
    losses: tuple


def fit_convtimenet_classifier(frame, window=1, dropout_p=0.5, epochs=100,
                               batch_size=32, lr=1e-5, seed=0):
    """Train on a labeled frame; samples are length-`window` feature slices.

    Features are standardized with a scaler fit on this frame before the
    windows are cut.
    """
    if frame.labels is None:
        raise errors.ConfigError("frame must be labeled")
    scaler = scaler_fit(frame.feature_matrix())
    scaled = scaler_transform(scaler, frame.feature_matrix())
    seqs, y = windowed_tensors(scaled, frame.labels, window)
    net = init_convtimenet(seqs.shape[2], seed=seed, dropout_p=dropout_p)
    losses = train_convtimenet(net, seqs.swapaxes(1, 2), y, epochs=epochs,
                               batch_size=batch_size, lr=lr, seed=seed)
    return ConvnetClassifier(net=net, window=window, scaler=scaler,
                             losses=tuple(losses))


def predict_convtimenet_classifier(clf, features):
    """Direction labels for every full window ending inside `features`."""
    scaled = scaler_transform(clf.scaler, np.asarray(features, dtype=np.float64))
    seqs, _ = windowed_tensors(scaled, None, clf.window)
    return decode_labels(predict_classes(clf.net, seqs.swapaxes(1, 2)))
