"""Single-cell LSTM classifier with backprop through time.

Gates follow the classic formulation on the concatenated [h_{t-1}, x_t]
vector; a linear head reads the final hidden state. Transfer learning
trains on a source frame, then freezes the four gate weight matrices and
fine-tunes biases plus head on the target (or everything, if asked).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .. import errors
from ..pipeline import scaler_fit, scaler_transform
from .adam import adam_init, adam_step
from .data import decode_labels, windowed_tensors
from .layers import _cross_entropy_backward, cross_entropy

PARAM_NAMES = ("W_f", "W_i", "W_C", "W_o", "b_f", "b_i", "b_C", "b_o",
               "W_y", "b_y")
GATE_WEIGHTS = ("W_f", "W_i", "W_C", "W_o")


@dataclass
class LstmCellParams:
    W_f: np.ndarray
    W_i: np.ndarray
    W_C: np.ndarray
    W_o: np.ndarray
    b_f: np.ndarray
    b_i: np.ndarray
    b_C: np.ndarray
    b_o: np.ndarray
    W_y: np.ndarray
    b_y: np.ndarray
    frozen: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        for name in PARAM_NAMES:
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        h, cols = self.W_f.shape
        for name in GATE_WEIGHTS:
            if getattr(self, name).shape != (h, cols):
                raise errors.ShapeMismatch(f"{name} must have shape {(h, cols)}")
        if cols <= h:
            raise errors.ShapeMismatch("gate matrices must be (hidden, hidden+input)")
        for name in ("b_f", "b_i", "b_C", "b_o"):
            if getattr(self, name).shape != (h,):
                raise errors.ShapeMismatch(f"{name} must have shape ({h},)")
        if self.W_y.ndim != 2 or self.W_y.shape[1] != h:
            raise errors.ShapeMismatch("head weights must be (classes, hidden)")
        if self.b_y.shape != (self.W_y.shape[0],):
            raise errors.ShapeMismatch("head bias must match class count")
        self.frozen = frozenset(self.frozen)
        if not self.frozen <= set(PARAM_NAMES):
            raise errors.InvalidParams(f"unknown frozen names {self.frozen - set(PARAM_NAMES)}")

    @property
    def hidden_size(self):
        return self.W_f.shape[0]

    @property
    def input_size(self):
        return self.W_f.shape[1] - self.W_f.shape[0]

    @property
    def classes(self):
        return self.W_y.shape[0]


def init_lstm(input_dim, hidden, classes=3, seed=0):
    """Uniform +-1/sqrt(hidden) weights with the forget bias set to +1."""
    if input_dim < 1 or hidden < 1 or classes < 2:
        raise errors.InvalidParams("need input_dim, hidden >= 1 and classes >= 2")
    rng = np.random.default_rng([seed, 95])
    limit = 1.0 / np.sqrt(hidden)
    u = lambda *shape: rng.uniform(-limit, limit, shape)
    return LstmCellParams(
        W_f=u(hidden, hidden + input_dim), W_i=u(hidden, hidden + input_dim),
        W_C=u(hidden, hidden + input_dim), W_o=u(hidden, hidden + input_dim),
        b_f=np.ones(hidden), b_i=u(hidden), b_C=u(hidden), b_o=u(hidden),
        W_y=u(classes, hidden), b_y=u(classes))


def lstm_params_dict(params):
    return {name: getattr(params, name) for name in PARAM_NAMES}


def clone_lstm(params, frozen=None):
    arrays = {name: getattr(params, name).copy() for name in PARAM_NAMES}
    keep = params.frozen if frozen is None else frozenset(frozen)
    return LstmCellParams(frozen=keep, **arrays)


def _init_state(params, batch, h0, c0):
    h = np.zeros((batch, params.hidden_size)) if h0 is None \
        else np.broadcast_to(np.asarray(h0, dtype=np.float64),
                             (batch, params.hidden_size)).copy()
    c = np.zeros((batch, params.hidden_size)) if c0 is None \
        else np.broadcast_to(np.asarray(c0, dtype=np.float64),
                             (batch, params.hidden_size)).copy()
    return h, c


def _forward_batch(params, x, h0=None, c0=None):
    """Run the gate recursion over (batch, T, input); returns logits + cache."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3 or x.shape[2] != params.input_size:
        raise errors.ShapeMismatch(
            f"expected (batch, T, {params.input_size}) inputs, got {x.shape}")
    if not np.isfinite(x).all():
        raise errors.DegenerateInput("non-finite values in input")
    batch, t_len = x.shape[0], x.shape[1]
    h, c = _init_state(params, batch, h0, c0)
    steps = []
    hs = [h]
    cs = [c]
    for t in range(t_len):
        z = np.concatenate([h, x[:, t, :]], axis=1)
        f = expit(z @ params.W_f.T + params.b_f)
        i = expit(z @ params.W_i.T + params.b_i)
        ctilde = np.tanh(z @ params.W_C.T + params.b_C)
        c = f * cs[-1] + i * ctilde
        o = expit(z @ params.W_o.T + params.b_o)
        tc = np.tanh(c)
        h = o * tc
        steps.append((z, f, i, ctilde, o, tc))
        hs.append(h)
        cs.append(c)
    logits = h @ params.W_y.T + params.b_y
    return logits, (steps, hs, cs)


def _backward_batch(params, cache, grad_logits):
    steps, hs, cs = cache
    hidden = params.hidden_size
    grads = {name: np.zeros_like(getattr(params, name)) for name in PARAM_NAMES}
    grads["W_y"] = grad_logits.T @ hs[-1]
    grads["b_y"] = grad_logits.sum(axis=0)
    gh = grad_logits @ params.W_y
    gc = np.zeros_like(hs[-1])
    for t in range(len(steps) - 1, -1, -1):
        z, f, i, ctilde, o, tc = steps[t]
        go = gh * tc
        gc = gc + gh * o * (1.0 - tc * tc)
        ga_f = gc * cs[t] * f * (1.0 - f)
        ga_i = gc * ctilde * i * (1.0 - i)
        ga_c = gc * i * (1.0 - ctilde * ctilde)
        ga_o = go * o * (1.0 - o)
        grads["W_f"] += ga_f.T @ z
        grads["W_i"] += ga_i.T @ z
        grads["W_C"] += ga_c.T @ z
        grads["W_o"] += ga_o.T @ z
        grads["b_f"] += ga_f.sum(axis=0)
        grads["b_i"] += ga_i.sum(axis=0)
        grads["b_C"] += ga_c.sum(axis=0)
        grads["b_o"] += ga_o.sum(axis=0)
        gz = ga_f @ params.W_f + ga_i @ params.W_i \
            + ga_c @ params.W_C + ga_o @ params.W_o
        gh = gz[:, :hidden]
        gc = gc * f
    for name in params.frozen:
        grads[name] = np.zeros_like(grads[name])
    return grads


def lstm_forward(params, x_seq, h0=None, c0=None):
    """States and head logits for one (T, input) sequence.

    Returns (h_seq, c_seq, logits) where row 0 of each state array is the
    initial state and row t the state after step t; a T=0 sequence yields
    just the initial state with the head applied to h0.
    """
    x = np.asarray(x_seq, dtype=np.float64)
    if x.ndim != 2:
        raise errors.ShapeMismatch("x_seq must be 2-d (T, input)")
    logits, (_, hs, cs) = _forward_batch(params, x[None, :, :], h0, c0)
    return (np.array([h[0] for h in hs]), np.array([c[0] for c in cs]),
            logits[0])


def lstm_backward(params, x_seq, target, h0=None, c0=None):
    """BPTT gradients of final-step cross-entropy; frozen names get zeros."""
    x = np.asarray(x_seq, dtype=np.float64)
    if x.ndim != 2:
        raise errors.ShapeMismatch("x_seq must be 2-d (T, input)")
    logits, cache = _forward_batch(params, x[None, :, :], h0, c0)
    grad_logits = _cross_entropy_backward(logits, [int(target)])
    return _backward_batch(params, cache, grad_logits)


def fit_lstm(x, y, params, epochs=100, lr=1e-3):
    """Full-batch Adam; one step per epoch. Returns pre-step epoch losses."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 3 or x.shape[0] != y.shape[0]:
        raise errors.ShapeMismatch("need (n, T, input) inputs and one target each")
    if x.shape[0] < 1:
        raise errors.TooFewSamples("training needs at least one sample")
    arrays = lstm_params_dict(params)
    opt = adam_init(arrays, lr)
    losses = []
    for _ in range(epochs):
        logits, cache = _forward_batch(params, x)
        losses.append(cross_entropy(logits, y))
        grads = _backward_batch(params, cache, _cross_entropy_backward(logits, y))
        adam_step(opt, arrays, grads)
    return losses


def lstm_predict_classes(params, x):
    logits, _ = _forward_batch(params, x)
    return np.argmax(logits, axis=1)


@dataclass(frozen=True)
class TransferConfig:
    hidden: int = 8
    window: int = 1
    source_epochs: int = 80
    target_epochs: int = 40
    lr: float = 1e-3
    seed: int = 0
    fine_tune_all: bool = False


@dataclass(frozen=True)
class LstmClassifier:
    """Trained cell plus the feature scaler and window used to fit it."""

    params: LstmCellParams
    window: int
    scaler: object
    losses: tuple


@dataclass(frozen=True)
class TransferResult:
    """Final model plus the phase-1 snapshot and both training-loss curves."""

    params: LstmCellParams
    source_params: LstmCellParams
    source_losses: tuple
    target_losses: tuple
    window: int
    scaler: object

    @property
    def classifier(self):
        return LstmClassifier(params=self.params, window=self.window,
                              scaler=self.scaler, losses=self.target_losses)


def _frame_tensors(frame, window, scaler):
    if frame.labels is None:
        raise errors.ConfigError("frame must be labeled")
    features = scaler_transform(scaler, frame.feature_matrix())
    return windowed_tensors(features, frame.labels, window)


def transfer_learn(source_frame, target_frame, config=TransferConfig()):
    """Pretrain on source, freeze gate weights, fine-tune on target.

    The freeze covers W_f, W_i, W_C and W_o only; gate biases and the head
    stay trainable. With `fine_tune_all` every parameter is fine-tuned
    instead. Each phase gets a fresh optimizer. Features are standardized
    with a scaler fit on the source so both phases share one input scale.
    """
    src_classes = set(np.unique(source_frame.labels).tolist())
    tgt_classes = set(np.unique(target_frame.labels).tolist())
    if src_classes != tgt_classes:
        raise errors.ClassMismatch(
            f"source classes {sorted(src_classes)} != target {sorted(tgt_classes)}")
    scaler = scaler_fit(source_frame.feature_matrix())
    xs, ys = _frame_tensors(source_frame, config.window, scaler)
    xt, yt = _frame_tensors(target_frame, config.window, scaler)
    if xs.shape[2] != xt.shape[2]:
        raise errors.ShapeMismatch("source and target must share feature count")

    params = init_lstm(xs.shape[2], config.hidden, seed=config.seed)
    source_losses = fit_lstm(xs, ys, params, epochs=config.source_epochs,
                             lr=config.lr)
    snapshot = clone_lstm(params)
    frozen = () if config.fine_tune_all else GATE_WEIGHTS
    tuned = clone_lstm(params, frozen=frozen)
    target_losses = fit_lstm(xt, yt, tuned, epochs=config.target_epochs,
                             lr=config.lr)
    return TransferResult(params=tuned, source_params=snapshot,
                          source_losses=tuple(source_losses),
                          target_losses=tuple(target_losses),
                          window=config.window, scaler=scaler)


def fit_lstm_classifier(frame, hidden=8, window=1, epochs=100, lr=1e-3, seed=0):
    """Train from scratch on one labeled frame, standardizing its features."""
    scaler = scaler_fit(frame.feature_matrix())
    x, y = _frame_tensors(frame, window, scaler)
    params = init_lstm(x.shape[2], hidden, seed=seed)
    losses = fit_lstm(x, y, params, epochs=epochs, lr=lr)
    return LstmClassifier(params=params, window=window, scaler=scaler,
                          losses=tuple(losses))


def predict_lstm_labels(clf, features):
    """Direction labels for every full window ending inside `features`."""
    scaled = scaler_transform(clf.scaler, np.asarray(features, dtype=np.float64))
    seqs, _ = windowed_tensors(scaled, None, clf.window)
    return decode_labels(lstm_predict_classes(clf.params, seqs))
