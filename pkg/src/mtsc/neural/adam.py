"""Bias-corrected Adam over a dict of named parameter arrays."""

from dataclasses import dataclass, field

import numpy as np

from .. import errors


@dataclass
class AdamState:
    """First/second moment estimates keyed like the parameter dict."""

    m: dict
    v: dict
    lr: float
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_init(params, lr):
    if lr < 0:
        raise errors.InvalidParams("learning rate must be non-negative")
    zeros = lambda: {k: np.zeros_like(p) for k, p in params.items()}
    return AdamState(m=zeros(), v=zeros(), lr=float(lr))


def adam_step(state, params, grads):
    """One in-place update; returns (params, state) for chaining.

    theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) with the usual
    1/(1-beta^t) bias correction. Parameters whose gradient is all zero
    and whose moments are still zero stay bitwise unchanged.
    """
    if set(grads) != set(state.m) or set(params) != set(state.m):
        raise errors.ShapeMismatch("parameter, gradient and state keys must match")
    state.t += 1
    c1 = 1.0 - state.beta1 ** state.t
    c2 = 1.0 - state.beta2 ** state.t
    for name, g in grads.items():
        p = params[name]
        if g.shape != p.shape:
            raise errors.ShapeMismatch(
                f"gradient shape {g.shape} != parameter shape {p.shape} for {name}")
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state
