"""Linear classifiers: softmax logistic regression and the online margin trio.

The logistic solver is deterministic full-batch gradient descent with the
step size 1/L, L = 0.5 * lambda_max(X'X)/n + lambda; solver names from the
hyperparameter grids are accepted for compatibility and ignored. The online
models (hinge SGD, perceptron, passive-aggressive) train one binary head
per class over seeded shuffles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SingleClassInput, SingularSystem


@dataclass
class LinearHead:
    """One binary decision function w.x + b."""

    w: np.ndarray
    b: float

    def decision(self, X: np.ndarray) -> np.ndarray:
        return X @ self.w + self.b


@dataclass
class SoftmaxState:
    W: np.ndarray          # (d+1, K), last row is the intercept
    classes: np.ndarray


@dataclass
class OvrLinearState:
    heads: list            # one LinearHead per class, ascending label order
    classes: np.ndarray


@dataclass
class RidgeState:
    W: np.ndarray          # (d+1, K)
    classes: np.ndarray


def _classes_of(y) -> np.ndarray:
    classes = np.unique(np.asarray(y))
    if len(classes) < 2:
        raise SingleClassInput("need at least 2 classes")
    return classes


def _with_ones(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((X.shape[0], 1))])


def _softmax_rows(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


# --- logistic ------------------------------------------------------------------

def fit_logistic(params: dict, X, y, seed: int = 0) -> SoftmaxState:
    X = np.asarray(X, dtype=np.float64)
    classes = _classes_of(y)
    enc = np.searchsorted(classes, y)
    n = len(enc)
    C = float(params.get("C", 1.0))
    lam = 1.0 / C
    max_iter = int(params.get("max_iter", 5000))
    tol = float(params.get("tol", 1e-6))
    Xt = _with_ones(X)
    Y = np.zeros((n, len(classes)))
    Y[np.arange(n), enc] = 1.0
    # 0.5 bounds the softmax Hessian block; lam covers the ridge term
    lip = 0.5 * float(np.linalg.eigvalsh(Xt.T @ Xt)[-1]) / n + lam
    W = np.zeros((Xt.shape[1], len(classes)))
    for _ in range(max_iter):
        P = _softmax_rows(Xt @ W)
        G = Xt.T @ (P - Y) / n + lam * W
        G[-1] -= lam * W[-1]  # intercept row is not penalized
        if np.abs(G).max() <= tol:
            break
        W -= G / lip
    return SoftmaxState(W, classes)


def predict_logistic(state: SoftmaxState, X) -> np.ndarray:
    Xt = _with_ones(np.asarray(X, dtype=np.float64))
    return state.classes[np.argmax(Xt @ state.W, axis=1)]


# --- ridge ------------------------------------------------------------------------

def fit_ridge(params: dict, X, y, seed: int = 0) -> RidgeState:
    """One-hot least squares with an L2 term, solved by Cholesky.

    On a Cholesky failure the penalty escalates by the factor 1.01, at most
    3 retries, then SingularSystem.
    """
    X = np.asarray(X, dtype=np.float64)
    classes = _classes_of(y)
    enc = np.searchsorted(classes, y)
    lam = float(params.get("alpha", 1.0))
    Xt = _with_ones(X)
    Y = np.zeros((len(enc), len(classes)))
    Y[np.arange(len(enc)), enc] = 1.0
    B = Xt.T @ Y
    eye = np.eye(Xt.shape[1])
    cur = lam
    for _ in range(4):  # first attempt plus 3 escalations
        try:
            L = np.linalg.cholesky(Xt.T @ Xt + cur * eye)
        except np.linalg.LinAlgError:
            cur = cur * 1.01
            continue
        W = np.linalg.solve(L.T, np.linalg.solve(L, B))
        return RidgeState(W, classes)
    raise SingularSystem(f"normal equations singular even at lambda={cur}")


def predict_ridge(state: RidgeState, X) -> np.ndarray:
    Xt = _with_ones(np.asarray(X, dtype=np.float64))
    return state.classes[np.argmax(Xt @ state.W, axis=1)]


# --- online one-vs-rest trio ----------------------------------------------------

def _penalty_step(w: np.ndarray, eta: float, alpha: float, penalty):
    if penalty is None or penalty == "none":
        return
    if penalty == "l2":
        w -= eta * alpha * w
    elif penalty == "l1":
        w -= eta * alpha * np.sign(w)
    elif penalty == "elasticnet":
        w -= eta * alpha * (0.15 * np.sign(w) + 0.85 * w)
    else:
        raise ValueError(f"unknown penalty {penalty!r}")


def _ovr_online(X, y, seed: int, train_head) -> OvrLinearState:
    X = np.asarray(X, dtype=np.float64)
    classes = _classes_of(y)
    heads = []
    for pos, cls in enumerate(classes):
        yb = np.where(np.asarray(y) == cls, 1.0, -1.0)
        rng = np.random.default_rng([seed, pos])
        heads.append(train_head(X, yb, rng))
    return OvrLinearState(heads, classes)


def predict_ovr_linear(state: OvrLinearState, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    scores = np.stack([h.decision(X) for h in state.heads])
    return state.classes[np.argmax(scores, axis=0)]  # ties -> smallest label


def fit_sgd_linear(params: dict, X, y, seed: int = 0) -> OvrLinearState:
    """Hinge-loss linear classifier, one sample at a time."""
    alpha = float(params.get("alpha", 1e-4))
    penalty = params.get("penalty", "l2")
    epochs = int(params.get("max_iter", 10))
    eta0 = float(params.get("eta0", 1.0))

    def train(Xa, yb, rng):
        w = np.zeros(Xa.shape[1])
        b = 0.0
        t = 0
        for _ in range(epochs):
            for i in rng.permutation(len(yb)):
                eta = eta0 / (1.0 + eta0 * alpha * t)
                t += 1
                _penalty_step(w, eta, alpha, penalty)
                if yb[i] * (w @ Xa[i] + b) < 1.0:
                    w += eta * yb[i] * Xa[i]
                    b += eta * yb[i]
        return LinearHead(w, b)

    return _ovr_online(X, y, seed, train)


def fit_perceptron(params: dict, X, y, seed: int = 0) -> OvrLinearState:
    """Mistake-driven updates at unit rate, with optional weight decay."""
    alpha = float(params.get("alpha", 1e-4))
    penalty = params.get("penalty", None)
    epochs = int(params.get("max_iter", 50))

    def train(Xa, yb, rng):
        w = np.zeros(Xa.shape[1])
        b = 0.0
        for _ in range(epochs):
            for i in rng.permutation(len(yb)):
                _penalty_step(w, 1.0, alpha, penalty)
                if yb[i] * (w @ Xa[i] + b) <= 0.0:
                    w += yb[i] * Xa[i]
                    b += yb[i]
        return LinearHead(w, b)

    return _ovr_online(X, y, seed, train)


def fit_passive_aggressive(params: dict, X, y, seed: int = 0) -> OvrLinearState:
    """PA-I: step tau = min(C, hinge loss / ||x||^2), bias as a unit feature."""
    C = float(params.get("C", 1.0))
    epochs = int(params.get("max_iter", 50))

    def train(Xa, yb, rng):
        w = np.zeros(Xa.shape[1])
        b = 0.0
        for _ in range(epochs):
            for i in rng.permutation(len(yb)):
                loss = max(0.0, 1.0 - yb[i] * (w @ Xa[i] + b))
                if loss > 0.0:
                    tau = min(C, loss / (Xa[i] @ Xa[i] + 1.0))
                    w += tau * yb[i] * Xa[i]
                    b += tau * yb[i]
        return LinearHead(w, b)

    return _ovr_online(X, y, seed, train)
