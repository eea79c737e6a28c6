"""Gaussian naive Bayes with a variance floor tied to the data scale."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, SingleClassInput


@dataclass
class NbState:
    means: np.ndarray      # (K, d)
    variances: np.ndarray  # (K, d), floored
    log_priors: np.ndarray
    classes: np.ndarray


def fit_gaussian_nb(params: dict, X, y, seed: int = 0) -> NbState:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    classes = np.unique(y)
    if len(classes) < 2:
        raise SingleClassInput("need at least 2 classes")
    floor = 1e-9 * float(X.var(axis=0).max())
    if floor == 0.0:
        floor = 1e-12  # every feature constant; keep densities finite
    means = np.empty((len(classes), X.shape[1]))
    variances = np.empty_like(means)
    log_priors = np.empty(len(classes))
    for c, cls in enumerate(classes):
        rows = X[y == cls]
        means[c] = rows.mean(axis=0)
        variances[c] = np.maximum(rows.var(axis=0), floor)
        log_priors[c] = np.log(len(rows) / len(y))
    return NbState(means, variances, log_priors, classes)


def predict_gaussian_nb(state: NbState, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != state.means.shape[1]:
        raise DimensionMismatch(
            f"expected {state.means.shape[1]} features, got {X.shape[1:]}")
    # log joint per class, vectorized over rows
    scores = np.empty((len(X), len(state.classes)))
    for c in range(len(state.classes)):
        var = state.variances[c]
        scores[:, c] = state.log_priors[c] - 0.5 * np.sum(
            np.log(2.0 * np.pi * var) + (X - state.means[c]) ** 2 / var, axis=1)
    return state.classes[np.argmax(scores, axis=1)]
