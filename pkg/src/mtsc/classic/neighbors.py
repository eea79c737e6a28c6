"""k-nearest-neighbor classifier with uniform or inverse-distance votes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, SingleClassInput, TooFewSamples


@dataclass
class KnnState:
    X: np.ndarray
    y_enc: np.ndarray
    classes: np.ndarray
    k: int
    weights: str


def fit_knn(params: dict, X, y, seed: int = 0) -> KnnState:
    X = np.asarray(X, dtype=np.float64)
    classes = np.unique(np.asarray(y))
    if len(classes) < 2:
        raise SingleClassInput("need at least 2 classes")
    k = int(params.get("n_neighbors", 5))
    if k < 1 or k > len(X):
        raise TooFewSamples(f"k={k} with only {len(X)} training rows")
    weights = params.get("weights", "uniform")
    if weights not in ("uniform", "distance"):
        raise ValueError(f"unknown weights {weights!r}")
    return KnnState(X.copy(), np.searchsorted(classes, y), classes, k, weights)


def predict_knn(state: KnnState, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != state.X.shape[1]:
        raise DimensionMismatch(
            f"expected {state.X.shape[1]} features, got {X.shape[1:]}")
    if len(X) == 0:
        return np.empty(0, dtype=state.classes.dtype)
    sq = (np.sum(X * X, axis=1)[:, None] + np.sum(state.X * state.X, axis=1)
          - 2.0 * X @ state.X.T)
    np.maximum(sq, 0.0, out=sq)
    dist = np.sqrt(sq)
    out = np.empty(len(X), dtype=np.int64)
    for i in range(len(X)):
        nn = np.argsort(dist[i], kind="stable")[: state.k]  # ties -> lowest index
        if state.weights == "distance":
            exact = dist[i][nn] == 0.0
            if exact.any():
                w = exact.astype(np.float64)  # exact matches decide alone
            else:
                w = 1.0 / dist[i][nn]
        else:
            w = np.ones(state.k)
        scores = np.bincount(state.y_enc[nn], weights=w,
                             minlength=len(state.classes))
        out[i] = np.argmax(scores)  # ties -> smallest label
    return state.classes[out]
