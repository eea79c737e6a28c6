"""Kernel functions and Gram matrices for the margin models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, InvalidParams

KERNEL_KINDS = ("linear", "rbf", "poly")


@dataclass(frozen=True)
class KernelSpec:
    """A kernel with its hyperparameters resolved to concrete numbers."""

    kind: str
    gamma: float = 1.0
    degree: int = 3

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise InvalidParams(f"unknown kernel {self.kind!r}")
        if self.gamma < 0:
            raise InvalidParams("gamma must be >= 0")
        if self.degree < 1:
            raise InvalidParams("degree must be >= 1")


def resolve_gamma(gamma, X: np.ndarray) -> float:
    """Map the named gamma policies onto numbers for this training matrix.

    ``scale`` = 1/(d * var(X)) over all entries, ``auto`` = 1/d.
    """
    d = X.shape[1]
    if gamma == "scale":
        v = float(X.var())
        return 1.0 / (d * v) if v > 0 else 1.0 / d
    if gamma == "auto":
        return 1.0 / d
    g = float(gamma)
    if g < 0:
        raise InvalidParams("gamma must be >= 0")
    return g


def kernel_eval(kind: str, x, y, gamma: float = 1.0, degree: int = 3) -> float:
    """K(x, y) for a single pair of vectors."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DimensionMismatch(f"vector shapes differ: {x.shape} vs {y.shape}")
    return float(gram(KernelSpec(kind, gamma, degree), x[None, :], y[None, :])[0, 0])


def gram(spec: KernelSpec, X, Y=None) -> np.ndarray:
    """Pairwise kernel matrix K[i, j] = K(X[i], Y[j])."""
    X = np.asarray(X, dtype=np.float64)
    Y = X if Y is None else np.asarray(Y, dtype=np.float64)
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatch(
            f"feature counts differ: {X.shape[1]} vs {Y.shape[1]}")
    inner = X @ Y.T
    if spec.kind == "linear":
        return inner
    if spec.kind == "poly":
        return (inner + 1.0) ** spec.degree
    sq = (np.sum(X * X, axis=1)[:, None] + np.sum(Y * Y, axis=1)[None, :]
          - 2.0 * inner)
    np.maximum(sq, 0.0, out=sq)  # clamp cancellation noise
    return np.exp(-spec.gamma * sq)
