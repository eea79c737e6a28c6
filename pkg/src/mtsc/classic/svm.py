"""Soft-margin kernel SVM trained by simplified sequential minimal optimization.

Solves the dual

    max_a  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
    s.t.   0 <= a_i <= C,  sum_i a_i y_i = 0

two multipliers at a time. Pair choice: outer loop over KKT violators, inner
pick maximizing |E_i - E_j|, falling back to a rotation scan when the best
partner makes no progress. The dual objective is recorded after every
successful update, so its monotonicity is checkable from the outside.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, SingleClassInput
from .kernels import KernelSpec, gram


@dataclass
class SvmModel:
    """Trained binary SVM state. ``converged=False`` flags a pass-limit stop."""

    alphas: np.ndarray
    support_vectors: np.ndarray
    support_labels: np.ndarray
    bias: float
    kernel: KernelSpec
    C: float
    converged: bool = True
    objective_history: list = field(default_factory=list, repr=False)


def dual_objective(alphas: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    v = alphas * y
    return float(alphas.sum() - 0.5 * v @ K @ v)


def kkt_residual(model: SvmModel, tol_interior: float = 1e-8) -> float:
    """Largest violation of the optimality conditions over the training set.

    a=0 wants y*f >= 1, a=C wants y*f <= 1, interior wants y*f = 1.
    """
    yf = model.support_labels * svm_decision_batch(model, model.support_vectors)
    a, C = model.alphas, model.C
    res = np.zeros_like(yf)
    lower = a <= tol_interior
    upper = a >= C - tol_interior
    interior = ~lower & ~upper
    res[lower] = np.maximum(0.0, 1.0 - yf[lower])
    res[upper] = np.maximum(0.0, yf[upper] - 1.0)
    res[interior] = np.abs(yf[interior] - 1.0)
    return float(res.max()) if len(res) else 0.0


def smo_solve(X, y, C: float = 1.0, kernel: KernelSpec = KernelSpec("rbf"),
              tol: float = 1e-3, max_passes: int = 10,
              max_updates: int | None = None) -> SvmModel:
    """Train a binary SVM; labels must be -1/+1 with both classes present.

    Stops when a full sweep finds no KKT violator for ``max_passes``
    consecutive passes, or when the update budget runs out (the model is then
    returned with ``converged=False`` rather than raising).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    if X.shape[0] != n:
        raise DimensionMismatch(f"{X.shape[0]} rows vs {n} labels")
    if not np.isin(y, (-1.0, 1.0)).all():
        raise SingleClassInput("labels must be -1/+1")
    if len(np.unique(y)) < 2:
        raise SingleClassInput("both classes must be present")
    if C <= 0:
        raise ValueError("C must be positive")
    if max_updates is None:
        max_updates = max(200 * n, 10_000)

    K = gram(kernel, X)
    alphas = np.zeros(n)
    b = 0.0
    u = np.zeros(n)  # u_i = sum_j a_j y_j K_ij, so E_i = u_i + b - y_i
    history = [dual_objective(alphas, y, K)]
    updates = 0

    def try_step(i: int, j: int) -> bool:
        nonlocal b, updates
        if i == j:
            return False
        Ei = u[i] + b - y[i]
        Ej = u[j] + b - y[j]
        ai_old, aj_old = alphas[i], alphas[j]
        if y[i] != y[j]:
            L = max(0.0, aj_old - ai_old)
            H = min(C, C + aj_old - ai_old)
        else:
            L = max(0.0, ai_old + aj_old - C)
            H = min(C, ai_old + aj_old)
        if L >= H:
            return False
        eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
        if eta >= 0:
            return False
        aj = aj_old - y[j] * (Ei - Ej) / eta
        aj = min(max(aj, L), H)
        if abs(aj - aj_old) < 1e-10:
            return False
        ai = ai_old + y[i] * y[j] * (aj_old - aj)
        ai = min(max(ai, 0.0), C)  # keep the box exact under float round-off
        b1 = (b - Ei - y[i] * (ai - ai_old) * K[i, i]
              - y[j] * (aj - aj_old) * K[i, j])
        b2 = (b - Ej - y[i] * (ai - ai_old) * K[i, j]
              - y[j] * (aj - aj_old) * K[j, j])
        if 0.0 < ai < C:
            b_new = b1
        elif 0.0 < aj < C:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)
        u[:] += y[i] * (ai - ai_old) * K[i] + y[j] * (aj - aj_old) * K[j]
        alphas[i], alphas[j] = ai, aj
        b = b_new
        updates += 1
        history.append(dual_objective(alphas, y, K))
        return True

    passes = 0
    while passes < max_passes and updates < max_updates:
        changed = 0
        for i in range(n):
            Ei = u[i] + b - y[i]
            r = y[i] * Ei
            if not ((r < -tol and alphas[i] < C) or (r > tol and alphas[i] > 0)):
                continue
            E = u + b - y
            order = np.argsort(-np.abs(Ei - E), kind="stable")
            for j in order:
                if try_step(i, int(j)):
                    changed += 1
                    break
            if updates >= max_updates:
                break
        passes = passes + 1 if changed == 0 else 0

    model = SvmModel(alphas, X, y, float(b), kernel, float(C),
                     converged=True, objective_history=history)
    model.converged = kkt_residual(model, tol_interior=1e-8) <= tol
    return model


def svm_decision_batch(model: SvmModel, X) -> np.ndarray:
    """Pre-sign decision values f(x) = sum_i a_i y_i K(x_i, x) + b.

    Zero-alpha rows are dropped before the sum, so pruning them from the
    model cannot change the result.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.support_vectors.shape[1]:
        raise DimensionMismatch(
            f"expected {model.support_vectors.shape[1]} features, got {X.shape[1]}")
    live = model.alphas != 0.0
    if not live.any():
        return np.full(X.shape[0], model.bias)
    coeff = model.alphas[live] * model.support_labels[live]
    Kx = gram(model.kernel, model.support_vectors[live], X)
    return coeff @ Kx + model.bias


def svm_decision(model: SvmModel, x) -> float:
    return float(svm_decision_batch(model, np.asarray(x, dtype=np.float64))[0])
