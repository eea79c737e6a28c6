"""Independent reference implementations used to pin expected test values.

These deliberately avoid the library's own algorithms: the dual QP solver
enumerates active sets, the backtest oracle is a plain Python loop, and the
gradient oracle is central finite differences.
"""

import itertools

import numpy as np


def svm_dual_max(K: np.ndarray, y: np.ndarray, C: float) -> float:
    """Global maximum of the SVM dual by active-set enumeration.

    Every multiplier is assigned one of {0, C, interior}; interior values
    and the equality multiplier come from the stationarity system. Feasible
    candidates are scored with W = sum(a) - 0.5 a'(yy'K)a; the best wins.
    Exponential in n, intended for n <= 8.
    """
    n = len(y)
    Q = (y[:, None] * y[None, :]) * K

    def objective(a):
        return float(a.sum() - 0.5 * a @ Q @ a)

    best = -np.inf
    for pattern in itertools.product((0, 1, 2), repeat=n):
        pattern = np.array(pattern)
        free = np.nonzero(pattern == 2)[0]
        a = np.where(pattern == 1, C, 0.0)
        if len(free) == 0:
            if abs(a @ y) <= 1e-9:
                best = max(best, objective(a))
            continue
        # stationarity for free i: sum_j Q_ij a_j + mu*y_i = 1
        # unknowns: a_free, mu
        m = len(free)
        A = np.zeros((m + 1, m + 1))
        b = np.zeros(m + 1)
        fixed = a.copy()
        fixed[free] = 0.0
        A[:m, :m] = Q[np.ix_(free, free)]
        A[:m, m] = y[free]
        b[:m] = 1.0 - Q[free] @ fixed
        A[m, :m] = y[free]
        b[m] = -(fixed @ y)
        sol, residual, rank, _ = np.linalg.lstsq(A, b, rcond=None)
        if not np.allclose(A @ sol, b, atol=1e-8):
            continue
        a_free = sol[:m]
        if np.any(a_free < -1e-9) or np.any(a_free > C + 1e-9):
            continue
        a[free] = np.clip(a_free, 0.0, C)
        if abs(a @ y) > 1e-8:
            continue
        best = max(best, objective(a))
    return best


def backtest_loop(market_returns, signals):
    """Plain-loop signal backtest: the vectorized engine must match bitwise."""
    strategy = []
    equity_market, equity_strategy = [], []
    em = es = 1.0
    for r, s in zip(market_returns, signals):
        sr = r * s
        strategy.append(sr)
        em = em * (1.0 + r)
        es = es * (1.0 + sr)
        equity_market.append(em)
        equity_strategy.append(es)
    return (np.array(strategy), np.array(equity_market),
            np.array(equity_strategy))


def numeric_gradient(f, theta: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function, one entry at a time."""
    g = np.zeros_like(theta, dtype=np.float64)
    flat = theta.ravel()
    gflat = g.ravel()
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + h
        up = f()
        flat[i] = keep - h
        down = f()
        flat[i] = keep
        gflat[i] = (up - down) / (2.0 * h)
    return g


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray,
                       floor: float = 1e-8) -> float:
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))
