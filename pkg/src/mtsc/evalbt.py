"""Classification metrics, Sharpe ratio, and signal backtesting.

The confusion matrix convention is rows = true class, columns = predicted
class, with classes in sorted label order. Backtests multiply per-step
market returns by {-1, 0, +1} position signals and compound them; a seeded
uniform-random signal stream provides the baseline. No transaction costs,
slippage, or position sizing.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import errors

__all__ = [
    "ConfusionMatrix", "confusion_matrix", "classification_report",
    "sharpe_ratio", "BacktestReport", "backtest", "trade_profit",
    "portfolio_variance",
]


def _as_label(label):
    return int(label) if isinstance(label, (int, np.integer)) else label


@dataclass(frozen=True)
class ConfusionMatrix:
    """Count grid over (true, predicted) class pairs."""

    counts: np.ndarray
    class_order: tuple

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        order = tuple(_as_label(c) for c in self.class_order)
        k = len(order)
        if counts.ndim != 2 or counts.shape != (k, k):
            raise errors.DimensionMismatch(
                f"counts must be ({k}, {k}) to match {k} classes")
        if (counts < 0).any():
            raise errors.InvalidParams("counts must be non-negative")
        if list(order) != sorted(order) or len(set(order)) != k:
            raise errors.ConfigError("class_order must be sorted unique labels")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "class_order", order)

    @property
    def total(self):
        return int(self.counts.sum())


def confusion_matrix(y_true, y_pred, class_order=None):
    """Count (true, predicted) pairs; rows true, columns predicted.

    `class_order` defaults to the sorted union of observed labels. Labels
    outside the declared order raise UnknownLabel.
    """
    true = np.asarray(y_true)
    pred = np.asarray(y_pred)
    if true.ndim != 1 or pred.ndim != 1 or true.shape != pred.shape:
        raise errors.LengthMismatch("y_true and y_pred must be equal-length 1-d")
    if class_order is None:
        class_order = sorted(set(true.tolist()) | set(pred.tolist()))
    order = tuple(_as_label(c) for c in class_order)
    lookup = {label: i for i, label in enumerate(order)}
    counts = np.zeros((len(order), len(order)), dtype=np.int64)
    for t, p in zip(true.tolist(), pred.tolist()):
        t, p = _as_label(t), _as_label(p)
        if t not in lookup:
            raise errors.UnknownLabel(t)
        if p not in lookup:
            raise errors.UnknownLabel(p)
        counts[lookup[t], lookup[p]] += 1
    return ConfusionMatrix(counts=counts, class_order=order)


def classification_report(cm):
    """Per-class precision/recall/F1 plus accuracy and macro averages.

    Zero-denominator cells report 0.0 and are listed under "undefined"
    as (label, metric) pairs, keeping the report JSON-clean. Lists are
    aligned with `class_order`.
    """
    counts = cm.counts
    total = counts.sum()
    if total == 0:
        raise errors.EmptyMatrix("confusion matrix holds no samples")
    diag = np.diag(counts).astype(np.float64)
    row = counts.sum(axis=1).astype(np.float64)
    col = counts.sum(axis=0).astype(np.float64)
    undefined = []
    precision, recall, f1 = [], [], []
    for i, label in enumerate(cm.class_order):
        p = diag[i] / col[i] if col[i] > 0 else 0.0
        r = diag[i] / row[i] if row[i] > 0 else 0.0
        if col[i] == 0:
            undefined.append([label, "precision"])
        if row[i] == 0:
            undefined.append([label, "recall"])
        if p + r > 0:
            f = 2.0 * p * r / (p + r)
        else:
            f = 0.0
            undefined.append([label, "f1"])
        precision.append(float(p))
        recall.append(float(r))
        f1.append(float(f))
    return {
        "class_order": list(cm.class_order),
        "support": counts.sum(axis=1).tolist(),
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "undefined": undefined,
        "accuracy": float(np.trace(counts) / total),
        "macro_precision": float(np.mean(precision)),
        "macro_recall": float(np.mean(recall)),
        "macro_f1": float(np.mean(f1)),
    }


def sharpe_ratio(returns, risk_free_per_period=0.0, annualization_factor=1.0):
    """Mean excess return over sample std (ddof=1), scaled by sqrt(factor)."""
    r = np.asarray(returns, dtype=np.float64)
    if r.ndim != 1:
        raise errors.DimensionMismatch("returns must be 1-d")
    if r.size < 2:
        raise errors.TooFewSamples("sharpe ratio needs at least two returns")
    if annualization_factor <= 0:
        raise errors.InvalidParams("annualization factor must be positive")
    excess = r - risk_free_per_period
    sd = excess.std(ddof=1)
    if sd == 0.0:
        raise errors.ZeroVolatility("return series has zero standard deviation")
    return float(excess.mean() / sd * np.sqrt(annualization_factor))


@dataclass(frozen=True)
class BacktestReport:
    """Aligned return series, compounded curves, and summary stats.

    Sharpe entries are None when a series is degenerate (zero volatility
    or fewer than two steps).
    """

    market: np.ndarray
    strategy: np.ndarray
    random: np.ndarray
    cumulative_market: np.ndarray
    cumulative_strategy: np.ndarray
    cumulative_random: np.ndarray
    final_market: float
    final_strategy: float
    final_random: float
    sharpe: dict
    seed: int
    mode: str

    def to_dict(self):
        return {
            "market": self.market.tolist(),
            "strategy": self.strategy.tolist(),
            "random": self.random.tolist(),
            "cumulative_market": self.cumulative_market.tolist(),
            "cumulative_strategy": self.cumulative_strategy.tolist(),
            "cumulative_random": self.cumulative_random.tolist(),
            "final_market": self.final_market,
            "final_strategy": self.final_strategy,
            "final_random": self.final_random,
            "sharpe": self.sharpe,
            "seed": self.seed,
            "mode": self.mode,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def curves_csv(self):
        """Cumulative curves as CSV text, one row per step."""
        lines = ["t,market,model,random"]
        for t in range(self.market.size):
            lines.append("%d,%.12g,%.12g,%.12g" % (
                t, self.cumulative_market[t], self.cumulative_strategy[t],
                self.cumulative_random[t]))
        return "\n".join(lines) + "\n"


def _sharpe_or_none(r):
    try:
        return sharpe_ratio(r)
    except (errors.ZeroVolatility, errors.TooFewSamples):
        return None


def backtest(market_returns, signals, random_seed=0, mode="paper"):
    """Compound market, signal-weighted, and random-signal return streams.

    Strategy return per step is market return times the position signal;
    curves are running products of (1 + r). The random baseline draws
    uniform {-1, 0, +1} signals from `random_seed`.
    """
    market = np.asarray(market_returns, dtype=np.float64)
    sig = np.asarray(signals)
    if market.ndim != 1 or sig.ndim != 1 or market.shape != sig.shape:
        raise errors.LengthMismatch("market returns and signals must be "
                                    "equal-length 1-d")
    if market.size == 0:
        raise errors.TooFewSamples("backtest needs at least one step")
    if not np.isin(sig, (-1, 0, 1)).all():
        bad = sig[~np.isin(sig, (-1, 0, 1))][0]
        raise errors.UnknownLabel(bad)
    rng = np.random.default_rng(random_seed)
    random_sig = rng.integers(-1, 2, market.size)
    strategy = market * sig.astype(np.float64)
    random_r = market * random_sig
    cum_market = np.cumprod(1.0 + market)
    cum_strategy = np.cumprod(1.0 + strategy)
    cum_random = np.cumprod(1.0 + random_r)
    return BacktestReport(
        market=market, strategy=strategy, random=random_r,
        cumulative_market=cum_market, cumulative_strategy=cum_strategy,
        cumulative_random=cum_random,
        final_market=float(cum_market[-1]),
        final_strategy=float(cum_strategy[-1]),
        final_random=float(cum_random[-1]),
        sharpe={"market": _sharpe_or_none(market),
                "strategy": _sharpe_or_none(strategy),
                "random": _sharpe_or_none(random_r)},
        seed=int(random_seed), mode=str(mode))


def trade_profit(predicted_price, actual_price, quantity):
    """Sum of (predicted - actual) * quantity over one or more trades."""
    arrs = [np.atleast_1d(np.asarray(a, dtype=np.float64))
            for a in (predicted_price, actual_price, quantity)]
    try:
        p, s, q = np.broadcast_arrays(*arrs)
    except ValueError:
        raise errors.LengthMismatch("price and quantity series must align")
    return float(((p - s) * q).sum())


def portfolio_variance(weights, covariance):
    """Quadratic form w' Sigma w; Sigma must be symmetric within 1e-9."""
    w = np.asarray(weights, dtype=np.float64)
    cov = np.asarray(covariance, dtype=np.float64)
    if w.ndim != 1 or cov.shape != (w.size, w.size):
        raise errors.DimensionMismatch(
            f"need weights (k,) and covariance (k, k), got {w.shape} "
            f"and {cov.shape}")
    if not np.isfinite(cov).all() or not np.isfinite(w).all():
        raise errors.DegenerateInput("weights and covariance must be finite")
    if np.abs(cov - cov.T).max() > 1e-9:
        raise errors.Asymmetric("covariance matrix is not symmetric")
    return float(w @ cov @ w)
