"""Multivariate time-series classification toolkit for financial data.

Quantile labeling, walk-forward cross-validation and grid search, a classic
model zoo built around an SMO-trained kernel SVM, small convolutional and
LSTM networks with hand-written gradients, GARCH variance features, and
signal backtesting, plus a CLI (``mtsc``) driving synthetic-data scenarios.
"""

# bound before the subpackage imports so modules may read it from the root
__version__ = "0.1.0"

from . import bench, classic, errors, evalbt, garch, neural, pipeline
from ._kernels import BACKEND
from .evalbt import (
    BacktestReport,
    ConfusionMatrix,
    backtest,
    classification_report,
    confusion_matrix,
    portfolio_variance,
    sharpe_ratio,
    trade_profit,
)
from .frame import (
    CsvSchema,
    Frame,
    LabelThresholds,
    augment_jitter,
    augment_window_slice,
    compute_returns,
    label_by_quantiles,
    label_frame,
    load_csv,
    load_frame_csv,
    shift_labels,
    sma,
    write_frame_csv,
)
from .garch import GarchParams, fit_garch11, garch_variance, simulate_garch11
from .pipeline import (
    FoldPlan,
    GridCandidate,
    GridResult,
    Scaler,
    derive_seed,
    expand_grid,
    grid_search,
    scaler_fit,
    scaler_transform,
    time_series_split,
)

__all__ = [
    "BACKEND",
    "BacktestReport",
    "ConfusionMatrix",
    "CsvSchema",
    "FoldPlan",
    "Frame",
    "GarchParams",
    "GridCandidate",
    "GridResult",
    "LabelThresholds",
    "Scaler",
    "augment_jitter",
    "augment_window_slice",
    "backtest",
    "bench",
    "classic",
    "classification_report",
    "compute_returns",
    "confusion_matrix",
    "derive_seed",
    "errors",
    "evalbt",
    "expand_grid",
    "fit_garch11",
    "garch",
    "garch_variance",
    "grid_search",
    "label_by_quantiles",
    "label_frame",
    "load_csv",
    "load_frame_csv",
    "neural",
    "pipeline",
    "portfolio_variance",
    "scaler_fit",
    "scaler_transform",
    "sharpe_ratio",
    "shift_labels",
    "simulate_garch11",
    "sma",
    "time_series_split",
    "trade_profit",
    "write_frame_csv",
    "__version__",
]
