"""Standardization, chronological cross-validation, and grid search.

The splitter is the expanding-window scheme: fold i trains on everything
before its test block, test blocks are contiguous, equal-sized, and march
forward in time. Grid search scores every (candidate, fold) pair by test
accuracy and keeps the first maximizer of the per-candidate mean.

Two leak policies exist. ``paper_faithful`` fits the feature scaler once on
the full matrix before splitting (statistics from future rows reach earlier
folds); ``leak_free`` refits the scaler per fold on its train rows only.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionMismatch, FitFailure, MtscError, TooFewSamples
from .frame import Frame


# --- scaling -----------------------------------------------------------------

@dataclass(frozen=True)
class Scaler:
    """Per-feature location/scale. Population statistics (denominator N)."""

    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        means = np.atleast_1d(np.asarray(self.means, dtype=np.float64))
        stds = np.atleast_1d(np.asarray(self.stds, dtype=np.float64))
        if means.shape != stds.shape or means.ndim != 1:
            raise DimensionMismatch("means and stds must be equal-length vectors")
        if np.any(stds < 0):
            raise DimensionMismatch("stds must be non-negative")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)


def scaler_fit(X) -> Scaler:
    X = np.asarray(X, dtype=np.float64)
    one_dim = X.ndim == 1
    if one_dim:
        X = X[:, None]
    if X.shape[0] < 1:
        raise TooFewSamples("cannot fit a scaler on an empty matrix")
    return Scaler(X.mean(axis=0), X.std(axis=0))


def scaler_transform(scaler: Scaler, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    one_dim = X.ndim == 1
    if one_dim:
        X = X[:, None]
    if X.shape[1] != len(scaler.means):
        raise DimensionMismatch(
            f"matrix has {X.shape[1]} columns, scaler expects {len(scaler.means)}")
    safe = np.where(scaler.stds > 0, scaler.stds, 1.0)
    out = (X - scaler.means) / safe
    out[:, scaler.stds == 0] = 0.0  # constant columns carry no information
    return out[:, 0] if one_dim else out


# --- folds ---------------------------------------------------------------------

@dataclass(frozen=True)
class FoldPlan:
    """Ordered (train_indices, test_indices) pairs, chronology preserved."""

    folds: tuple[tuple[np.ndarray, np.ndarray], ...]
    n_splits: int

    def __post_init__(self):
        if self.n_splits < 2 or len(self.folds) != self.n_splits:
            raise TooFewSamples("a fold plan needs at least 2 folds")
        for train, test in self.folds:
            if len(train) == 0 or len(test) == 0:
                raise TooFewSamples("empty train or test block")
            if train.max() >= test.min():
                raise TooFewSamples("train rows must precede test rows")


def time_series_split(n: int, k: int = 5) -> FoldPlan:
    """Expanding-window plan: k folds over n rows, test_size = n // (k+1).

    Fold i (1-based) trains on [0, n - (k-i+1)*test_size) and tests on the
    next test_size rows; rows left over by the floor division extend the
    first train block.
    """
    if k < 2:
        raise TooFewSamples(f"need at least 2 folds, got k={k}")
    if n < 2 * (k + 1):
        raise TooFewSamples(f"need n >= {2 * (k + 1)} rows for k={k}, got {n}")
    test_size = n // (k + 1)
    folds = []
    for i in range(1, k + 1):
        split = n - (k - i + 1) * test_size
        train = np.arange(0, split)
        test = np.arange(split, split + test_size)
        folds.append((train, test))
    return FoldPlan(tuple(folds), k)


# --- grid search ------------------------------------------------------------------

def derive_seed(global_seed: int, *parts: int) -> int:
    """Stable per-task seed from the global seed and task coordinates."""
    h = hashlib.sha256(str(int(global_seed)).encode("ascii"))
    for p in parts:
        h.update(b"|")
        h.update(str(int(p)).encode("ascii"))
    return int.from_bytes(h.digest()[:8], "big") >> 1


def expand_grid(grid) -> list[dict]:
    """Dict-of-lists -> candidate dicts in declared (insertion x product) order."""
    if isinstance(grid, dict):
        if not grid:
            return [{}]
        keys = list(grid)
        return [dict(zip(keys, combo))
                for combo in itertools.product(*(grid[k] for k in keys))]
    return [dict(c) for c in grid]


@dataclass(frozen=True)
class GridCandidate:
    params: dict
    mean_accuracy: float
    fold_accuracies: tuple[float, ...]
    fold_macro_f1: tuple[float, ...] | None = None
    failed: bool = False


@dataclass(frozen=True)
class GridResult:
    candidates: tuple[GridCandidate, ...]
    best_params: dict
    best_mean_accuracy: float
    failures: tuple[dict, ...] = ()

    def to_json(self) -> str:
        payload = {
            "candidates": [
                {
                    "params": c.params,
                    "mean_accuracy": c.mean_accuracy,
                    "fold_accuracies": list(c.fold_accuracies),
                    **({"fold_macro_f1": list(c.fold_macro_f1)}
                       if c.fold_macro_f1 is not None else {}),
                    **({"failed": True} if c.failed else {}),
                }
                for c in self.candidates
            ],
            "best": {"params": self.best_params,
                     "mean_accuracy": self.best_mean_accuracy},
            "failures": list(self.failures),
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _macro_f1(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    scores = []
    for cls in (-1, 0, 1):
        tp = np.sum((y_pred == cls) & (y_true == cls))
        fp = np.sum((y_pred == cls) & (y_true != cls))
        fn = np.sum((y_pred != cls) & (y_true == cls))
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    return float(np.mean(scores))


def _eval_task(family, params, X, y, fold, mode, task_seed, want_f1):
    from .classic import fit_classifier, predict_classifier

    train, test = fold
    if mode == "leak_free":
        scaler = scaler_fit(X[train])
        X_train = scaler_transform(scaler, X[train])
        X_test = scaler_transform(scaler, X[test])
    else:
        X_train, X_test = X[train], X[test]  # already scaled on the full matrix
    model = fit_classifier(family, params, X_train, y[train], seed=task_seed)
    pred = predict_classifier(model, X_test)
    acc = float(np.mean(pred == y[test]))
    f1 = _macro_f1(y[test], pred) if want_f1 else None
    return acc, f1


def grid_search(family: str, grid, frame: Frame, plan: FoldPlan,
                mode: str = "paper_faithful", seed: int = 0, n_jobs: int = 1,
                report_macro_f1: bool = False) -> GridResult:
    """Mean test accuracy per candidate; first maximizer wins.

    A candidate whose fit raises on any fold is recorded under ``failures``
    and scores 0.0. Each (candidate, fold) task gets its own seed derived
    from (seed, candidate_index, fold_index), and results are reduced in
    declared order, so thread count cannot change the outcome.
    """
    candidates = expand_grid(grid)
    if not candidates:
        raise ConfigError("empty hyperparameter grid")
    if frame.labels is None:
        raise ConfigError("grid_search needs a labeled frame")
    if mode not in ("paper_faithful", "leak_free"):
        raise ConfigError(f"unknown mode {mode!r}")
    X = frame.feature_matrix()
    y = frame.labels
    if plan.folds[-1][1].max() >= len(frame):
        raise TooFewSamples("fold plan exceeds frame length")
    if mode == "paper_faithful":
        X = scaler_transform(scaler_fit(X), X)

    tasks = [(ci, fi) for ci in range(len(candidates))
             for fi in range(len(plan.folds))]

    def run(task):
        ci, fi = task
        try:
            return _eval_task(family, candidates[ci], X, y, plan.folds[fi],
                              mode, derive_seed(seed, ci, fi), report_macro_f1)
        except MtscError as exc:
            return FitFailure(ci, fi, exc)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            raw = list(pool.map(run, tasks))
    else:
        raw = [run(t) for t in tasks]

    outcomes = dict(zip(tasks, raw))
    rows, failures = [], []
    for ci, params in enumerate(candidates):
        accs, f1s, failed = [], [], False
        for fi in range(len(plan.folds)):
            out = outcomes[(ci, fi)]
            if isinstance(out, FitFailure):
                failed = True
                failures.append({"candidate": ci, "params": params,
                                 "fold": fi, "error": str(out.cause)})
                accs.append(0.0)
                f1s.append(0.0)
            else:
                accs.append(out[0])
                f1s.append(out[1] if out[1] is not None else 0.0)
        mean_acc = 0.0 if failed else float(np.mean(accs))
        rows.append(GridCandidate(
            params=params,
            mean_accuracy=mean_acc,
            fold_accuracies=tuple(accs),
            fold_macro_f1=tuple(f1s) if report_macro_f1 else None,
            failed=failed,
        ))

    best_idx = max(range(len(rows)), key=lambda i: rows[i].mean_accuracy)
    # max() already keeps the first maximizer on ties
    return GridResult(tuple(rows), rows[best_idx].params,
                      rows[best_idx].mean_accuracy, tuple(failures))
