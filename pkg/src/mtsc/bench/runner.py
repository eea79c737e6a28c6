"""Scenario runs and the dataset-size sweep.

A scenario labels the input series, grid-searches every configured model
family with chronological cross-validation, refits each winner on the
full window, and backtests its in-sample signals against the market and
a seeded random baseline. The sweep repeats that per (family, size) cell
on growing prefixes of the series and tabulates final cumulative returns.

All artifacts are JSON/CSV with sorted keys and no timestamps, so a
(config, seed) pair produces byte-identical outputs on every run at any
thread count. Family failures are recorded and do not abort the others.
"""

import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__, errors
from ..classic import fit_classifier, model_to_json, predict_classifier
from ..evalbt import BacktestReport, backtest
from ..frame import Frame, label_frame, load_csv
from ..pipeline import (GridResult, derive_seed, grid_search, scaler_fit,
                        scaler_transform, time_series_split)
from .config import config_hash
from .plots import emit_plot

__all__ = ["FamilyRun", "prepare_run", "family_run", "run_scenario",
           "size_sweep"]

MANIFEST_FORMAT = "mtsc-run"
HEATMAP_FORMAT = "mtsc-heatmap"
VERSION = 1


def _dumps(payload):
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


@dataclass(frozen=True)
class FamilyRun:
    """Everything one family produced: search, final model, backtest."""

    family: str
    grid: GridResult
    model: object
    signals: np.ndarray
    accuracy: float
    report: BacktestReport
    heldout: dict | None


def _resolve_frame(config, frame):
    if frame is not None:
        return frame
    if not config.input:
        raise errors.ConfigError("no input data: pass a frame or set run.input")
    return load_csv(config.input, config.schema)


def prepare_run(config, frame=None):
    """Label the input and align the tradable next-step return series.

    Row t of the labeled frame predicts the return realized over
    (t, t+1]; that return is what a position opened at t earns, so the
    market series is the raw returns shifted to start one step past the
    first labeled row.
    """
    frame = _resolve_frame(config, frame)
    labeled, thresholds = label_frame(frame, config.q_low, config.q_high,
                                      config.mode)
    offset = len(frame) - 1 - len(labeled)
    market = frame.returns[offset + 1:offset + 1 + len(labeled)]
    return labeled, market, thresholds


def _heldout_stats(config, labeled, market, family, params, plan, family_idx):
    X = labeled.feature_matrix()
    y = labeled.labels
    chunks, hits, total = [], 0, 0
    for fold_i, (train, test) in enumerate(plan.folds):
        scaler = scaler_fit(X[train])
        model = fit_classifier(family, params, scaler_transform(scaler, X[train]),
                               y[train],
                               seed=derive_seed(config.seed, family_idx, 303,
                                                fold_i))
        preds = predict_classifier(model, scaler_transform(scaler, X[test]))
        chunks.append(market[test] * preds)
        hits += int((preds == y[test]).sum())
        total += len(test)
    returns = np.concatenate(chunks)
    return {"final_cumulative": float(np.cumprod(1.0 + returns)[-1]),
            "accuracy": hits / total, "steps": total}


def family_run(config, labeled, market, family, family_idx, n_jobs=1):
    """Grid search, final in-sample fit, and backtest for one family.

    Fit and baseline seeds derive from (config seed, family index), never
    from scheduling, and the grid search reduces fold results in declared
    order, so the outcome is thread-count independent. Leak-free runs add
    held-out-fold statistics from per-fold refits of the winner.
    """
    plan = time_series_split(len(labeled), config.n_splits)
    grid = config.grid_for(family)
    result = grid_search(family, grid, labeled, plan, mode=config.mode,
                         seed=config.seed, n_jobs=n_jobs)
    X = labeled.feature_matrix()
    Xs = scaler_transform(scaler_fit(X), X)
    model = fit_classifier(family, result.best_params, Xs, labeled.labels,
                           seed=derive_seed(config.seed, family_idx, 101))
    signals = predict_classifier(model, Xs)
    accuracy = float((signals == labeled.labels).mean())
    report = backtest(market, signals,
                      random_seed=derive_seed(config.seed, family_idx, 202),
                      mode=config.mode)
    heldout = None
    if config.mode == "leak_free":
        heldout = _heldout_stats(config, labeled, market, family,
                                 result.best_params, plan, family_idx)
    return FamilyRun(family=family, grid=result, model=model, signals=signals,
                     accuracy=accuracy, report=report, heldout=heldout)


def family_report_payload(run, config, thresholds):
    payload = {
        "family": run.family,
        "mode": config.mode,
        "seed": config.seed,
        "grid": json.loads(run.grid.to_json()),
        "in_sample_accuracy": run.accuracy,
        "backtest": run.report.to_dict(),
        "thresholds": [thresholds.lower, thresholds.upper],
    }
    if run.heldout is not None:
        payload["heldout"] = run.heldout
    return payload


def run_scenario(config, frame=None, n_jobs=1):
    """Execute every family and write the artifact set to config.outdir.

    Per family: report_<family>.json, curves_<family>.csv and
    model_<family>.json; manifest.json indexes them and records seed,
    mode, config hash and versions. A failing family is recorded in the
    manifest with its error and the run continues.
    """
    labeled, market, thresholds = prepare_run(config, frame)
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    families = {}
    for idx, family in enumerate(config.families):
        try:
            run = family_run(config, labeled, market, family, idx,
                             n_jobs=n_jobs)
        except errors.MtscError as exc:
            families[family] = {"status": "error",
                                "kind": type(exc).__name__,
                                "error": str(exc)}
            continue
        artifacts = [f"report_{family}.json", f"curves_{family}.csv",
                     f"model_{family}.json"]
        payload = family_report_payload(run, config, thresholds)
        (outdir / artifacts[0]).write_text(_dumps(payload), encoding="utf-8")
        (outdir / artifacts[1]).write_text(run.report.curves_csv(),
                                           encoding="utf-8")
        (outdir / artifacts[2]).write_text(model_to_json(run.model),
                                           encoding="utf-8")
        families[family] = {
            "status": "ok",
            "artifacts": artifacts,
            "best_params": run.grid.best_params,
            "cv_accuracy": run.grid.best_mean_accuracy,
            "in_sample_accuracy": run.accuracy,
            "final_strategy": run.report.final_strategy,
            "final_market": run.report.final_market,
        }
    manifest = {
        "format": MANIFEST_FORMAT,
        "version": VERSION,
        "seed": config.seed,
        "mode": config.mode,
        "config_hash": config_hash(config),
        "versions": {"mtsc": __version__,
                     "numpy": np.__version__,
                     "python": "%d.%d.%d" % sys.version_info[:3]},
        "rows": len(labeled),
        "thresholds": [thresholds.lower, thresholds.upper],
        "families": families,
    }
    (outdir / "manifest.json").write_text(_dumps(manifest), encoding="utf-8")
    return outdir


def size_sweep(spec, config, frame=None, n_jobs=1):
    """Final cumulative return per (family, size) cell; writes the heatmap.

    Each cell labels and models the slice [start_offset, start_offset +
    size) on its own, exactly as a scenario run over that window would.
    Failed cells are null in the JSON and nan in the CSV, with the error
    recorded. Returns the heatmap payload.
    """
    frame = _resolve_frame(config, frame)
    families = tuple(spec.families) or config.families
    sizes = spec.sizes
    needed = spec.start_offset + max(sizes)
    if len(frame) < needed:
        raise errors.TooFewSamples(
            f"sweep needs {needed} rows, frame has {len(frame)}")
    values = [[None] * len(sizes) for _ in families]
    heldout = [[None] * len(sizes) for _ in families]
    failures = []
    for fi, family in enumerate(families):
        for si, size in enumerate(sizes):
            window = frame.slice(spec.start_offset, spec.start_offset + size)
            try:
                labeled, thresholds = label_frame(window, config.q_low,
                                                  config.q_high, config.mode)
                offset = len(window) - 1 - len(labeled)
                market = window.returns[offset + 1:offset + 1 + len(labeled)]
                run = family_run(config, labeled, market, family, fi,
                                 n_jobs=n_jobs)
            except errors.MtscError as exc:
                failures.append({"family": family, "size": size,
                                 "kind": type(exc).__name__,
                                 "error": str(exc)})
                continue
            values[fi][si] = run.report.final_strategy
            if run.heldout is not None:
                heldout[fi][si] = run.heldout["final_cumulative"]
    payload = {
        "format": HEATMAP_FORMAT,
        "version": VERSION,
        "seed": config.seed,
        "mode": config.mode,
        "config_hash": config_hash(config, spec),
        "families": list(families),
        "sizes": list(sizes),
        "values": values,
        "errors": failures,
    }
    if config.mode == "leak_free":
        payload["heldout"] = heldout
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "heatmap.json").write_text(_dumps(payload), encoding="utf-8")
    emit_plot({"families": list(families), "sizes": list(sizes),
               "values": values}, "csv", outdir / "heatmap.csv")
    return payload
