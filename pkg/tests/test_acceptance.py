"""End-to-end acceptance checks, one test per contract item.

Each test pins a user-visible guarantee: analytic solver oracles, gradient
agreement with finite differences, hand-computed metrics, labeling and
backtest identities, chronology of validation folds, the qualitative
more-history-hurts sweep, transfer-learning freezing, conv scaling, and
byte-level determinism of run artifacts.
"""

import json
import time

import numpy as np
import pytest

from mtsc import errors, neural
from mtsc.bench import (RunConfig, SweepSpec, gen_synthetic, run_scenario,
                        size_sweep)
from mtsc.classic import kkt_residual, smo_solve
from mtsc.classic.kernels import KernelSpec, gram
from mtsc.classic.svm import dual_objective
from mtsc.evalbt import backtest, classification_report, confusion_matrix
from mtsc.frame import label_by_quantiles, label_frame
from mtsc.pipeline import time_series_split
from oracles import backtest_loop, svm_dual_max


def separable_instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(10, 61))
    d = int(rng.integers(1, 6))
    w = rng.normal(size=d)
    X = rng.normal(size=(n, d))
    y = np.where(X @ w >= 0, 1.0, -1.0)
    if len(np.unique(y)) < 2:
        y[0] = -y[0]
    X += y[:, None] * w * 0.5
    return X, y, d


def test_svm_two_point_analytic_solution():
    t0 = time.perf_counter()
    X = np.array([[-1.0], [1.0]])
    y = np.array([-1.0, 1.0])
    m = smo_solve(X, y, C=10.0, kernel=KernelSpec("linear"))
    np.testing.assert_allclose(m.alphas, [0.5, 0.5], atol=1e-6)
    assert m.bias == pytest.approx(0.0, abs=1e-6)
    clipped = smo_solve(X, y, C=0.1, kernel=KernelSpec("linear"))
    np.testing.assert_allclose(clipped.alphas, [0.1, 0.1], atol=1e-6)
    assert time.perf_counter() - t0 < 1.0


def test_smo_kkt_monotone_dual_and_enumeration_oracle():
    t0 = time.perf_counter()
    for t in range(50):
        X, y, d = separable_instance(100 + t)
        m = smo_solve(X, y, C=1.0, kernel=KernelSpec("rbf", gamma=1.0 / d))
        assert kkt_residual(m) <= 1e-3
        assert np.all(np.diff(m.objective_history) >= 0)
    for t in range(20):
        rng = np.random.default_rng(500 + t)
        n = int(rng.integers(4, 9))
        d = int(rng.integers(1, 4))
        X = rng.normal(size=(n, d))
        y = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        if len(np.unique(y)) < 2:
            y[0] = -y[0]
        C = float(rng.choice([0.5, 1.0, 10.0]))
        kspec = KernelSpec(str(rng.choice(["linear", "rbf"])), gamma=0.7)
        m = smo_solve(X, y, C, kspec)
        K = gram(kspec, X)
        W_smo = dual_objective(m.alphas, m.support_labels, K)
        assert abs(svm_dual_max(K, y, C) - W_smo) <= 1e-3
    assert time.perf_counter() - t0 < 30.0


def test_network_gradients_match_finite_differences_over_ten_seeds():
    t0 = time.perf_counter()
    for seed in range(10):
        assert neural.gradcheck_convnet(seed=seed) <= 1e-4
        assert neural.gradcheck_lstm(seed=seed) <= 1e-4
    assert time.perf_counter() - t0 < 60.0


def test_confusion_matrix_metrics_match_hand_computation():
    grid = np.array([[30, 5, 10], [7, 40, 3], [8, 2, 45]])
    order = (-1, 0, 1)
    y_true, y_pred = [], []
    for i, t in enumerate(order):
        for j, p in enumerate(order):
            y_true += [t] * grid[i, j]
            y_pred += [p] * grid[i, j]
    report = classification_report(confusion_matrix(y_true, y_pred, order))
    assert report["accuracy"] == pytest.approx(115 / 150, abs=1e-12)
    np.testing.assert_allclose(report["precision"],
                               [30 / 45, 40 / 47, 45 / 58], atol=1e-12)
    np.testing.assert_allclose(report["recall"],
                               [30 / 45, 40 / 50, 45 / 55], atol=1e-12)
    np.testing.assert_allclose(report["f1"],
                               [30 / 45, 80 / 97, 90 / 113], atol=1e-12)


def test_quantile_labeling_frequencies_and_worked_thresholds():
    returns = 0.01 * np.random.default_rng(0).standard_normal(10_000)
    labels, _ = label_by_quantiles(returns)
    for cls in (-1, 0, 1):
        freq = float((labels == cls).mean())
        assert 0.28 <= freq <= 0.39, (cls, freq)
    _, thr = label_by_quantiles(np.array([-0.02, -0.01, 0.0, 0.01, 0.02]))
    assert thr.lower == pytest.approx(-0.0068, abs=1e-12)
    assert thr.upper == pytest.approx(0.0068, abs=1e-12)


def test_backtest_identities_hold_bitwise():
    market = np.random.default_rng(3).normal(0.0, 0.01, 400)
    flat = backtest(market, np.zeros(400, dtype=int))
    assert flat.final_strategy == 1.0
    long_only = backtest(market, np.ones(400, dtype=int))
    np.testing.assert_array_equal(long_only.cumulative_strategy,
                                  long_only.cumulative_market)
    signals = np.random.default_rng(4).integers(-1, 2, 400)
    report = backtest(market, signals)
    loop_strategy, loop_market, loop_curve = backtest_loop(market, signals)
    np.testing.assert_array_equal(report.strategy, loop_strategy)
    np.testing.assert_array_equal(report.cumulative_market, loop_market)
    np.testing.assert_array_equal(report.cumulative_strategy, loop_curve)


def test_every_fold_trains_strictly_before_it_tests():
    rng = np.random.default_rng(11)
    for _ in range(200):
        k = int(rng.integers(2, 9))
        n = int(rng.integers(2 * (k + 1), 500))
        for train, test in time_series_split(n, k).folds:
            assert train.max() < test.min()
    (tr1, te1), (tr2, te2) = time_series_split(6, 2).folds
    np.testing.assert_array_equal(tr1, [0, 1])
    np.testing.assert_array_equal(te1, [2, 3])
    np.testing.assert_array_equal(tr2, [0, 1, 2, 3])
    np.testing.assert_array_equal(te2, [4, 5])


SWEEP_FAMILIES = ("logistic", "ridge", "sgd_linear", "perceptron",
                  "gaussian_nb")
SWEEP_GRIDS = {
    "logistic": {"C": [0.1, 1], "solver": ["liblinear"]},
    "ridge": {"alpha": [1]},
    "sgd_linear": {"alpha": [0.001], "penalty": ["l2"]},
    "perceptron": {"alpha": [0.001], "penalty": ["l2"]},
}


def test_median_final_return_decays_with_training_size(tmp_path):
    t0 = time.perf_counter()
    wins = 0
    for seed in range(5):
        frame = gen_synthetic("regime_shift", 1700, 6, seed)
        cfg = RunConfig(families=SWEEP_FAMILIES, grids=SWEEP_GRIDS, seed=seed,
                        outdir=str(tmp_path / f"s{seed}"))
        spec = SweepSpec(start_offset=0, families=SWEEP_FAMILIES)
        payload = size_sweep(spec, cfg, frame=frame)
        assert payload["sizes"] == [200, 500, 800, 1100, 1400, 1700]
        medians = np.nanmedian(np.array(payload["values"], dtype=float),
                               axis=0)
        wins += bool(medians[0] > medians[-1])
    assert wins >= 4, f"decay held in only {wins} of 5 seeds"
    assert time.perf_counter() - t0 < 600.0


def planted_frames(seed, n_src=1500, n_tgt=100, d=6):
    frame = gen_synthetic("planted_signal", n_src + n_tgt, d, seed)
    labeled, _ = label_frame(frame)
    return labeled.slice(0, n_src), labeled.slice(n_src, len(labeled))


def _target_accuracy(classifier, target):
    preds = neural.predict_lstm_labels(classifier, target.feature_matrix())
    return float((preds == target.labels).mean())


def test_transfer_freezes_weights_and_beats_scratch():
    # window 2 keeps the forget gate on a live gradient path
    source, target = planted_frames(0)
    res = neural.transfer_learn(source, target,
                                neural.TransferConfig(seed=0, window=2))
    for name in neural.GATE_WEIGHTS:
        np.testing.assert_array_equal(getattr(res.params, name),
                                      getattr(res.source_params, name))

    wins = 0
    for seed in range(5):
        source, target = planted_frames(seed)
        cfg = neural.TransferConfig(seed=seed)
        res = neural.transfer_learn(source, target, cfg)
        scratch = neural.fit_lstm_classifier(target, hidden=cfg.hidden,
                                             epochs=cfg.target_epochs,
                                             lr=cfg.lr, seed=seed)
        wins += _target_accuracy(res.classifier, target) > \
            _target_accuracy(scratch, target)
    assert wins >= 3, f"transfer won only {wins} of 5 seeds"


def test_conv_forward_time_scales_subquadratically():
    rng = np.random.default_rng(0)
    W = rng.normal(size=(8, 4, 3))
    b = rng.normal(size=8)

    def median_time(t_len):
        x = rng.normal(size=(8, 4, t_len))
        for _ in range(3):
            neural.conv1d(x, W, b)
        trials = []
        for _ in range(20):
            start = time.perf_counter()
            neural.conv1d(x, W, b)
            trials.append(time.perf_counter() - start)
        return float(np.median(trials))

    ratio = median_time(1024) / median_time(512)
    assert ratio <= 2.5, f"doubling T scaled wall time by {ratio:.2f}"


def test_run_scenario_artifacts_are_byte_identical(tmp_path):
    frame = gen_synthetic("planted_signal", 240, 4, seed=9)
    outs = []
    for name, jobs in (("a", 1), ("b", 1), ("c", 4)):
        cfg = RunConfig(families=("gaussian_nb", "ridge"), seed=9,
                        outdir=str(tmp_path / name))
        outs.append(run_scenario(cfg, frame=frame, n_jobs=jobs))
    names = sorted(p.name for p in outs[0].iterdir())
    assert "manifest.json" in names
    for other in outs[1:]:
        assert sorted(p.name for p in other.iterdir()) == names
        for name in names:
            assert (outs[0] / name).read_bytes() == \
                (other / name).read_bytes(), name
    manifest = json.loads((outs[0] / "manifest.json").read_text())
    assert all(entry["status"] == "ok"
               for entry in manifest["families"].values())
