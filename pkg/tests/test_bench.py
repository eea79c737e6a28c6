import json

import numpy as np
import pytest

from mtsc import errors
from mtsc.bench import (RunConfig, SweepSpec, build_run_config,
                        build_sweep_spec, config_hash, emit_plot,
                        gen_synthetic, parse_config_text, parse_plot_csv,
                        prepare_run, run_scenario, size_sweep)
from mtsc.bench.cli import main
from mtsc.classic import family_names, register_family
from mtsc.frame import label_frame, load_frame_csv
from mtsc.pipeline import scaler_fit, scaler_transform
from mtsc.classic import fit_classifier, predict_classifier


def _boom_fit(params, X, y, seed):
    raise errors.DidNotConverge("boom family never fits")


def _boom_predict(state, X):
    return np.zeros(len(X), dtype=np.int64)


register_family("boom", _boom_fit, _boom_predict, (), {})


# --- configuration ---------------------------------------------------------------

def test_run_config_defaults_match_reference_settings():
    cfg = RunConfig()
    assert (cfg.q_low, cfg.q_high) == (0.33, 0.67)
    assert cfg.n_splits == 5
    assert (cfg.epochs, cfg.batch_size, cfg.lr) == (100, 32, 1e-5)
    assert cfg.mode == "paper_faithful"
    assert set(cfg.families) == set(family_names())


def test_sweep_defaults_produce_reference_sizes():
    assert SweepSpec().sizes == (200, 500, 800, 1100, 1400, 1700)
    assert SweepSpec().start_offset == 10000


def test_parse_config_text():
    pairs = parse_config_text(
        "# comment\n\nrun.seed = 7\nrun.mode=leakfree\n")
    assert pairs == {"run.seed": "7", "run.mode": "leakfree"}
    with pytest.raises(errors.ConfigError):
        parse_config_text("run.seed\n")
    with pytest.raises(errors.ConfigError):
        parse_config_text("run.seed=1\nrun.seed=2\n")
    with pytest.raises(errors.ConfigError):
        parse_config_text("=3\n")


def test_build_run_config_from_pairs_and_overrides():
    pairs = parse_config_text("\n".join([
        "run.seed=7",
        "run.mode=leakfree",
        "run.families=logistic,ridge",
        "run.lr=0.001",
        "grid.logistic.C=0.1,1",
        "grid.logistic.solver=liblinear",
        "schema.timestamp=date",
    ]))
    cfg = build_run_config(pairs)
    assert cfg.seed == 7
    assert cfg.mode == "leak_free"
    assert cfg.families == ("logistic", "ridge")
    assert cfg.lr == 0.001
    assert cfg.grids == {"logistic": {"C": [0.1, 1],
                                      "solver": ["liblinear"]}}
    assert cfg.schema.timestamp == "date"
    override = build_run_config(pairs, seed=9, mode=None)
    assert override.seed == 9 and override.mode == "leak_free"


def test_build_sweep_spec_from_pairs():
    pairs = parse_config_text("sweep.initial_size=100\nsweep.steps=2\n"
                              "run.seed=1\n")
    spec = build_sweep_spec(pairs)
    assert spec.sizes == (100, 400)
    with pytest.raises(errors.ConfigError):
        build_sweep_spec({"sweep.bogus": "1"})


def test_config_validation_errors():
    with pytest.raises(errors.ConfigError):
        RunConfig(mode="bogus")
    with pytest.raises(errors.ConfigError):
        RunConfig(q_low=0.7, q_high=0.3)
    with pytest.raises(errors.ConfigError):
        RunConfig(n_splits=1)
    with pytest.raises(errors.ConfigError):
        RunConfig(lr=0.0)
    with pytest.raises(errors.ConfigError):
        RunConfig(families=("no_such_family",))
    with pytest.raises(errors.ConfigError):
        SweepSpec(initial_size=10)
    assert RunConfig(mode="paper").mode == "paper_faithful"
    with pytest.raises(errors.ConfigError):
        build_run_config({"run.bogus": "1"})
    with pytest.raises(errors.ConfigError):
        build_run_config({"run.seed": "seven"})


def test_config_hash_tracks_semantic_fields_only():
    base = RunConfig(families=("logistic",), seed=3)
    assert config_hash(base) == config_hash(RunConfig(families=("logistic",),
                                                      seed=3))
    assert config_hash(base) == config_hash(
        RunConfig(families=("logistic",), seed=3, outdir="elsewhere"))
    assert config_hash(base) != config_hash(
        RunConfig(families=("logistic",), seed=4))
    assert config_hash(base) != config_hash(
        RunConfig(families=("logistic",), seed=3, mode="leak_free"))
    # an explicit grid equal to the registry default hashes identically
    from mtsc.classic import family_grid
    explicit = RunConfig(families=("logistic",), seed=3,
                         grids={"logistic": family_grid("logistic")})
    assert config_hash(base) == config_hash(explicit)
    # sweep participates when given
    assert config_hash(base, SweepSpec()) != config_hash(base)
    assert config_hash(base, SweepSpec()) != config_hash(
        base, SweepSpec(steps=2))


# --- synthetic data --------------------------------------------------------------

def test_synthetic_frames_are_seed_deterministic():
    a = gen_synthetic("planted_signal", 200, 4, seed=5)
    b = gen_synthetic("planted_signal", 200, 4, seed=5)
    np.testing.assert_array_equal(a.returns, b.returns)
    for col in a.columns:
        np.testing.assert_array_equal(a.columns[col], b.columns[col])
    c = gen_synthetic("planted_signal", 200, 4, seed=6)
    assert not np.array_equal(a.returns, c.returns)


def test_synthetic_frame_layout():
    frame = gen_synthetic("planted_signal", 120, 3, seed=0)
    assert list(frame.columns) == ["close", "f0", "f1", "f2"]
    assert frame.returns[0] == 0.0
    assert (frame.columns["close"] > 0).all()
    np.testing.assert_allclose(frame.columns["close"],
                               100.0 * np.cumprod(1.0 + frame.returns),
                               rtol=1e-12)


def _in_sample_accuracy(frame, family="logistic", params=None):
    labeled, _ = label_frame(frame)
    X = labeled.feature_matrix()
    Xs = scaler_transform(scaler_fit(X), X)
    model = fit_classifier(family, params or {"C": 1, "solver": "liblinear"},
                           Xs, labeled.labels, seed=0)
    return float((predict_classifier(model, Xs) == labeled.labels).mean())


def test_planted_signal_is_learnable():
    frame = gen_synthetic("planted_signal", 3000, 6, seed=0)
    assert _in_sample_accuracy(frame) >= 0.7


def test_random_walk_stays_near_base_rate():
    frame = gen_synthetic("random_walk", 3000, 6, seed=0)
    assert 0.25 <= _in_sample_accuracy(frame) <= 0.42


def test_regime_shift_flips_after_the_break():
    planted = gen_synthetic("planted_signal", 900, 4, seed=3)
    shifted = gen_synthetic("regime_shift", 900, 4, seed=3, shift_at=400)
    np.testing.assert_array_equal(planted.returns[:401], shifted.returns[:401])
    assert not np.array_equal(planted.returns[401:], shifted.returns[401:])


def test_synthetic_validation():
    with pytest.raises(errors.InvalidParams):
        gen_synthetic("planted_signal", 20, 3, seed=0)
    with pytest.raises(errors.InvalidParams):
        gen_synthetic("planted_signal", 100, 0, seed=0)
    with pytest.raises(errors.ConfigError):
        gen_synthetic("volcano", 100, 3, seed=0)


# --- plots -----------------------------------------------------------------------

def curve_data():
    t = np.arange(5.0)
    return {"t": t, "market": 1.0 + 0.01 * t, "model": 1.0 + 0.02 * t}


def test_curve_csv_round_trip(tmp_path):
    path = emit_plot(curve_data(), "csv", tmp_path / "c.csv")
    first = path.read_bytes()
    parsed = parse_plot_csv(first.decode())
    again = emit_plot(parsed, "csv", tmp_path / "c2.csv").read_bytes()
    assert first == again
    assert first.decode().splitlines()[0] == "t,market,model"


def test_csv_uses_twelve_significant_digits(tmp_path):
    data = {"t": [0.0, 1.0], "v": [1.0 / 3.0, 2.0 / 3.0]}
    text = emit_plot(data, "csv", tmp_path / "d.csv").read_text()
    assert "0.333333333333" in text
    assert "0.666666666667" in text


def test_constant_series_svg_is_one_horizontal_polyline(tmp_path):
    data = {"t": np.arange(4.0), "flat": np.full(4, 2.5)}
    text = emit_plot(data, "svg", tmp_path / "p.svg").read_text()
    assert text.count("<polyline") == 1
    points = text.split('points="')[1].split('"')[0].split()
    ys = {p.split(",")[1] for p in points}
    assert len(ys) == 1
    assert 'viewBox="0 0 900 500"' in text


def test_multi_series_svg_uses_palette(tmp_path):
    text = emit_plot(curve_data(), "svg", tmp_path / "m.svg").read_text()
    assert text.count("<polyline") == 2
    assert "#1f77b4" in text and "#ff7f0e" in text
    assert ">market</text>" in text and ">model</text>" in text


def heatmap_data():
    return {"families": ["svm", "knn"], "sizes": [200, 500],
            "values": [[1.25, 0.75], [1.0, None]]}


def test_heatmap_csv_round_trip(tmp_path):
    path = emit_plot(heatmap_data(), "csv", tmp_path / "h.csv")
    first = path.read_bytes()
    text = first.decode()
    assert text.splitlines()[0] == "family,200,500"
    assert "nan" in text
    parsed = parse_plot_csv(text)
    again = emit_plot(parsed, "csv", tmp_path / "h2.csv").read_bytes()
    assert first == again


def test_heatmap_svg_annotations(tmp_path):
    text = emit_plot(heatmap_data(), "svg", tmp_path / "h.svg").read_text()
    assert ">1.2500</text>" in text
    assert ">0.7500</text>" in text
    assert ">nan</text>" in text
    assert ">svm</text>" in text and ">200</text>" in text
    assert text.count("<rect") >= 4


def test_emit_plot_rejects_bad_input(tmp_path):
    with pytest.raises(errors.EmptyData):
        emit_plot({"t": []}, "csv", tmp_path / "x.csv")
    with pytest.raises(errors.EmptyData):
        emit_plot({"t": [], "v": []}, "csv", tmp_path / "x.csv")
    with pytest.raises(errors.EmptyData):
        emit_plot({"families": [], "sizes": [], "values": []}, "svg",
                  tmp_path / "x.svg")
    with pytest.raises(errors.ConfigError):
        emit_plot(curve_data(), "png", tmp_path / "x.png")


# --- runner ----------------------------------------------------------------------

FAST = ("gaussian_nb", "ridge")


def test_prepare_run_aligns_next_step_returns():
    frame = gen_synthetic("planted_signal", 120, 3, seed=1)
    cfg = RunConfig(families=FAST, seed=0)
    labeled, market, thresholds = prepare_run(cfg, frame=frame)
    assert len(labeled) == 119
    np.testing.assert_array_equal(market, frame.returns[1:])
    assert thresholds.lower <= thresholds.upper


def test_run_scenario_writes_complete_artifacts(tmp_path):
    frame = gen_synthetic("planted_signal", 240, 4, seed=2)
    cfg = RunConfig(families=FAST, seed=2, mode="leak_free",
                    outdir=str(tmp_path / "run"))
    out = run_scenario(cfg, frame=frame)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["format"] == "mtsc-run"
    assert manifest["mode"] == "leak_free"
    assert set(manifest["families"]) == set(FAST)
    for family, entry in manifest["families"].items():
        assert entry["status"] == "ok"
        for name in entry["artifacts"]:
            assert (out / name).exists()
        report = json.loads((out / f"report_{family}.json").read_text())
        assert report["heldout"]["steps"] > 0
        assert report["backtest"]["mode"] == "leak_free"
        curves = (out / f"curves_{family}.csv").read_text()
        assert curves.splitlines()[0] == "t,market,model,random"
    assert "numpy" in manifest["versions"]


def test_run_scenario_is_deterministic_across_thread_counts(tmp_path):
    frame = gen_synthetic("planted_signal", 240, 4, seed=4)
    runs = {}
    for name, jobs in (("a", 1), ("b", 3)):
        cfg = RunConfig(families=FAST, seed=4, outdir=str(tmp_path / name))
        runs[name] = run_scenario(cfg, frame=frame, n_jobs=jobs)
    files = sorted(p.name for p in runs["a"].iterdir())
    assert files == sorted(p.name for p in runs["b"].iterdir())
    for name in files:
        assert (runs["a"] / name).read_bytes() == \
            (runs["b"] / name).read_bytes(), name


def test_run_scenario_records_family_failure_without_aborting(tmp_path):
    frame = gen_synthetic("planted_signal", 240, 4, seed=5)
    cfg = RunConfig(families=("gaussian_nb", "boom"), seed=5,
                    outdir=str(tmp_path / "run"))
    out = run_scenario(cfg, frame=frame)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["families"]["gaussian_nb"]["status"] == "ok"
    bad = manifest["families"]["boom"]
    assert bad["status"] == "error"
    assert bad["kind"] == "DidNotConverge"
    assert not (out / "report_boom.json").exists()


def test_planted_signal_winner_beats_market_in_sample(tmp_path):
    frame = gen_synthetic("planted_signal", 400, 6, seed=6)
    cfg = RunConfig(families=("logistic", "gaussian_nb"), seed=6,
                    grids={"logistic": {"C": [1], "solver": ["liblinear"]}},
                    outdir=str(tmp_path / "run"))
    out = run_scenario(cfg, frame=frame)
    manifest = json.loads((out / "manifest.json").read_text())
    finals = [entry["final_strategy"]
              for entry in manifest["families"].values()]
    market = manifest["families"]["logistic"]["final_market"]
    assert max(finals) >= market


def sweep_bits(tmp_path, seed=7):
    frame = gen_synthetic("planted_signal", 320, 4, seed=seed)
    cfg = RunConfig(families=("gaussian_nb",), seed=seed,
                    outdir=str(tmp_path / "sweep"))
    spec = SweepSpec(initial_size=300, steps=1, start_offset=0,
                     families=("gaussian_nb",))
    return frame, cfg, spec


def test_single_cell_sweep_matches_run_scenario(tmp_path):
    frame, cfg, spec = sweep_bits(tmp_path)
    payload = size_sweep(spec, cfg, frame=frame)
    assert payload["sizes"] == [300]
    scen_cfg = RunConfig(families=("gaussian_nb",), seed=7,
                         outdir=str(tmp_path / "scen"))
    out = run_scenario(scen_cfg, frame=frame.slice(0, 300))
    manifest = json.loads((out / "manifest.json").read_text())
    assert payload["values"][0][0] == \
        manifest["families"]["gaussian_nb"]["final_strategy"]


def test_sweep_writes_heatmap_and_marks_failures(tmp_path):
    frame = gen_synthetic("planted_signal", 320, 4, seed=8)
    cfg = RunConfig(families=("gaussian_nb",), seed=8,
                    outdir=str(tmp_path / "sweep"))
    spec = SweepSpec(initial_size=150, increment=150, steps=2, start_offset=0,
                     families=("gaussian_nb", "boom"))
    payload = size_sweep(spec, cfg, frame=frame)
    assert payload["values"][1] == [None, None]
    assert {e["family"] for e in payload["errors"]} == {"boom"}
    csv_text = (tmp_path / "sweep" / "heatmap.csv").read_text()
    assert csv_text.splitlines()[0] == "family,150,300"
    assert "boom,nan,nan" in csv_text
    stored = json.loads((tmp_path / "sweep" / "heatmap.json").read_text())
    assert stored["values"] == payload["values"]


def test_sweep_requires_enough_rows(tmp_path):
    frame, cfg, spec = sweep_bits(tmp_path)
    long_spec = SweepSpec(initial_size=500, steps=1, start_offset=0,
                          families=("gaussian_nb",))
    with pytest.raises(errors.TooFewSamples):
        size_sweep(long_spec, cfg, frame=frame)


# --- command line ------------------------------------------------------------------

def synth_csv(tmp_path, kind="planted_signal", n=240, seed=1):
    assert main(["synth", "--kind", kind, "--n", str(n), "--d", "3",
                 "--seed", str(seed), "--out", str(tmp_path)]) == 0
    return tmp_path / f"synth_{kind}_{n}x3_seed{seed}.csv"


def test_cli_synth_and_ingest(tmp_path, capsys):
    path = synth_csv(tmp_path)
    assert path.exists()
    assert str(path) in capsys.readouterr().out
    frame = load_frame_csv(path)
    assert len(frame) == 240
    out = tmp_path / "ingested"
    assert main(["ingest", "--input", str(path), "--out", str(out)]) == 0
    assert (out / "frame.csv").exists()
    summary = json.loads((out / "ingest.json").read_text())
    assert summary["rows"] == 240


def test_cli_label(tmp_path):
    path = synth_csv(tmp_path)
    out = tmp_path / "labeled"
    assert main(["label", "--input", str(path), "--mode", "leakfree",
                 "--out", str(out)]) == 0
    thresholds = json.loads((out / "thresholds.json").read_text())
    assert thresholds["mode"] == "leak_free"
    labeled = load_frame_csv(out / "labeled.csv")
    assert set(np.unique(labeled.labels)) <= {-1, 0, 1}


def test_cli_backtest_with_config_and_svg(tmp_path):
    path = synth_csv(tmp_path)
    config = tmp_path / "run.cfg"
    config.write_text("run.families=gaussian_nb,ridge\nrun.seed=3\n"
                      f"run.input={path}\n")
    out = tmp_path / "run"
    assert main(["backtest", "--config", str(config), "--out", str(out),
                 "--format", "svg"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 3
    assert (out / "curves_gaussian_nb.svg").exists()
    assert (out / "curves_ridge.svg").exists()


def test_cli_train_writes_models_without_backtest(tmp_path, capsys):
    path = synth_csv(tmp_path)
    out = tmp_path / "train"
    assert main(["train", "--input", str(path), "--families", "gaussian_nb",
                 "--out", str(out)]) == 0
    assert (out / "model_gaussian_nb.json").exists()
    report = json.loads((out / "report_gaussian_nb.json").read_text())
    assert "backtest" not in report
    assert "grid" in report
    statuses = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert statuses["gaussian_nb"]["status"] == "ok"


def test_cli_sweep_and_report(tmp_path, capsys):
    path = synth_csv(tmp_path, n=320)
    config = tmp_path / "sweep.cfg"
    config.write_text("sweep.initial_size=150\nsweep.increment=150\n"
                      "sweep.steps=2\nsweep.start_offset=0\n"
                      f"run.input={path}\nrun.families=gaussian_nb\n")
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(config), "--out", str(out),
                 "--format", "svg"]) == 0
    assert (out / "heatmap.csv").exists()
    assert (out / "heatmap.svg").exists()
    run_out = tmp_path / "run"
    assert main(["backtest", "--config", str(config), "--out",
                 str(run_out)]) == 0
    capsys.readouterr()
    assert main(["report", "--run", str(run_out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert "gaussian_nb" in summary["families"]
    assert main(["report", "--run", str(run_out), "--format", "svg"]) == 0
    assert (run_out / "curves_gaussian_nb.svg").exists()


def test_cli_gradcheck(tmp_path, capsys):
    assert main(["gradcheck", "--seed", "0", "--out", str(tmp_path)]) == 0
    line = capsys.readouterr().out.strip()
    result = json.loads(line)
    assert result["convnet"] <= 1e-4 and result["lstm"] <= 1e-4
    stored = json.loads((tmp_path / "gradcheck.json").read_text())
    assert stored == result


def test_cli_error_paths(tmp_path, capsys):
    assert main(["backtest", "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert err.startswith("mtsc: ConfigError:")
    assert len(err.strip().splitlines()) == 1

    assert main(["synth", "--kind", "planted_signal", "--n", "10",
                 "--out", str(tmp_path)]) == 4
    assert capsys.readouterr().err.startswith("mtsc: InvalidParams:")

    missing = tmp_path / "nope.csv"
    assert main(["label", "--input", str(missing), "--out",
                 str(tmp_path)]) == 3
    assert capsys.readouterr().err.startswith("mtsc:")

    config = tmp_path / "bad.cfg"
    config.write_text("run.bogus=1\n")
    assert main(["backtest", "--config", str(config), "--out",
                 str(tmp_path)]) == 2

    with pytest.raises(SystemExit) as exc:
        main(["backtest", "--mode", "sideways"])
    assert exc.value.code == 2
