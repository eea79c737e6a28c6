"""`mtsc` command line: data plumbing, training, backtests, sweeps.

Subcommands: ingest, label, train, backtest, sweep, gradcheck, synth,
report. Flags given on the command line override config-file values.
Exit codes: 0 ok, 2 configuration error, 3 data error, 4 numeric failure;
every failure prints a single `mtsc: <ErrorKind>: <message>` line on
stderr.
"""

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from .. import errors
from ..classic import model_to_json
from ..frame import label_frame, load_csv, write_frame_csv
from ..neural import gradcheck_convnet, gradcheck_lstm
from .config import build_run_config, build_sweep_spec, load_config_file
from .plots import emit_plot, parse_plot_csv
from .runner import family_report_payload, family_run, prepare_run, \
    run_scenario, size_sweep
from .synth import KINDS, gen_synthetic

__all__ = ["main", "build_parser"]

GRADCHECK_TOL = 1e-4


def _add_common(parser):
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--seed", type=int, help="global random seed")
    parser.add_argument("--mode", choices=("paper", "leakfree"),
                        help="labeling/scaling discipline")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--format", choices=("csv", "json", "svg"),
                        help="artifact format for plot-capable commands")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mtsc", description="multivariate time-series classification "
                                 "experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    specs = {
        "ingest": "parse a CSV into the canonical frame layout",
        "label": "attach quantile labels to next-step returns",
        "train": "grid-search and fit the configured model families",
        "backtest": "full scenario run: search, fit, signals, backtest",
        "sweep": "dataset-size sweep heatmap",
        "gradcheck": "finite-difference check of both network gradients",
        "synth": "generate a synthetic benchmark series",
        "report": "summarize a run directory; regenerate plots",
    }
    parsers = {}
    for name, help_text in specs.items():
        parsers[name] = sub.add_parser(name, help=help_text)
        _add_common(parsers[name])
    for name in ("ingest", "label", "train", "backtest", "sweep"):
        parsers[name].add_argument("--input", help="input CSV path")
    for name in ("train", "backtest", "sweep"):
        parsers[name].add_argument("--families",
                                   help="comma-separated family subset")
    parsers["synth"].add_argument("--kind", required=True, choices=KINDS)
    parsers["synth"].add_argument("--n", type=int, default=1000)
    parsers["synth"].add_argument("--d", type=int, default=6)
    parsers["synth"].add_argument("--shift-at", type=int, default=400,
                                  dest="shift_at")
    parsers["report"].add_argument("--run", required=True,
                                   help="run directory holding manifest.json")
    return parser


def _config_pairs(args):
    return load_config_file(args.config) if args.config else {}


def _run_config(args):
    families = None
    if getattr(args, "families", None):
        families = tuple(tok.strip() for tok in args.families.split(",")
                         if tok.strip())
    return build_run_config(
        _config_pairs(args), seed=args.seed, mode=args.mode, outdir=args.out,
        input=getattr(args, "input", None), families=families)


def _outdir(config):
    out = Path(config.outdir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _iso(ns):
    return datetime.fromtimestamp(ns / 1e9, tz=timezone.utc).isoformat()


def cmd_ingest(args):
    config = _run_config(args)
    if not config.input:
        raise errors.ConfigError("ingest needs --input or run.input")
    frame = load_csv(config.input, config.schema)
    out = _outdir(config)
    write_frame_csv(frame, out / "frame.csv")
    summary = {"rows": len(frame), "columns": frame.feature_names,
               "start": _iso(frame.timestamps[0]),
               "end": _iso(frame.timestamps[-1])}
    (out / "ingest.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    print(out / "frame.csv")
    return 0


def cmd_label(args):
    config = _run_config(args)
    if not config.input:
        raise errors.ConfigError("label needs --input or run.input")
    frame = load_csv(config.input, config.schema)
    labeled, thresholds = label_frame(frame, config.q_low, config.q_high,
                                      config.mode)
    out = _outdir(config)
    write_frame_csv(labeled, out / "labeled.csv")
    (out / "thresholds.json").write_text(json.dumps(
        {"lower": thresholds.lower, "upper": thresholds.upper,
         "mode": config.mode}, sort_keys=True, indent=2) + "\n",
        encoding="utf-8")
    print(out / "labeled.csv")
    return 0


def cmd_train(args):
    config = _run_config(args)
    labeled, market, thresholds = prepare_run(config)
    out = _outdir(config)
    statuses = {}
    for idx, family in enumerate(config.families):
        try:
            run = family_run(config, labeled, market, family, idx)
        except errors.MtscError as exc:
            statuses[family] = {"status": "error",
                                "kind": type(exc).__name__,
                                "error": str(exc)}
            continue
        payload = family_report_payload(run, config, thresholds)
        del payload["backtest"]
        (out / f"report_{family}.json").write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n",
            encoding="utf-8")
        (out / f"model_{family}.json").write_text(model_to_json(run.model),
                                                  encoding="utf-8")
        statuses[family] = {"status": "ok",
                            "cv_accuracy": run.grid.best_mean_accuracy}
    print(json.dumps(statuses, sort_keys=True))
    return 0


def _svg_siblings(directory):
    for csv_path in sorted(Path(directory).glob("*.csv")):
        if csv_path.name in ("frame.csv", "labeled.csv"):
            continue
        data = parse_plot_csv(csv_path.read_text(encoding="utf-8"))
        emit_plot(data, "svg", csv_path.with_suffix(".svg"))


def cmd_backtest(args):
    config = _run_config(args)
    out = run_scenario(config)
    if args.format == "svg":
        _svg_siblings(out)
    print(out / "manifest.json")
    return 0


def cmd_sweep(args):
    config = _run_config(args)
    spec = build_sweep_spec(_config_pairs(args))
    if getattr(args, "families", None):
        families = tuple(tok.strip() for tok in args.families.split(",")
                         if tok.strip())
        spec = build_sweep_spec(_config_pairs(args), families=families)
    size_sweep(spec, config)
    out = Path(config.outdir)
    if args.format == "svg":
        data = parse_plot_csv((out / "heatmap.csv").read_text(encoding="utf-8"))
        emit_plot(data, "svg", out / "heatmap.svg")
    print(out / "heatmap.csv")
    return 0


def cmd_gradcheck(args):
    seed = args.seed if args.seed is not None else 0
    result = {"convnet": gradcheck_convnet(seed=seed),
              "lstm": gradcheck_lstm(seed=seed),
              "seed": seed, "tol": GRADCHECK_TOL}
    line = json.dumps(result, sort_keys=True)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "gradcheck.json").write_text(line + "\n", encoding="utf-8")
    print(line)
    if max(result["convnet"], result["lstm"]) > GRADCHECK_TOL:
        raise errors.DidNotConverge(
            f"gradient check exceeded {GRADCHECK_TOL}: {line}")
    return 0


def cmd_synth(args):
    seed = args.seed if args.seed is not None else 0
    frame = gen_synthetic(args.kind, args.n, args.d, seed,
                          shift_at=args.shift_at)
    out = Path(args.out or "runs")
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"synth_{args.kind}_{args.n}x{args.d}_seed{seed}.csv"
    write_frame_csv(frame, path)
    print(path)
    return 0


def cmd_report(args):
    run_dir = Path(args.run)
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        raise errors.ConfigError(f"no manifest.json under {run_dir}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if args.format == "svg":
        _svg_siblings(run_dir)
    summary = {"mode": manifest["mode"], "seed": manifest["seed"],
               "config_hash": manifest["config_hash"],
               "families": {
                   name: ({"final_strategy": entry["final_strategy"],
                           "in_sample_accuracy": entry["in_sample_accuracy"]}
                          if entry["status"] == "ok"
                          else {"error": entry["kind"]})
                   for name, entry in manifest["families"].items()}}
    print(json.dumps(summary, sort_keys=True))
    return 0


_COMMANDS = {
    "ingest": cmd_ingest,
    "label": cmd_label,
    "train": cmd_train,
    "backtest": cmd_backtest,
    "sweep": cmd_sweep,
    "gradcheck": cmd_gradcheck,
    "synth": cmd_synth,
    "report": cmd_report,
}

_EXIT_CODES = ((errors.ConfigError, 2), (errors.DataError, 3),
               (errors.NumericError, 4), (errors.MtscError, 4))


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except errors.MtscError as exc:
        message = " ".join(str(exc).split())
        print(f"mtsc: {type(exc).__name__}: {message}", file=sys.stderr)
        for kind, code in _EXIT_CODES:
            if isinstance(exc, kind):
                return code
        return 4
    except OSError as exc:
        message = " ".join(str(exc).split())
        print(f"mtsc: OSError: {message}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
