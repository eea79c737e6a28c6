"""Bit-exact network checkpoints.

A checkpoint is a directory holding `manifest.json` (format tag, version,
kind, hyperparameters, parameter names and shapes) plus one raw
little-endian f64 blob per parameter array.
"""

import json
from pathlib import Path

import numpy as np

from .. import errors
from .convnet import ConvTimeNetLite
from .layers import BnParams
from .lstm import PARAM_NAMES as LSTM_PARAM_NAMES
from .lstm import LstmCellParams

CHECKPOINT_FORMAT = "mtsc-checkpoint"
CHECKPOINT_VERSION = 1

_CONVNET_ARRAYS = ("conv1_w", "conv1_b", "conv2_w", "conv2_b", "fc_w", "fc_b",
                   "bn1_gamma", "bn1_beta", "bn1_running_mean", "bn1_running_var",
                   "bn2_gamma", "bn2_beta", "bn2_running_mean", "bn2_running_var")


def _write(directory, kind, hyper, arrays):
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    entries = []
    for name, arr in arrays.items():
        arr = np.asarray(arr, dtype=np.float64)
        blob = f"{name}.bin"
        (path / blob).write_bytes(arr.astype("<f8", copy=False).tobytes())
        entries.append({"name": name, "file": blob, "shape": list(arr.shape)})
    manifest = {"format": CHECKPOINT_FORMAT, "version": CHECKPOINT_VERSION,
                "kind": kind, "hyperparameters": hyper, "parameters": entries}
    (path / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _read(directory, kind):
    path = Path(directory)
    try:
        manifest = json.loads((path / "manifest.json").read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise errors.ConfigError(f"unreadable checkpoint manifest: {exc}") from exc
    if manifest.get("format") != CHECKPOINT_FORMAT:
        raise errors.ConfigError("not a checkpoint manifest")
    if manifest.get("version") != CHECKPOINT_VERSION:
        raise errors.ConfigError(f"unsupported checkpoint version {manifest.get('version')}")
    if manifest.get("kind") != kind:
        raise errors.ConfigError(f"expected a {kind} checkpoint, got {manifest.get('kind')}")
    arrays = {}
    for entry in manifest["parameters"]:
        raw = (path / entry["file"]).read_bytes()
        arrays[entry["name"]] = np.frombuffer(raw, dtype="<f8").reshape(
            entry["shape"]).copy()
    return manifest["hyperparameters"], arrays


def save_convtimenet(net, directory):
    arrays = {name: getattr(net, name)
              for name in ("conv1_w", "conv1_b", "conv2_w", "conv2_b",
                           "fc_w", "fc_b")}
    for tag, bn in (("bn1", net.bn1), ("bn2", net.bn2)):
        arrays[f"{tag}_gamma"] = bn.gamma
        arrays[f"{tag}_beta"] = bn.beta
        arrays[f"{tag}_running_mean"] = bn.running_mean
        arrays[f"{tag}_running_var"] = bn.running_var
    hyper = {"dropout_p": net.dropout_p, "mode": net.mode,
             "in_channels": int(net.in_channels)}
    return _write(directory, "convtimenet", hyper, arrays)


def load_convtimenet(directory):
    hyper, a = _read(directory, "convtimenet")
    missing = set(_CONVNET_ARRAYS) - set(a)
    if missing:
        raise errors.ConfigError(f"checkpoint missing arrays {sorted(missing)}")
    bn = lambda tag: BnParams(a[f"{tag}_gamma"], a[f"{tag}_beta"],
                              a[f"{tag}_running_mean"], a[f"{tag}_running_var"])
    return ConvTimeNetLite(conv1_w=a["conv1_w"], conv1_b=a["conv1_b"], bn1=bn("bn1"),
                           conv2_w=a["conv2_w"], conv2_b=a["conv2_b"], bn2=bn("bn2"),
                           fc_w=a["fc_w"], fc_b=a["fc_b"],
                           dropout_p=hyper["dropout_p"], mode=hyper["mode"])


def save_lstm(params, directory):
    arrays = {name: getattr(params, name) for name in LSTM_PARAM_NAMES}
    hyper = {"hidden": int(params.hidden_size), "input": int(params.input_size),
             "classes": int(params.classes),
             "frozen": sorted(params.frozen)}
    return _write(directory, "lstm", hyper, arrays)


def load_lstm(directory):
    hyper, a = _read(directory, "lstm")
    missing = set(LSTM_PARAM_NAMES) - set(a)
    if missing:
        raise errors.ConfigError(f"checkpoint missing arrays {sorted(missing)}")
    return LstmCellParams(frozen=frozenset(hyper.get("frozen", ())), **a)
