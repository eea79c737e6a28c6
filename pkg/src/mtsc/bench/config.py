"""Run and sweep configuration: defaults, key=value files, hashing.

The file format is flat UTF-8 ``section.key=value`` lines (``#`` comments,
blank lines ignored). Sections are ``run``, ``sweep``, ``schema`` and
``grid.<family>``; CLI flags override file values. The untouched defaults
are the reference experiment settings: 0.33/0.67 label quantiles, 5
splits, epochs=100, batch_size=32, lr=1e-5.
"""

import hashlib
import json
from dataclasses import dataclass, field, replace

from .. import errors
from ..classic import family_grid, family_names
from ..frame import CsvSchema

__all__ = ["RunConfig", "SweepSpec", "parse_config_text", "load_config_file",
           "build_run_config", "build_sweep_spec", "config_hash",
           "MODE_ALIASES"]

MODE_ALIASES = {"paper": "paper_faithful", "paper_faithful": "paper_faithful",
                "leakfree": "leak_free", "leak_free": "leak_free"}


@dataclass(frozen=True)
class RunConfig:
    """One scenario run: data source, labeling, model zoo, training knobs."""

    input: str = ""
    schema: CsvSchema = field(default_factory=CsvSchema)
    mode: str = "paper_faithful"
    q_low: float = 0.33
    q_high: float = 0.67
    families: tuple = ()
    grids: dict = field(default_factory=dict)
    n_splits: int = 5
    seed: int = 0
    window: int = 1
    epochs: int = 100
    batch_size: int = 32
    lr: float = 1e-5
    outdir: str = "runs"

    def __post_init__(self):
        if self.mode not in MODE_ALIASES:
            raise errors.ConfigError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "mode", MODE_ALIASES[self.mode])
        if not 0.0 < self.q_low < self.q_high < 1.0:
            raise errors.ConfigError("need 0 < q_low < q_high < 1")
        if self.n_splits < 2:
            raise errors.ConfigError("n_splits must be at least 2")
        if self.window < 1 or self.epochs < 1 or self.batch_size < 1:
            raise errors.ConfigError("window, epochs and batch_size must be "
                                     "positive")
        if self.lr <= 0:
            raise errors.ConfigError("learning rate must be positive")
        families = tuple(self.families) or tuple(family_names())
        known = set(family_names())
        for name in families:
            if name not in known:
                raise errors.ConfigError(f"unknown model family {name!r}")
        object.__setattr__(self, "families", families)
        object.__setattr__(self, "grids", dict(self.grids))

    def grid_for(self, family):
        return dict(self.grids.get(family) or family_grid(family))


@dataclass(frozen=True)
class SweepSpec:
    """Dataset-size sweep grid; default sizes 200,500,...,1700."""

    initial_size: int = 200
    increment: int = 300
    steps: int = 6
    start_offset: int = 10000
    families: tuple = ()

    def __post_init__(self):
        if self.initial_size < 50:
            raise errors.ConfigError("initial_size must be at least 50")
        if self.increment < 0 or self.steps < 1 or self.start_offset < 0:
            raise errors.ConfigError("increment, steps and start_offset must "
                                     "be non-negative (steps positive)")
        object.__setattr__(self, "families", tuple(self.families))

    @property
    def sizes(self):
        return tuple(self.initial_size + i * self.increment
                     for i in range(self.steps))


def parse_config_text(text):
    """key=value lines to a flat dict; comments and blanks skipped."""
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise errors.ConfigError(f"line {lineno}: expected key=value, "
                                     f"got {line!r}")
        key, value = line.split("=", 1)
        key, value = key.strip(), value.strip()
        if not key:
            raise errors.ConfigError(f"line {lineno}: empty key")
        if key in pairs:
            raise errors.ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def load_config_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise errors.ConfigError(f"cannot read config {path}: {exc}")


def _parse_int(value):
    try:
        return int(value)
    except ValueError:
        raise errors.ConfigError(f"expected an integer, got {value!r}")


def _parse_float(value):
    try:
        return float(value)
    except ValueError:
        raise errors.ConfigError(f"expected a number, got {value!r}")


def _parse_list(value):
    return tuple(tok.strip() for tok in value.split(",") if tok.strip())


def _parse_token(tok):
    try:
        return json.loads(tok)
    except json.JSONDecodeError:
        return tok


_RUN_KEYS = {
    "run.input": ("input", str),
    "run.mode": ("mode", str),
    "run.q_low": ("q_low", _parse_float),
    "run.q_high": ("q_high", _parse_float),
    "run.families": ("families", _parse_list),
    "run.n_splits": ("n_splits", _parse_int),
    "run.seed": ("seed", _parse_int),
    "run.window": ("window", _parse_int),
    "run.epochs": ("epochs", _parse_int),
    "run.batch_size": ("batch_size", _parse_int),
    "run.lr": ("lr", _parse_float),
    "run.outdir": ("outdir", str),
}

_SWEEP_KEYS = {
    "sweep.initial_size": ("initial_size", _parse_int),
    "sweep.increment": ("increment", _parse_int),
    "sweep.steps": ("steps", _parse_int),
    "sweep.start_offset": ("start_offset", _parse_int),
    "sweep.families": ("families", _parse_list),
}

_SCHEMA_KEYS = {
    "schema.timestamp": ("timestamp", str),
    "schema.close": ("close", str),
    "schema.features": ("features", _parse_list),
    "schema.returns_column": ("returns_column", str),
    "schema.returns_kind": ("returns_kind", str),
}


def _known_key(key):
    return (key in _RUN_KEYS or key in _SWEEP_KEYS or key in _SCHEMA_KEYS
            or key.startswith("grid."))


def build_run_config(pairs, **overrides):
    """RunConfig from parsed key=value pairs plus keyword overrides.

    Overrides use RunConfig field names and win over file values; None
    overrides are ignored. Unknown keys are rejected.
    """
    fields = {}
    schema_fields = {}
    grids = {}
    for key, value in pairs.items():
        if not _known_key(key):
            raise errors.ConfigError(f"unknown config key {key!r}")
        if key in _RUN_KEYS:
            name, parse = _RUN_KEYS[key]
            fields[name] = parse(value)
        elif key in _SCHEMA_KEYS:
            name, parse = _SCHEMA_KEYS[key]
            schema_fields[name] = parse(value)
        elif key.startswith("grid."):
            parts = key.split(".")
            if len(parts) != 3:
                raise errors.ConfigError(
                    f"grid keys look like grid.<family>.<param>, got {key!r}")
            _, family, param = parts
            tokens = [_parse_token(t.strip()) for t in value.split(",")]
            grids.setdefault(family, {})[param] = tokens
    if schema_fields:
        fields["schema"] = replace(CsvSchema(), **schema_fields)
    if grids:
        fields["grids"] = grids
    for name, value in overrides.items():
        if value is not None:
            fields[name] = value
    return RunConfig(**fields)


def build_sweep_spec(pairs, **overrides):
    fields = {}
    for key, value in pairs.items():
        if key in _SWEEP_KEYS:
            name, parse = _SWEEP_KEYS[key]
            fields[name] = parse(value)
        elif not _known_key(key):
            raise errors.ConfigError(f"unknown config key {key!r}")
    for name, value in overrides.items():
        if value is not None:
            fields[name] = value
    return SweepSpec(**fields)


def config_hash(config, sweep=None):
    """Hex digest over every semantic field; the output directory is not one."""
    payload = {
        "input": config.input,
        "schema": {
            "timestamp": config.schema.timestamp,
            "close": config.schema.close,
            "features": list(config.schema.features or ()),
            "returns_column": config.schema.returns_column,
            "returns_kind": config.schema.returns_kind,
        },
        "mode": config.mode,
        "q_low": config.q_low,
        "q_high": config.q_high,
        "families": list(config.families),
        "grids": {fam: config.grid_for(fam) for fam in config.families},
        "n_splits": config.n_splits,
        "seed": config.seed,
        "window": config.window,
        "epochs": config.epochs,
        "batch_size": config.batch_size,
        "lr": config.lr,
    }
    if sweep is not None:
        payload["sweep"] = {
            "initial_size": sweep.initial_size,
            "increment": sweep.increment,
            "steps": sweep.steps,
            "start_offset": sweep.start_offset,
            "families": list(sweep.families),
        }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()
