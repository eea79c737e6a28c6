"""Timestamped feature frames: ingestion, returns, labels, augmentation.

A :class:`Frame` holds an aligned set of named feature series, a per-period
return series and (optionally) three-class labels in {-1, 0, 1}. Labels come
from the 33rd/67th percentile rule applied to next-period returns: below the
lower threshold is -1, above the upper is +1, between is 0 (strict
inequalities, so ties land in class 0).

Two labeling modes exist. ``paper_faithful`` computes the thresholds from the
whole series, which looks ahead; ``leak_free`` uses expanding-window
quantiles so a row's label depends on nothing later than its own target
return.
"""

from __future__ import annotations

import bisect
import csv
import hashlib
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

from .errors import (
    EmptySeries,
    FrameInvariantViolation,
    MissingColumn,
    NonMonotonicTimestamps,
    NonPositivePrice,
    OutOfRange,
    UnparsableCell,
    WindowTooLarge,
)

EPOCH_MS_CUTOFF = 1e11  # numeric timestamps at or above this are epoch ms


def _locked(a: np.ndarray) -> np.ndarray:
    out = np.array(a, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Frame:
    """Immutable aligned container for one instrument's history.

    ``columns`` are the model input series in declared order; ``returns`` is
    the per-period fractional return (itself exposed as the last feature,
    mirroring how the return column rides along with the raw inputs).
    """

    timestamps: np.ndarray                 # int64 epoch nanoseconds
    columns: dict[str, np.ndarray]         # name -> float64 series
    returns: np.ndarray                    # float64, same length
    labels: np.ndarray | None = None       # int64 in {-1,0,1} or None

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        cols = {k: np.asarray(v, dtype=np.float64) for k, v in self.columns.items()}
        ret = np.asarray(self.returns, dtype=np.float64)
        n = len(ts)
        if n < 2:
            raise FrameInvariantViolation(f"frame needs at least 2 rows, got {n}")
        for name, series in cols.items():
            if len(series) != n:
                raise FrameInvariantViolation(
                    f"column {name!r} has length {len(series)}, expected {n}")
        if len(ret) != n:
            raise FrameInvariantViolation(
                f"returns has length {len(ret)}, expected {n}")
        if np.any(np.diff(ts) <= 0):
            raise FrameInvariantViolation("timestamps must be strictly increasing")
        lab = self.labels
        if lab is not None:
            lab = np.asarray(lab, dtype=np.int64)
            if len(lab) != n:
                raise FrameInvariantViolation(
                    f"labels has length {len(lab)}, expected {n}")
            if not np.isin(lab, (-1, 0, 1)).all():
                raise FrameInvariantViolation("labels must lie in {-1, 0, 1}")
        object.__setattr__(self, "timestamps", _locked(ts))
        object.__setattr__(self, "columns", {k: _locked(v) for k, v in cols.items()})
        object.__setattr__(self, "returns", _locked(ret))
        object.__setattr__(self, "labels", _locked(lab) if lab is not None else None)

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def feature_names(self) -> list[str]:
        return list(self.columns) + ["returns"]

    def feature_matrix(self) -> np.ndarray:
        """(N, d) float64 matrix: declared columns plus the return series."""
        return np.column_stack(list(self.columns.values()) + [self.returns])

    def with_labels(self, labels) -> "Frame":
        return Frame(self.timestamps, self.columns, self.returns, labels)

    def slice(self, start: int, stop: int) -> "Frame":
        return Frame(
            self.timestamps[start:stop],
            {k: v[start:stop] for k, v in self.columns.items()},
            self.returns[start:stop],
            None if self.labels is None else self.labels[start:stop],
        )


@dataclass(frozen=True)
class LabelThresholds:
    """The two return quantiles separating the classes (lower <= upper)."""

    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise FrameInvariantViolation("lower threshold above upper")

    def classify(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=np.float64)
        out = np.zeros(len(r), dtype=np.int64)
        out[r < self.lower] = -1
        out[r > self.upper] = 1
        return out


# --- returns ---------------------------------------------------------------

def compute_returns(prices, kind: str = "simple") -> np.ndarray:
    """Per-period returns with the first element warm-filled to 0.0.

    ``simple``: P_t / P_{t-1} - 1. ``log``: ln(P_t / P_{t-1}).
    """
    p = np.asarray(prices, dtype=np.float64)
    if len(p) < 2:
        raise EmptySeries("need at least 2 prices")
    nonpos = np.nonzero(~(p > 0))[0]
    if nonpos.size:
        raise NonPositivePrice(int(nonpos[0]))
    out = np.zeros(len(p), dtype=np.float64)
    if kind == "simple":
        out[1:] = p[1:] / p[:-1] - 1.0
    elif kind == "log":
        out[1:] = np.log(p[1:] / p[:-1])
    else:
        raise ValueError(f"unknown return kind {kind!r}")
    return out


# --- quantiles and labels --------------------------------------------------

def _type7(sorted_values, p: float) -> float:
    """Linear-interpolation quantile (rank h = (N-1)p) of pre-sorted data."""
    n = len(sorted_values)
    if n == 1:
        return float(sorted_values[0])
    h = (n - 1) * p
    lo = int(math.floor(h))
    hi = min(lo + 1, n - 1)
    frac = h - lo
    return float(sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]))


def label_by_quantiles(next_returns, q_low: float = 0.33,
                       q_high: float = 0.67) -> tuple[np.ndarray, LabelThresholds]:
    """Three-class labels from the empirical quantiles of a return series."""
    r = np.asarray(next_returns, dtype=np.float64)
    if len(r) < 2:
        raise EmptySeries("need at least 2 returns to label")
    if not (0.0 <= q_low <= q_high <= 1.0):
        raise ValueError("need 0 <= q_low <= q_high <= 1")
    srt = np.sort(r)
    thr = LabelThresholds(_type7(srt, q_low), _type7(srt, q_high))
    return thr.classify(r), thr


def shift_labels(labels) -> np.ndarray:
    """Align next-period outcomes with current rows: out[t] = in[t+1].

    The final row leaves the supervised set (its outcome is unknown), so the
    output is one shorter than the input.
    """
    lab = np.asarray(labels)
    if len(lab) < 2:
        raise EmptySeries("need at least 2 labels to shift")
    return lab[1:].copy()


def expanding_quantile_thresholds(values, q_low: float, q_high: float,
                                  min_periods: int) -> np.ndarray:
    """Per-index (lower, upper) quantiles of values[:t+1], from min_periods on.

    Returns an (N, 2) array; rows before ``min_periods - 1`` are NaN.
    """
    v = np.asarray(values, dtype=np.float64)
    out = np.full((len(v), 2), np.nan)
    acc: list[float] = []
    for t, x in enumerate(v):
        bisect.insort(acc, float(x))
        if t + 1 >= min_periods:
            out[t, 0] = _type7(acc, q_low)
            out[t, 1] = _type7(acc, q_high)
    return out


def label_frame(frame: Frame, q_low: float = 0.33, q_high: float = 0.67,
                mode: str = "paper_faithful",
                min_periods: int = 30) -> tuple[Frame, LabelThresholds]:
    """Attach quantile labels for next-period returns and drop unusable rows.

    Quantiles are taken over the next-period return series (the return
    shifted back one step) before any further alignment; the last row is
    dropped because its outcome is unobserved. In ``leak_free`` mode the
    thresholds expand with time and the first ``min_periods - 1`` rows are
    dropped as warm-up; the returned thresholds are then the final (widest
    window) pair.
    """
    next_r = frame.returns[1:]  # next_r[t] = return over (t, t+1], aligned to row t
    if mode == "paper_faithful":
        labels, thr = label_by_quantiles(next_r, q_low, q_high)
        return frame.slice(0, len(frame) - 1).with_labels(labels), thr
    if mode == "leak_free":
        if len(next_r) < min_periods:
            raise EmptySeries(
                f"leak-free labeling needs at least {min_periods + 1} rows")
        grid = expanding_quantile_thresholds(next_r, q_low, q_high, min_periods)
        start = min_periods - 1
        lower, upper = grid[start:, 0], grid[start:, 1]
        seg = next_r[start:]
        labels = np.zeros(len(seg), dtype=np.int64)
        labels[seg < lower] = -1
        labels[seg > upper] = 1
        thr = LabelThresholds(float(grid[-1, 0]), float(grid[-1, 1]))
        return frame.slice(start, len(frame) - 1).with_labels(labels), thr
    raise ValueError(f"unknown labeling mode {mode!r}")


# --- engineered features ----------------------------------------------------

def sma(series, window: int, warmup: str = "fill_global_mean") -> np.ndarray:
    """Simple moving average.

    ``fill_global_mean`` pads the warm-up with the mean of the whole series
    (this uses future data and is therefore only valid in paper-faithful
    mode); ``drop`` returns the N - window + 1 defined values, aligned to
    t >= window - 1.
    """
    x = np.asarray(series, dtype=np.float64)
    if window < 1 or window > len(x):
        raise WindowTooLarge(f"window {window} on series of length {len(x)}")
    csum = np.concatenate(([0.0], np.cumsum(x)))
    means = (csum[window:] - csum[:-window]) / window
    if warmup == "drop":
        return means
    if warmup == "fill_global_mean":
        out = np.empty(len(x), dtype=np.float64)
        out[:window - 1] = x.mean()
        out[window - 1:] = means
        return out
    raise ValueError(f"unknown warmup policy {warmup!r}")


# --- augmentation ------------------------------------------------------------

def _column_rng(seed: int, name: str) -> np.random.Generator:
    # noise stream keyed by column name, so column order cannot matter
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return np.random.default_rng([seed, int.from_bytes(digest[:8], "big")])


def augment_jitter(frame: Frame, sigma: float, seed: int) -> Frame:
    """Add i.i.d. Gaussian noise to every feature cell.

    Returns, labels and timestamps stay untouched: the return series is
    market data that labeling and backtests must see exactly.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0.0:
        return frame
    noisy = {name: col + _column_rng(seed, name).normal(0.0, sigma, size=len(col))
             for name, col in frame.columns.items()}
    return Frame(frame.timestamps, noisy, frame.returns, frame.labels)


def augment_window_slice(frame: Frame, start: int, length: int) -> Frame:
    """Contiguous sub-frame [start, start+length), all series kept aligned."""
    if start < 0 or length < 2 or start + length > len(frame):
        raise OutOfRange(
            f"slice [{start}, {start + length}) invalid for {len(frame)} rows "
            "(a frame needs at least 2 rows)")
    return frame.slice(start, start + length)


# --- CSV ingestion -----------------------------------------------------------

@dataclass(frozen=True)
class CsvSchema:
    """Column mapping for :func:`load_csv`.

    ``features=None`` takes every column not otherwise claimed. When
    ``returns_column`` is absent, returns are derived from the close column.
    """

    timestamp: str = "timestamp"
    close: str | None = "close"
    features: tuple[str, ...] | None = None
    target: str | None = None
    returns_column: str | None = None
    returns_kind: str = "simple"
    extra_sma_windows: tuple[int, ...] = field(default=())
    sma_warmup: str = "fill_global_mean"


def _parse_timestamp(text: str, row: int, col: str) -> int:
    s = text.strip()
    if not s:
        raise UnparsableCell(row, col, text)
    try:
        v = float(s)
    except ValueError:
        try:
            dt = datetime.fromisoformat(s.replace("Z", "+00:00"))
        except ValueError:
            raise UnparsableCell(row, col, text) from None
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        epoch = datetime(1970, 1, 1, tzinfo=timezone.utc)
        return ((dt - epoch) // timedelta(microseconds=1)) * 1000
    if abs(v) >= EPOCH_MS_CUTOFF:
        return int(v * 1e6)          # epoch milliseconds
    return int(v * 1e9)              # epoch seconds


def _parse_number(text: str, row: int, col: str) -> float:
    s = text.strip()
    if not s:
        raise UnparsableCell(row, col, text)  # blank cells are errors, not NaN
    try:
        return float(s)
    except ValueError:
        raise UnparsableCell(row, col, text) from None


def load_csv(path, schema: CsvSchema = CsvSchema()) -> Frame:
    """Read an OHLCV-style CSV into a :class:`Frame`.

    Rows are sorted by timestamp when out of order; duplicate timestamps are
    rejected. Cells use '.' as the decimal separator.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptySeries(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        rows = [r for r in reader if r and any(cell.strip() for cell in r)]

    def col_index(name: str) -> int:
        try:
            return header.index(name)
        except ValueError:
            raise MissingColumn(name) from None

    ts_idx = col_index(schema.timestamp)
    claimed = {schema.timestamp}
    if schema.target:
        claimed.add(schema.target)
    if schema.returns_column:
        claimed.add(schema.returns_column)
    if schema.features is not None:
        feature_names = list(schema.features)
        for name in feature_names:
            col_index(name)
    else:
        feature_names = [h for h in header if h not in claimed]
    feat_idx = {name: col_index(name) for name in feature_names}

    n = len(rows)
    ts = np.empty(n, dtype=np.int64)
    cols = {name: np.empty(n, dtype=np.float64) for name in feature_names}
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise UnparsableCell(i, schema.timestamp, ",".join(row))
        ts[i] = _parse_timestamp(row[ts_idx], i, schema.timestamp)
        for name, j in feat_idx.items():
            cols[name][i] = _parse_number(row[j], i, name)

    target = None
    if schema.target:
        t_idx = col_index(schema.target)
        target = np.empty(n, dtype=np.int64)
        for i, row in enumerate(rows):
            v = _parse_number(row[t_idx], i, schema.target)
            if v not in (-1.0, 0.0, 1.0):
                raise UnparsableCell(i, schema.target, row[t_idx])
            target[i] = int(v)

    raw_returns = None
    if schema.returns_column:
        r_idx = col_index(schema.returns_column)
        raw_returns = np.array(
            [_parse_number(row[r_idx], i, schema.returns_column)
             for i, row in enumerate(rows)])

    order = np.argsort(ts, kind="stable")
    if not np.array_equal(order, np.arange(n)):
        ts = ts[order]
        cols = {k: v[order] for k, v in cols.items()}
        if target is not None:
            target = target[order]
        if raw_returns is not None:
            raw_returns = raw_returns[order]
    if np.any(np.diff(ts) == 0):
        raise NonMonotonicTimestamps("duplicate timestamps remain after sorting")

    if raw_returns is not None:
        returns = raw_returns
    else:
        if schema.close is None:
            raise MissingColumn("close")
        if schema.close not in cols:
            raise MissingColumn(schema.close)
        returns = compute_returns(cols[schema.close], schema.returns_kind)

    for w in schema.extra_sma_windows:
        if schema.close is None or schema.close not in cols:
            raise MissingColumn("close")
        cols[f"sma_{w}"] = sma(cols[schema.close], w, warmup="fill_global_mean")

    return Frame(ts, cols, returns, target)


def write_frame_csv(frame: Frame, path) -> None:
    """Canonical frame CSV: timestamp, features..., returns [, label].

    Timestamps are emitted as ISO-8601 UTC at microsecond precision; floats
    use shortest round-trip repr, so numeric columns reload bit-exactly.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        head = ["timestamp"] + list(frame.columns) + ["returns"]
        if frame.labels is not None:
            head.append("label")
        writer.writerow(head)
        for i in range(len(frame)):
            dt = datetime.fromtimestamp(frame.timestamps[i] / 1e9, tz=timezone.utc)
            row = [dt.isoformat()]
            row += [repr(float(frame.columns[c][i])) for c in frame.columns]
            row.append(repr(float(frame.returns[i])))
            if frame.labels is not None:
                row.append(str(int(frame.labels[i])))
            writer.writerow(row)


def load_frame_csv(path) -> Frame:
    """Reload a file written by :func:`write_frame_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh))
    schema = CsvSchema(
        timestamp="timestamp",
        close=None,
        returns_column="returns",
        target="label" if "label" in header else None,
    )
    return load_csv(path, schema)
