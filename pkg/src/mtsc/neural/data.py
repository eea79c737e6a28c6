"""Label encoding and window extraction shared by both network families."""

import numpy as np

from .. import errors

CLASS_ORDER = (-1, 0, 1)


def encode_labels(labels):
    """Map direction labels {-1, 0, 1} onto class indices {0, 1, 2}."""
    arr = np.asarray(labels)
    idx = np.searchsorted(CLASS_ORDER, arr)
    bad = (idx >= len(CLASS_ORDER)) | (np.take(CLASS_ORDER, idx, mode="clip") != arr)
    if bad.any():
        raise errors.UnknownLabel(f"label {arr[bad][0]!r} not in {CLASS_ORDER}")
    return idx.astype(np.int64)


def decode_labels(indices):
    return np.asarray(CLASS_ORDER, dtype=np.int64)[np.asarray(indices)]


def windowed_tensors(features, labels, window):
    """Cut (N, d) features into (N - window + 1, window, d) sample sequences.

    Sample i covers feature rows i .. i + window - 1 and carries the label
    of its last row, so every sample only sees history up to its own time.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise errors.ShapeMismatch("features must be 2-d")
    if window < 1:
        raise errors.InvalidParams("window must be >= 1")
    if X.shape[0] < window:
        raise errors.TooFewSamples(
            f"need at least {window} rows for window {window}, got {X.shape[0]}")
    n = X.shape[0] - window + 1
    seqs = np.stack([X[i:i + window] for i in range(n)])
    if labels is None:
        return seqs, None
    y = np.asarray(labels)
    if y.shape[0] != X.shape[0]:
        raise errors.LengthMismatch("labels must align with feature rows")
    return seqs, encode_labels(y[window - 1:])
