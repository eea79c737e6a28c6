"""CART trees plus the two ensembles built on them.

Trees are stored as flat parallel arrays (feature, threshold, left, right,
value) with -1 marking leaves, which keeps serialization trivial and lets
prediction walk all rows in vectorized passes. Split search is exhaustive
over midpoints between consecutive distinct feature values; ties keep the
first candidate in (feature index, threshold) order, so fits are
deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..errors import SingleClassInput


@dataclass
class FlatTree:
    feature: np.ndarray    # int, -1 at leaves
    threshold: np.ndarray  # float, split at x[feature] <= threshold
    left: np.ndarray       # int child index, -1 at leaves
    right: np.ndarray
    value: np.ndarray      # leaf payload: class label or regression mean

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        idx = np.zeros(len(X), dtype=np.int64)
        active = self.feature[idx] >= 0
        while active.any():
            cur = idx[active]
            f = self.feature[cur]
            go_left = X[active, f] <= self.threshold[cur]
            idx[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[idx] >= 0
        return self.value[idx]


def _gini_split_scores(values: np.ndarray, y_enc: np.ndarray, n_classes: int):
    """Candidate thresholds and summed child Gini impurities for one feature."""
    order = np.argsort(values, kind="stable")
    v, t = values[order], y_enc[order]
    cut = np.nonzero(v[1:] > v[:-1])[0]  # split after sorted position i
    if len(cut) == 0:
        return None
    onehot = np.zeros((len(t), n_classes))
    onehot[np.arange(len(t)), t] = 1.0
    prefix = np.cumsum(onehot, axis=0)
    left = prefix[cut]
    right = prefix[-1] - left
    m_left = cut + 1.0
    m_right = len(t) - m_left
    # m * gini = m - sum(counts^2)/m
    score = (m_left - (left ** 2).sum(axis=1) / m_left
             + m_right - (right ** 2).sum(axis=1) / m_right)
    thresholds = 0.5 * (v[cut] + v[cut + 1])
    return thresholds, score


def _mse_split_scores(values: np.ndarray, y: np.ndarray):
    """Candidate thresholds and summed child SSE for one feature."""
    order = np.argsort(values, kind="stable")
    v, t = values[order], y[order]
    cut = np.nonzero(v[1:] > v[:-1])[0]
    if len(cut) == 0:
        return None
    s1 = np.cumsum(t)
    s2 = np.cumsum(t * t)
    m_left = cut + 1.0
    m_right = len(t) - m_left
    sse_left = s2[cut] - s1[cut] ** 2 / m_left
    sse_right = (s2[-1] - s2[cut]) - (s1[-1] - s1[cut]) ** 2 / m_right
    thresholds = 0.5 * (v[cut] + v[cut + 1])
    return thresholds, sse_left + sse_right


def _node_impurity(y_enc_or_vals: np.ndarray, criterion: str,
                   n_classes: int) -> float:
    if criterion == "gini":
        counts = np.bincount(y_enc_or_vals, minlength=n_classes).astype(float)
        m = counts.sum()
        return float(m - (counts ** 2).sum() / m)
    return float(len(y_enc_or_vals) * y_enc_or_vals.var())


def _leaf_value(y: np.ndarray, criterion: str, n_classes: int,
                classes: np.ndarray | None) -> float:
    if criterion == "gini":
        counts = np.bincount(y, minlength=n_classes)
        return float(classes[int(np.argmax(counts))])  # ties -> smallest label
    return float(y.mean())


def build_tree(X, y, criterion: str = "gini", max_depth: int | None = None,
               min_samples_split: int = 2, n_classes: int = 0,
               classes: np.ndarray | None = None,
               max_features: int | None = None,
               rng: np.random.Generator | None = None) -> FlatTree:
    """Grow a CART tree; ``criterion`` is gini (labels) or mse (reals)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    d = X.shape[1]
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    stack = [(np.arange(len(y)), 0, new_node())]
    while stack:
        rows, depth, slot = stack.pop()
        ys = y[rows]
        value[slot] = _leaf_value(ys, criterion, n_classes, classes)
        impurity = _node_impurity(ys, criterion, n_classes)
        if (len(rows) < min_samples_split or impurity <= 1e-12
                or (max_depth is not None and depth >= max_depth)):
            continue
        if max_features is not None and max_features < d:
            feats = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            feats = np.arange(d)
        best = None  # (score, feature, threshold, go_left mask)
        for f in feats:
            col = X[rows, f]
            if criterion == "gini":
                cand = _gini_split_scores(col, ys, n_classes)
            else:
                cand = _mse_split_scores(col, ys)
            if cand is None:
                continue
            thresholds, scores = cand
            k = int(np.argmin(scores))  # first minimizer
            if best is None or scores[k] < best[0]:
                best = (float(scores[k]), int(f), float(thresholds[k]))
        if best is None or impurity - best[0] <= 1e-12:
            continue
        _, f, thr = best
        go_left = X[rows, f] <= thr
        feature[slot] = f
        threshold[slot] = thr
        l_slot, r_slot = new_node(), new_node()
        left[slot], right[slot] = l_slot, r_slot
        # push right first so the left child is processed (and numbered) next
        stack.append((rows[~go_left], depth + 1, r_slot))
        stack.append((rows[go_left], depth + 1, l_slot))
    return FlatTree(np.array(feature, dtype=np.int64),
                    np.array(threshold, dtype=np.float64),
                    np.array(left, dtype=np.int64),
                    np.array(right, dtype=np.int64),
                    np.array(value, dtype=np.float64))


# --- family states ------------------------------------------------------------

@dataclass
class TreeState:
    tree: FlatTree
    classes: np.ndarray


@dataclass
class ForestState:
    trees: list
    classes: np.ndarray


@dataclass
class BoostState:
    trees_per_class: list   # [class][round] -> FlatTree
    learning_rate: float
    classes: np.ndarray


def _encode(y: np.ndarray):
    classes = np.unique(y)
    if len(classes) < 2:
        raise SingleClassInput("need at least 2 classes")
    enc = np.searchsorted(classes, y)
    return classes, enc


def fit_decision_tree(params: dict, X, y, seed: int = 0) -> TreeState:
    classes, enc = _encode(np.asarray(y))
    tree = build_tree(X, enc, criterion="gini",
                      max_depth=params.get("max_depth"),
                      min_samples_split=int(params.get("min_samples_split", 2)),
                      n_classes=len(classes), classes=classes)
    return TreeState(tree, classes)


def predict_decision_tree(state: TreeState, X) -> np.ndarray:
    return state.tree.predict(X).astype(np.int64)


def fit_random_forest(params: dict, X, y, seed: int = 0) -> ForestState:
    X = np.asarray(X, dtype=np.float64)
    classes, enc = _encode(np.asarray(y))
    n, d = X.shape
    n_estimators = int(params.get("n_estimators", 100))
    max_depth = params.get("max_depth")
    max_features = int(np.ceil(np.sqrt(d)))
    rng = np.random.default_rng(seed)
    trees = []
    for _ in range(n_estimators):
        rows = rng.integers(0, n, size=n)
        trees.append(build_tree(
            X[rows], enc[rows], criterion="gini", max_depth=max_depth,
            min_samples_split=int(params.get("min_samples_split", 2)),
            n_classes=len(classes), classes=classes,
            max_features=max_features, rng=rng))
    return ForestState(trees, classes)


def predict_random_forest(state: ForestState, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    votes = np.zeros((len(X), len(state.classes)), dtype=np.int64)
    for tree in state.trees:
        pred = tree.predict(X)
        cols = np.searchsorted(state.classes, pred)
        votes[np.arange(len(X)), cols] += 1
    return state.classes[np.argmax(votes, axis=1)]  # ties -> smallest label


def fit_gradient_boosting(params: dict, X, y, seed: int = 0) -> BoostState:
    """One-vs-rest first-order boosting on the logistic loss.

    Each round fits a depth-3 regression tree to the residual t - p and adds
    it with the shrinkage factor; a plain first-order stand-in for the usual
    second-order packages.
    """
    X = np.asarray(X, dtype=np.float64)
    classes, enc = _encode(np.asarray(y))
    n_estimators = int(params.get("n_estimators", 100))
    lr = float(params.get("learning_rate", 0.1))
    max_depth = int(params.get("max_depth", 3))
    trees_per_class = []
    for c in range(len(classes)):
        t = (enc == c).astype(np.float64)
        F = np.zeros(len(t))
        rounds = []
        for _ in range(n_estimators):
            z = t - expit(F)
            tree = build_tree(X, z, criterion="mse", max_depth=max_depth,
                              min_samples_split=2)
            rounds.append(tree)
            F += lr * tree.predict(X)
        trees_per_class.append(rounds)
    return BoostState(trees_per_class, lr, classes)


def boosting_scores(state: BoostState, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    scores = np.zeros((len(X), len(state.classes)))
    for c, rounds in enumerate(state.trees_per_class):
        for tree in rounds:
            scores[:, c] += state.learning_rate * tree.predict(X)
    return scores


def predict_gradient_boosting(state: BoostState, X) -> np.ndarray:
    scores = boosting_scores(state, X)
    return state.classes[np.argmax(scores, axis=1)]
