"""Classic model zoo behind one fit/predict contract.

Eleven families share the interface: ``fit_classic(spec, X, y, seed)`` ->
``TrainedModel`` and ``predict_classic(model, X)`` -> labels. Margin models
go through one-vs-rest with argmax decision values (ties to the smallest
label); kNN, naive Bayes and the tree families are natively multiclass.
``register_family`` extends the registry, which the grid search resolves by
name. Trained state round-trips through a versioned JSON document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import ConfigError, DimensionMismatch, SingleClassInput, TooFewSamples
from .bayes import NbState, fit_gaussian_nb, predict_gaussian_nb
from .kernels import KernelSpec, gram, kernel_eval, resolve_gamma
from .linear import (
    LinearHead,
    OvrLinearState,
    RidgeState,
    SoftmaxState,
    fit_logistic,
    fit_passive_aggressive,
    fit_perceptron,
    fit_ridge,
    fit_sgd_linear,
    predict_logistic,
    predict_ovr_linear,
    predict_ridge,
)
from .neighbors import KnnState, fit_knn, predict_knn
from .svm import (
    SvmModel,
    dual_objective,
    kkt_residual,
    smo_solve,
    svm_decision,
    svm_decision_batch,
)
from .trees import (
    BoostState,
    FlatTree,
    ForestState,
    TreeState,
    build_tree,
    fit_decision_tree,
    fit_gradient_boosting,
    fit_random_forest,
    predict_decision_tree,
    predict_gradient_boosting,
    predict_random_forest,
)

MODEL_JSON_FORMAT = "mtsc-model"
MODEL_JSON_VERSION = 1

# hyperparameter grids driving the default searches, in report order
DEFAULT_GRIDS = {
    "logistic": {"C": [0.01, 0.1, 1, 10, 100], "solver": ["liblinear", "saga"]},
    "svm": {"C": [0.1, 1, 10], "kernel": ["rbf", "linear"]},
    "random_forest": {"n_estimators": [50, 100, 200], "max_depth": [None, 5, 10]},
    "knn": {"n_neighbors": [3, 5, 7], "weights": ["uniform", "distance"]},
    "decision_tree": {"max_depth": [None, 5, 10], "min_samples_split": [2, 5, 10]},
    "gaussian_nb": {},
    "gradient_boosting": {"n_estimators": [50, 100, 200],
                          "learning_rate": [0.01, 0.1, 1]},
    "sgd_linear": {"alpha": [0.0001, 0.001, 0.01],
                   "penalty": ["l1", "l2", "elasticnet"]},
    "ridge": {"alpha": [0.1, 1, 10]},
    "perceptron": {"alpha": [0.0001, 0.001, 0.01],
                   "penalty": ["l1", "l2", "elasticnet"]},
    "passive_aggressive": {"C": [0.01, 0.1, 1, 10, 100]},
}

# the wider SVM search used by the extended experiments
SVM_EXTENDED_GRID = {"C": [0.1, 1, 10], "kernel": ["rbf", "linear"],
                     "gamma": ["scale", "auto"], "degree": [2, 3, 4]}


# --- svm family --------------------------------------------------------------

@dataclass
class OvrSvmState:
    heads: list
    classes: np.ndarray


def fit_svm(params: dict, X, y, seed: int = 0) -> OvrSvmState:
    X = np.asarray(X, dtype=np.float64)
    classes = np.unique(np.asarray(y))
    if len(classes) < 2:
        raise SingleClassInput("need at least 2 classes")
    kspec = KernelSpec(params.get("kernel", "rbf"),
                       resolve_gamma(params.get("gamma", "scale"), X),
                       int(params.get("degree", 3)))
    C = float(params.get("C", 1.0))
    tol = float(params.get("tol", 1e-3))
    max_passes = int(params.get("max_passes", 10))
    heads = [smo_solve(X, np.where(np.asarray(y) == c, 1.0, -1.0), C, kspec,
                       tol, max_passes) for c in classes]
    return OvrSvmState(heads, classes)


def predict_svm(state: OvrSvmState, X) -> np.ndarray:
    scores = np.stack([svm_decision_batch(h, X) for h in state.heads])
    return state.classes[np.argmax(scores, axis=0)]


# --- generic one-vs-rest -------------------------------------------------------

@dataclass
class OvrGenericState:
    heads: list            # objects exposing .decision(X) -> scores
    classes: np.ndarray


def predict_ovr_generic(state: OvrGenericState, X) -> np.ndarray:
    scores = np.stack([h.decision(np.asarray(X, dtype=np.float64))
                       for h in state.heads])
    return state.classes[np.argmax(scores, axis=0)]


def one_vs_rest(binary_fit: Callable, X, y) -> "TrainedModel":
    """Train one head per class; predict the argmax decision value.

    ``binary_fit(X, y_pm)`` gets +-1 targets and must return an object with
    a ``decision(X)`` method. Ties go to the smallest label.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    classes = np.unique(y)
    if len(classes) < 2:
        raise SingleClassInput("need at least 2 classes")
    heads = [binary_fit(X, np.where(y == c, 1.0, -1.0)) for c in classes]
    state = OvrGenericState(heads, classes)
    return TrainedModel(ModelSpec("one_vs_rest", {}), classes, state,
                        X.shape[1])


# --- registry --------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyEntry:
    fit: Callable
    predict: Callable
    param_names: frozenset
    grid: dict
    state_to_jsonable: Callable | None = None
    state_from_jsonable: Callable | None = None


_REGISTRY: dict[str, FamilyEntry] = {}


def register_family(name: str, fit: Callable, predict: Callable,
                    param_names=(), grid: dict | None = None,
                    state_to_jsonable=None, state_from_jsonable=None) -> None:
    _REGISTRY[name] = FamilyEntry(fit, predict,
                                  frozenset(param_names), dict(grid or {}),
                                  state_to_jsonable, state_from_jsonable)


def family_names() -> list[str]:
    return list(_REGISTRY)


def family_grid(name: str) -> dict:
    if name not in _REGISTRY:
        raise ConfigError(f"unknown model family {name!r}")
    return dict(_REGISTRY[name].grid)


@dataclass(frozen=True)
class ModelSpec:
    family: str
    params: dict

    def __post_init__(self):
        if self.family not in _REGISTRY:
            raise ConfigError(f"unknown model family {self.family!r}")
        allowed = _REGISTRY[self.family].param_names
        for key in self.params:
            if key not in allowed:
                raise ConfigError(
                    f"{self.family} does not take a {key!r} parameter")


@dataclass
class TrainedModel:
    spec: ModelSpec
    classes: np.ndarray
    state: object
    n_features: int


def fit_classic(spec: ModelSpec, X, y, seed: int = 0) -> TrainedModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2:
        raise DimensionMismatch("X must be a 2-D matrix")
    if len(X) != len(y):
        raise DimensionMismatch(f"{len(X)} rows vs {len(y)} labels")
    if len(X) < 2:
        raise TooFewSamples("need at least 2 training rows")
    state = _REGISTRY[spec.family].fit(spec.params, X, y, seed)
    return TrainedModel(spec, np.unique(y), state, X.shape[1])


def predict_classic(model: TrainedModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"expected (n, {model.n_features}) matrix, got {X.shape}")
    return _REGISTRY[model.spec.family].predict(model.state, X)


def fit_classifier(family: str, params: dict, X, y, seed: int = 0) -> TrainedModel:
    return fit_classic(ModelSpec(family, dict(params)), X, y, seed)


def predict_classifier(model: TrainedModel, X) -> np.ndarray:
    return predict_classic(model, X)


# --- serialization -----------------------------------------------------------------

def _tree_out(t: FlatTree) -> dict:
    return {"feature": t.feature.tolist(), "threshold": t.threshold.tolist(),
            "left": t.left.tolist(), "right": t.right.tolist(),
            "value": t.value.tolist()}


def _tree_in(d: dict) -> FlatTree:
    return FlatTree(np.array(d["feature"], dtype=np.int64),
                    np.array(d["threshold"], dtype=np.float64),
                    np.array(d["left"], dtype=np.int64),
                    np.array(d["right"], dtype=np.int64),
                    np.array(d["value"], dtype=np.float64))


def _svm_head_out(h: SvmModel) -> dict:
    return {"alphas": h.alphas.tolist(),
            "support_vectors": h.support_vectors.tolist(),
            "support_labels": h.support_labels.tolist(),
            "bias": h.bias,
            "kernel": {"kind": h.kernel.kind, "gamma": h.kernel.gamma,
                       "degree": h.kernel.degree},
            "C": h.C, "converged": h.converged}


def _svm_head_in(d: dict) -> SvmModel:
    return SvmModel(np.array(d["alphas"]), np.array(d["support_vectors"]),
                    np.array(d["support_labels"]), d["bias"],
                    KernelSpec(d["kernel"]["kind"], d["kernel"]["gamma"],
                               d["kernel"]["degree"]),
                    d["C"], d["converged"])


def _classes_in(payload) -> np.ndarray:
    return np.array(payload, dtype=np.int64)


_STATE_CODECS = {
    "svm": (
        lambda s: {"heads": [_svm_head_out(h) for h in s.heads]},
        lambda d, cls: OvrSvmState([_svm_head_in(h) for h in d["heads"]], cls),
    ),
    "logistic": (
        lambda s: {"W": s.W.tolist()},
        lambda d, cls: SoftmaxState(np.array(d["W"]), cls),
    ),
    "ridge": (
        lambda s: {"W": s.W.tolist()},
        lambda d, cls: RidgeState(np.array(d["W"]), cls),
    ),
    "knn": (
        lambda s: {"X": s.X.tolist(), "y_enc": s.y_enc.tolist(),
                   "k": s.k, "weights": s.weights},
        lambda d, cls: KnnState(np.array(d["X"]),
                                np.array(d["y_enc"], dtype=np.int64),
                                cls, d["k"], d["weights"]),
    ),
    "gaussian_nb": (
        lambda s: {"means": s.means.tolist(), "variances": s.variances.tolist(),
                   "log_priors": s.log_priors.tolist()},
        lambda d, cls: NbState(np.array(d["means"]), np.array(d["variances"]),
                               np.array(d["log_priors"]), cls),
    ),
    "decision_tree": (
        lambda s: {"tree": _tree_out(s.tree)},
        lambda d, cls: TreeState(_tree_in(d["tree"]), cls),
    ),
    "random_forest": (
        lambda s: {"trees": [_tree_out(t) for t in s.trees]},
        lambda d, cls: ForestState([_tree_in(t) for t in d["trees"]], cls),
    ),
    "gradient_boosting": (
        lambda s: {"trees_per_class": [[_tree_out(t) for t in rounds]
                                       for rounds in s.trees_per_class],
                   "learning_rate": s.learning_rate},
        lambda d, cls: BoostState([[_tree_in(t) for t in rounds]
                                   for rounds in d["trees_per_class"]],
                                  d["learning_rate"], cls),
    ),
}
for _name in ("sgd_linear", "perceptron", "passive_aggressive"):
    _STATE_CODECS[_name] = (
        lambda s: {"heads": [{"w": h.w.tolist(), "b": h.b} for h in s.heads]},
        lambda d, cls: OvrLinearState(
            [LinearHead(np.array(h["w"]), h["b"]) for h in d["heads"]], cls),
    )


def model_to_json(model: TrainedModel) -> str:
    codec = _STATE_CODECS.get(model.spec.family)
    if codec is None:
        raise ConfigError(
            f"family {model.spec.family!r} has no serialization codec")
    payload = {
        "format": MODEL_JSON_FORMAT,
        "version": MODEL_JSON_VERSION,
        "family": model.spec.family,
        "params": model.spec.params,
        "classes": [int(c) for c in model.classes],
        "n_features": model.n_features,
        "state": codec[0](model.state),
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def model_from_json(text: str) -> TrainedModel:
    payload = json.loads(text)
    if payload.get("format") != MODEL_JSON_FORMAT:
        raise ConfigError("not a model document")
    if payload.get("version") != MODEL_JSON_VERSION:
        raise ConfigError(f"unsupported model version {payload.get('version')}")
    family = payload["family"]
    codec = _STATE_CODECS.get(family)
    if codec is None:
        raise ConfigError(f"family {family!r} has no serialization codec")
    classes = _classes_in(payload["classes"])
    state = codec[1](payload["state"], classes)
    return TrainedModel(ModelSpec(family, payload["params"]), classes, state,
                        payload["n_features"])


# --- built-in registrations -----------------------------------------------------

register_family("logistic", fit_logistic, predict_logistic,
                ("C", "solver", "max_iter", "tol"), DEFAULT_GRIDS["logistic"])
register_family("svm", fit_svm, predict_svm,
                ("C", "kernel", "gamma", "degree", "tol", "max_passes"),
                DEFAULT_GRIDS["svm"])
register_family("random_forest", fit_random_forest, predict_random_forest,
                ("n_estimators", "max_depth", "min_samples_split"),
                DEFAULT_GRIDS["random_forest"])
register_family("knn", fit_knn, predict_knn,
                ("n_neighbors", "weights"), DEFAULT_GRIDS["knn"])
register_family("decision_tree", fit_decision_tree, predict_decision_tree,
                ("max_depth", "min_samples_split"),
                DEFAULT_GRIDS["decision_tree"])
register_family("gaussian_nb", fit_gaussian_nb, predict_gaussian_nb,
                (), DEFAULT_GRIDS["gaussian_nb"])
register_family("gradient_boosting", fit_gradient_boosting,
                predict_gradient_boosting,
                ("n_estimators", "learning_rate", "max_depth"),
                DEFAULT_GRIDS["gradient_boosting"])
register_family("sgd_linear", fit_sgd_linear, predict_ovr_linear,
                ("alpha", "penalty", "max_iter", "eta0"),
                DEFAULT_GRIDS["sgd_linear"])
register_family("ridge", fit_ridge, predict_ridge,
                ("alpha",), DEFAULT_GRIDS["ridge"])
register_family("perceptron", fit_perceptron, predict_ovr_linear,
                ("alpha", "penalty", "max_iter"), DEFAULT_GRIDS["perceptron"])
register_family("passive_aggressive", fit_passive_aggressive,
                predict_ovr_linear,
                ("C", "max_iter"), DEFAULT_GRIDS["passive_aggressive"])
register_family("one_vs_rest", None, predict_ovr_generic, ())

__all__ = [
    "DEFAULT_GRIDS",
    "SVM_EXTENDED_GRID",
    "FlatTree",
    "KernelSpec",
    "ModelSpec",
    "SvmModel",
    "TrainedModel",
    "build_tree",
    "dual_objective",
    "family_grid",
    "family_names",
    "fit_classic",
    "fit_classifier",
    "gram",
    "kernel_eval",
    "kkt_residual",
    "model_from_json",
    "model_to_json",
    "one_vs_rest",
    "predict_classic",
    "predict_classifier",
    "register_family",
    "resolve_gamma",
    "smo_solve",
    "svm_decision",
    "svm_decision_batch",
]
