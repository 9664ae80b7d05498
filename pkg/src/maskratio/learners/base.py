"""Model specifications and the common classifier contract."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DataError, NotFitted, SingleClass, WidthMismatch

ALGORITHMS = (
    "NaiveBayes",
    "LogisticRegression",
    "KNN",
    "DecisionTree",
    "RandomForest",
    "ExtraTrees",
    "GradientBoosting",
    "SvmRbf",
    "Mlp",
)

# Tuned values reported for the West Coast study; everything else is a
# library-style default.
DEFAULT_PARAMS = {
    "NaiveBayes": {"var_smoothing": 1e-9},
    "LogisticRegression": {"C": 1000.0, "penalty": "l2", "tol": 1e-6, "max_iter": 10000},
    "KNN": {"n_neighbors": 8},
    "DecisionTree": {
        "max_depth": 4,
        "criterion": "gini",
        "min_samples_split": 2,
        "min_samples_leaf": 1,
    },
    "RandomForest": {
        "n_estimators": 10,
        "max_depth": 7,
        "max_features": 2,
        "min_samples_split": 2,
        "min_samples_leaf": 1,
        "criterion": "gini",
        "bootstrap": True,
    },
    "ExtraTrees": {
        "n_estimators": 200,
        "criterion": "entropy",
        "min_samples_split": 2,
        "min_samples_leaf": 2,
        "max_features": "sqrt",
        "max_depth": None,
    },
    "GradientBoosting": {
        "colsample_bytree": 0.9605,
        "gamma": 0.4735,
        "learning_rate": 0.0975,
        "max_depth": 4,
        "n_estimators": 119,
        "subsample": 0.6232,
        "reg_lambda": 1.0,
    },
    "SvmRbf": {"C": 1.0, "gamma": "variance", "tol": 1e-3, "max_iter": 100000},
    "Mlp": {
        "hidden": 32,
        "layers": 1,
        "activation": "relu",
        "learning_rate": 0.01,
        "epochs": 50,
        "optimizer": "adam",
    },
}


def _positive(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and x > 0


def _count(x, minimum=1):
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool) and x >= minimum


def _fraction(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and 0 < x <= 1


def _max_features(x):
    return x is None or x in ("sqrt", "all") or _count(x)


_CHECKS = {
    "var_smoothing": lambda v: isinstance(v, (int, float)) and v >= 0,
    "C": _positive,
    "penalty": lambda v: v == "l2",
    "tol": _positive,
    "max_iter": _count,
    "n_neighbors": _count,
    "max_depth": lambda v: v is None or _count(v),
    "criterion": lambda v: v in ("gini", "entropy"),
    "min_samples_split": lambda v: _count(v, 2),
    "min_samples_leaf": _count,
    "n_estimators": _count,
    "max_features": _max_features,
    "bootstrap": lambda v: isinstance(v, bool),
    "colsample_bytree": _fraction,
    "subsample": _fraction,
    "gamma": lambda v: v == "variance" or (isinstance(v, (int, float)) and v >= 0),
    "learning_rate": _positive,
    "reg_lambda": lambda v: isinstance(v, (int, float)) and v >= 0,
    "hidden": _count,
    "layers": _count,
    "activation": lambda v: v == "relu",
    "epochs": lambda v: _count(v, 0),
    "optimizer": lambda v: v in ("adam", "gd"),
}


@dataclass(frozen=True)
class ModelSpec:
    """An algorithm tag, its complete hyperparameter set and a seed.

    Missing hyperparameters are filled from ``DEFAULT_PARAMS``; unknown or
    out-of-range ones raise ConfigError.
    """

    algorithm: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        defaults = DEFAULT_PARAMS[self.algorithm]
        unknown = set(self.params) - set(defaults)
        if unknown:
            raise ConfigError(f"{self.algorithm}: unknown hyperparameters {sorted(unknown)}")
        full = {**defaults, **self.params}
        for name, value in full.items():
            if not _CHECKS[name](value):
                raise ConfigError(f"{self.algorithm}: invalid {name}={value!r}")
        if self.algorithm == "GradientBoosting" and full["gamma"] == "variance":
            raise ConfigError("GradientBoosting: gamma must be a number")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        object.__setattr__(self, "params", full)

    def with_params(self, **params):
        return ModelSpec(self.algorithm, {**self.params, **params}, self.seed)

    def with_seed(self, seed):
        return ModelSpec(self.algorithm, dict(self.params), seed)


def check_training_data(X, y, need_both=True, algorithm=""):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError(f"{algorithm}: empty or non-2-D training matrix")
    if y.shape != (X.shape[0],):
        raise DataError(f"{algorithm}: {X.shape[0]} rows but {y.size} labels")
    if not np.all(np.isfinite(X)):
        raise DataError(f"{algorithm}: non-finite feature values")
    if not np.isin(y, (0, 1)).all():
        raise DataError(f"{algorithm}: labels must be 0/1")
    y = y.astype(np.int64)
    if need_both and (y.min() == y.max()):
        raise SingleClass(f"{algorithm}: training labels contain a single class")
    return X, y


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logit(p):
    return math.log(p / (1.0 - p))


class Classifier:
    """Binary classifier with 0/1 labels (1 = Increase).

    Subclasses implement ``_fit`` and ``_score``; scores lie in [0, 1] and
    labels are ``score >= threshold``.
    """

    algorithm = ""
    requires_both_classes = True

    def __init__(self, spec):
        self.spec = spec
        self.params = spec.params
        self.n_samples_ = None
        self.n_features_ = None

    def fit(self, X, y):
        X, y = check_training_data(X, y, self.requires_both_classes, self.algorithm)
        self.n_samples_, self.n_features_ = X.shape
        self._fit(X, y)
        return self

    def _check_X(self, X):
        if self.n_features_ is None:
            raise NotFitted(f"{self.algorithm} model is not fitted")
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.ndim != 2 or X.shape[1] != self.n_features_:
            raise WidthMismatch(
                f"{self.algorithm} was trained on {self.n_features_} features, got {X.shape[-1]}"
            )
        return X

    def predict_score(self, X):
        scores = self._score(self._check_X(X))
        return np.clip(scores, 0.0, 1.0)

    def predict(self, X, threshold=0.5):
        return (self.predict_score(X) >= threshold).astype(np.int64)

    @property
    def fingerprint(self):
        return (self.n_samples_, self.n_features_)

    def _fit(self, X, y):
        raise NotImplementedError

    def _score(self, X):
        raise NotImplementedError


def predict(model, X, threshold=0.5):
    return model.predict(X, threshold)


def predict_score(model, X):
    return model.predict_score(X)
