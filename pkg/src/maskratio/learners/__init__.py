"""Nine binary classifiers behind one contract.

>>> model = train(ModelSpec("DecisionTree"), X, y)   # doctest: +SKIP
>>> model.predict_score(X_test)                       # doctest: +SKIP
"""
from .base import (
    ALGORITHMS,
    DEFAULT_PARAMS,
    Classifier,
    ModelSpec,
    predict,
    predict_score,
)
from .boosting import GradientBoosting
from .linear import KNN, GaussianNB, LogisticRegression
from .mlp import Mlp
from .svm import SvmRbf
from .trees import DecisionTree, ExtraTrees, RandomForest

MODELS = {
    "NaiveBayes": GaussianNB,
    "LogisticRegression": LogisticRegression,
    "KNN": KNN,
    "DecisionTree": DecisionTree,
    "RandomForest": RandomForest,
    "ExtraTrees": ExtraTrees,
    "GradientBoosting": GradientBoosting,
    "SvmRbf": SvmRbf,
    "Mlp": Mlp,
}


def make_model(spec):
    return MODELS[spec.algorithm](spec)


def train(spec, X, y):
    """Fit the model described by ``spec``; returns the fitted classifier."""
    return make_model(spec).fit(X, y)


def _trainer(algorithm):
    def fit(X, y, seed=0, **params):
        return train(ModelSpec(algorithm, params, seed), X, y)

    fit.__name__ = f"train_{algorithm}"
    fit.__doc__ = f"Fit a {algorithm} model; keyword arguments override its defaults."
    return fit


train_gaussian_nb = _trainer("NaiveBayes")
train_logistic_regression = _trainer("LogisticRegression")
train_knn = _trainer("KNN")
train_decision_tree = _trainer("DecisionTree")
train_random_forest = _trainer("RandomForest")
train_extra_trees = _trainer("ExtraTrees")
train_gradient_boosting = _trainer("GradientBoosting")
train_svm_rbf = _trainer("SvmRbf")
train_mlp = _trainer("Mlp")

__all__ = [
    "ALGORITHMS",
    "DEFAULT_PARAMS",
    "Classifier",
    "ModelSpec",
    "MODELS",
    "make_model",
    "train",
    "predict",
    "predict_score",
    "DecisionTree",
    "ExtraTrees",
    "GaussianNB",
    "GradientBoosting",
    "KNN",
    "LogisticRegression",
    "Mlp",
    "RandomForest",
    "SvmRbf",
]
