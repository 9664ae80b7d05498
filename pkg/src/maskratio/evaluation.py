"""Splitting, cross-validation, hyperparameter search and metrics."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import apply_scaler, fit_scaler
from .errors import (
    BadFraction,
    BadScore,
    ConfigError,
    EmptySpace,
    KTooLarge,
    LengthMismatch,
    SingleClass,
    SingleClassStratify,
)
from .learners import ModelSpec, make_model

Z_95 = 1.96


@dataclass(frozen=True)
class SplitPlan:
    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int
    stratified: bool


def train_test_split(n, test_fraction=0.2, seed=0, labels=None, stratified=True):
    """Shuffled split with ``ceil(test_fraction * n)`` test rows.

    When stratified, each label gets ``floor`` of its proportional share of
    the test rows and the remainder goes to the larger class.
    """
    if not 0 < test_fraction < 1:
        raise BadFraction(f"test_fraction must lie in (0, 1), got {test_fraction}")
    if n < 2:
        raise ConfigError(f"need at least 2 rows to split, got {n}")
    n_test = math.ceil(test_fraction * n)
    if n_test >= n:
        raise BadFraction(f"test_fraction {test_fraction} leaves no training rows for n={n}")
    rng = np.random.default_rng(seed)
    if stratified and labels is not None:
        labels = np.asarray(labels)
        if labels.shape != (n,):
            raise LengthMismatch(f"{labels.size} labels for {n} rows")
        classes, counts = np.unique(labels, return_counts=True)
        if classes.size < 2:
            raise SingleClassStratify("stratified split needs both labels present")
        share = np.floor(n_test * counts / n).astype(int)
        remainder = n_test - int(share.sum())
        # remainder to the larger class(es), ties to the first class
        for c in np.argsort(-counts, kind="stable")[:remainder]:
            share[c] += 1
        test = []
        for c, k in zip(classes, share):
            members = np.flatnonzero(labels == c)
            test.append(rng.permutation(members)[:k])
        test = np.sort(np.concatenate(test))
    else:
        test = np.sort(rng.permutation(n)[:n_test])
        stratified = False
    train = np.setdiff1d(np.arange(n), test)
    return SplitPlan(train, test, int(seed), bool(stratified))


def kfold_indices(n, k=5, seed=0):
    """k shuffled folds partitioning ``range(n)``; the first ``n % k`` folds get one extra row."""
    if k < 2:
        raise ConfigError(f"need at least 2 folds, got {k}")
    if k > n:
        raise KTooLarge(f"{k} folds requested for {n} rows")
    perm = np.random.default_rng(seed).permutation(n)
    sizes = [n // k + (1 if i < n % k else 0) for i in range(k)]
    folds = []
    start = 0
    for s in sizes:
        folds.append(np.sort(perm[start : start + s]))
        start += s
    return folds


def accuracy(predicted, actual):
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape:
        raise LengthMismatch(f"{predicted.size} predictions for {actual.size} labels")
    if predicted.size == 0:
        raise LengthMismatch("accuracy of an empty vector")
    return float(np.count_nonzero(predicted == actual)) / predicted.size


def wald_ci(score, n_test, z=Z_95):
    """Half-width ``z * sqrt(score (1 - score) / n_test)``."""
    if not 0.0 <= score <= 1.0:
        raise BadScore(f"score must lie in [0, 1], got {score}")
    if n_test < 1:
        raise BadScore(f"n_test must be >= 1, got {n_test}")
    return z * math.sqrt(score * (1.0 - score) / n_test)


def roc_auc(scores, labels):
    """ROC points and trapezoidal AUC.

    Thresholds run over the distinct scores in descending order, so tied
    scores move the curve in one diagonal step. The area is accumulated in
    integer counts and divided once, which makes it equal to the
    Mann-Whitney concordance probability (ties counted 1/2).
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(np.int64)
    if scores.shape != labels.shape:
        raise LengthMismatch(f"{scores.size} scores for {labels.size} labels")
    P = int(np.count_nonzero(labels == 1))
    N = int(labels.size - P)
    if P == 0 or N == 0:
        raise SingleClass("ROC needs both labels present")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    l = labels[order]
    # last index of each run of equal scores
    ends = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = np.cumsum(l)[ends]
    fp = (ends + 1) - tp
    tp = np.r_[0, tp]
    fp = np.r_[0, fp]
    twice_area = int(np.sum((fp[1:] - fp[:-1]) * (tp[1:] + tp[:-1])))
    auc = twice_area / (2 * P * N)
    points = [(float(f) / N, float(t) / P) for f, t in zip(fp, tp)]
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    return points, auc


def mann_whitney_auc(scores, labels):
    """Brute-force concordance probability over all positive/negative pairs."""
    scores = list(scores)
    labels = list(labels)
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    twice = 0
    for a in pos:
        for b in neg:
            twice += 2 if a > b else (1 if a == b else 0)
    return twice / (2 * len(pos) * len(neg))


def fit_scaled(spec, X_train, y_train):
    """Fit a scaler on the training rows, then the model on the scaled rows."""
    scaler = fit_scaler(np.asarray(X_train, dtype=np.float64))
    Xs, _ = apply_scaler(scaler, X_train)
    return scaler, make_model(spec).fit(Xs, y_train)


@dataclass
class CVResult:
    mean: float
    fold_scores: list


def cross_val_score(spec, X, y, k=5, seed=0):
    """Mean validation accuracy over k folds, refitting the scaler per fold."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    folds = kfold_indices(len(y), k, seed)
    scores = []
    for fold in folds:
        train = np.setdiff1d(np.arange(len(y)), fold)
        scaler, model = fit_scaled(spec, X[train], y[train])
        Xv, _ = apply_scaler(scaler, X[fold])
        scores.append(accuracy(model.predict(Xv), y[fold]))
    return CVResult(float(np.mean(scores)), scores)


# -- hyperparameter search

@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def draw(self, rng):
        return float(rng.uniform(self.low, self.high))


@dataclass(frozen=True)
class IntUniform:
    """Uniform integer on the closed range [low, high]."""

    low: int
    high: int

    def draw(self, rng):
        return int(rng.integers(self.low, self.high + 1))


@dataclass(frozen=True)
class Choice:
    options: tuple

    def draw(self, rng):
        return self.options[int(rng.integers(len(self.options)))]


def _as_distribution(values):
    if isinstance(values, (Uniform, IntUniform, Choice)):
        return values
    return Choice(tuple(values))


def grid_candidates(space):
    names = sorted(space)
    for name in names:
        if not isinstance(space[name], (list, tuple)):
            raise ConfigError(f"grid search needs a list of values for {name!r}")
    for combo in itertools.product(*(space[n] for n in names)):
        yield dict(zip(names, combo))


def random_candidates(space, n_draws, seed):
    rng = np.random.default_rng(seed)
    names = sorted(space)
    dists = {n: _as_distribution(space[n]) for n in names}
    for _ in range(n_draws):
        yield {n: dists[n].draw(rng) for n in names}


@dataclass
class SearchResult:
    best_spec: ModelSpec
    best_score: float
    log: list = field(default_factory=list)  # [(params, cv_score)]


def hyperparameter_search(space, strategy, spec_template, X, y, k=5, seed=0, n_draws=10):
    """Grid or random search over ``space`` scored by k-fold CV accuracy.

    Ties go to the first candidate evaluated. Every candidate and its score
    is kept in ``SearchResult.log``.
    """
    if not space:
        raise EmptySpace("empty hyperparameter space")
    if strategy == "grid":
        candidates = list(grid_candidates(space))
    elif strategy == "random":
        candidates = list(random_candidates(space, n_draws, seed))
    else:
        raise ConfigError(f"unknown search strategy {strategy!r}")
    if not candidates:
        raise EmptySpace("hyperparameter space has no points")
    best = None
    log = []
    for params in candidates:
        spec = spec_template.with_params(**params)
        score = cross_val_score(spec, X, y, k, seed).mean
        log.append((params, score))
        if best is None or score > best[1]:
            best = (spec, score)
    return SearchResult(best[0], best[1], log)


ELBOW_FRACTION = 0.10


def select_elbow(ks, errors, fraction=ELBOW_FRACTION):
    """Pick k at the point of diminishing returns.

    Scanning upward, the first k whose improvement over the previous k is
    below ``fraction`` of the total drop (first error minus the minimum)
    ends the scan; the previous k is returned. A curve with no drop gives
    the smallest k.
    """
    ks = list(ks)
    errors = [float(e) for e in errors]
    if len(ks) != len(errors) or not ks:
        raise LengthMismatch("need one error per k")
    total = errors[0] - min(errors)
    if total <= 0:
        return ks[0]
    for i in range(1, len(ks)):
        if errors[i - 1] - errors[i] < fraction * total:
            return ks[i - 1]
    return ks[-1]


@dataclass
class ElbowResult:
    k: int
    ks: list
    errors: list


def elbow_knn(X, y, k_range=range(1, 26), folds=5, seed=0, spec_template=None):
    """CV error for each k, then :func:`select_elbow`."""
    template = spec_template or ModelSpec("KNN")
    n = len(y)
    smallest_train = n - math.ceil(n / folds)
    ks = [k for k in k_range if k <= smallest_train]
    if not ks:
        raise KTooLarge(f"no k in range fits {smallest_train} training rows")
    errors = [1.0 - cross_val_score(template.with_params(n_neighbors=k), X, y, folds, seed).mean for k in ks]
    return ElbowResult(select_elbow(ks, errors), ks, errors)


# -- full evaluation

@dataclass
class EvalReport:
    algorithm: str
    train_accuracy: float
    test_accuracy: float
    ci_half_width: float
    roc_points: list
    auc: float
    confusion: dict
    params: dict
    n_test: int
    search_log: list = field(default_factory=list)
    cv_score: float | None = None


def confusion_counts(predicted, actual):
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    return {
        "TP": int(np.sum((predicted == 1) & (actual == 1))),
        "FP": int(np.sum((predicted == 1) & (actual == 0))),
        "TN": int(np.sum((predicted == 0) & (actual == 0))),
        "FN": int(np.sum((predicted == 0) & (actual == 1))),
    }


def evaluate_model(spec, X_train, y_train, X_test, y_test, threshold=0.5, z=Z_95):
    scaler, model = fit_scaled(spec, X_train, y_train)
    Xtr, _ = apply_scaler(scaler, X_train)
    Xte, _ = apply_scaler(scaler, X_test)
    test_pred = model.predict(Xte, threshold)
    test_acc = accuracy(test_pred, y_test)
    try:
        points, auc = roc_auc(model.predict_score(Xte), y_test)
    except SingleClass:
        points, auc = [], float("nan")
    return EvalReport(
        algorithm=spec.algorithm,
        train_accuracy=accuracy(model.predict(Xtr, threshold), y_train),
        test_accuracy=test_acc,
        ci_half_width=wald_ci(test_acc, len(y_test), z),
        roc_points=points,
        auc=auc,
        confusion=confusion_counts(test_pred, y_test),
        params=dict(spec.params),
        n_test=len(y_test),
    )
