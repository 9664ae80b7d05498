import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import blobs
from maskratio.dataset import apply_scaler, fit_scaler
from maskratio.errors import BadFraction, BadScore, EmptySpace, KTooLarge, SingleClass, SingleClassStratify
from maskratio.evaluation import (
    IntUniform,
    Uniform,
    accuracy,
    cross_val_score,
    elbow_knn,
    evaluate_model,
    hyperparameter_search,
    kfold_indices,
    mann_whitney_auc,
    random_candidates,
    roc_auc,
    select_elbow,
    train_test_split,
    wald_ci,
)
from maskratio import evaluation
from maskratio.learners import Classifier, ModelSpec, make_model


def test_split_examples():
    plan = train_test_split(77, 0.2, seed=0, labels=np.r_[np.zeros(47), np.ones(30)])
    assert len(plan.test_indices) == 16 and len(plan.train_indices) == 61
    y = np.r_[np.zeros(5), np.ones(5)]
    plan = train_test_split(10, 0.2, seed=3, labels=y)
    assert sorted(y[plan.test_indices].tolist()) == [0.0, 1.0]
    with pytest.raises(BadFraction):
        train_test_split(10, 0.0)
    with pytest.raises(SingleClassStratify):
        train_test_split(10, 0.2, labels=np.zeros(10))


def test_stratified_remainder_to_larger_class():
    y = np.r_[np.zeros(47), np.ones(30)]
    plan = train_test_split(77, 0.2, seed=1, labels=y)
    # 16 * 47/77 = 9.77 -> 9, 16 * 30/77 = 6.23 -> 6, remainder 1 to the larger class
    assert int((y[plan.test_indices] == 0).sum()) == 10


@given(st.integers(2, 200), st.floats(0.05, 0.6), st.integers(0, 2**32), st.booleans())
@settings(max_examples=80, deadline=None)
def test_split_partition(n, frac, seed, strat):
    if math.ceil(frac * n) >= n:
        return
    labels = np.arange(n) % 2 if strat else None
    plan = train_test_split(n, frac, seed, labels=labels)
    both = np.r_[plan.train_indices, plan.test_indices]
    assert sorted(both.tolist()) == list(range(n))
    assert len(plan.test_indices) == math.ceil(frac * n)
    again = train_test_split(n, frac, seed, labels=labels)
    assert np.array_equal(plan.test_indices, again.test_indices)


def test_kfold_examples():
    assert [len(f) for f in kfold_indices(10, 5)] == [2] * 5
    assert [len(f) for f in kfold_indices(77, 5)] == [16, 16, 15, 15, 15]
    with pytest.raises(KTooLarge):
        kfold_indices(4, 5)


@given(st.integers(2, 150), st.integers(2, 10), st.integers(0, 2**32))
@settings(max_examples=80, deadline=None)
def test_kfold_partition(n, k, seed):
    if k > n:
        return
    folds = kfold_indices(n, k, seed)
    assert sorted(np.concatenate(folds).tolist()) == list(range(n))
    sizes = [len(f) for f in folds]
    assert max(sizes) - min(sizes) <= 1


def test_cross_val_matches_manual_loop():
    X, y = blobs(12, 3, sep=0.7, seed=2)
    spec = ModelSpec("DecisionTree", {"max_depth": 2})
    res = cross_val_score(spec, X, y, k=4, seed=5)
    folds = kfold_indices(12, 4, 5)
    manual = []
    for fold in reversed(folds):  # evaluation order must not matter
        train = [i for i in range(12) if i not in set(fold.tolist())]
        sc = fit_scaler(X[train])
        model = make_model(spec).fit(apply_scaler(sc, X[train])[0], y[train])
        pred = model.predict(apply_scaler(sc, X[fold])[0])
        manual.append(sum(int(p == t) for p, t in zip(pred, y[fold])) / len(fold))
    assert res.fold_scores == manual[::-1]
    assert res.mean == pytest.approx(sum(manual) / 4, abs=1e-15)


class _Constant(Classifier):
    algorithm = "NaiveBayes"
    requires_both_classes = False

    def _fit(self, X, y):
        pass

    def _score(self, X):
        return np.full(X.shape[0], 0.5)


def test_cross_val_extremes(monkeypatch):
    X, y = blobs(60, 4, sep=5.0, seed=3)
    assert cross_val_score(ModelSpec("NaiveBayes"), X, y).mean == 1.0
    monkeypatch.setattr(evaluation, "make_model", _Constant)
    Xr = np.random.default_rng(0).random((60, 4))
    yr = np.arange(60) % 2
    assert cross_val_score(ModelSpec("NaiveBayes"), Xr, yr).mean == pytest.approx(0.5)


def test_search_examples():
    X, y = blobs(40, 3, sep=1.0, seed=4)
    tmpl = ModelSpec("DecisionTree")
    res = hyperparameter_search({"max_depth": [2]}, "grid", tmpl, X, y)
    assert res.best_spec.params["max_depth"] == 2 and len(res.log) == 1
    res = hyperparameter_search({"max_depth": [1, 2], "criterion": ["gini", "entropy"]}, "grid", tmpl, X, y)
    assert len(res.log) == 4
    assert [p for p, _ in res.log][0] == {"criterion": "gini", "max_depth": 1}
    best = max(s for _, s in res.log)
    first_best = next(p for p, s in res.log if s == best)
    assert {k: res.best_spec.params[k] for k in first_best} == first_best
    with pytest.raises(EmptySpace):
        hyperparameter_search({}, "grid", tmpl, X, y)


def test_random_search_repeatable():
    space = {"lr": Uniform(0.01, 0.3), "depth": IntUniform(2, 6), "kind": ["a", "b"]}
    a = list(random_candidates(space, 10, 7))
    assert a == list(random_candidates(space, 10, 7))
    assert a != list(random_candidates(space, 10, 8))
    assert all(0.01 <= c["lr"] <= 0.3 and 2 <= c["depth"] <= 6 for c in a)


def test_elbow_rule():
    ks = list(range(1, 16))
    assert select_elbow(ks, [0.3] * 15) == 1
    drop = [0.5 - 0.05 * min(k, 8) for k in ks]  # strictly dropping, flat after 8
    assert select_elbow(ks, drop) == 8
    # drop fractions 0.5, 0.3, 0.05, 0.05, ... of the total drop
    total = 1.0
    errs = [1.0]
    for f in [0.5, 0.3, 0.05, 0.05, 0.05, 0.05]:
        errs.append(errs[-1] - f * total)
    assert select_elbow(range(1, 8), errs) == 3


def test_elbow_knn_runs():
    X, y = blobs(60, 3, sep=2.0, seed=5)
    res = elbow_knn(X, y, range(1, 26))
    assert res.k in res.ks and len(res.errors) == len(res.ks)


def test_accuracy_examples():
    a = np.array([0, 1, 1, 0])
    assert accuracy(a, a) == 1.0 and accuracy(1 - a, a) == 0.0
    assert accuracy(np.r_[np.ones(15), 0], np.ones(16)) == 0.9375
    assert round(100 * 0.9375) == 94


def test_wald_examples():
    assert wald_ci(0.94, 16) == pytest.approx(0.1163, abs=1e-4)
    assert round(100 * wald_ci(0.94, 16)) == 12
    assert round(100 * wald_ci(0.88, 16)) == 16
    assert wald_ci(0.0, 16) == wald_ci(1.0, 16) == 0.0
    with pytest.raises(BadScore):
        wald_ci(1.2, 16)


@given(st.floats(0.001, 0.999), st.integers(1, 500))
def test_wald_symmetric_and_decreasing(p, n):
    assert wald_ci(p, n) == pytest.approx(wald_ci(1 - p, n), rel=1e-9)
    assert wald_ci(p, n + 1) < wald_ci(p, n)


def test_roc_examples():
    pts, auc = roc_auc([0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0])
    assert auc == 1.0 and pts[0] == (0.0, 0.0) and pts[-1] == (1.0, 1.0)
    assert roc_auc([0.9, 0.6, 0.4, 0.1], [1, 0, 1, 0])[1] == 0.75
    with pytest.raises(SingleClass):
        roc_auc([0.1, 0.2], [1, 1])


def test_auc_equals_mann_whitney():
    rng = np.random.default_rng(0)
    done = 0
    while done < 200:
        n = int(rng.integers(2, 21))
        labels = rng.integers(0, 2, n)
        if labels.min() == labels.max():
            continue
        scores = rng.integers(0, 6, n) / 5.0 if done % 2 else rng.random(n)  # half with ties
        pts, auc = roc_auc(scores, labels)
        assert auc == mann_whitney_auc(scores, labels)
        f, t = zip(*pts)
        assert list(f) == sorted(f) and list(t) == sorted(t)
        done += 1


@given(st.lists(st.integers(0, 1000), min_size=2, max_size=20, unique=True), st.data())
@settings(max_examples=60, deadline=None)
def test_auc_invariances(scores, data):
    labels = data.draw(st.lists(st.integers(0, 1), min_size=len(scores), max_size=len(scores)))
    if len(set(labels)) < 2:
        return
    s = np.array(scores) / 1000.0
    y = np.array(labels)
    _, auc = roc_auc(s, y)
    assert roc_auc(np.exp(3 * s) - 2, y)[1] == auc
    _, refl = roc_auc(1 - s, 1 - y)
    assert auc == pytest.approx(refl)
    _, flipped = roc_auc(s, 1 - y)
    assert auc + flipped == pytest.approx(1.0)
    assert roc_auc(s, y) == roc_auc(s, y)


def test_evaluate_model_report():
    X, y = blobs(77, 8, sep=1.5, seed=6)
    plan = train_test_split(77, 0.2, 0, labels=y)
    tr, te = plan.train_indices, plan.test_indices
    rep = evaluate_model(ModelSpec("NaiveBayes"), X[tr], y[tr], X[te], y[te])
    assert rep.n_test == 16
    assert rep.ci_half_width == wald_ci(rep.test_accuracy, 16)
    c = rep.confusion
    assert c["TP"] + c["TN"] == round(rep.test_accuracy * 16) and sum(c.values()) == 16
    assert 0 <= rep.auc <= 1
