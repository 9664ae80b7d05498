import csv
import filecmp
import json
import os

import pytest

from maskratio.config import load_config
from maskratio.dataset import FEATURES, Label
from maskratio.pipeline import load_dataset, run_pipeline, run_synth_check, seed_sweep, tune
from maskratio.reports import ACCURACY_HEADER, DATASET_HEADER, STATE_HEADER, pct
from maskratio.synth import SynthSpec

FAST = ("NaiveBayes", "DecisionTree", "KNN")


@pytest.fixture(scope="module")
def run_dir(synth_inputs, tmp_path_factory):
    cfg = load_config(synth_inputs[0]["config"])
    out = str(tmp_path_factory.mktemp("run"))
    bundle, reps = run_pipeline(cfg, out)
    return out, bundle, reps


def read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_report_files_and_schemas(run_dir):
    out, bundle, reps = run_dir
    files = set(os.listdir(out))
    for name in ("dataset.csv", "map_data.csv", "correlations.csv", "describe.csv", "state_summary.csv",
                 "group_means.csv", "accuracies.csv", "class_counts.csv", "missing_counties.csv",
                 "hyperparameters.csv", "eval_report.json", "run_manifest.json"):
        assert name in files
    assert {f"roc_{r.algorithm}.csv" for r in reps} <= files
    assert {f"search_log_{r.algorithm}.csv" for r in reps} <= files

    rows = read(os.path.join(out, "dataset.csv"))
    assert rows[0] == DATASET_HEADER
    for row, s in zip(rows[1:], bundle.samples):
        assert row[0] == s.fips and tuple(float(v) for v in row[1:9]) == s.features
        assert float(row[9]) == s.dr_delta and Label(row[10]) is s.label

    acc = read(os.path.join(out, "accuracies.csv"))
    assert acc[0] == ACCURACY_HEADER and len(acc) == 10
    tests = [int(r[1]) for r in acc[1:]]
    assert tests == sorted(tests)
    by_alg = {r.algorithm: r for r in reps}
    for name, test_pct, train_pct, ci_pct in acc[1:]:
        r = by_alg[name]
        assert (int(test_pct), int(train_pct), int(ci_pct)) == (pct(r.test_accuracy), pct(r.train_accuracy), pct(r.ci_half_width))

    roc = read(os.path.join(out, "roc_NaiveBayes.csv"))
    assert roc[0] == ["fpr", "tpr"] and roc[1] == ["0.0", "0.0"] and roc[-1] == ["1.0", "1.0"]
    assert read(os.path.join(out, "state_summary.csv"))[0] == STATE_HEADER
    gm = read(os.path.join(out, "group_means.csv"))
    assert gm[0] == ["state", "label", *FEATURES] and gm[1][:2] == ["ALL", "Decrease"]
    assert len(read(os.path.join(out, "map_data.csv"))) == len(bundle.records) + 1
    log = read(os.path.join(out, "search_log_DecisionTree.csv"))
    assert log[0][-1] == "cv_score" and len(log) == 1 + 10

    manifest = json.load(open(os.path.join(out, "run_manifest.json")))
    assert manifest["config"]["evaluation"]["z"] == 1.96
    assert set(manifest["inputs"]) == {"cases", "deaths", "census", "mask"}
    assert all(len(v["sha256"]) == 64 for v in manifest["inputs"].values())
    assert manifest["versions"]["kernel_backend"] in ("cython", "python")


def test_run_is_byte_identical(synth_inputs, run_dir, tmp_path):
    out, _, _ = run_dir
    cfg = load_config(synth_inputs[0]["config"])
    run_pipeline(cfg, str(tmp_path))
    cmp = filecmp.dircmp(out, str(tmp_path))
    assert not cmp.left_only and not cmp.right_only
    _, mismatch, errors = filecmp.cmpfiles(out, str(tmp_path), cmp.common_files, shallow=False)
    assert mismatch == [] and errors == []


def test_parallel_equals_sequential(synth_inputs):
    cfg = load_config(synth_inputs[0]["config"])
    cfg.algorithms = FAST
    X, _, y = load_dataset(cfg).arrays()
    a = seed_sweep(cfg, X, y, [0, 1])
    b = seed_sweep(cfg, X, y, [0, 1], jobs=2)
    assert a == b


def test_tune_strategies(synth_inputs):
    cfg = load_config(synth_inputs[0]["config"])
    X, _, y = load_dataset(cfg).arrays()
    knn = tune("KNN", cfg, X, y, 0)
    assert len(knn.log) == 25 and knn.spec.params["n_neighbors"] in range(1, 26)
    nb = tune("NaiveBayes", cfg, X, y, 0)
    assert len(nb.log) == 1
    gb = tune("GradientBoosting", cfg, X, y, 0)
    assert len(gb.log) == cfg.search["GradientBoosting"]["n_draws"]


def test_synth_check_rejects_small_spec():
    with pytest.raises(Exception):
        run_synth_check(SynthSpec(n_counties=3))


def test_synth_check_fast_subset():
    res = run_synth_check(SynthSpec(n_counties=120, seed=3), algorithms=FAST)
    assert res.passed and res.labels_match and len(res.outcomes) == 3
    assert any("NaiveBayes" in line for line in res.lines())
