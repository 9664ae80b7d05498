"""CSV/JSON writers for the run directory.

All writers are deterministic: rows in a fixed order, floats via ``repr``,
``\\n`` line endings and JSON with sorted keys.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os

from .dataset import (
    DESCRIBE_COLUMNS,
    DESCRIBE_STATS,
    FEATURES,
    Label,
    round_half_away,
)
from .ingest import format_missing_report

DATASET_HEADER = ["fips", *FEATURES, "dr_delta", "label"]
ACCURACY_HEADER = ["algorithm", "test_pct", "train_pct", "ci_pct"]
STATE_HEADER = [
    "state",
    "n_counties",
    "ratio_before",
    "ratio_after",
    "pct_change",
    "pct_change_rounded",
    "cases_change",
    "deaths_change",
    "county_ratio_sum_before",
    "county_ratio_sum_after",
]


def fmt(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return "" if math.isnan(x) else repr(x)
    return str(x)


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_text(out_dir, name, text):
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def dataset_csv(samples):
    return csv_text(
        DATASET_HEADER,
        ([s.fips, *s.features, s.dr_delta, s.label.value] for s in samples),
    )


def map_data_csv(deltas):
    """``deltas``: ``[(record, RatioDelta)]`` for every joined county."""
    rows = sorted((r.fips, d.delta) for r, d in deltas)
    return csv_text(["fips", "dr_delta"], rows)


def class_counts_csv(counts):
    return csv_text(["label", "count"], ((lab.value, counts[lab]) for lab in Label))


def correlations_csv(corr):
    return csv_text(["feature", "pearson_r"], ((f, corr[f]) for f in FEATURES))


def describe_csv(desc):
    rows = ([stat, *(float(v) for v in desc.stats[stat])] for stat in DESCRIBE_STATS)
    return csv_text(["stat", *DESCRIBE_COLUMNS], rows)


def state_summary_csv(rows):
    return csv_text(
        STATE_HEADER,
        (
            [
                r.state,
                r.n_counties,
                r.ratio_before,
                r.ratio_after,
                r.pct_change,
                r.pct_change_rounded,
                r.cases_change,
                r.deaths_change,
                r.county_ratio_sum_before,
                r.county_ratio_sum_after,
            ]
            for r in rows
        ),
    )


def group_means_csv(overall, by_state):
    """Overall per-label means (state ``ALL``) followed by per-state rows."""
    rows = [["ALL", lab.value, *(means[f] for f in FEATURES)] for lab, means in overall.items()]
    rows += [[st, lab.value, *(means[f] for f in FEATURES)] for (st, lab), means in by_state.items()]
    return csv_text(["state", "label", *FEATURES], rows)


def pct(x):
    return round_half_away(100.0 * x)


def accuracy_order(reports):
    return sorted(reports, key=lambda r: (r.test_accuracy, r.algorithm))


def accuracies_csv(reports):
    """Integer percentages, ascending test accuracy (ties by name)."""
    return csv_text(
        ACCURACY_HEADER,
        (
            [r.algorithm, pct(r.test_accuracy), pct(r.train_accuracy), pct(r.ci_half_width)]
            for r in accuracy_order(reports)
        ),
    )


def roc_csv(points):
    return csv_text(["fpr", "tpr"], points)


def search_log_csv(log):
    names = sorted({k for params, _ in log for k in params})
    return csv_text([*names, "cv_score"], ([params.get(n) for n in names] + [score] for params, score in log))


def hyperparameters_csv(reports):
    rows = []
    for r in sorted(reports, key=lambda r: r.algorithm):
        for name in sorted(r.params):
            rows.append([r.algorithm, name, r.params[name]])
    return csv_text(["algorithm", "param", "value"], rows)


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def eval_report_json(reports, split):
    out = {
        "split": {
            "seed": split.seed,
            "stratified": split.stratified,
            "n_train": int(len(split.train_indices)),
            "n_test": int(len(split.test_indices)),
        },
        "algorithms": {},
    }
    for r in sorted(reports, key=lambda r: r.algorithm):
        out["algorithms"][r.algorithm] = {
            "test_accuracy": r.test_accuracy,
            "train_accuracy": r.train_accuracy,
            "ci_half_width": r.ci_half_width,
            "auc": _clean(r.auc),
            "cv_score": _clean(r.cv_score),
            "confusion": r.confusion,
            "params": r.params,
            "n_test": r.n_test,
        }
    return json_text(out)


def sweep_csv(sweep):
    rows = []
    for algo in sorted(sweep):
        for seed, acc in sweep[algo]:
            rows.append([algo, seed, acc])
    return csv_text(["algorithm", "seed", "test_accuracy"], rows)


def sweep_summary_csv(medians):
    return csv_text(["algorithm", "median_test_accuracy"], sorted(medians.items()))


def missing_csv(missing):
    return format_missing_report(missing)
