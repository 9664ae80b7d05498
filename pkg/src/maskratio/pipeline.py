"""End-to-end orchestration: ingest, dataset, tuning, evaluation, reports."""
from __future__ import annotations

import os
import platform
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, kernels, reports
from .config import Config, search_space
from .dataset import (
    Label,
    build_labeled_dataset,
    county_deltas,
    describe_dataset,
    feature_correlations,
    group_means,
    samples_to_arrays,
    state_summary,
)
from .errors import DataError, MissingLabel
from .evaluation import (
    cross_val_score,
    elbow_knn,
    evaluate_model,
    hyperparameter_search,
    train_test_split,
)
from .ingest import join_records, load_sources
from .learners import ALGORITHMS, ModelSpec
from .synth import SynthSpec, generate_synthetic_dataset, write_synthetic_files


@dataclass
class DatasetBundle:
    records: list
    missing: dict
    samples: list
    counts: dict
    config: Config

    def arrays(self):
        return samples_to_arrays(self.samples)


def load_dataset(cfg):
    cases, deaths, census, mask = load_sources(*cfg.input_paths())
    joined = join_records(cases, deaths, census, mask, cfg.states)
    samples, counts = build_labeled_dataset(joined.records, cfg.intervention)
    return DatasetBundle(joined.records, joined.missing, samples, counts, cfg)


@dataclass
class TuneResult:
    spec: ModelSpec
    cv_score: float
    log: list = field(default_factory=list)


def tune(algorithm, cfg, X, y, seed):
    """Pick hyperparameters for one algorithm on training rows only."""
    entry = cfg.search.get(algorithm, {"strategy": "none"})
    template = ModelSpec(algorithm, seed=seed)
    strategy = entry["strategy"]
    if strategy in ("none", "fixed"):
        spec = template.with_params(**entry.get("params", {})) if strategy == "fixed" else template
        score = cross_val_score(spec, X, y, cfg.folds, seed).mean
        return TuneResult(spec, score, [(dict(entry.get("params", {})), score)])
    if strategy == "elbow":
        ks = range(int(entry.get("k_min", 1)), int(entry.get("k_max", 25)) + 1)
        res = elbow_knn(X, y, ks, cfg.folds, seed, template)
        log = [({"n_neighbors": k}, 1.0 - e) for k, e in zip(res.ks, res.errors)]
        chosen = 1.0 - res.errors[res.ks.index(res.k)]
        return TuneResult(template.with_params(n_neighbors=res.k), chosen, log)
    res = hyperparameter_search(
        search_space(entry), strategy, template, X, y, cfg.folds, seed, int(entry.get("n_draws", 10))
    )
    return TuneResult(res.best_spec, res.best_score, res.log)


def _evaluate_one(args):
    algorithm, cfg, Xtr, ytr, Xte, yte, seed = args
    tuned = tune(algorithm, cfg, Xtr, ytr, seed)
    rep = evaluate_model(tuned.spec, Xtr, ytr, Xte, yte, cfg.threshold, cfg.z)
    rep.search_log = tuned.log
    rep.cv_score = tuned.cv_score
    return rep


def _map(fn, jobs, items):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def evaluate_algorithms(cfg, X, y, seed=None, algorithms=None, jobs=1):
    """Split once, tune and evaluate each algorithm. Returns ``(split, reports)``.

    Reports come back in algorithm-name order whatever ``jobs`` is.
    """
    seed = cfg.seed if seed is None else seed
    algorithms = sorted(algorithms or cfg.algorithms)
    split = train_test_split(len(y), cfg.test_fraction, seed, labels=y, stratified=cfg.stratified)
    tr, te = split.train_indices, split.test_indices
    items = [(a, cfg, X[tr], y[tr], X[te], y[te], seed) for a in algorithms]
    return split, _map(_evaluate_one, jobs, items)


def seed_sweep(cfg, X, y, seeds, algorithms=None, jobs=1):
    """Test accuracy per algorithm for each seed: ``{algorithm: [(seed, acc)]}``."""
    out = {a: [] for a in sorted(algorithms or cfg.algorithms)}
    for seed in seeds:
        _, reps = evaluate_algorithms(cfg, X, y, seed, algorithms, jobs)
        for r in reps:
            out[r.algorithm].append((int(seed), r.test_accuracy))
    return out


def sweep_medians(sweep):
    return {a: float(np.median([acc for _, acc in v])) for a, v in sweep.items()}


# -- run directory


def write_ingest_reports(bundle, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    rows = [
        [r.fips, r.state, r.series.county_name, r.series.dates[0].isoformat(), r.series.dates[-1].isoformat()]
        for r in bundle.records
    ]
    reports.write_text(
        out_dir, "counties.csv", reports.csv_text(["fips", "state", "county_name", "first_date", "last_date"], rows)
    )
    reports.write_text(out_dir, "missing_counties.csv", reports.missing_csv(bundle.missing))


def write_dataset_reports(bundle, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    cfg = bundle.config
    w = lambda name, text: reports.write_text(out_dir, name, text)
    w("dataset.csv", reports.dataset_csv(bundle.samples))
    w("map_data.csv", reports.map_data_csv(county_deltas(bundle.records, cfg.intervention)))
    w("class_counts.csv", reports.class_counts_csv(bundle.counts))
    w("missing_counties.csv", reports.missing_csv(bundle.missing))
    if not bundle.samples:
        raise DataError("every joined county has label NoChange; nothing to describe")
    w("describe.csv", reports.describe_csv(describe_dataset(bundle.samples)))
    if len(bundle.samples) >= 2:
        w("correlations.csv", reports.correlations_csv(feature_correlations(bundle.samples)))
    w("state_summary.csv", reports.state_summary_csv(state_summary(bundle.records, cfg.intervention)))
    try:
        text = reports.group_means_csv(group_means(bundle.samples), group_means(bundle.samples, by_state=True))
    except MissingLabel:
        text = None
    if text is not None:
        w("group_means.csv", text)


def write_eval_reports(split, reps, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    w = lambda name, text: reports.write_text(out_dir, name, text)
    w("accuracies.csv", reports.accuracies_csv(reps))
    w("hyperparameters.csv", reports.hyperparameters_csv(reps))
    w("eval_report.json", reports.eval_report_json(reps, split))
    for r in reps:
        w(f"roc_{r.algorithm}.csv", reports.roc_csv(r.roc_points))
        w(f"search_log_{r.algorithm}.csv", reports.search_log_csv(r.search_log))


def write_sweep_reports(sweep, out_dir):
    reports.write_text(out_dir, "seed_sweep.csv", reports.sweep_csv(sweep))
    reports.write_text(out_dir, "seed_sweep_summary.csv", reports.sweep_summary_csv(sweep_medians(sweep)))


def manifest(cfg, bundle=None, extra=None):
    out = {
        "config": cfg.as_dict(),
        "versions": {
            "maskratio": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "kernel_backend": kernels.BACKEND,
        },
    }
    if bundle is not None:
        out["inputs"] = {
            key: {"path": path, "sha256": reports.sha256_file(path)}
            for key, path in zip(("cases", "deaths", "census", "mask"), cfg.input_paths())
        }
        out["data"] = {
            "joined_counties": len(bundle.records),
            "missing_counties": len(bundle.missing),
            "class_counts": {lab.value: bundle.counts[lab] for lab in Label},
        }
    if extra:
        out.update(extra)
    return out


def run_pipeline(cfg, out_dir, repeats=0, jobs=1):
    """Full run: every report plus ``run_manifest.json``. Returns the bundle and reports."""
    bundle = load_dataset(cfg)
    write_dataset_reports(bundle, out_dir)
    X, _, y = bundle.arrays()
    split, reps = evaluate_algorithms(cfg, X, y, jobs=jobs)
    write_eval_reports(split, reps, out_dir)
    extra = {}
    if repeats:
        seeds = list(range(cfg.seed, cfg.seed + repeats))
        sweep = seed_sweep(cfg, X, y, seeds, jobs=jobs)
        write_sweep_reports(sweep, out_dir)
        extra["seed_sweep"] = {"seeds": seeds}
    reports.write_text(out_dir, "run_manifest.json", reports.json_text(manifest(cfg, bundle, extra)))
    return bundle, reps


# -- synthetic end-to-end check

SYNTH_MIN_ACCURACY = 0.95
CHANCE_BAND = (0.3, 0.7)


@dataclass
class SynthOutcome:
    algorithm: str
    test_accuracy: float
    passed: bool


@dataclass
class SynthCheckResult:
    outcomes: list
    labels_match: bool
    shuffled: bool

    @property
    def passed(self):
        return self.labels_match and all(o.passed for o in self.outcomes)

    def lines(self):
        yield f"label round-trip: {'ok' if self.labels_match else 'MISMATCH'}"
        for o in self.outcomes:
            yield f"{o.algorithm:<20s} test accuracy {o.test_accuracy:.3f}  {'pass' if o.passed else 'FAIL'}"


def run_synth_check(spec, shuffle_labels=False, algorithms=ALGORITHMS, workdir=None, test_fraction=0.2):
    """Generate, write, re-ingest and label a synthetic set, then train every learner.

    With default hyperparameters each learner must reach
    ``SYNTH_MIN_ACCURACY`` on a stratified held-out split. With
    ``shuffle_labels`` the labels are permuted before splitting and every
    learner must land inside ``CHANCE_BAND``.
    """
    records, truth = generate_synthetic_dataset(spec)
    with tempfile.TemporaryDirectory() as tmp:
        paths = write_synthetic_files(records, workdir or tmp, spec)
        cases, deaths, census, mask = load_sources(paths["cases"], paths["deaths"], paths["census"], paths["mask"])
    joined = join_records(cases, deaths, census, mask, spec.states)
    samples, _ = build_labeled_dataset(joined.records, spec.intervention)
    labels_match = len(samples) == len(truth) and all(s.label is truth[s.fips] for s in samples)
    X, _, y = samples_to_arrays(samples)
    if shuffle_labels:
        y = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(2**32,))).permutation(y)
    split = train_test_split(len(y), test_fraction, spec.seed, labels=y)
    tr, te = split.train_indices, split.test_indices
    outcomes = []
    for algo in algorithms:
        rep = evaluate_model(ModelSpec(algo, seed=spec.seed), X[tr], y[tr], X[te], y[te])
        acc = rep.test_accuracy
        ok = CHANCE_BAND[0] <= acc <= CHANCE_BAND[1] if shuffle_labels else acc >= SYNTH_MIN_ACCURACY
        outcomes.append(SynthOutcome(algo, acc, ok))
    return SynthCheckResult(outcomes, labels_match, shuffle_labels)


__all__ = [
    "DatasetBundle",
    "SynthSpec",
    "TuneResult",
    "evaluate_algorithms",
    "load_dataset",
    "manifest",
    "run_pipeline",
    "run_synth_check",
    "seed_sweep",
    "tune",
]
