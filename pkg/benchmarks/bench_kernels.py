"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Prints per-kernel timings for each available backend, then one full tuned
evaluation of all nine learners on 77 synthetic counties per backend.
"""
import argparse
import tempfile
import time

import numpy as np

from maskratio import kernels
from maskratio.config import load_config
from maskratio.learners.trees import _sorted_order
from maskratio.pipeline import evaluate_algorithms, load_dataset
from maskratio.synth import SynthSpec, generate_synthetic_dataset, write_synthetic_files


def _inputs(rng):
    X = np.ascontiguousarray(rng.random((200, 8)))
    feats = np.arange(8, dtype=np.int64)
    order = _sorted_order(X, feats)
    y = rng.integers(0, 2, 200).astype(np.int64)
    g, h = rng.standard_normal(200), rng.uniform(0.05, 0.25, 200)
    Xs = X[:80]
    K = np.ascontiguousarray(np.exp(-((Xs[:, None] - Xs[None]) ** 2).sum(-1)))
    ys = np.where(y[:80] == 1, 1.0, -1.0)
    return {
        "best_class_split": lambda m: m.best_class_split(X, order, y, feats, kernels.GINI, 1),
        "best_gradient_split": lambda m: m.best_gradient_split(X, order, g, h, feats, 1.0),
        "smo": lambda m: m.smo(K, ys, 1.0, 1e-3, 100000),
        "logistic_gd": lambda m: m.logistic_gd(X, y.astype(float), 1000.0, 0.1, 1e-8, 2000, 100),
    }


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _use(module):
    for name in ("best_class_split", "best_gradient_split", "smo", "logistic_gd"):
        setattr(kernels, name, getattr(module, name))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.backends()
    calls = _inputs(np.random.default_rng(0))

    print(f"{'kernel':<22s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for name, call in calls.items():
        times = {b: _best_of(lambda: call(m), args.repeat) for b, m in backends.items()}
        speed = f"{times['python'] / times['cython']:10.1f}x" if "cython" in times else ""
        print(f"{name:<22s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times.values()) + speed)

    spec = SynthSpec(n_counties=77, class_balance=0.39, noise_scale=1.0, seed=11)
    with tempfile.TemporaryDirectory() as tmp:
        paths = write_synthetic_files(generate_synthetic_dataset(spec)[0], tmp, spec)
        cfg = load_config(paths["config"])
        X, _, y = load_dataset(cfg).arrays()
    for b, m in backends.items():
        _use(m)
        t0 = time.perf_counter()
        evaluate_algorithms(cfg, X, y)
        print(f"full tuned evaluation, {b:<7s} {time.perf_counter() - t0:8.2f} s")


if __name__ == "__main__":
    main()
