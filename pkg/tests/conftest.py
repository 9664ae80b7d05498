import os

import numpy as np
import pytest

from maskratio.synth import SynthSpec, generate_synthetic_dataset, write_synthetic_files

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SNAPSHOT_DIR = os.environ.get("MASKRATIO_SNAPSHOT", os.path.join(ROOT, "data", "snapshot"))


def snapshot_config_path():
    """Config of the pinned real-data snapshot, or None if it is not vendored."""
    path = os.path.join(SNAPSHOT_DIR, "config.toml")
    return path if os.path.exists(path) else None


def blobs(n=120, d=8, sep=3.0, seed=0):
    """Two Gaussian clouds in [0, 1]-ish scale, well apart along every axis."""
    rng = np.random.default_rng(seed)
    y = np.r_[np.zeros(n // 2, dtype=np.int64), np.ones(n - n // 2, dtype=np.int64)]
    X = rng.standard_normal((n, d)) + sep * y[:, None]
    X = (X - X.min(0)) / (X.max(0) - X.min(0))
    perm = rng.permutation(n)
    return X[perm], y[perm]


def circles(n=200, seed=0):
    rng = np.random.default_rng(seed)
    t = rng.uniform(0, 2 * np.pi, n)
    y = (np.arange(n) % 2).astype(np.int64)
    r = np.where(y == 1, 0.3, 1.0) + rng.normal(0, 0.03, n)
    return np.column_stack([r * np.cos(t), r * np.sin(t)]), y


@pytest.fixture(scope="session")
def synth_inputs(tmp_path_factory):
    """77 noisy synthetic counties written in the input schemas, plus a config."""
    directory = tmp_path_factory.mktemp("synth_inputs")
    spec = SynthSpec(n_counties=77, class_balance=0.39, noise_scale=1.0, seed=11)
    records, labels = generate_synthetic_dataset(spec)
    paths = write_synthetic_files(records, str(directory), spec)
    return paths, records, labels, spec


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def record_acceptance(number, title, ok, detail=""):
    line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
