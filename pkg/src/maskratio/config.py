"""Run configuration (TOML) with every default spelled out.

Example::

    [inputs]
    cases = "covid_confirmed_usafacts.csv"
    deaths = "covid_deaths_usafacts.csv"
    census = "census.csv"
    mask = "mask-use-by-county.csv"

    [study]
    states = ["CA", "OR", "WA"]
    window_days = 30
    [study.order_dates]
    CA = "2020-06-18"

    [evaluation]
    seed = 0
    algorithms = ["NaiveBayes", "DecisionTree"]

    [search.DecisionTree]
    strategy = "grid"
    space = { max_depth = [2, 3, 4], criterion = ["gini", "entropy"] }

Random-search spaces accept lists (uniform choice), ``{uniform = [lo, hi]}``
and ``{int = [lo, hi]}``. Relative input paths resolve against the config
file's directory.
"""
from __future__ import annotations

import copy
import os
from dataclasses import dataclass, field
from datetime import date

from .dataset import DEFAULT_ORDER_DATES, DEFAULT_WINDOW_DAYS, InterventionSpec
from .errors import ConfigError
from .evaluation import Choice, IntUniform, Uniform
from .learners import ALGORITHMS, DEFAULT_PARAMS

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


DEFAULT_SEARCH = {
    "NaiveBayes": {"strategy": "none"},
    "LogisticRegression": {"strategy": "grid", "space": {"C": [0.1, 1.0, 10.0, 100.0, 1000.0]}},
    "KNN": {"strategy": "elbow", "k_min": 1, "k_max": 25},
    "DecisionTree": {
        "strategy": "grid",
        "space": {"max_depth": [2, 3, 4, 5, 6], "criterion": ["gini", "entropy"], "min_samples_split": [2]},
    },
    "RandomForest": {
        "strategy": "grid",
        "space": {
            "max_depth": [3, 5, 7],
            "max_features": [2, 3, 4],
            "min_samples_split": [2],
            "n_estimators": [10, 30],
        },
    },
    "ExtraTrees": {
        "strategy": "grid",
        "space": {
            "criterion": ["gini", "entropy"],
            "min_samples_split": [2],
            "min_samples_leaf": [1, 2],
            "n_estimators": [200],
        },
    },
    "GradientBoosting": {
        "strategy": "random",
        "n_draws": 10,
        "space": {
            "colsample_bytree": {"uniform": [0.5, 1.0]},
            "gamma": {"uniform": [0.0, 1.0]},
            "learning_rate": {"uniform": [0.01, 0.3]},
            "max_depth": {"int": [2, 6]},
            "n_estimators": {"int": [50, 150]},
            "subsample": {"uniform": [0.5, 1.0]},
        },
    },
    "SvmRbf": {"strategy": "grid", "space": {"C": [0.1, 1.0, 10.0]}},
    "Mlp": {"strategy": "grid", "space": {"hidden": [16, 32], "learning_rate": [0.01, 0.05]}},
}

STRATEGIES = ("none", "grid", "random", "elbow", "fixed")


@dataclass
class Config:
    cases: str | None = None
    deaths: str | None = None
    census: str | None = None
    mask: str | None = None
    states: tuple = ("CA", "OR", "WA")
    order_dates: dict = field(default_factory=lambda: dict(DEFAULT_ORDER_DATES))
    window_days: int = DEFAULT_WINDOW_DAYS
    seed: int = 0
    test_fraction: float = 0.2
    folds: int = 5
    z: float = 1.96
    threshold: float = 0.5
    stratified: bool = True
    algorithms: tuple = ALGORITHMS
    search: dict = field(default_factory=lambda: copy.deepcopy(DEFAULT_SEARCH))

    @property
    def intervention(self):
        return InterventionSpec(dict(self.order_dates), self.window_days)

    def input_paths(self):
        missing = [k for k in ("cases", "deaths", "census", "mask") if not getattr(self, k)]
        if missing:
            raise ConfigError(f"config does not name input file(s): {', '.join(missing)}")
        return self.cases, self.deaths, self.census, self.mask

    def as_dict(self):
        """Effective configuration, JSON-serialisable, for the run manifest."""
        return {
            "inputs": {"cases": self.cases, "deaths": self.deaths, "census": self.census, "mask": self.mask},
            "study": {
                "states": list(self.states),
                "window_days": self.window_days,
                "order_dates": {k: v.isoformat() for k, v in sorted(self.order_dates.items())},
            },
            "evaluation": {
                "seed": self.seed,
                "test_fraction": self.test_fraction,
                "folds": self.folds,
                "z": self.z,
                "threshold": self.threshold,
                "stratified": self.stratified,
                "algorithms": list(self.algorithms),
            },
            "search": {a: self.search[a] for a in self.algorithms},
            "model_defaults": {a: DEFAULT_PARAMS[a] for a in self.algorithms},
        }


def _date(value, key):
    if isinstance(value, date):
        return value
    try:
        return date.fromisoformat(str(value))
    except ValueError:
        raise ConfigError(f"bad date for {key}: {value!r}") from None


def search_space(entry):
    """Turn a config ``space`` table into distributions usable by the search."""
    out = {}
    for name, spec in entry.get("space", {}).items():
        if isinstance(spec, list):
            out[name] = list(spec) if entry["strategy"] == "grid" else Choice(tuple(spec))
        elif isinstance(spec, dict) and set(spec) == {"uniform"}:
            out[name] = Uniform(*map(float, spec["uniform"]))
        elif isinstance(spec, dict) and set(spec) == {"int"}:
            out[name] = IntUniform(*map(int, spec["int"]))
        else:
            raise ConfigError(f"cannot read search space entry {name} = {spec!r}")
    return out


def _validate_search(search):
    for algo, entry in search.items():
        if algo not in ALGORITHMS:
            raise ConfigError(f"search section for unknown algorithm {algo!r}")
        strategy = entry.get("strategy")
        if strategy not in STRATEGIES:
            raise ConfigError(f"{algo}: strategy must be one of {STRATEGIES}, got {strategy!r}")
        if strategy in ("grid", "random"):
            if not entry.get("space"):
                raise ConfigError(f"{algo}: {strategy} search needs a non-empty space")
            search_space(entry)
        if strategy == "grid" and any(not isinstance(v, list) for v in entry["space"].values()):
            raise ConfigError(f"{algo}: grid search values must be lists")
        if strategy == "fixed":
            unknown = set(entry.get("params", {})) - set(DEFAULT_PARAMS[algo])
            if unknown:
                raise ConfigError(f"{algo}: unknown fixed params {sorted(unknown)}")


def config_from_dict(raw, base_dir="."):
    cfg = Config()
    inputs = raw.get("inputs", {})
    for key in ("cases", "deaths", "census", "mask"):
        if key in inputs:
            path = str(inputs[key])
            setattr(cfg, key, path if os.path.isabs(path) else os.path.normpath(os.path.join(base_dir, path)))
    study = raw.get("study", {})
    if "states" in study:
        cfg.states = tuple(s.upper() for s in study["states"])
    if "window_days" in study:
        cfg.window_days = int(study["window_days"])
    if "order_dates" in study:
        cfg.order_dates = {k.upper(): _date(v, f"order_dates.{k}") for k, v in study["order_dates"].items()}
    ev = raw.get("evaluation", {})
    for key, conv in (
        ("seed", int), ("test_fraction", float), ("folds", int),
        ("z", float), ("threshold", float), ("stratified", bool),
    ):
        if key in ev:
            setattr(cfg, key, conv(ev[key]))
    if "algorithms" in ev:
        cfg.algorithms = tuple(ev["algorithms"])
    for name, entry in raw.get("search", {}).items():
        cfg.search[name] = {**cfg.search.get(name, {}), **entry}
        if "space" in entry:
            cfg.search[name]["space"] = entry["space"]
    validate(cfg)
    return cfg


def validate(cfg):
    unknown = [a for a in cfg.algorithms if a not in ALGORITHMS]
    if unknown:
        raise ConfigError(f"unknown algorithm(s) {unknown}; choose from {', '.join(ALGORITHMS)}")
    if not cfg.algorithms:
        raise ConfigError("no algorithms selected")
    if cfg.window_days < 1:
        raise ConfigError("window_days must be >= 1")
    if not 0 < cfg.test_fraction < 1:
        raise ConfigError("test_fraction must lie in (0, 1)")
    if cfg.folds < 2:
        raise ConfigError("folds must be >= 2")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    missing_dates = [s for s in cfg.states if s not in cfg.order_dates]
    if missing_dates:
        raise ConfigError(f"no order date for state(s) {missing_dates}")
    _validate_search(cfg.search)


def load_config(path):
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(raw, os.path.dirname(os.path.abspath(path)))
